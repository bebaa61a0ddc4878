#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nira/errors.hpp"
#include "nira/inr.hpp"

// inr-weights-v1: one record per line, whitespace separated.
//
//   inr-weights-v1
//   activation sine|relu|elu
//   input_dim 3
//   output_dim 1
//   domain_lower x y z
//   domain_upper x y z
//   value_scale s
//   value_offset o
//   layers K
//   layer ROWS COLS        (K times, each followed by ROWS weight lines and one bias line)
//   w_r0 ... w_r(COLS-1)
//   bias b_0 ... b_(ROWS-1)
//   end

namespace nira {

inline constexpr std::string_view weights_schema = "inr-weights-v1";

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_network(std::ostream& out, const MlpNetwork& net)
{
    net.validate();
    out << weights_schema << '\n';
    out << "activation " << to_string(net.activation) << '\n';
    out << "input_dim " << net.input_dim << '\n';
    out << "output_dim " << net.output_dim << '\n';
    out << "domain_lower";
    for (std::size_t d = 0; d < net.input_dim; ++d) out << ' ' << format_double(net.domain_lower[d]);
    out << "\ndomain_upper";
    for (std::size_t d = 0; d < net.input_dim; ++d) out << ' ' << format_double(net.domain_upper[d]);
    out << "\nvalue_scale " << format_double(net.value_scale) << '\n';
    out << "value_offset " << format_double(net.value_offset) << '\n';
    out << "layers " << net.layers.size() << '\n';
    for (const auto& l : net.layers) {
        out << "layer " << l.rows << ' ' << l.cols << '\n';
        for (std::size_t r = 0; r < l.rows; ++r) {
            for (std::size_t c = 0; c < l.cols; ++c) {
                if (c) out << ' ';
                out << format_double(l.w(r, c));
            }
            out << '\n';
        }
        out << "bias";
        for (double b : l.bias) out << ' ' << format_double(b);
        out << '\n';
    }
    out << "end\n";
}

inline void save_network(const MlpNetwork& net, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write weight file '" + path + "'");
    write_network(out, net);
    if (!out) throw IoError("write failed for '" + path + "'");
}

namespace detail {

class WeightReader {
public:
    explicit WeightReader(std::istream& in) : in_(in) {}

    // Reads the next non-empty line and splits it into tokens.
    std::vector<std::string> next(std::string_view what)
    {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            std::istringstream ss(line);
            std::vector<std::string> tok;
            for (std::string t; ss >> t;) tok.push_back(std::move(t));
            if (!tok.empty()) return tok;
        }
        fail(std::string("unexpected end of file, expected ") + std::string(what));
    }

    std::vector<std::string> keyed(std::string_view key, std::size_t n_values)
    {
        auto tok = next(key);
        if (tok[0] != key) fail("expected '" + std::string(key) + "', found '" + tok[0] + "'");
        if (tok.size() != n_values + 1)
            fail("field '" + std::string(key) + "' expects " + std::to_string(n_values) + " value(s), found " +
                 std::to_string(tok.size() - 1));
        return tok;
    }

    double number(const std::string& s, std::string_view field)
    {
        double v = 0.0;
        const char* end = s.data() + s.size();
        auto [p, ec] = std::from_chars(s.data(), end, v);
        if (ec != std::errc() || p != end || !std::isfinite(v))
            fail("field '" + std::string(field) + "': bad number '" + s + "'");
        return v;
    }

    std::size_t count(const std::string& s, std::string_view field)
    {
        std::size_t v = 0;
        const char* end = s.data() + s.size();
        auto [p, ec] = std::from_chars(s.data(), end, v);
        if (ec != std::errc() || p != end) fail("field '" + std::string(field) + "': bad count '" + s + "'");
        return v;
    }

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ParseError("weights line " + std::to_string(line_no_) + ": " + msg);
    }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

} // namespace detail

inline MlpNetwork read_network(std::istream& in)
{
    detail::WeightReader rd(in);
    MlpNetwork net;
    auto head = rd.next("schema");
    if (head.size() != 1 || head[0] != weights_schema) rd.fail("expected schema '" + std::string(weights_schema) + "'");

    auto act = rd.keyed("activation", 1);
    try {
        net.activation = parse_activation(act[1]);
    } catch (const ParseError& e) {
        rd.fail(std::string("field 'activation': ") + e.what());
    }
    net.input_dim = rd.count(rd.keyed("input_dim", 1)[1], "input_dim");
    if (net.input_dim != 2 && net.input_dim != 3) rd.fail("field 'input_dim' must be 2 or 3");
    net.output_dim = rd.count(rd.keyed("output_dim", 1)[1], "output_dim");
    auto lo = rd.keyed("domain_lower", net.input_dim);
    for (std::size_t d = 0; d < net.input_dim; ++d) net.domain_lower[d] = rd.number(lo[d + 1], "domain_lower");
    auto hi = rd.keyed("domain_upper", net.input_dim);
    for (std::size_t d = 0; d < net.input_dim; ++d) net.domain_upper[d] = rd.number(hi[d + 1], "domain_upper");
    if (net.input_dim == 2) {
        net.domain_lower[2] = 0.0;
        net.domain_upper[2] = 0.0;
    }
    net.value_scale = rd.number(rd.keyed("value_scale", 1)[1], "value_scale");
    net.value_offset = rd.number(rd.keyed("value_offset", 1)[1], "value_offset");
    const std::size_t n_layers = rd.count(rd.keyed("layers", 1)[1], "layers");
    if (n_layers == 0 || n_layers > 4096) rd.fail("field 'layers' out of range");
    for (std::size_t li = 0; li < n_layers; ++li) {
        auto hdr = rd.keyed("layer", 2);
        LinearLayer l;
        l.rows = rd.count(hdr[1], "layer rows");
        l.cols = rd.count(hdr[2], "layer cols");
        if (l.rows == 0 || l.cols == 0 || l.rows > 65536 || l.cols > 65536) rd.fail("layer dimensions out of range");
        l.weights.reserve(l.rows * l.cols);
        for (std::size_t r = 0; r < l.rows; ++r) {
            auto row = rd.next("weight row");
            if (row.size() != l.cols)
                rd.fail("weight row of layer " + std::to_string(li) + " has " + std::to_string(row.size()) +
                        " values, expected " + std::to_string(l.cols));
            for (const auto& t : row) l.weights.push_back(rd.number(t, "weights"));
        }
        auto b = rd.keyed("bias", l.rows);
        for (std::size_t r = 0; r < l.rows; ++r) l.bias.push_back(rd.number(b[r + 1], "bias"));
        net.layers.push_back(std::move(l));
    }
    auto tail = rd.next("end");
    if (tail.size() != 1 || tail[0] != "end") rd.fail("expected 'end'");
    net.validate();
    return net;
}

inline MlpNetwork load_network(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open weight file '" + path + "'");
    return read_network(in);
}

} // namespace nira
