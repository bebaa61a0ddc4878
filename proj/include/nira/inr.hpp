#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "nira/activation.hpp"
#include "nira/errors.hpp"
#include "nira/geometry.hpp"

namespace nira {

struct LinearLayer {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> weights; // row-major rows x cols
    std::vector<double> bias;

    double w(std::size_t r, std::size_t c) const { return weights[r * cols + c]; }

    friend bool operator==(const LinearLayer&, const LinearLayer&) = default;
};

// f(x) = value_scale * L_k(s(L_{k-1}(... s(L_1(x))))) + value_offset
struct MlpNetwork {
    std::vector<LinearLayer> layers;
    Activation activation = Activation::Sine;
    std::size_t input_dim = 3;
    std::size_t output_dim = 1;
    Vec3 domain_lower{-1.0, -1.0, -1.0};
    Vec3 domain_upper{1.0, 1.0, 1.0};
    double value_scale = 1.0;
    double value_offset = 0.0;

    std::size_t max_width() const
    {
        std::size_t w = input_dim;
        for (const auto& l : layers) w = std::max(w, l.rows);
        return w;
    }

    Box domain() const { return Box{domain_lower, domain_upper, input_dim}; }

    void validate() const
    {
        if (input_dim != 2 && input_dim != 3)
            throw ValidationError("input_dim must be 2 or 3, got " + std::to_string(input_dim));
        if (output_dim != 1) throw ValidationError("output_dim must be 1, got " + std::to_string(output_dim));
        if (layers.empty()) throw ValidationError("network has no layers");
        std::size_t prev = input_dim;
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const auto& l = layers[i];
            const std::string tag = "layer " + std::to_string(i) + ": ";
            if (l.cols != prev)
                throw ValidationError(tag + "cols " + std::to_string(l.cols) + " does not match previous width " +
                                      std::to_string(prev));
            if (l.rows == 0) throw ValidationError(tag + "zero rows");
            if (l.weights.size() != l.rows * l.cols) throw ValidationError(tag + "weight count mismatch");
            if (l.bias.size() != l.rows) throw ValidationError(tag + "bias length mismatch");
            for (double v : l.weights)
                if (!std::isfinite(v)) throw ValidationError(tag + "non-finite weight");
            for (double v : l.bias)
                if (!std::isfinite(v)) throw ValidationError(tag + "non-finite bias");
            prev = l.rows;
        }
        if (prev != output_dim)
            throw ValidationError("last layer rows " + std::to_string(prev) + " != output_dim");
        for (std::size_t d = 0; d < input_dim; ++d)
            if (!(domain_lower[d] < domain_upper[d]))
                throw ValidationError("domain_lower must be below domain_upper on axis " + std::to_string(d));
        if (!std::isfinite(value_scale) || !std::isfinite(value_offset))
            throw ValidationError("non-finite value_scale/value_offset");
    }

    friend bool operator==(const MlpNetwork&, const MlpNetwork&) = default;
};

namespace detail {

// Evaluates B points laid out structure-of-arrays: pts[d * B + p]. Returns raw network outputs.
// Every per-point operation sequence is independent of B, so B = 1 and B = 16 agree bitwise.
template <std::size_t B>
void forward_block(const MlpNetwork& net, const double* pts, double* raw, std::vector<double>& scratch)
{
    const std::size_t w = net.max_width();
    scratch.resize(2 * w * B);
    double* in = scratch.data();
    double* out = scratch.data() + w * B;
    std::copy(pts, pts + net.input_dim * B, in);
    const std::size_t n_layers = net.layers.size();
    for (std::size_t li = 0; li < n_layers; ++li) {
        const LinearLayer& l = net.layers[li];
        for (std::size_t r = 0; r < l.rows; ++r) {
            double acc[B];
            const double b = l.bias[r];
            for (std::size_t p = 0; p < B; ++p) acc[p] = b;
            const double* wr = &l.weights[r * l.cols];
            for (std::size_t c = 0; c < l.cols; ++c) {
                const double wc = wr[c];
                const double* x = in + c * B;
                for (std::size_t p = 0; p < B; ++p) acc[p] += wc * x[p];
            }
            std::copy(acc, acc + B, out + r * B);
        }
        if (li + 1 < n_layers) activate_inplace(net.activation, out, l.rows * B);
        std::swap(in, out);
    }
    std::copy(in, in + B, raw);
}

} // namespace detail

inline double forward(const MlpNetwork& net, std::span<const double> point)
{
    if (point.size() != net.input_dim)
        throw ContractError("forward: point has dimension " + std::to_string(point.size()) + ", network expects " +
                            std::to_string(net.input_dim));
    thread_local std::vector<double> scratch;
    double raw = 0.0;
    detail::forward_block<1>(net, point.data(), &raw, scratch);
    return net.value_scale * raw + net.value_offset;
}

inline constexpr std::size_t forward_block_size = 32;

// points: n * input_dim values, point-major. out: n values.
inline void forward_batch(const MlpNetwork& net, std::span<const double> points, std::span<double> out)
{
    const std::size_t dim = net.input_dim;
    if (points.size() % dim != 0 || points.size() / dim != out.size())
        throw ContractError("forward_batch: buffer sizes do not match input_dim");
    constexpr std::size_t B = forward_block_size;
    thread_local std::vector<double> scratch;
    double soa[3 * B];
    double raw[B];
    const std::size_t n = out.size();
    for (std::size_t start = 0; start < n; start += B) {
        const std::size_t cnt = std::min(B, n - start);
        for (std::size_t p = 0; p < B; ++p) {
            const std::size_t src = start + std::min(p, cnt - 1);
            for (std::size_t d = 0; d < dim; ++d) soa[d * B + p] = points[src * dim + d];
        }
        detail::forward_block<B>(net, soa, raw, scratch);
        for (std::size_t p = 0; p < cnt; ++p) out[start + p] = net.value_scale * raw[p] + net.value_offset;
    }
}

inline std::vector<double> forward_batch(const MlpNetwork& net, std::span<const double> points)
{
    std::vector<double> out(points.size() / net.input_dim);
    forward_batch(net, points, out);
    return out;
}

// Coordinate of lattice index i out of n_cells cells on [lo, hi]; both ends are exact.
inline double lattice_coord(double lo, double hi, std::int64_t i, std::int64_t n_cells)
{
    return std::lerp(lo, hi, static_cast<double>(i) / static_cast<double>(n_cells));
}

struct ScalarVolume {
    std::array<std::size_t, 3> dims{0, 0, 0};
    std::vector<double> data; // x fastest

    std::size_t size() const { return dims[0] * dims[1] * dims[2]; }
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return i + dims[0] * (j + dims[1] * k); }
    double at(std::size_t i, std::size_t j, std::size_t k) const { return data[index(i, j, k)]; }

    friend bool operator==(const ScalarVolume&, const ScalarVolume&) = default;
};

// World position of grid vertex (i, j, k) of a volume spanning the network domain inclusively.
inline Vec3 grid_point(const MlpNetwork& net, const std::array<std::size_t, 3>& dims, std::size_t i, std::size_t j,
                       std::size_t k)
{
    const std::array<std::size_t, 3> idx{i, j, k};
    Vec3 p{};
    for (std::size_t d = 0; d < net.input_dim; ++d)
        p[d] = lattice_coord(net.domain_lower[d], net.domain_upper[d], static_cast<std::int64_t>(idx[d]),
                             static_cast<std::int64_t>(dims[d] - 1));
    return p;
}

inline ScalarVolume dense_reconstruct(const MlpNetwork& net, const std::array<std::size_t, 3>& dims,
                                      unsigned threads = 1)
{
    const std::size_t nz_needed = net.input_dim == 3 ? 2 : 1;
    if (dims[0] < 2 || dims[1] < 2 || dims[2] < nz_needed)
        throw ContractError("dense_reconstruct: resolution must be at least 2 per axis");
    ScalarVolume vol;
    vol.dims = dims;
    vol.data.resize(vol.size());
    const std::size_t dim = net.input_dim;
    auto slab = [&](std::size_t k0, std::size_t k1) {
        std::vector<double> pts(dims[0] * dims[1] * dim);
        for (std::size_t k = k0; k < k1; ++k) {
            for (std::size_t j = 0; j < dims[1]; ++j)
                for (std::size_t i = 0; i < dims[0]; ++i) {
                    const Vec3 p = grid_point(net, dims, i, j, k);
                    for (std::size_t d = 0; d < dim; ++d) pts[(i + dims[0] * j) * dim + d] = p[d];
                }
            forward_batch(net, pts, std::span<double>(vol.data.data() + k * dims[0] * dims[1], dims[0] * dims[1]));
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(dims[2])));
    if (threads == 1) {
        slab(0, dims[2]);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t k0 = dims[2] * t / threads, k1 = dims[2] * (t + 1) / threads;
            pool.emplace_back(slab, k0, k1);
        }
    }
    return vol;
}

inline ScalarVolume read_volume_f32(const std::string& path, const std::array<std::size_t, 3>& dims)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open volume file '" + path + "'");
    const std::size_t n = dims[0] * dims[1] * dims[2];
    if (n == 0) throw ValidationError("volume dimensions must be positive");
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes != n * 4)
        throw ValidationError("volume file '" + path + "' has " + std::to_string(bytes) + " bytes, expected " +
                              std::to_string(n * 4));
    in.seekg(0);
    std::vector<unsigned char> buf(bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    ScalarVolume vol;
    vol.dims = dims;
    vol.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t u = std::uint32_t(buf[4 * i]) | std::uint32_t(buf[4 * i + 1]) << 8 |
                                std::uint32_t(buf[4 * i + 2]) << 16 | std::uint32_t(buf[4 * i + 3]) << 24;
        const float f = std::bit_cast<float>(u);
        if (!std::isfinite(f)) throw ValidationError("volume file '" + path + "' contains non-finite values");
        vol.data[i] = f;
    }
    return vol;
}

inline void write_volume_f32(const ScalarVolume& vol, const std::string& path)
{
    std::vector<unsigned char> buf(vol.data.size() * 4);
    for (std::size_t i = 0; i < vol.data.size(); ++i) {
        const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(vol.data[i]));
        for (int b = 0; b < 4; ++b) buf[4 * i + b] = static_cast<unsigned char>(u >> (8 * b));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write volume file '" + path + "'");
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace nira
