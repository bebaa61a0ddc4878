#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "nira/errors.hpp"
#include "nira/inr.hpp"

namespace nira {

// One coefficient attached to a noise symbol (affine) or random variable (probabilistic).
struct Term {
    std::uint32_t id = 0;
    double coeff = 0.0;

    friend bool operator==(const Term&, const Term&) = default;
};

namespace detail {

// Workspace for pushing sparse coefficient lists through a dense layer.
struct LinearScratch {
    std::vector<double> in;
    std::vector<double> out;
    std::vector<std::int32_t> slot;
    std::vector<std::uint32_t> ids;
};

// out_terms[r] = sum_c W[r][c] * in_terms[c], with ids sorted ascending and exact zeros dropped.
// `get_terms(c)` returns the term list of input c.
template <class GetTerms>
void linear_terms(const LinearLayer& layer, std::uint32_t symbol_count, GetTerms&& get_terms,
                  std::vector<std::vector<Term>>& out_terms, LinearScratch& ws)
{
    ws.slot.assign(symbol_count, -1);
    ws.ids.clear();
    for (std::size_t c = 0; c < layer.cols; ++c)
        for (const Term& t : get_terms(c))
            if (ws.slot[t.id] < 0) {
                ws.slot[t.id] = 0;
                ws.ids.push_back(t.id);
            }
    // Dense columns ordered by symbol id keep the output lists sorted.
    std::size_t s_count = 0;
    for (std::uint32_t id = 0; id < symbol_count && s_count < ws.ids.size(); ++id)
        if (ws.slot[id] == 0) ws.ids[s_count++] = id;
    for (std::size_t s = 0; s < s_count; ++s) ws.slot[ws.ids[s]] = static_cast<std::int32_t>(s);

    const std::size_t S = s_count;
    ws.in.assign(layer.cols * S, 0.0);
    for (std::size_t c = 0; c < layer.cols; ++c)
        for (const Term& t : get_terms(c)) ws.in[c * S + static_cast<std::size_t>(ws.slot[t.id])] = t.coeff;
    ws.out.resize(layer.rows * S);
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMajor> W(layer.weights.data(), static_cast<Eigen::Index>(layer.rows),
                                       static_cast<Eigen::Index>(layer.cols));
    const Eigen::Map<const RowMajor> X(ws.in.data(), static_cast<Eigen::Index>(layer.cols), static_cast<Eigen::Index>(S));
    Eigen::Map<RowMajor> Y(ws.out.data(), static_cast<Eigen::Index>(layer.rows), static_cast<Eigen::Index>(S));
    Y.noalias() = W * X;
    out_terms.resize(layer.rows);
    for (std::size_t r = 0; r < layer.rows; ++r) {
        auto& terms = out_terms[r];
        terms.clear();
        const double* o = ws.out.data() + r * S;
        for (std::size_t s = 0; s < S; ++s)
            if (o[s] != 0.0) terms.push_back(Term{ws.ids[s], o[s]});
    }
}

} // namespace detail
} // namespace nira
