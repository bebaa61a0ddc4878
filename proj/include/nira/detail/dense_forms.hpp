#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nira/geometry.hpp"
#include "nira/inr.hpp"

namespace nira::detail {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Whole-network propagation with every neuron's form stored as one row of a dense matrix; column s
// is symbol s. Symbols introduced by activation layer l for neuron i live at column S_l + i, which
// preserves the id order of the per-form implementation.
struct DenseForms {
    RowMat coeff;
    Eigen::VectorXd center;
    Eigen::VectorXd err;
    Eigen::Index rows = 0;
    Eigen::Index symbols = 0;
};

struct DenseWorkspace {
    DenseForms a, b;
    std::vector<std::pair<double, Eigen::Index>> order;
};

inline Eigen::Index symbol_capacity(const MlpNetwork& net, std::size_t generators)
{
    std::size_t s = generators;
    for (std::size_t li = 0; li + 1 < net.layers.size(); ++li) s += net.layers[li].rows;
    return static_cast<Eigen::Index>(s);
}

// Loads the region as forms; `scale` multiplies each generator (1 for affine, 1/sqrt 3 for probabilistic).
inline void load_region(DenseForms& f, const AffineRegion& region, Eigen::Index capacity, double scale)
{
    const auto dim = static_cast<Eigen::Index>(region.dim);
    f.coeff.resize(std::max<Eigen::Index>(dim, f.coeff.rows()), std::max(capacity, f.coeff.cols()));
    f.center.resize(std::max(dim, f.center.size()));
    f.err.resize(std::max(dim, f.err.size()));
    f.rows = dim;
    f.symbols = static_cast<Eigen::Index>(region.num_generators);
    for (Eigen::Index d = 0; d < dim; ++d) {
        f.center(d) = region.center[static_cast<std::size_t>(d)];
        f.err(d) = 0.0;
        for (Eigen::Index g = 0; g < f.symbols; ++g)
            f.coeff(d, g) = region.generators[static_cast<std::size_t>(g)][static_cast<std::size_t>(d)] * scale;
    }
}

// out = layer(in); the symbol count is unchanged.
inline void dense_linear(const DenseForms& in, const LinearLayer& layer, DenseForms& out, bool track_err)
{
    const auto rows = static_cast<Eigen::Index>(layer.rows), cols = static_cast<Eigen::Index>(layer.cols);
    const Eigen::Map<const RowMat> W(layer.weights.data(), rows, cols);
    const Eigen::Index cap = std::max(in.coeff.cols(), out.coeff.cols());
    if (out.coeff.rows() < rows || out.coeff.cols() < cap) out.coeff.resize(std::max(rows, out.coeff.rows()), cap);
    if (out.center.size() < rows) {
        out.center.resize(rows);
        out.err.resize(rows);
    }
    out.rows = rows;
    out.symbols = in.symbols;
    out.coeff.topLeftCorner(rows, in.symbols).noalias() = W * in.coeff.topLeftCorner(cols, in.symbols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        double c0 = layer.bias[static_cast<std::size_t>(r)];
        double e = 0.0;
        for (Eigen::Index c = 0; c < cols; ++c) {
            c0 += W(r, c) * in.center(c);
            if (track_err) e += std::fabs(W(r, c)) * in.err(c);
        }
        out.center(r) = c0;
        out.err(r) = e;
    }
}

// Reserves one fresh column per neuron (zero-initialized) and returns the first one.
inline Eigen::Index open_fresh_columns(DenseForms& f)
{
    const Eigen::Index first = f.symbols;
    f.coeff.block(0, first, f.rows, f.rows).setZero();
    f.symbols += f.rows;
    return first;
}

// Moves the n smallest-magnitude nonzero coefficients of row r into err; ties go to the lower column.
inline void dense_fold_smallest(DenseForms& f, Eigen::Index r, std::size_t n, DenseWorkspace& ws)
{
    ws.order.clear();
    for (Eigen::Index s = 0; s < f.symbols; ++s)
        if (f.coeff(r, s) != 0.0) ws.order.emplace_back(std::fabs(f.coeff(r, s)), s);
    n = std::min(n, ws.order.size());
    if (n == 0) return;
    std::nth_element(ws.order.begin(), ws.order.begin() + static_cast<std::ptrdiff_t>(n - 1), ws.order.end());
    std::sort(ws.order.begin(), ws.order.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t i = 0; i < n; ++i) {
        f.err(r) += ws.order[i].first;
        f.coeff(r, ws.order[i].second) = 0.0;
    }
}

inline std::size_t dense_nonzeros(const DenseForms& f, Eigen::Index r)
{
    std::size_t n = 0;
    for (Eigen::Index s = 0; s < f.symbols; ++s) n += f.coeff(r, s) != 0.0;
    return n;
}

} // namespace nira::detail
