#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nira/activation.hpp"
#include "nira/detail/random.hpp"
#include "nira/errors.hpp"
#include "nira/inr.hpp"

namespace nira {

struct TrainConfig {
    std::size_t width = 32;
    std::size_t depth = 8; // number of linear layers
    Activation activation = Activation::Sine;
    std::size_t epochs = 200;
    double learning_rate = 1e-3;
    double final_lr_fraction = 0.05; // cosine annealing down to learning_rate * this
    std::size_t batch_size = 512;
    std::uint64_t seed = 1;
    double omega0 = 30.0; // first-layer frequency scale, sine only
    Vec3 domain_lower{-1.0, -1.0, -1.0};
    Vec3 domain_upper{1.0, 1.0, 1.0};
};

struct TrainReport {
    std::size_t epochs_run = 0;
    double final_loss = 0.0; // mean squared error in normalized units
    std::vector<double> epoch_loss;
};

namespace detail {

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n)
{
    return static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n));
}

using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

inline Mat activate_mat(Activation a, const Mat& z)
{
    switch (a) {
    case Activation::Sine: return z.array().sin().matrix();
    case Activation::ReLU: return z.cwiseMax(0.0);
    case Activation::ELU: return (z.array() > 0.0).select(z.array(), z.array().exp() - 1.0).matrix();
    }
    return z;
}

inline Mat activate_derivative_mat(Activation a, const Mat& z)
{
    switch (a) {
    case Activation::Sine: return z.array().cos().matrix();
    case Activation::ReLU: return (z.array() > 0.0).select(Mat::Ones(z.rows(), z.cols()), 0.0);
    case Activation::ELU: return (z.array() > 0.0).select(Mat::Ones(z.rows(), z.cols()).array(), z.array().exp()).matrix();
    }
    return Mat::Ones(z.rows(), z.cols());
}

struct AdamState {
    Mat m, v;
    RowVec mb, vb;
};

} // namespace detail

// Fits an MLP to the volume samples by mini-batch Adam on mean squared error.
// Coordinates are normalized to [-1, 1] and values min-max normalized to [-1, 1] during training;
// both maps (and the sine frequency scale) are folded into the exported network.
inline MlpNetwork train(const ScalarVolume& vol, const TrainConfig& cfg, TrainReport* report = nullptr,
                        const std::function<void(std::size_t, double)>& on_epoch = {})
{
    using detail::Mat;
    using detail::RowVec;
    if (cfg.width < 2) throw ContractError("train: width must be at least 2");
    if (cfg.depth < 2) throw ContractError("train: depth must be at least 2");
    if (cfg.batch_size == 0) throw ContractError("train: batch size must be positive");
    if (!(cfg.learning_rate > 0.0)) throw ContractError("train: learning rate must be positive");
    if (!(cfg.final_lr_fraction > 0.0 && cfg.final_lr_fraction <= 1.0))
        throw ContractError("train: final learning-rate fraction must be in (0, 1]");
    if (vol.data.size() != vol.size() || vol.size() == 0) throw ContractError("train: volume data/dims mismatch");
    for (double v : vol.data)
        if (!std::isfinite(v)) throw ContractError("train: volume contains non-finite values");
    const std::size_t in_dim = vol.dims[2] > 1 ? 3 : 2;
    for (std::size_t d = 0; d < in_dim; ++d) {
        if (vol.dims[d] < 2) throw ContractError("train: each volume axis needs at least 2 samples");
        if (!(cfg.domain_lower[d] < cfg.domain_upper[d])) throw ContractError("train: empty domain");
    }

    const auto [mn_it, mx_it] = std::minmax_element(vol.data.begin(), vol.data.end());
    const double vmin = *mn_it, vmax = *mx_it;
    const bool constant = vmin == vmax;
    const double half_range = 0.5 * (vmax - vmin);
    const double mid = 0.5 * (vmax + vmin);

    const std::size_t n = vol.size();
    Mat X(n, in_dim);
    Eigen::VectorXd Y(n);
    for (std::size_t k = 0; k < vol.dims[2]; ++k)
        for (std::size_t j = 0; j < vol.dims[1]; ++j)
            for (std::size_t i = 0; i < vol.dims[0]; ++i) {
                const std::size_t idx = vol.index(i, j, k);
                const std::size_t ijk[3] = {i, j, k};
                for (std::size_t d = 0; d < in_dim; ++d)
                    X(idx, d) = lattice_coord(-1.0, 1.0, static_cast<std::int64_t>(ijk[d]),
                                              static_cast<std::int64_t>(vol.dims[d] - 1));
                Y(idx) = constant ? 0.0 : (vol.data[idx] - mid) / half_range;
            }

    const bool sine = cfg.activation == Activation::Sine;
    const double w0 = sine ? cfg.omega0 : 1.0;
    std::mt19937_64 rng(cfg.seed);
    std::vector<Mat> W(cfg.depth);
    std::vector<RowVec> b(cfg.depth);
    for (std::size_t l = 0; l < cfg.depth; ++l) {
        const std::size_t fan_in = l == 0 ? in_dim : cfg.width;
        const std::size_t fan_out = l + 1 == cfg.depth ? 1 : cfg.width;
        double wb;
        if (sine)
            wb = l == 0 ? 1.0 / static_cast<double>(fan_in) : std::sqrt(6.0 / static_cast<double>(fan_in));
        else
            wb = std::sqrt(6.0 / static_cast<double>(fan_in));
        const double bb = 1.0 / std::sqrt(static_cast<double>(fan_in));
        W[l].resize(fan_out, fan_in);
        b[l].resize(fan_out);
        for (std::size_t r = 0; r < fan_out; ++r)
            for (std::size_t c = 0; c < fan_in; ++c) W[l](r, c) = detail::uniform(rng, -wb, wb);
        for (std::size_t r = 0; r < fan_out; ++r) b[l](r) = detail::uniform(rng, -bb, bb);
    }

    std::vector<detail::AdamState> adam(cfg.depth);
    for (std::size_t l = 0; l < cfg.depth; ++l) {
        adam[l].m = Mat::Zero(W[l].rows(), W[l].cols());
        adam[l].v = Mat::Zero(W[l].rows(), W[l].cols());
        adam[l].mb = RowVec::Zero(b[l].size());
        adam[l].vb = RowVec::Zero(b[l].size());
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    TrainReport rep;
    std::vector<Mat> Z(cfg.depth), A(cfg.depth + 1);
    std::size_t step = 0;
    const std::size_t epochs = constant ? 0 : cfg.epochs;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        const double progress = epochs > 1 ? static_cast<double>(epoch) / static_cast<double>(epochs - 1) : 0.0;
        const double lr = cfg.learning_rate *
                          (cfg.final_lr_fraction + (1.0 - cfg.final_lr_fraction) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
        for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[detail::uniform_index(rng, i + 1)]);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t bs = std::min(cfg.batch_size, n - start);
            Mat& a0 = A[0];
            a0.resize(bs, in_dim);
            Eigen::VectorXd y(bs);
            for (std::size_t p = 0; p < bs; ++p) {
                a0.row(p) = X.row(order[start + p]);
                y(p) = Y(order[start + p]);
            }
            for (std::size_t l = 0; l < cfg.depth; ++l) {
                Z[l] = A[l] * W[l].transpose();
                Z[l].rowwise() += b[l];
                if (l == 0 && w0 != 1.0) Z[l] *= w0;
                if (l + 1 < cfg.depth) A[l + 1] = detail::activate_mat(cfg.activation, Z[l]);
            }
            const Eigen::VectorXd err = Z[cfg.depth - 1].col(0) - y;
            loss_sum += err.squaredNorm();
            Mat dz = (2.0 / static_cast<double>(bs)) * err;
            ++step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (std::size_t l = cfg.depth; l-- > 0;) {
                if (l == 0 && w0 != 1.0) dz *= w0;
                const Mat gW = dz.transpose() * A[l];
                const RowVec gb = dz.colwise().sum();
                if (l > 0) dz = (dz * W[l]).cwiseProduct(detail::activate_derivative_mat(cfg.activation, Z[l - 1]));
                auto& s = adam[l];
                s.m = beta1 * s.m + (1.0 - beta1) * gW;
                s.v = beta2 * s.v + (1.0 - beta2) * gW.cwiseProduct(gW);
                s.mb = beta1 * s.mb + (1.0 - beta1) * gb;
                s.vb = beta2 * s.vb + (1.0 - beta2) * gb.cwiseProduct(gb);
                W[l].array() -= lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + eps);
                b[l].array() -= lr * (s.mb.array() / c1) / ((s.vb.array() / c2).sqrt() + eps);
            }
        }
        const double loss = loss_sum / static_cast<double>(n);
        if (!std::isfinite(loss))
            throw TrainingDivergedError(epoch, "training diverged: non-finite loss at epoch " + std::to_string(epoch));
        rep.epoch_loss.push_back(loss);
        rep.final_loss = loss;
        rep.epochs_run = epoch + 1;
        if (on_epoch) on_epoch(epoch, loss);
    }

    MlpNetwork net;
    net.activation = cfg.activation;
    net.input_dim = in_dim;
    net.output_dim = 1;
    net.domain_lower = cfg.domain_lower;
    net.domain_upper = cfg.domain_upper;
    if (in_dim == 2) net.domain_lower[2] = net.domain_upper[2] = 0.0;
    net.value_scale = constant ? 0.0 : half_range;
    net.value_offset = constant ? vmin : mid;
    for (std::size_t l = 0; l < cfg.depth; ++l) {
        LinearLayer layer;
        layer.rows = static_cast<std::size_t>(W[l].rows());
        layer.cols = static_cast<std::size_t>(W[l].cols());
        layer.weights.resize(layer.rows * layer.cols);
        layer.bias.resize(layer.rows);
        for (std::size_t r = 0; r < layer.rows; ++r) {
            double bias = b[l](r);
            for (std::size_t c = 0; c < layer.cols; ++c) {
                double w = W[l](r, c);
                if (l == 0) {
                    // u = s x + t maps the world domain onto [-1, 1].
                    const double s = 2.0 / (cfg.domain_upper[c] - cfg.domain_lower[c]);
                    const double t = -(cfg.domain_upper[c] + cfg.domain_lower[c]) / (cfg.domain_upper[c] - cfg.domain_lower[c]);
                    bias += w * t;
                    w *= s;
                }
                layer.weights[r * layer.cols + c] = l == 0 ? w0 * w : w;
            }
            layer.bias[r] = l == 0 ? w0 * bias : bias;
        }
        net.layers.push_back(std::move(layer));
    }
    if (report) *report = rep;
    net.validate();
    return net;
}

} // namespace nira
