#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nira/nira.hpp"

namespace nira::test {

inline std::string asset(const std::string& name) { return std::string(NIRA_ASSET_DIR) + "/" + name; }

inline const std::vector<std::string>& toy_net_names()
{
    static const std::vector<std::string> names{"gaussians_sine.net", "wave_relu.net", "torus_elu.net"};
    return names;
}

inline LinearLayer layer(std::size_t rows, std::size_t cols, std::vector<double> w, std::vector<double> b)
{
    return LinearLayer{rows, cols, std::move(w), std::move(b)};
}

// Single affine layer: f(x) = W x + b.
inline MlpNetwork linear_net(std::size_t in_dim, std::vector<double> w, double b, Vec3 lo = {-1, -1, -1},
                             Vec3 hi = {1, 1, 1})
{
    MlpNetwork net;
    net.input_dim = in_dim;
    net.layers = {layer(1, in_dim, std::move(w), {b})};
    net.domain_lower = lo;
    net.domain_upper = hi;
    return net;
}

inline MlpNetwork constant_net(double b, Activation act = Activation::Sine)
{
    MlpNetwork net;
    net.activation = act;
    net.layers = {layer(3, 3, std::vector<double>(9, 0.0), std::vector<double>(3, 0.0)),
                  layer(1, 3, std::vector<double>(3, 0.0), {b})};
    return net;
}

// Random MLP with Gaussian weights scaled by gain / sqrt(fan_in).
inline MlpNetwork random_net(Activation act, const std::vector<std::size_t>& widths, std::uint64_t seed, double gain = 1.5,
                             double first_gain = 3.0)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    MlpNetwork net;
    net.activation = act;
    std::size_t prev = 3;
    for (std::size_t i = 0; i <= widths.size(); ++i) {
        const std::size_t rows = i < widths.size() ? widths[i] : 1;
        const double g = (i == 0 ? first_gain : gain) / std::sqrt(static_cast<double>(prev));
        LinearLayer l{rows, prev, std::vector<double>(rows * prev), std::vector<double>(rows)};
        for (double& w : l.weights) w = g * n01(rng);
        for (double& b : l.bias) b = 0.3 * n01(rng);
        net.layers.push_back(std::move(l));
        prev = rows;
    }
    return net;
}

inline Box random_subbox(const MlpNetwork& net, std::mt19937_64& rng, double min_frac = 0.02, double max_frac = 0.5)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Box b;
    b.dim = net.input_dim;
    for (std::size_t d = 0; d < net.input_dim; ++d) {
        const double span = net.domain_upper[d] - net.domain_lower[d];
        const double ext = span * (min_frac + (max_frac - min_frac) * u(rng));
        b.lower[d] = net.domain_lower[d] + (span - ext) * u(rng);
        b.upper[d] = b.lower[d] + ext;
    }
    return b;
}

// E[g(X)] for X ~ N(mu, sigma^2) by adaptive Gauss-Kronrod, split at the given kinks.
template <class F>
double gaussian_expectation(F g, double mu, double sigma, std::vector<double> kinks = {})
{
    auto integrand = [&](double x) {
        const double z = (x - mu) / sigma;
        return g(x) * std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    };
    std::vector<double> cuts{mu - 40.0 * sigma, mu - 8.0 * sigma, mu - 2.0 * sigma, mu, mu + 2.0 * sigma, mu + 8.0 * sigma,
                             mu + 40.0 * sigma};
    for (double k : kinks)
        if (k > cuts.front() && k < cuts.back()) cuts.push_back(k);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, cuts[i], cuts[i + 1], 12, 1e-12);
    }
    return total;
}

inline double activation_ref(Activation a, double x)
{
    switch (a) {
    case Activation::Sine: return std::sin(x);
    case Activation::ReLU: return x > 0.0 ? x : 0.0;
    case Activation::ELU: return x > 0.0 ? x : std::expm1(x);
    }
    return x;
}

struct LsqCheck {
    double gamma_sq_quad = 0.0;
    double gamma_rel_err = 0.0; // |impl - quad| / quad, 0 when both vanish
    double bias = 0.0;          // E[f(X) - alpha X - beta]
    double min_dmse = 0.0;      // smallest MSE change over the four perturbations
    bool gamma_ok = false, optimal = false, unbiased = false;
};

// Quadrature oracle for the least-squares linearization of an activation under N(mu, sigma^2).
inline LsqCheck check_lsq(Activation act, double mu, double sigma, double delta = 1e-3)
{
    const LsqApprox a = lsq_approx(act, {mu, sigma});
    const std::vector<double> kinks = act == Activation::Sine ? std::vector<double>{} : std::vector<double>{0.0};
    auto r = [&](double x) { return activation_ref(act, x) - a.alpha * x - a.beta; };
    LsqCheck c;
    c.gamma_sq_quad = gaussian_expectation([&](double x) { return r(x) * r(x); }, mu, sigma, kinks);
    const double diff = std::fabs(a.gamma_sq - c.gamma_sq_quad);
    c.gamma_rel_err = c.gamma_sq_quad > 0.0 ? diff / c.gamma_sq_quad : (diff == 0.0 ? 0.0 : INFINITY);
    // Values below 1e-280 are indistinguishable from underflow in the integrand.
    c.gamma_ok = diff <= 0.005 * c.gamma_sq_quad + 1e-280;
    c.bias = gaussian_expectation(r, mu, sigma, kinks);
    const double erx = gaussian_expectation([&](double x) { return r(x) * x; }, mu, sigma, kinks);
    const double ex2 = mu * mu + sigma * sigma;
    // MSE(alpha + da, beta + db) - MSE(alpha, beta) = E[d^2] - 2 E[r d] with d = da x + db.
    c.min_dmse = INFINITY;
    bool ok = true;
    const double dirs[4][2] = {{delta, 0}, {-delta, 0}, {0, delta}, {0, -delta}};
    for (const auto& d : dirs) {
        const double ed2 = d[0] * d[0] * ex2 + 2.0 * d[0] * d[1] * mu + d[1] * d[1];
        const double dmse = ed2 - 2.0 * (d[0] * erx + d[1] * c.bias);
        c.min_dmse = std::min(c.min_dmse, dmse);
        ok = ok && dmse >= -1e-12 * ed2;
    }
    c.optimal = ok;
    c.unbiased = std::fabs(c.bias) <= 1e-6;
    return c;
}

} // namespace nira::test
