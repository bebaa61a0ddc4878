#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nira/activation.hpp"
#include "nira/affine.hpp"
#include "nira/detail/sparse.hpp"
#include "nira/errors.hpp"
#include "nira/geometry.hpp"
#include "nira/inr.hpp"
#include "nira/math.hpp"

namespace nira {

// x0 + sum x_i Z_i with independent zero-mean unit-variance Z_i.
struct ProbAffineForm {
    double center = 0.0;
    std::vector<Term> terms; // sorted by id

    double variance() const
    {
        double v = 0.0;
        for (const Term& t : terms) v += t.coeff * t.coeff;
        return v;
    }
};

struct ProbFormVector {
    std::vector<ProbAffineForm> forms;
    std::uint32_t next_rv = 0;
};

struct GaussianEstimate {
    double mu = 0.0;
    double sigma = 0.0;
};

struct LsqApprox {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma_sq = 0.0;
};

inline Interval soft_bound(const GaussianEstimate& e, double t)
{
    if (!(t > 0.0)) throw ContractError("soft_bound: t must be positive");
    return {e.mu - t * e.sigma, e.mu + t * e.sigma};
}

inline GaussianEstimate clt_estimate(const ProbAffineForm& f) { return {f.center, std::sqrt(f.variance())}; }

inline constexpr double inv_sqrt3 = 0.577350269189625764509148780502;

// A uniform variable on [c - h, c + h] is represented as c + (h / sqrt 3) Z.
inline ProbFormVector region_to_pafs(const AffineRegion& region)
{
    ProbFormVector v;
    v.forms.resize(region.dim);
    for (std::size_t d = 0; d < region.dim; ++d) v.forms[d].center = region.center[d];
    for (std::size_t g = 0; g < region.num_generators; ++g) {
        const std::uint32_t id = v.next_rv++;
        for (std::size_t d = 0; d < region.dim; ++d)
            if (region.generators[g][d] != 0.0)
                v.forms[d].terms.push_back(Term{id, region.generators[g][d] * inv_sqrt3});
    }
    return v;
}

inline ProbFormVector region_to_pafs(std::span<const double> lower, std::span<const double> upper)
{
    if (lower.size() != upper.size() || lower.empty() || lower.size() > 3)
        throw ContractError("region_to_pafs: lower/upper dimension mismatch");
    Box b;
    b.dim = lower.size();
    for (std::size_t d = 0; d < b.dim; ++d) {
        if (!(lower[d] <= upper[d])) throw ContractError("region_to_pafs: lower exceeds upper");
        b.lower[d] = lower[d];
        b.upper[d] = upper[d];
    }
    return region_to_pafs(AffineRegion::from_box(b));
}

inline ProbFormVector paf_apply_linear(const ProbFormVector& in, const LinearLayer& layer, detail::AffineScratch& ws)
{
    if (layer.cols != in.forms.size())
        throw ContractError("paf_apply_linear: layer expects " + std::to_string(layer.cols) + " inputs, got " +
                            std::to_string(in.forms.size()));
    detail::linear_terms(layer, in.next_rv, [&](std::size_t c) -> const std::vector<Term>& { return in.forms[c].terms; },
                         ws.terms, ws.lin);
    ProbFormVector out;
    out.next_rv = in.next_rv;
    out.forms.resize(layer.rows);
    for (std::size_t r = 0; r < layer.rows; ++r) {
        double c0 = layer.bias[r];
        for (std::size_t c = 0; c < layer.cols; ++c) c0 += layer.w(r, c) * in.forms[c].center;
        out.forms[r].center = c0;
        out.forms[r].terms = std::move(ws.terms[r]);
        ws.terms[r].clear();
    }
    return out;
}

inline ProbFormVector paf_apply_linear(const ProbFormVector& in, const LinearLayer& layer)
{
    detail::AffineScratch ws;
    return paf_apply_linear(in, layer, ws);
}

namespace detail {

inline constexpr std::size_t elu_series_terms = 40;

inline double finish_gamma_sq(double g2)
{
    if (g2 >= 0.0) return g2;
    if (g2 >= -1e-12) return 0.0;
    throw NumericalError("least-squares error variance is negative (" + std::to_string(g2) + ")");
}

inline LsqApprox lsq_relu(double mu, double sigma)
{
    const double s = std::fabs(mu) / sigma;
    const double phi = math::normal_pdf(s);
    const auto j = math::tail_moments(s, 2);
    // Residual variance lives entirely on the minority side of the kink.
    const double g2 = sigma * sigma * phi * (j[2] - phi * (j[1] * j[1] + j[0] * j[0]));
    const double alpha = 0.5 * std::erfc(-mu / (std::numbers::sqrt2 * sigma));
    const double ex = mu * alpha + sigma * math::normal_pdf(mu / sigma);
    return {alpha, ex - alpha * mu, finish_gamma_sq(g2)};
}

inline constexpr std::size_t sine_series_terms = 20;

// (1 - e^{-2x})/2 - x e^{-x} = x^3 sum_m f1[m] x^m  with f1[m] = (-1)^{n+1} (2^{n-1} - n) / n!, n = m + 3
// x - 1 + e^{-x}            = x^2 sum_m g[m] x^m   with g[m]  = (-1)^n / n!, n = m + 2
struct SineSeriesCoefficients {
    std::array<double, sine_series_terms> f1{}, g{};

    constexpr SineSeriesCoefficients()
    {
        double fact = 2.0, two_pow = 2.0; // 2!, 2^1
        for (std::size_t m = 0; m < sine_series_terms; ++m) {
            const double n = static_cast<double>(m + 3);
            fact *= n;
            two_pow *= 2.0;
            f1[m] = ((m + 3) % 2 ? 1.0 : -1.0) * (two_pow - n) / fact;
        }
        fact = 1.0;
        for (std::size_t m = 0; m < sine_series_terms; ++m) {
            fact *= static_cast<double>(m + 2);
            g[m] = ((m + 2) % 2 ? -1.0 : 1.0) / fact;
        }
    }
};

inline double horner(const std::array<double, sine_series_terms>& c, double x)
{
    double p = c[sine_series_terms - 1];
    for (std::size_t m = sine_series_terms - 1; m-- > 0;) p = c[m] + x * p;
    return p;
}

inline LsqApprox lsq_sine(double mu, double sigma)
{
    static constexpr SineSeriesCoefficients series;
    const double x = sigma * sigma;
    const double a = std::exp(-0.5 * x);
    const double e = a * a;
    const double sm = std::sin(mu), cm = std::cos(mu);
    double f1, g;
    if (x < 0.5) {
        f1 = x * x * x * horner(series.f1, x);
        g = x * x * horner(series.g, x);
    } else {
        f1 = -0.5 * std::expm1(-2.0 * x) - x * e;
        g = x + std::expm1(-x);
    }
    return {a * cm, a * (sm - mu * cm), finish_gamma_sq(f1 + e * sm * sm * g)};
}

// sum_n coef[n] * h^n * J_n
inline double tail_series(const std::vector<double>& j, double h, const std::array<double, elu_series_terms + 1>& coef)
{
    double total = 0.0, p = 1.0;
    for (std::size_t n = 0; n <= elu_series_terms; ++n) {
        total += coef[n] * p * j[n];
        p *= h;
    }
    return total;
}

struct EluSeriesCoefficients {
    std::array<double, elu_series_terms + 1> g{}, gp{}, c{}, e{};
    EluSeriesCoefficients()
    {
        double fact = 1.0;
        for (std::size_t n = 0; n <= elu_series_terms; ++n) {
            if (n > 0) fact *= static_cast<double>(n);
            const double pw = std::ldexp(1.0, static_cast<int>(n));
            if (n >= 2) g[n] = 1.0 / fact;
            if (n >= 1) gp[n] = 1.0 / fact;
            if (n >= 4) c[n] = (pw - 2.0 - 2.0 * n) / fact;
            if (n >= 2) e[n] = (n + 1.0 - pw) / fact;
        }
    }
};

// When sigma is small relative to the distance to the kink, the closed form cancels catastrophically.
// There the minority-side contributions are expanded in Taylor series and integrated against the
// Gaussian tail moments J_n.
inline LsqApprox lsq_elu_series(double mu, double sigma)
{
    static const EluSeriesCoefficients k;
    const double s = std::fabs(mu) / sigma;
    const double phi = math::normal_pdf(s);
    const auto j = math::tail_moments(s, elu_series_terms);
    const double x = sigma * sigma;
    if (mu >= 0.0) {
        const double eh = phi * tail_series(j, -sigma, k.g);
        const double ehp = phi * tail_series(j, -sigma, k.gp);
        const double eh2 = phi * tail_series(j, -sigma, k.c);
        const double g2 = eh2 - eh * eh - x * ehp * ehp;
        return {1.0 + ehp, eh - mu * ehp, finish_gamma_sq(g2)};
    }
    const double ek = -phi * tail_series(j, sigma, k.g);
    const double ekp = -phi * tail_series(j, sigma, k.gp);
    const double ek2 = phi * tail_series(j, sigma, k.c);
    const double eek = phi * tail_series(j, sigma, k.e);
    const double ae = std::exp(mu + 0.5 * x);
    double ve;
    if (x > 1e-2) {
        ve = std::expm1(x) - x;
    } else {
        ve = 0.0;
        double p = x;
        for (int n = 2; n < 20; ++n) {
            p *= x / n;
            ve += p;
        }
    }
    ve *= std::exp(2.0 * mu + x);
    const double g2 = ve + (ek2 - ek * ek - x * ekp * ekp) + 2.0 * (eek - ae * ek - x * ae * ekp);
    const double alpha = ae + ekp;
    return {alpha, ae - 1.0 + ek - alpha * mu, finish_gamma_sq(g2)};
}

inline LsqApprox lsq_elu_closed(double mu, double sigma)
{
    const double sq2s = std::numbers::sqrt2 * sigma;
    const double z = mu / sq2s;
    const double a = -std::erf(z);
    const double one_minus_a = std::erfc(-z);
    const double one_plus_a = std::erfc(z);
    const double x = sigma * sigma;
    const double w1 = (mu + x) / sq2s;
    const double w2 = (mu + 2.0 * x) / sq2s;
    const double damp = std::exp(-mu * mu / (2.0 * x));
    const double b = (mu + x) / sigma > 5.0 ? math::erfcx(w1) * damp : std::erfc(w1) * std::exp(mu + 0.5 * x);
    const double d = (mu + 2.0 * x) / sigma > 5.0 ? math::erfcx(w2) * damp : std::erfc(w2) * std::exp(2.0 * mu + 2.0 * x);
    const double c = math::normal_pdf(mu / sigma);
    const double alpha = 0.5 * (one_minus_a + b);
    const double beta = 0.5 * b * (1.0 - mu) - 0.5 * one_plus_a + c * sigma;
    const double g2 = 0.25 * one_minus_a * one_plus_a * (mu * mu + x) +
                      (0.5 * a * b - c * c - 0.25 * b * b - 0.5 * b) * x + a * c * mu * sigma +
                      (a - b + 1.0) * c * sigma + 0.5 * (a * b - b - a * a + 1.0) * mu + 0.5 * d + 0.25 -
                      0.25 * (a - b) * (a - b) - 0.5 * b;
    return {alpha, beta, finish_gamma_sq(g2)};
}

inline LsqApprox lsq_elu(double mu, double sigma)
{
    const double s = std::fabs(mu) / sigma;
    if (sigma / std::max(1.0, s) < 0.35) return lsq_elu_series(mu, sigma);
    return lsq_elu_closed(mu, sigma);
}

inline double activation_derivative_exact(Activation act, double x)
{
    switch (act) {
    case Activation::Sine: return std::cos(x);
    case Activation::ReLU: return x > 0.0 ? 1.0 : (x == 0.0 ? 0.5 : 0.0);
    case Activation::ELU: return x > 0.0 ? 1.0 : std::exp(x);
    }
    return 1.0;
}

} // namespace detail

// Least-squares linearization of the activation under N(mu, sigma^2):
// minimizes E[(f(X) - alpha X - beta)^2]; gamma_sq is the minimal value.
inline LsqApprox lsq_approx(Activation act, const GaussianEstimate& in)
{
    const double mu = in.mu, sigma = in.sigma;
    if (!std::isfinite(mu) || !std::isfinite(sigma) || sigma < 0.0)
        throw ContractError("lsq_approx: input estimate must be finite with sigma >= 0");
    if (sigma < 1e-7 * std::max(1.0, std::fabs(mu))) {
        const double alpha = detail::activation_derivative_exact(act, mu);
        return {alpha, detail::exact_activation(act, mu) - alpha * mu, 0.0};
    }
    switch (act) {
    case Activation::ReLU: return detail::lsq_relu(mu, sigma);
    case Activation::Sine: return detail::lsq_sine(mu, sigma);
    case Activation::ELU: return detail::lsq_elu(mu, sigma);
    }
    return {};
}

inline ProbFormVector paf_apply_activation(const ProbFormVector& in, Activation act)
{
    ProbFormVector out;
    out.next_rv = in.next_rv;
    out.forms.resize(in.forms.size());
    for (std::size_t i = 0; i < in.forms.size(); ++i) {
        const ProbAffineForm& x = in.forms[i];
        ProbAffineForm& y = out.forms[i];
        const LsqApprox a = lsq_approx(act, clt_estimate(x));
        y.center = a.alpha * x.center + a.beta;
        y.terms.reserve(x.terms.size() + 1);
        if (a.alpha != 0.0)
            for (const Term& t : x.terms) y.terms.push_back(Term{t.id, a.alpha * t.coeff});
        if (a.gamma_sq > 0.0) y.terms.push_back(Term{out.next_rv++, std::sqrt(a.gamma_sq)});
    }
    return out;
}

inline GaussianEstimate to_data_units(const MlpNetwork& net, const GaussianEstimate& raw)
{
    return {net.value_scale * raw.mu + net.value_offset, std::fabs(net.value_scale) * raw.sigma};
}

namespace detail {

inline void dense_activation_up(DenseForms& f, Activation act)
{
    const Eigen::Index held = f.symbols;
    const Eigen::Index first = open_fresh_columns(f);
    for (Eigen::Index r = 0; r < f.rows; ++r) {
        auto row = f.coeff.row(r).head(held);
        const LsqApprox a = lsq_approx(act, {f.center(r), std::sqrt(row.squaredNorm())});
        row *= a.alpha;
        f.center(r) = a.alpha * f.center(r) + a.beta;
        if (a.gamma_sq > 0.0) f.coeff(r, first + r) = std::sqrt(a.gamma_sq);
    }
}

} // namespace detail

// CLT estimate of the network output over the region. Same rules as chaining paf_apply_linear /
// paf_apply_activation, evaluated on a dense coefficient matrix.
inline GaussianEstimate up_output_estimate(const MlpNetwork& net, const AffineRegion& region)
{
    if (region.dim != net.input_dim) throw ContractError("up_output_estimate: region dimension mismatch");
    thread_local detail::DenseWorkspace ws;
    detail::load_region(ws.a, region, detail::symbol_capacity(net, region.num_generators), inv_sqrt3);
    detail::DenseForms* in = &ws.a;
    detail::DenseForms* out = &ws.b;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        detail::dense_linear(*in, net.layers[li], *out, false);
        if (li + 1 < net.layers.size()) detail::dense_activation_up(*out, net.activation);
        std::swap(in, out);
    }
    const GaussianEstimate raw{in->center(0), std::sqrt(in->coeff.row(0).head(in->symbols).squaredNorm())};
    return to_data_units(net, raw);
}

inline GaussianEstimate up_output_estimate(const MlpNetwork& net, const Box& box)
{
    return up_output_estimate(net, AffineRegion::from_box(box));
}

// Gaussian read-off of the range-analysis output form under the uniform assumption:
// every eps_i (and the aggregate error term) is treated as uniform on [-1, 1].
inline GaussianEstimate ra_ua_from_form(const AffineForm& f)
{
    double s2 = f.err_accum * f.err_accum;
    for (const Term& t : f.terms) s2 += t.coeff * t.coeff;
    return {f.center, std::sqrt(s2 / 3.0)};
}

inline GaussianEstimate ra_ua_estimate(const MlpNetwork& net, const AffineRegion& region, const RaVariant& variant)
{
    return to_data_units(net, ra_ua_from_form(ra_output_form(net, region, variant)));
}

inline GaussianEstimate ra_ua_estimate(const MlpNetwork& net, const Box& box, const RaVariant& variant)
{
    return ra_ua_estimate(net, AffineRegion::from_box(box), variant);
}

} // namespace nira
