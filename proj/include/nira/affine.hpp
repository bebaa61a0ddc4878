#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nira/activation.hpp"
#include "nira/detail/dense_forms.hpp"
#include "nira/detail/sparse.hpp"
#include "nira/errors.hpp"
#include "nira/geometry.hpp"
#include "nira/inr.hpp"

namespace nira {

// x0 + sum x_i eps_i + err_accum * [-1, 1], each eps_i ranging over [-1, 1].
struct AffineForm {
    double center = 0.0;
    std::vector<Term> terms; // sorted by id
    double err_accum = 0.0;

    double radius() const
    {
        double r = 0.0;
        for (const Term& t : terms) r += std::fabs(t.coeff);
        return r + err_accum;
    }
    Interval range() const
    {
        const double r = radius();
        return {center - r, center + r};
    }
    double coeff(std::uint32_t id) const
    {
        for (const Term& t : terms)
            if (t.id == id) return t.coeff;
        return 0.0;
    }
};

struct FormVector {
    std::vector<AffineForm> forms;
    std::uint32_t next_symbol = 0;
};

struct RaVariant {
    enum class Kind { Full, Fixed, Truncate, Append };
    Kind kind = Kind::Full;
    std::size_t limit = 0; // k for Truncate, budget for Append

    static RaVariant full() { return {Kind::Full, 0}; }
    static RaVariant fixed() { return {Kind::Fixed, 0}; }
    static RaVariant truncate(std::size_t k) { return {Kind::Truncate, k}; }
    static RaVariant append(std::size_t budget) { return {Kind::Append, budget}; }

    static std::size_t default_limit(std::size_t input_dim) { return input_dim + 16; }

    void check(std::size_t input_dim) const
    {
        if ((kind == Kind::Truncate || kind == Kind::Append) && limit < input_dim)
            throw ContractError("RA variant limit " + std::to_string(limit) + " is below input dimension " +
                                std::to_string(input_dim));
    }
};

struct LinearApprox {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

inline FormVector region_to_forms(const AffineRegion& region)
{
    FormVector v;
    v.forms.resize(region.dim);
    for (std::size_t d = 0; d < region.dim; ++d) v.forms[d].center = region.center[d];
    for (std::size_t g = 0; g < region.num_generators; ++g) {
        const std::uint32_t id = v.next_symbol++;
        for (std::size_t d = 0; d < region.dim; ++d)
            if (region.generators[g][d] != 0.0) v.forms[d].terms.push_back(Term{id, region.generators[g][d]});
    }
    return v;
}

inline FormVector region_to_forms(std::span<const double> lower, std::span<const double> upper)
{
    if (lower.size() != upper.size() || lower.empty() || lower.size() > 3)
        throw ContractError("region_to_forms: lower/upper dimension mismatch");
    Box b;
    b.dim = lower.size();
    for (std::size_t d = 0; d < b.dim; ++d) {
        if (!(lower[d] <= upper[d])) throw ContractError("region_to_forms: lower exceeds upper");
        b.lower[d] = lower[d];
        b.upper[d] = upper[d];
    }
    return region_to_forms(AffineRegion::from_box(b));
}

namespace detail {
struct AffineScratch {
    LinearScratch lin;
    std::vector<std::vector<Term>> terms;
};
} // namespace detail

inline FormVector apply_linear(const FormVector& in, const LinearLayer& layer, detail::AffineScratch& ws)
{
    if (layer.cols != in.forms.size())
        throw ContractError("apply_linear: layer expects " + std::to_string(layer.cols) + " inputs, got " +
                            std::to_string(in.forms.size()));
    detail::linear_terms(layer, in.next_symbol, [&](std::size_t c) -> const std::vector<Term>& { return in.forms[c].terms; },
                         ws.terms, ws.lin);
    FormVector out;
    out.next_symbol = in.next_symbol;
    out.forms.resize(layer.rows);
    for (std::size_t r = 0; r < layer.rows; ++r) {
        AffineForm& f = out.forms[r];
        double c0 = layer.bias[r];
        double err = 0.0;
        for (std::size_t c = 0; c < layer.cols; ++c) {
            c0 += layer.w(r, c) * in.forms[c].center;
            err += std::fabs(layer.w(r, c)) * in.forms[c].err_accum;
        }
        f.center = c0;
        f.err_accum = err;
        f.terms = std::move(ws.terms[r]);
        ws.terms[r].clear();
    }
    return out;
}

// RaVariant is accepted for interface symmetry: the linear step is exact under every variant.
inline FormVector apply_linear(const FormVector& in, const LinearLayer& layer, const RaVariant& = RaVariant::full())
{
    detail::AffineScratch ws;
    return apply_linear(in, layer, ws);
}

namespace detail {

inline double rounding_pad(double a, double b, double c)
{
    return 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(a) + std::fabs(b) + std::fabs(c));
}

inline double exact_activation(Activation act, double x)
{
    switch (act) {
    case Activation::Sine: return std::sin(x);
    case Activation::ReLU: return x > 0.0 ? x : 0.0;
    case Activation::ELU: return x > 0.0 ? x : std::expm1(x);
    }
    return x;
}

inline LinearApprox minimax_relu(double lo, double hi)
{
    if (lo >= 0.0) return {1.0, 0.0, 0.0};
    if (hi <= 0.0) return {0.0, 0.0, 0.0};
    const double alpha = hi / (hi - lo);
    const double gamma = 0.5 * alpha * -lo;
    return {alpha, gamma, gamma + rounding_pad(lo, hi, 0.0)};
}

inline LinearApprox minimax_elu(double lo, double hi)
{
    if (lo >= 0.0) return {1.0, 0.0, 0.0};
    auto f = [](double x) { return x > 0.0 ? x : std::expm1(x); };
    const double fl = f(lo), fu = f(hi);
    const double alpha = (fu - fl) / (hi - lo);
    if (!(alpha > 0.0)) {
        // Both ends saturated at -1 to double precision.
        return {0.0, 0.5 * (fl + fu), 0.5 * (fu - fl) + rounding_pad(fl, fu, 0.0)};
    }
    const double xs = std::clamp(std::log(alpha), lo, hi);
    const double chord = fl + alpha * (xs - lo);
    const double gamma = 0.5 * std::fabs(chord - f(xs));
    const double beta = fl - alpha * lo - gamma;
    return {alpha, beta, gamma + rounding_pad(fl, alpha * lo, alpha * hi)};
}

// Extremes of sin(x) - alpha x over [lo, hi]: the endpoints plus every x with cos x = alpha.
inline Interval sine_residual_extremes(double alpha, double lo, double hi)
{
    const double two_pi = 2.0 * std::numbers::pi;
    const double el = std::sin(lo) - alpha * lo, eu = std::sin(hi) - alpha * hi;
    Interval e{std::min(el, eu), std::max(el, eu)};
    if (alpha < -1.0 || alpha > 1.0) return e;
    const double theta = std::acos(alpha);
    for (double base : {theta, -theta}) {
        for (double k = std::ceil((lo - base) / two_pi); base + k * two_pi <= hi; k += 1.0) {
            const double x = base + k * two_pi;
            if (x < lo) continue;
            const double v = std::sin(x) - alpha * x;
            e.lo = std::min(e.lo, v);
            e.hi = std::max(e.hi, v);
        }
    }
    return e;
}

// Candidate slopes are the chord (optimal where sin keeps one convexity) and zero (optimal
// once the interval spans a full period). Offset and error come from the exact residual extremes,
// so the result is sound for either slope and equioscillates by construction.
inline LinearApprox minimax_sine(double lo, double hi)
{
    const double two_pi = 2.0 * std::numbers::pi;
    LinearApprox best{};
    bool have = false;
    auto consider = [&](double alpha) {
        const Interval e = sine_residual_extremes(alpha, lo, hi);
        const double gamma = 0.5 * (e.hi - e.lo) + rounding_pad(e.hi, alpha * lo, alpha * hi);
        if (!have || gamma < best.gamma) best = {alpha, 0.5 * (e.hi + e.lo), gamma};
        have = true;
    };
    if (hi - lo < two_pi) consider((std::sin(hi) - std::sin(lo)) / (hi - lo));
    if (hi - lo >= std::numbers::pi) consider(0.0);
    return best;
}

} // namespace detail

// Linear approximation of the activation on [lo, hi] minimizing the maximum absolute error.
inline LinearApprox minimax_approx(Activation act, double lo, double hi)
{
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw ContractError("minimax_approx: invalid interval");
    if (lo == hi) return {0.0, detail::exact_activation(act, lo), 0.0};
    switch (act) {
    case Activation::ReLU: return detail::minimax_relu(lo, hi);
    case Activation::ELU: return detail::minimax_elu(lo, hi);
    case Activation::Sine: return detail::minimax_sine(lo, hi);
    }
    return {};
}

namespace detail {

// Moves the n smallest-magnitude terms into err_accum; ties go to the lower symbol id.
inline void fold_smallest(AffineForm& f, std::size_t n)
{
    n = std::min(n, f.terms.size());
    if (n == 0) return;
    std::vector<std::size_t> order(f.terms.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(f.terms[a].coeff) < std::fabs(f.terms[b].coeff);
    });
    std::vector<char> drop(f.terms.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        drop[order[i]] = 1;
        f.err_accum += std::fabs(f.terms[order[i]].coeff);
    }
    std::size_t w = 0;
    for (std::size_t i = 0; i < f.terms.size(); ++i)
        if (!drop[i]) f.terms[w++] = f.terms[i];
    f.terms.resize(w);
}

} // namespace detail

inline FormVector apply_activation(const FormVector& in, Activation act, const RaVariant& variant)
{
    FormVector out;
    out.next_symbol = in.next_symbol;
    out.forms.resize(in.forms.size());
    for (std::size_t i = 0; i < in.forms.size(); ++i) {
        const AffineForm& x = in.forms[i];
        AffineForm& y = out.forms[i];
        const Interval r = x.range();
        const LinearApprox a = minimax_approx(act, r.lo, r.hi);
        y.center = a.alpha * x.center + a.beta;
        y.err_accum = std::fabs(a.alpha) * x.err_accum;
        y.terms.reserve(x.terms.size() + 1);
        if (a.alpha != 0.0)
            for (const Term& t : x.terms) y.terms.push_back(Term{t.id, a.alpha * t.coeff});
        if (a.gamma == 0.0) continue;
        switch (variant.kind) {
        case RaVariant::Kind::Fixed: y.err_accum += a.gamma; break;
        case RaVariant::Kind::Full: y.terms.push_back(Term{out.next_symbol++, a.gamma}); break;
        case RaVariant::Kind::Truncate:
            y.terms.push_back(Term{out.next_symbol++, a.gamma});
            if (y.terms.size() > variant.limit) detail::fold_smallest(y, y.terms.size() - variant.limit);
            break;
        case RaVariant::Kind::Append:
            y.terms.push_back(Term{out.next_symbol++, a.gamma});
            if (y.terms.size() > variant.limit) detail::fold_smallest(y, 2);
            break;
        }
    }
    return out;
}

namespace detail {

inline void dense_activation_ra(DenseForms& f, Activation act, const RaVariant& variant, DenseWorkspace& ws)
{
    const bool fresh = variant.kind != RaVariant::Kind::Fixed;
    const Eigen::Index held = f.symbols;
    const Eigen::Index first = fresh ? open_fresh_columns(f) : 0;
    for (Eigen::Index r = 0; r < f.rows; ++r) {
        auto row = f.coeff.row(r).head(held);
        const double rad = row.cwiseAbs().sum() + f.err(r);
        const LinearApprox a = minimax_approx(act, f.center(r) - rad, f.center(r) + rad);
        row *= a.alpha;
        f.center(r) = a.alpha * f.center(r) + a.beta;
        f.err(r) = std::fabs(a.alpha) * f.err(r);
        if (a.gamma == 0.0) continue;
        if (!fresh) {
            f.err(r) += a.gamma;
            continue;
        }
        f.coeff(r, first + r) = a.gamma;
        if (variant.kind == RaVariant::Kind::Full) continue;
        const std::size_t nnz = dense_nonzeros(f, r);
        if (nnz <= variant.limit) continue;
        dense_fold_smallest(f, r, variant.kind == RaVariant::Kind::Truncate ? nnz - variant.limit : 2, ws);
    }
}

} // namespace detail

// Output affine form of the network over the region (raw network units, before value scaling).
// Same rules as chaining apply_linear / apply_activation, evaluated on a dense coefficient matrix.
inline AffineForm ra_output_form(const MlpNetwork& net, const AffineRegion& region, const RaVariant& variant)
{
    variant.check(net.input_dim);
    if (region.dim != net.input_dim) throw ContractError("ra_output_form: region dimension mismatch");
    thread_local detail::DenseWorkspace ws;
    detail::load_region(ws.a, region, detail::symbol_capacity(net, region.num_generators), 1.0);
    detail::DenseForms* in = &ws.a;
    detail::DenseForms* out = &ws.b;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        detail::dense_linear(*in, net.layers[li], *out, true);
        if (li + 1 < net.layers.size()) detail::dense_activation_ra(*out, net.activation, variant, ws);
        std::swap(in, out);
    }
    AffineForm f;
    f.center = in->center(0);
    f.err_accum = in->err(0);
    for (Eigen::Index s = 0; s < in->symbols; ++s)
        if (in->coeff(0, s) != 0.0) f.terms.push_back(Term{static_cast<std::uint32_t>(s), in->coeff(0, s)});
    return f;
}

inline Interval to_data_units(const MlpNetwork& net, const Interval& raw)
{
    const double a = net.value_scale * raw.lo + net.value_offset;
    const double b = net.value_scale * raw.hi + net.value_offset;
    return {std::min(a, b), std::max(a, b)};
}

inline Interval ra_output_range(const MlpNetwork& net, const AffineRegion& region, const RaVariant& variant)
{
    return to_data_units(net, ra_output_form(net, region, variant).range());
}

inline Interval ra_output_range(const MlpNetwork& net, const Box& box, const RaVariant& variant)
{
    return ra_output_range(net, AffineRegion::from_box(box), variant);
}

} // namespace nira
