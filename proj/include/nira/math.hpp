#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

namespace nira::math {

inline constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
inline constexpr double sqrt_pi_over_2 = 1.25331413731550025120788264241;

namespace detail {

// erfcx(x) for x >= 5 by the Laplace continued fraction, evaluated with modified Lentz.
inline double erfcx_cf(double x)
{
    constexpr double tiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int k = 1; k < 200; ++k) {
        const double a = 0.5 * k;
        d = x + a * d;
        if (d == 0.0) d = tiny;
        c = x + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return std::numbers::inv_sqrtpi / f;
}

} // namespace detail

// Scaled complementary error function e^{x^2} erfc(x).
inline double erfcx(double x)
{
    if (std::isnan(x)) return x;
    if (x >= 5.0) return detail::erfcx_cf(x);
    if (x >= 0.0) return std::exp(x * x) * std::erfc(x);
    if (x < -26.7) return std::numeric_limits<double>::infinity();
    return 2.0 * std::exp(x * x) - erfcx(-x);
}

inline double normal_pdf(double x) { return inv_sqrt_2pi * std::exp(-0.5 * x * x); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Mills ratio (1 - Phi(s)) / phi(s).
inline double mills_ratio(double s) { return sqrt_pi_over_2 * erfcx(s / std::numbers::sqrt2); }

// J_n(s) = integral over w >= 0 of w^n exp(-s w - w^2/2), for n = 0..n_max, s >= 0.
// J_0 is the Mills ratio; J_1 = 1 - s J_0; J_n = (n-1) J_{n-2} - s J_{n-1}.
// The forward recurrence loses accuracy for large s, so there it runs backwards (Miller).
inline std::vector<double> tail_moments(double s, std::size_t n_max)
{
    std::vector<double> j(n_max + 1);
    const double j0 = mills_ratio(s);
    if (s < 2.5) {
        j[0] = j0;
        if (n_max >= 1) j[1] = 1.0 - s * j0;
        for (std::size_t n = 2; n <= n_max; ++n)
            j[n] = static_cast<double>(n - 1) * j[n - 2] - s * j[n - 1];
        return j;
    }
    const std::size_t top = n_max + 80;
    std::vector<double> a(top + 2, 0.0);
    a[top] = 1.0;
    for (std::size_t n = top + 1; n >= 2; --n) {
        a[n - 2] = (a[n] + s * a[n - 1]) / static_cast<double>(n - 1);
        if (std::fabs(a[n - 2]) > 1e200) {
            for (std::size_t k = n - 2; k <= top + 1; ++k) a[k] *= 1e-200;
        }
    }
    const double scale = j0 / a[0];
    for (std::size_t n = 0; n <= n_max; ++n) j[n] = a[n] * scale;
    return j;
}

} // namespace nira::math
