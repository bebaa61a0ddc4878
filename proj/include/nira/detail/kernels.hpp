#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>

// Branch-light elementwise sin and exp. They are written so the compiler can vectorize
// loops over them, and a scalar call produces the same bits as the vectorized loop.

namespace nira::detail {

inline constexpr double round_magic = 0x1.8p52;

// Beyond this magnitude the three-part reduction loses exactness; defer to libm.
inline constexpr double sin_reduction_limit = 1e6;

// Branch-free c ? a : b.
inline double select(bool c, double a, double b)
{
    const std::uint64_t m = 0 - static_cast<std::uint64_t>(c);
    return std::bit_cast<double>((std::bit_cast<std::uint64_t>(a) & m) | (std::bit_cast<std::uint64_t>(b) & ~m));
}

inline double sin_core(double x)
{
    constexpr double two_over_pi = 6.36619772367581382433e-01;
    constexpr double pio2_1 = 1.57079632673412561417e+00;
    constexpr double pio2_2 = 6.07710050630396597660e-11;
    constexpr double pio2_3 = 2.02226624871116645580e-21;
    constexpr double pio2_3t = 8.47842766036889956997e-32;

    constexpr double s1 = -1.66666666666666324348e-01;
    constexpr double s2 = 8.33333333332248946124e-03;
    constexpr double s3 = -1.98412698298579493134e-04;
    constexpr double s4 = 2.75573137070700676789e-06;
    constexpr double s5 = -2.50507602534068634195e-08;
    constexpr double s6 = 1.58969099521155010221e-10;

    constexpr double c1 = 4.16666666666666019037e-02;
    constexpr double c2 = -1.38888888888741095749e-03;
    constexpr double c3 = 2.48015872894767294178e-05;
    constexpr double c4 = -2.75573143513906633035e-07;
    constexpr double c5 = 2.08757232129817482790e-09;
    constexpr double c6 = -1.13596475577881948265e-11;

    const double t = x * two_over_pi + round_magic;
    const std::uint64_t quadrant = std::bit_cast<std::uint64_t>(t) & 3u;
    const double n = t - round_magic;

    const double r0 = x - n * pio2_1;
    const double w1 = n * pio2_2;
    const double r1 = r0 - w1;
    const double e1 = (r0 - r1) - w1;
    const double w2 = n * pio2_3;
    const double r = r1 - w2 + (e1 - n * pio2_3t);

    const double z = r * r;
    const double sp = s2 + z * (s3 + z * (s4 + z * (s5 + z * s6)));
    const double sin_r = r + r * z * (s1 + z * sp);
    const double cp = c1 + z * (c2 + z * (c3 + z * (c4 + z * (c5 + z * c6))));
    const double hz = 0.5 * z;
    const double w = 1.0 - hz;
    const double cos_r = w + (((1.0 - w) - hz) + z * z * cp);

    const double v = select(quadrant & 1u, cos_r, sin_r);
    return std::bit_cast<double>(std::bit_cast<std::uint64_t>(v) ^ ((quadrant & 2u) << 62));
}

inline double fast_sin(double x)
{
    if (!(std::fabs(x) <= sin_reduction_limit)) return std::sin(x);
    return sin_core(x);
}

// exp(x) for x <= 0; inputs below -708 flush to exp(-708).
inline double exp_core_nonpositive(double x)
{
    constexpr double log2e = 1.44269504088896338700e+00;
    constexpr double ln2_hi = 6.93147180369123816490e-01;
    constexpr double ln2_lo = 1.90821492927058770002e-10;

    x = select(x < -708.0, -708.0, x);
    const double t = x * log2e + round_magic;
    const double n = t - round_magic;
    const double r = (x - n * ln2_hi) - n * ln2_lo;

    double p = 1.0 / 6227020800.0;
    p = 1.0 / 479001600.0 + r * p;
    p = 1.0 / 39916800.0 + r * p;
    p = 1.0 / 3628800.0 + r * p;
    p = 1.0 / 362880.0 + r * p;
    p = 1.0 / 40320.0 + r * p;
    p = 1.0 / 5040.0 + r * p;
    p = 1.0 / 720.0 + r * p;
    p = 1.0 / 120.0 + r * p;
    p = 1.0 / 24.0 + r * p;
    p = 1.0 / 6.0 + r * p;
    p = 0.5 + r * p;
    p = 1.0 + r * p;
    p = 1.0 + r * p;

    const std::int64_t k = std::bit_cast<std::int64_t>(t) - std::bit_cast<std::int64_t>(round_magic);
    const double scale = std::bit_cast<double>(static_cast<std::uint64_t>(k + 1023) << 52);
    return p * scale;
}

inline double elu(double x)
{
    const bool pos = x > 0.0;
    return select(pos, x, exp_core_nonpositive(select(pos, 0.0, x)) - 1.0);
}

} // namespace nira::detail
