#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace nira {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) { return (1.0 / norm(a)) * a; }

// Closed scalar interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

// Axis-aligned box in up to three dimensions; unused trailing axes are ignored.
struct Box {
    Vec3 lower{};
    Vec3 upper{};
    std::size_t dim = 3;

    Vec3 center() const
    {
        Vec3 c{};
        for (std::size_t d = 0; d < dim; ++d) c[d] = 0.5 * (lower[d] + upper[d]);
        return c;
    }
    double extent(std::size_t d) const { return upper[d] - lower[d]; }
    double volume() const
    {
        double v = 1.0;
        for (std::size_t d = 0; d < dim; ++d) v *= extent(d);
        return v;
    }
};

// A parallelotope: center plus one generator vector per independent input symbol.
// An axis-aligned box has diagonal generators (half-extents); a ray segment has one.
struct AffineRegion {
    Vec3 center{};
    std::array<Vec3, 3> generators{};
    std::size_t num_generators = 0;
    std::size_t dim = 3;

    static AffineRegion from_box(const Box& box)
    {
        AffineRegion r;
        r.dim = box.dim;
        for (std::size_t d = 0; d < box.dim; ++d) {
            r.center[d] = 0.5 * (box.lower[d] + box.upper[d]);
            const double half = 0.5 * (box.upper[d] - box.lower[d]);
            if (half != 0.0) {
                Vec3 g{};
                g[d] = half;
                r.generators[r.num_generators++] = g;
            }
        }
        return r;
    }

    static AffineRegion segment(const Vec3& center, const Vec3& half_vector)
    {
        AffineRegion r;
        r.center = center;
        if (half_vector[0] != 0.0 || half_vector[1] != 0.0 || half_vector[2] != 0.0) {
            r.generators[0] = half_vector;
            r.num_generators = 1;
        }
        return r;
    }
};

} // namespace nira
