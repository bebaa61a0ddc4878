#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "nira/errors.hpp"
#include "nira/geometry.hpp"
#include "nira/detail/random.hpp"
#include "nira/inr.hpp"

// Analytic scalar fields used to build training volumes and as ground truth in tests.

namespace nira::fields {

enum class Kind { Gaussians, Wave, Sphere, Torus };

inline Kind parse_kind(std::string_view s)
{
    if (s == "gaussians") return Kind::Gaussians;
    if (s == "wave") return Kind::Wave;
    if (s == "sphere") return Kind::Sphere;
    if (s == "torus") return Kind::Torus;
    throw ParseError("unknown field '" + std::string(s) + "' (expected gaussians, wave, sphere or torus)");
}

struct Bump {
    Vec3 center;
    double amplitude;
    double width;
};

// Eight isotropic Gaussian bumps placed inside [-0.7, 0.7]^3.
inline std::vector<Bump> gaussian_bumps(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto u = [&](double lo, double hi) { return detail::uniform(rng, lo, hi); };
    std::vector<Bump> bumps(8);
    for (auto& b : bumps) {
        for (double& c : b.center) c = u(-0.7, 0.7);
        b.amplitude = u(0.5, 1.0);
        b.width = u(0.15, 0.35);
    }
    return bumps;
}

struct Field {
    Kind kind = Kind::Wave;
    std::vector<Bump> bumps;
    double radius = 0.5;       // sphere radius, torus major radius
    double minor_radius = 0.2; // torus

    double operator()(const Vec3& p) const
    {
        const double x = p[0], y = p[1], z = p[2];
        switch (kind) {
        case Kind::Wave: return std::sin(4.0 * x) * std::cos(4.0 * y) + z;
        case Kind::Sphere: return std::sqrt(x * x + y * y + z * z) - radius;
        case Kind::Torus: {
            const double q = std::sqrt(x * x + y * y) - radius;
            return std::sqrt(q * q + z * z) - minor_radius;
        }
        case Kind::Gaussians: {
            double v = 0.0;
            for (const auto& b : bumps) {
                const Vec3 d = p - b.center;
                v += b.amplitude * std::exp(-dot(d, d) / (2.0 * b.width * b.width));
            }
            return v;
        }
        }
        return 0.0;
    }
};

inline Field make_field(Kind kind, std::uint64_t seed = 7)
{
    Field f;
    f.kind = kind;
    if (kind == Kind::Gaussians) f.bumps = gaussian_bumps(seed);
    return f;
}

// One-hidden-layer sine network whose zero set is the sphere |p| = radius to about 1e-8:
// sin(a x + pi/2) = cos(a x) = 1 - a^2 x^2 / 2 + O(a^4 x^4), so the output is (|p|^2 - r^2) / (2r) + O(a^2).
// Near the surface the value agrees with the signed distance to first order.
inline MlpNetwork sphere_network(double radius = 0.5, double half_extent = 1.0, double a = 2e-3)
{
    if (!(radius > 0.0) || !(half_extent > 0.0) || !(a > 0.0)) throw ContractError("sphere_network: parameters must be positive");
    MlpNetwork net;
    net.activation = Activation::Sine;
    net.domain_lower = {-half_extent, -half_extent, -half_extent};
    net.domain_upper = {half_extent, half_extent, half_extent};
    LinearLayer hidden{3, 3, std::vector<double>(9, 0.0), std::vector<double>(3, std::numbers::pi / 2.0)};
    for (std::size_t d = 0; d < 3; ++d) hidden.weights[d * 3 + d] = a;
    const double k = 1.0 / (a * a * radius);
    LinearLayer out{1, 3, std::vector<double>(3, -k), std::vector<double>{3.0 * k - 0.5 * radius}};
    net.layers = {hidden, out};
    return net;
}

// Samples the field on a grid spanning [lower, upper] inclusively, x fastest.
inline ScalarVolume sample(const Field& f, const std::array<std::size_t, 3>& dims, const Vec3& lower,
                           const Vec3& upper)
{
    ScalarVolume vol;
    vol.dims = dims;
    vol.data.resize(vol.size());
    for (std::size_t k = 0; k < dims[2]; ++k)
        for (std::size_t j = 0; j < dims[1]; ++j)
            for (std::size_t i = 0; i < dims[0]; ++i) {
                const Vec3 p{lattice_coord(lower[0], upper[0], static_cast<std::int64_t>(i), static_cast<std::int64_t>(dims[0] - 1)),
                             lattice_coord(lower[1], upper[1], static_cast<std::int64_t>(j), static_cast<std::int64_t>(dims[1] - 1)),
                             lattice_coord(lower[2], upper[2], static_cast<std::int64_t>(k), static_cast<std::int64_t>(dims[2] - 1))};
                vol.data[vol.index(i, j, k)] = f(p);
            }
    return vol;
}

} // namespace nira::fields
