#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nira/bounds.hpp"
#include "nira/detail/parallel.hpp"
#include "nira/errors.hpp"
#include "nira/geometry.hpp"
#include "nira/inr.hpp"

namespace nira {

struct Ray {
    Vec3 origin{};
    Vec3 direction{1.0, 0.0, 0.0}; // unit length
};

struct RayHit {
    double s = 0.0;
    Vec3 point{};
};

struct Camera {
    Vec3 eye{0.0, 0.0, 3.0};
    Vec3 target{0.0, 0.0, 0.0};
    Vec3 up{0.0, 1.0, 0.0};
    double fov_y_deg = 45.0;
    std::size_t width = 256;
    std::size_t height = 256;

    Ray pixel_ray(std::size_t px, std::size_t py) const
    {
        const Vec3 f = normalized(target - eye);
        const Vec3 r = normalized(cross(f, up));
        const Vec3 u = cross(r, f);
        const double th = std::tan(0.5 * fov_y_deg * std::numbers::pi / 180.0);
        const double aspect = static_cast<double>(width) / static_cast<double>(height);
        const double x = (2.0 * (static_cast<double>(px) + 0.5) / static_cast<double>(width) - 1.0) * th * aspect;
        const double y = (1.0 - 2.0 * (static_cast<double>(py) + 0.5) / static_cast<double>(height)) * th;
        return {eye, normalized(f + x * r + y * u)};
    }

    void validate() const
    {
        if (width == 0 || height == 0) throw ContractError("image dimensions must be positive");
        if (!(fov_y_deg > 0.0 && fov_y_deg < 180.0)) throw ContractError("field of view must be in (0, 180) degrees");
        const Vec3 f = target - eye;
        if (norm(f) == 0.0) throw ContractError("camera eye and target coincide");
        if (norm(cross(f, up)) == 0.0) throw ContractError("camera up vector is parallel to the view direction");
    }
};

struct RaycastConfig {
    BoundConfig bound;
    double min_segment_fraction = 1.0 / 16384.0; // of the traversed ray length
    int refine_iterations = 60;
    unsigned threads = 1;
};

struct RaycastCounters {
    std::uint64_t bound_queries = 0;
    std::uint64_t point_evals = 0;
    std::uint64_t hits = 0;
};

// Parameter interval where the ray is inside the box, if any.
inline std::optional<std::pair<double, double>> clip_to_box(const Ray& ray, const Box& box)
{
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < 3; ++d) {
        if (ray.direction[d] == 0.0) {
            if (ray.origin[d] < box.lower[d] || ray.origin[d] > box.upper[d]) return std::nullopt;
            continue;
        }
        double a = (box.lower[d] - ray.origin[d]) / ray.direction[d];
        double b = (box.upper[d] - ray.origin[d]) / ray.direction[d];
        if (a > b) std::swap(a, b);
        t0 = std::max(t0, a);
        t1 = std::min(t1, b);
    }
    if (!(t0 < t1)) return std::nullopt;
    return std::make_pair(t0, t1);
}

// Nearest zero crossing of the network along the ray inside its domain. Segments are bisected
// front to back; a segment survives while its bound contains 0. At the minimum segment length a
// sign change between the endpoints is refined by bisection on the network itself.
inline std::optional<RayHit> cast_ray(const MlpNetwork& net, const Ray& ray, const RaycastConfig& cfg,
                                      RaycastCounters& ctr)
{
    if (net.input_dim != 3) throw ContractError("ray casting needs a 3-D network");
    const auto span = clip_to_box(ray, net.domain());
    if (!span) return std::nullopt;
    const double min_len = (span->second - span->first) * cfg.min_segment_fraction;
    auto at = [&](double s) { return ray.origin + s * ray.direction; };
    auto value = [&](double s) {
        ++ctr.point_evals;
        return forward(net, at(s));
    };
    std::vector<std::pair<double, double>> stack{*span};
    while (!stack.empty()) {
        const auto [a, b] = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (a + b);
        const AffineRegion seg = AffineRegion::segment(at(mid), (0.5 * (b - a)) * ray.direction);
        ++ctr.bound_queries;
        if (cfg.bound.method != BoundMethod::Dense) {
            const Interval r = region_bound(net, seg, cfg.bound);
            if (0.0 < r.lo || 0.0 > r.hi) continue;
        }
        if (b - a > min_len) {
            stack.emplace_back(mid, b);
            stack.emplace_back(a, mid);
            continue;
        }
        double lo = a, hi = b;
        const double flo = value(lo), fhi = value(hi);
        const bool inside_lo = flo <= 0.0;
        if (inside_lo == (fhi <= 0.0)) continue;
        for (int it = 0; it < cfg.refine_iterations && hi - lo > 0.0; ++it) {
            const double m = 0.5 * (lo + hi);
            if (m <= lo || m >= hi) break;
            if ((value(m) <= 0.0) == inside_lo)
                lo = m;
            else
                hi = m;
        }
        const double s = 0.5 * (lo + hi);
        ++ctr.hits;
        return RayHit{s, at(s)};
    }
    return std::nullopt;
}

struct DepthImage {
    std::size_t width = 0, height = 0;
    std::vector<std::optional<double>> depth; // row-major, top row first
    double depth_scale = 1.0;                 // s mapped to 65534 in the PGM
    RaycastCounters counters;

    std::size_t hit_count() const
    {
        return static_cast<std::size_t>(std::count_if(depth.begin(), depth.end(), [](const auto& d) { return d.has_value(); }));
    }
};

inline DepthImage raycast(const MlpNetwork& net, const Camera& cam, const RaycastConfig& cfg)
{
    cam.validate();
    cfg.bound.validate(net.input_dim);
    DepthImage img;
    img.width = cam.width;
    img.height = cam.height;
    img.depth.resize(cam.width * cam.height);
    const Box dom = net.domain();
    const Vec3 half = 0.5 * (dom.upper - dom.lower);
    img.depth_scale = norm(cam.eye - dom.center()) + norm(half);
    std::vector<RaycastCounters> row_ctr(cam.height);
    detail::parallel_for(cam.height, cfg.threads, [&](std::size_t py) {
        for (std::size_t px = 0; px < cam.width; ++px) {
            const auto hit = cast_ray(net, cam.pixel_ray(px, py), cfg, row_ctr[py]);
            if (hit) img.depth[py * cam.width + px] = hit->s;
        }
    });
    for (const auto& c : row_ctr) {
        img.counters.bound_queries += c.bound_queries;
        img.counters.point_evals += c.point_evals;
        img.counters.hits += c.hits;
    }
    return img;
}

inline constexpr std::uint16_t pgm_miss = 65535;

inline std::uint16_t quantize_depth(double s, double scale)
{
    const double q = std::round(std::clamp(s / scale, 0.0, 1.0) * 65534.0);
    return static_cast<std::uint16_t>(q);
}

inline void write_pgm(const DepthImage& img, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write image '" + path + "'");
    out << "P5\n" << img.width << ' ' << img.height << "\n65535\n";
    std::vector<unsigned char> buf(img.depth.size() * 2);
    for (std::size_t i = 0; i < img.depth.size(); ++i) {
        const std::uint16_t v = img.depth[i] ? quantize_depth(*img.depth[i], img.depth_scale) : pgm_miss;
        buf[2 * i] = static_cast<unsigned char>(v >> 8);
        buf[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed for image '" + path + "'");
}

struct Pgm16 {
    std::size_t width = 0, height = 0;
    std::vector<std::uint16_t> pixels;
};

inline Pgm16 read_pgm(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image '" + path + "'");
    std::string magic;
    std::size_t maxval = 0;
    Pgm16 img;
    in >> magic >> img.width >> img.height >> maxval;
    if (magic != "P5" || maxval != 65535) throw ParseError("'" + path + "' is not a 16-bit binary PGM");
    in.get();
    std::vector<unsigned char> buf(img.width * img.height * 2);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw ParseError("'" + path + "' is truncated");
    img.pixels.resize(img.width * img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = static_cast<std::uint16_t>(buf[2 * i] << 8 | buf[2 * i + 1]);
    return img;
}

} // namespace nira
