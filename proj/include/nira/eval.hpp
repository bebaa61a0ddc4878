#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "nira/detail/parallel.hpp"
#include "nira/detail/random.hpp"
#include "nira/errors.hpp"
#include "nira/extract.hpp"
#include "nira/geometry.hpp"
#include "nira/inr.hpp"
#include "nira/paf.hpp"

namespace nira {

inline constexpr double psnr_identical_db = 999.0;

// Stream seeds derived from a base seed and an index, so parallel work is schedule-independent.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Evaluates the network at n uniform positions in the box. Sample i belongs to chunk i / chunk_size,
// and each chunk draws from its own derived stream.
inline std::vector<double> sample_region_values(const MlpNetwork& net, const Box& box, std::size_t n, std::uint64_t seed,
                                                unsigned threads = 1)
{
    constexpr std::size_t chunk = 65536;
    std::vector<double> values(n);
    const std::size_t chunks = (n + chunk - 1) / chunk;
    const std::size_t dim = net.input_dim;
    detail::parallel_for(chunks, threads, [&](std::size_t ci) {
        std::mt19937_64 rng(derive_seed(seed, ci));
        const std::size_t b = ci * chunk, e = std::min(n, b + chunk);
        std::vector<double> pts((e - b) * dim);
        for (std::size_t i = 0; i < e - b; ++i)
            for (std::size_t d = 0; d < dim; ++d)
                pts[i * dim + d] = box.lower[d] + (box.upper[d] - box.lower[d]) * detail::unit_uniform(rng);
        forward_batch(net, pts, std::span<double>(values.data() + b, e - b));
    });
    return values;
}

struct McHistogram {
    std::vector<double> bin_edges;
    std::vector<std::uint64_t> counts;
    std::uint64_t n_samples = 0;
    double mean = 0.0;
    double stddev = 0.0;
};

// Histogram over [min, max] of the values; a constant sample gets one unit-wide bin range around it.
inline McHistogram histogram(const std::vector<double>& values, std::size_t bins = 64)
{
    if (values.empty()) throw ContractError("histogram: no samples");
    if (bins == 0) throw ContractError("histogram: bin count must be positive");
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    double lo = *mn, hi = *mx;
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    McHistogram h;
    h.bin_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) h.bin_edges[b] = std::lerp(lo, hi, static_cast<double>(b) / static_cast<double>(bins));
    h.counts.assign(bins, 0);
    const double scale = static_cast<double>(bins) / (hi - lo);
    // Sums of deviations from the first sample: exact for constant data, less cancellation otherwise.
    const double shift = values.front();
    double sum = 0.0;
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - lo) * scale);
        b = std::min(b, bins - 1);
        ++h.counts[b];
        sum += v - shift;
    }
    h.n_samples = values.size();
    h.mean = shift + sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - h.mean) * (v - h.mean);
    h.stddev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    return h;
}

inline McHistogram mc_sample_region(const MlpNetwork& net, const Box& box, std::size_t n, std::uint64_t seed,
                                    std::size_t bins = 64, unsigned threads = 1)
{
    if (n == 0) throw ContractError("mc_sample_region: n must be positive");
    return histogram(sample_region_values(net, box, n, seed, threads), bins);
}

// Probability mass of N(mu, sigma^2) on [a, b], computed on the tail side that avoids cancellation.
inline double gaussian_mass(double a, double b, double mu, double sigma)
{
    const double za = (a - mu) / (sigma * std::numbers::sqrt2), zb = (b - mu) / (sigma * std::numbers::sqrt2);
    if (za >= 0.0) return 0.5 * (std::erfc(za) - std::erfc(zb));
    if (zb <= 0.0) return 0.5 * (std::erfc(-zb) - std::erfc(-za));
    return 1.0 - 0.5 * (std::erfc(-za) + std::erfc(zb));
}

inline constexpr double kl_q_floor = 1e-300;

// D_KL(P || Q) in nats between the histogram and the Gaussian's mass on the same bins.
inline double kl_divergence(const McHistogram& h, const GaussianEstimate& est)
{
    if (!(est.sigma > 0.0)) throw UndefinedMetricError("KL divergence is undefined against a zero-width Gaussian");
    if (h.n_samples == 0) throw ContractError("kl_divergence: empty histogram");
    double kl = 0.0;
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        if (h.counts[b] == 0) continue;
        const double p = static_cast<double>(h.counts[b]) / static_cast<double>(h.n_samples);
        const double q = std::max(gaussian_mass(h.bin_edges[b], h.bin_edges[b + 1], est.mu, est.sigma), kl_q_floor);
        kl += p * std::log(p / q);
    }
    return kl;
}

// Gaussian fitted to k uniform samples (mean and unbiased standard deviation).
inline GaussianEstimate sample_gaussian_baseline(const MlpNetwork& net, const Box& box, std::size_t k, std::uint64_t seed)
{
    if (k < 2) throw ContractError("sample_gaussian_baseline: k must be at least 2");
    const auto v = sample_region_values(net, box, k, seed);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(k);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(k - 1))};
}

struct CellScore {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
    double fpr = 0.0, fnr = 0.0;
};

inline CellScore score_cells(const ActiveCellSet& predicted, const ActiveCellSet& truth)
{
    if (predicted.cells_per_axis != truth.cells_per_axis)
        throw ContractError("score_cells: leaf resolutions differ");
    const std::size_t n = truth.cells_per_axis;
    std::unordered_set<std::uint64_t> p, t;
    for (const auto& c : predicted.cells) p.insert(cell_key(c, n));
    for (const auto& c : truth.cells) t.insert(cell_key(c, n));
    CellScore s;
    for (std::uint64_t k : p) (t.count(k) ? s.tp : s.fp) += 1;
    s.fn = t.size() - s.tp;
    s.tn = static_cast<std::uint64_t>(n) * n * n - s.tp - s.fp - s.fn;
    s.fpr = s.fp + s.tn ? static_cast<double>(s.fp) / static_cast<double>(s.fp + s.tn) : 0.0;
    s.fnr = s.fn + s.tp ? static_cast<double>(s.fn) / static_cast<double>(s.fn + s.tp) : 0.0;
    return s;
}

// Peak signal-to-noise ratio of b against reference a, using a's value range as the peak.
inline double psnr(const ScalarVolume& a, const ScalarVolume& b)
{
    if (a.dims != b.dims || a.data.size() != b.data.size()) throw ContractError("psnr: volume dimensions differ");
    if (a.data.empty()) throw ContractError("psnr: empty volume");
    double se = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        se += d * d;
    }
    if (se == 0.0) return psnr_identical_db;
    const auto [mn, mx] = std::minmax_element(a.data.begin(), a.data.end());
    const double range = *mx - *mn;
    if (range == 0.0) throw UndefinedMetricError("PSNR is undefined for a reference volume with zero value range");
    const double rmse = std::sqrt(se / static_cast<double>(a.data.size()));
    return 20.0 * std::log10(range / rmse);
}

inline double rmse(const ScalarVolume& a, const ScalarVolume& b)
{
    if (a.data.size() != b.data.size()) throw ContractError("rmse: volume sizes differ");
    double se = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) se += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
    return std::sqrt(se / static_cast<double>(a.data.size()));
}

// Random sub-blocks of the domain with the given extent per axis.
inline std::vector<Box> random_blocks(const MlpNetwork& net, std::size_t count, const Vec3& extent, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<Box> blocks(count);
    for (auto& b : blocks) {
        b.dim = net.input_dim;
        for (std::size_t d = 0; d < net.input_dim; ++d) {
            const double room = (net.domain_upper[d] - net.domain_lower[d]) - extent[d];
            if (room < 0.0) throw ContractError("block extent exceeds the domain");
            b.lower[d] = net.domain_lower[d] + room * detail::unit_uniform(rng);
            b.upper[d] = b.lower[d] + extent[d];
        }
    }
    return blocks;
}

struct PhaseTimings {
    double acp_seconds = 0.0;
    double inr_seconds = 0.0;
    double mc_seconds = 0.0;
    double relative_inference_cost = 0.0; // mean bound-query time / single forward time
};

struct BenchRow {
    BoundMethod method = BoundMethod::UP;
    PhaseTimings timings;
    ExtractCounters counters;
    double mean_pruned_volume = 0.0;
    std::size_t active_cells = 0;
    std::size_t triangles = 0;
    CellScore score;
};

// Mean wall time per point of an ordinary (batched, single-threaded) network evaluation.
inline double time_single_forward(const MlpNetwork& net, std::size_t reps = 65536)
{
    std::mt19937_64 rng(12345);
    std::vector<double> pts(reps * net.input_dim);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::size_t d = i % net.input_dim;
        pts[i] = net.domain_lower[d] + (net.domain_upper[d] - net.domain_lower[d]) * detail::unit_uniform(rng);
    }
    std::vector<double> out(reps);
    forward_batch(net, std::span<const double>(pts.data(), std::min(pts.size(), 4096 * net.input_dim)),
                  std::span<double>(out.data(), std::min<std::size_t>(reps, 4096)));
    const auto t0 = std::chrono::steady_clock::now();
    forward_batch(net, pts, out);
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(reps);
}

// Runs the extraction pipeline once per method with phase timings, single-threaded. The dense
// method has no prediction phase: it evaluates the whole corner grid and classifies from it.
inline std::vector<BenchRow> bench_extraction(const MlpNetwork& net, ExtractConfig cfg, const std::vector<BoundMethod>& methods)
{
    using clock = std::chrono::steady_clock;
    cfg.threads = 1;
    cfg.validate(net);
    const double t_forward = time_single_forward(net);
    ExtractConfig dense_cfg = cfg;
    dense_cfg.bound.method = BoundMethod::Dense;
    const ActiveCellSet truth = true_active_cells(net, dense_cfg);
    const std::size_t n = cfg.cells_per_axis();
    std::vector<BenchRow> rows;
    for (BoundMethod m : methods) {
        cfg.bound.method = m;
        BenchRow row;
        row.method = m;
        ActiveCellSet set;
        const auto t0 = clock::now();
        if (m != BoundMethod::Dense) set = kdtree_extract(net, cfg);
        const auto t1 = clock::now();
        const CornerValues cv(net, n, m == BoundMethod::Dense ? all_corner_keys(n) : corner_keys(set.cells, n), 1);
        if (m == BoundMethod::Dense) {
            set.cells_per_axis = n;
            set.cells = cells_straddling(cv, n, cfg.iso_value);
        }
        const auto t2 = clock::now();
        const McMesh mesh = marching_cubes(net, set, cv, cfg.iso_value);
        const auto t3 = clock::now();
        row.timings.acp_seconds = std::chrono::duration<double>(t1 - t0).count();
        row.timings.inr_seconds = std::chrono::duration<double>(t2 - t1).count();
        row.timings.mc_seconds = std::chrono::duration<double>(t3 - t2).count();
        row.counters = set.counters;
        row.counters.inr_point_evals = cv.size();
        if (set.counters.bound_queries > 0 && t_forward > 0.0)
            row.timings.relative_inference_cost =
                row.timings.acp_seconds / static_cast<double>(set.counters.bound_queries) / t_forward;
        row.mean_pruned_volume = set.mean_pruned_volume();
        row.active_cells = set.cells.size();
        row.triangles = mesh.mesh.triangles.size();
        row.score = score_cells(set, truth);
        rows.push_back(row);
    }
    return rows;
}

} // namespace nira
