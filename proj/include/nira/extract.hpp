#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "nira/bounds.hpp"
#include "nira/detail/parallel.hpp"
#include "nira/errors.hpp"
#include "nira/geometry.hpp"
#include "nira/inr.hpp"
#include "nira/mc_table.hpp"
#include "nira/mesh.hpp"

namespace nira {

struct ExtractConfig {
    double iso_value = 0.0;
    std::size_t max_depth = 9;
    BoundConfig bound;
    unsigned threads = 1;

    std::size_t cells_per_axis() const { return std::size_t{1} << (max_depth / 3); }

    void validate(const MlpNetwork& net) const
    {
        if (net.input_dim != 3) throw ContractError("extraction needs a 3-D network");
        if (max_depth % 3 != 0) throw ContractError("max_depth must be a multiple of 3, got " + std::to_string(max_depth));
        if (max_depth == 0 || max_depth > 30) throw ContractError("max_depth must be in [3, 30]");
        if (!std::isfinite(iso_value)) throw ContractError("iso value must be finite");
        bound.validate(net.input_dim);
    }
};

using CellIndex = std::array<std::uint32_t, 3>;

struct ExtractCounters {
    std::uint64_t nodes_visited = 0;
    std::uint64_t bound_queries = 0;
    std::uint64_t inr_point_evals = 0;
    std::uint64_t pruned_nodes = 0;
    double pruned_volume = 0.0; // summed over pruned nodes, domain volume = 1
};

struct ActiveCellSet {
    std::size_t cells_per_axis = 0;
    std::vector<CellIndex> cells;
    ExtractCounters counters;
    bool root_pruned = false; // iso value lies outside the bound of the whole domain

    double mean_pruned_volume() const
    {
        return counters.pruned_nodes ? counters.pruned_volume / static_cast<double>(counters.pruned_nodes) : 0.0;
    }
};

inline std::uint64_t cell_key(const CellIndex& c, std::size_t n)
{
    return c[0] + static_cast<std::uint64_t>(n) * (c[1] + static_cast<std::uint64_t>(n) * c[2]);
}

inline Box cell_box(const MlpNetwork& net, std::size_t n, const CellIndex& c)
{
    Box b;
    for (std::size_t d = 0; d < 3; ++d) {
        b.lower[d] = lattice_coord(net.domain_lower[d], net.domain_upper[d], c[d], static_cast<std::int64_t>(n));
        b.upper[d] = lattice_coord(net.domain_lower[d], net.domain_upper[d], c[d] + 1, static_cast<std::int64_t>(n));
    }
    return b;
}

// Lattice corner values of a leaf grid with n cells per axis, evaluated once per distinct corner.
class CornerValues {
public:
    CornerValues(const MlpNetwork& net, std::size_t n, std::vector<std::uint64_t> keys, unsigned threads)
        : n_(n), keys_(std::move(keys))
    {
        std::sort(keys_.begin(), keys_.end());
        keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
        values_.resize(keys_.size());
        constexpr std::size_t chunk = 4096;
        const std::size_t chunks = (keys_.size() + chunk - 1) / chunk;
        detail::parallel_for(chunks, threads, [&](std::size_t ci) {
            const std::size_t b = ci * chunk, e = std::min(keys_.size(), b + chunk);
            std::vector<double> pts((e - b) * 3);
            for (std::size_t i = b; i < e; ++i) {
                const Vec3 p = position(net, keys_[i]);
                for (std::size_t d = 0; d < 3; ++d) pts[(i - b) * 3 + d] = p[d];
            }
            forward_batch(net, pts, std::span<double>(values_.data() + b, e - b));
        });
    }

    std::size_t size() const { return keys_.size(); }

    std::uint64_t key(std::uint64_t i, std::uint64_t j, std::uint64_t k) const
    {
        const std::uint64_t m = n_ + 1;
        return i + m * (j + m * k);
    }

    double value(std::uint64_t key) const
    {
        if (keys_.size() == (n_ + 1) * (n_ + 1) * (n_ + 1)) return values_[static_cast<std::size_t>(key)];
        auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
        if (it == keys_.end() || *it != key) throw ContractError("corner value requested for an unevaluated corner");
        return values_[static_cast<std::size_t>(it - keys_.begin())];
    }

    Vec3 position(const MlpNetwork& net, std::uint64_t key) const
    {
        const std::uint64_t m = n_ + 1;
        const std::uint64_t idx[3] = {key % m, (key / m) % m, key / (m * m)};
        Vec3 p{};
        for (std::size_t d = 0; d < 3; ++d)
            p[d] = lattice_coord(net.domain_lower[d], net.domain_upper[d], static_cast<std::int64_t>(idx[d]),
                                 static_cast<std::int64_t>(n_));
        return p;
    }

private:
    std::size_t n_;
    std::vector<std::uint64_t> keys_;
    std::vector<double> values_;
};

inline std::vector<std::uint64_t> corner_keys(const std::vector<CellIndex>& cells, std::size_t n)
{
    const std::uint64_t m = n + 1;
    std::vector<std::uint64_t> keys;
    keys.reserve(cells.size() * 8);
    for (const CellIndex& c : cells)
        for (int corner = 0; corner < 8; ++corner) {
            const std::uint64_t i = c[0] + (corner & 1), j = c[1] + ((corner >> 1) & 1), k = c[2] + ((corner >> 2) & 1);
            keys.push_back(i + m * (j + m * k));
        }
    return keys;
}

// Cells of an n-per-axis leaf grid whose corner range [min, max] contains c, in lattice order.
inline std::vector<CellIndex> cells_straddling(const CornerValues& cv, std::size_t n, double c)
{
    std::vector<CellIndex> cells;
    for (std::uint32_t k = 0; k < n; ++k)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t i = 0; i < n; ++i) {
                double lo = std::numeric_limits<double>::infinity(), hi = -lo;
                for (int corner = 0; corner < 8; ++corner) {
                    const double v = cv.value(cv.key(i + (corner & 1), j + ((corner >> 1) & 1), k + ((corner >> 2) & 1)));
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                if (lo <= c && c <= hi) cells.push_back({i, j, k});
            }
    return cells;
}

inline std::vector<std::uint64_t> all_corner_keys(std::size_t n)
{
    std::vector<std::uint64_t> keys((n + 1) * (n + 1) * (n + 1));
    for (std::uint64_t i = 0; i < keys.size(); ++i) keys[i] = i;
    return keys;
}

// Ground truth: a cell is active iff the iso value lies within [min, max] of its corner values.
inline ActiveCellSet true_active_cells(const MlpNetwork& net, const ExtractConfig& cfg)
{
    cfg.validate(net);
    const std::size_t n = cfg.cells_per_axis();
    const CornerValues cv(net, n, all_corner_keys(n), cfg.threads);
    ActiveCellSet out;
    out.cells_per_axis = n;
    out.counters.inr_point_evals = cv.size();
    out.cells = cells_straddling(cv, n, cfg.iso_value);
    return out;
}

namespace detail {

struct KdNode {
    std::array<std::uint32_t, 3> lo, hi; // lattice cells, hi exclusive
    std::size_t depth;
};

struct KdResult {
    std::vector<CellIndex> cells;
    ExtractCounters counters;
};

class KdTree {
public:
    KdTree(const MlpNetwork& net, const ExtractConfig& cfg) : net_(net), cfg_(cfg), n_(cfg.cells_per_axis()) {}

    // True when the node's bound admits the iso value.
    bool admits(const KdNode& node, ExtractCounters& ctr) const
    {
        Box b;
        for (std::size_t d = 0; d < 3; ++d) {
            b.lower[d] = lattice_coord(net_.domain_lower[d], net_.domain_upper[d], node.lo[d], static_cast<std::int64_t>(n_));
            b.upper[d] = lattice_coord(net_.domain_lower[d], net_.domain_upper[d], node.hi[d], static_cast<std::int64_t>(n_));
        }
        ++ctr.nodes_visited;
        ++ctr.bound_queries;
        const Interval r = region_bound(net_, AffineRegion::from_box(b), cfg_.bound);
        const double c = cfg_.iso_value;
        if (c < r.lo || c > r.hi) {
            ++ctr.pruned_nodes;
            double v = 1.0;
            for (std::size_t d = 0; d < 3; ++d) v *= static_cast<double>(node.hi[d] - node.lo[d]) / static_cast<double>(n_);
            ctr.pruned_volume += v;
            return false;
        }
        return true;
    }

    static std::array<KdNode, 2> split(const KdNode& node)
    {
        std::size_t axis = 0;
        for (std::size_t d = 1; d < 3; ++d)
            if (node.hi[d] - node.lo[d] > node.hi[axis] - node.lo[axis]) axis = d;
        const std::uint32_t mid = node.lo[axis] + (node.hi[axis] - node.lo[axis]) / 2;
        KdNode a = node, b = node;
        a.hi[axis] = mid;
        b.lo[axis] = mid;
        a.depth = b.depth = node.depth + 1;
        return {a, b};
    }

    void descend(const KdNode& node, KdResult& out) const
    {
        if (!admits(node, out.counters)) return;
        if (node.depth == cfg_.max_depth) {
            out.cells.push_back({node.lo[0], node.lo[1], node.lo[2]});
            return;
        }
        for (const KdNode& child : split(node)) descend(child, out);
    }

private:
    const MlpNetwork& net_;
    const ExtractConfig& cfg_;
    std::size_t n_;
};

} // namespace detail

// Hierarchical active-cell prediction: bound each kd-tree node, prune nodes whose bound excludes
// the iso value, split survivors along their widest axis, and collect leaves at max_depth.
inline ActiveCellSet kdtree_extract(const MlpNetwork& net, const ExtractConfig& cfg)
{
    cfg.validate(net);
    if (cfg.bound.method == BoundMethod::Dense) return true_active_cells(net, cfg);
    const std::size_t n = cfg.cells_per_axis();
    const detail::KdTree tree(net, cfg);
    ActiveCellSet out;
    out.cells_per_axis = n;

    // Expand breadth-first to a fixed frontier depth, then hand whole subtrees to workers.
    // The frontier does not depend on the thread count, so results are identical for any count.
    const std::size_t frontier_depth = std::min<std::size_t>(cfg.max_depth, 6);
    const auto nn = static_cast<std::uint32_t>(n);
    std::vector<detail::KdNode> level{detail::KdNode{{0, 0, 0}, {nn, nn, nn}, 0}};
    bool first = true;
    while (!level.empty() && level.front().depth < frontier_depth) {
        std::vector<detail::KdNode> next;
        for (const auto& node : level) {
            if (!tree.admits(node, out.counters)) {
                if (first) out.root_pruned = true;
                continue;
            }
            for (const auto& child : detail::KdTree::split(node)) next.push_back(child);
        }
        first = false;
        level = std::move(next);
    }
    std::vector<detail::KdResult> parts(level.size());
    detail::parallel_for(level.size(), cfg.threads, [&](std::size_t i) { tree.descend(level[i], parts[i]); });
    for (auto& p : parts) {
        out.cells.insert(out.cells.end(), p.cells.begin(), p.cells.end());
        out.counters.nodes_visited += p.counters.nodes_visited;
        out.counters.bound_queries += p.counters.bound_queries;
        out.counters.pruned_nodes += p.counters.pruned_nodes;
        out.counters.pruned_volume += p.counters.pruned_volume;
    }
    return out;
}

inline constexpr double mc_snap_distance = 1e-5;

struct McMesh {
    TriangleMesh mesh;
    std::vector<std::uint32_t> triangle_cell; // index into the input cell list
    std::uint64_t corner_evals = 0;
};

// Marching cubes over the given leaf cells. Corner values are shared between cells; an edge
// vertex is always interpolated from the edge's lower lattice endpoint so neighbouring cells
// produce bit-identical vertices.
// The corner values must cover every corner of the given cells.
inline McMesh marching_cubes(const MlpNetwork& net, const ActiveCellSet& set, const CornerValues& cv, double iso)
{
    McMesh out;
    out.corner_evals = cv.size();
    const auto& table = mc::table();
    std::unordered_map<std::uint64_t, std::uint32_t> vertex_of_edge;
    for (std::size_t ci = 0; ci < set.cells.size(); ++ci) {
        const CellIndex& c = set.cells[ci];
        std::array<std::uint64_t, 8> key;
        std::array<double, 8> val;
        int cs = 0;
        for (int corner = 0; corner < 8; ++corner) {
            key[corner] = cv.key(c[0] + (corner & 1), c[1] + ((corner >> 1) & 1), c[2] + ((corner >> 2) & 1));
            val[corner] = cv.value(key[corner]);
            if (val[corner] <= iso) cs |= 1 << corner;
        }
        for (const auto& tri : table.triangles[cs]) {
            std::array<std::uint32_t, 3> idx;
            for (int k = 0; k < 3; ++k) {
                const mc::EdgeEnds& e = mc::edges[tri[k]];
                const Vec3 p = cv.position(net, key[e.a]);
                const Vec3 q = cv.position(net, key[e.b]);
                const double len = q[e.axis] - p[e.axis];
                const double s = (iso - val[e.a]) / (val[e.b] - val[e.a]);
                // Vertices this close to a lattice corner become the corner itself, shared by all
                // edges that meet there.
                std::uint64_t vkey = key[e.a] * 4 + static_cast<std::uint64_t>(e.axis);
                if (s * len <= mc_snap_distance) vkey = key[e.a] * 4 + 3;
                else if ((1.0 - s) * len <= mc_snap_distance) vkey = key[e.b] * 4 + 3;
                auto [it, fresh] = vertex_of_edge.try_emplace(vkey, static_cast<std::uint32_t>(out.mesh.vertices.size()));
                if (fresh) {
                    Vec3 v = p;
                    if (vkey % 4 == 3) v = vkey / 4 == key[e.a] ? p : q;
                    else v[e.axis] = p[e.axis] + s * len;
                    out.mesh.vertices.push_back(v);
                }
                idx[k] = it->second;
            }
            if (idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2]) continue;
            const auto& vs = out.mesh.vertices;
            if (triangle_area(vs[idx[0]], vs[idx[1]], vs[idx[2]]) <= 1e-12) continue;
            out.mesh.triangles.push_back(idx);
            out.triangle_cell.push_back(static_cast<std::uint32_t>(ci));
        }
    }
    return out;
}

inline McMesh marching_cubes(const MlpNetwork& net, const ActiveCellSet& set, double iso, unsigned threads = 1)
{
    if (set.cells.empty()) return {};
    const CornerValues cv(net, set.cells_per_axis, corner_keys(set.cells, set.cells_per_axis), threads);
    return marching_cubes(net, set, cv, iso);
}

struct Extraction {
    ActiveCellSet active;
    McMesh surface;
};

// Active-cell prediction followed by marching cubes; inr_point_evals counts the distinct lattice
// corners evaluated (the full corner grid for the dense method).
inline Extraction extract_surface(const MlpNetwork& net, const ExtractConfig& cfg)
{
    Extraction ex;
    ex.active = kdtree_extract(net, cfg);
    ex.surface = marching_cubes(net, ex.active, cfg.iso_value, cfg.threads);
    if (cfg.bound.method != BoundMethod::Dense) ex.active.counters.inr_point_evals = ex.surface.corner_evals;
    return ex;
}

} // namespace nira
