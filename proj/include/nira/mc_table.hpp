#pragma once

#include <array>
#include <cstdint>
#include <vector>

// Marching-cubes case table, built once from first principles.
//
// Corner c of a cell sits at offset (c & 1, (c >> 1) & 1, (c >> 2) & 1). A corner is "inside" when
// its value is <= the iso value; case index bit c is set for inside corners. Edge e = 4 * axis + m
// joins the two corners that differ only along `axis`, with m enumerating the other two bits.
//
// On each cube face the iso segments wrap runs of consecutive inside corners. On a face with two
// diagonal inside corners the corners are kept separate. The rule depends only on the face's own
// corners, so neighbouring cells agree on every shared face and the surface has no cracks.

namespace nira::mc {

struct EdgeEnds {
    int a, b; // corner a has the lower coordinate along the edge axis
    int axis;
};

inline constexpr std::array<EdgeEnds, 12> make_edges()
{
    std::array<EdgeEnds, 12> e{};
    for (int axis = 0; axis < 3; ++axis) {
        const int u = (axis + 1) % 3, w = (axis + 2) % 3;
        for (int m = 0; m < 4; ++m) {
            const int base = ((m & 1) << u) | (((m >> 1) & 1) << w);
            e[4 * axis + m] = {base, base | (1 << axis), axis};
        }
    }
    return e;
}

inline constexpr std::array<EdgeEnds, 12> edges = make_edges();

inline int edge_between(int c0, int c1)
{
    for (int e = 0; e < 12; ++e)
        if ((edges[e].a == c0 && edges[e].b == c1) || (edges[e].a == c1 && edges[e].b == c0)) return e;
    return -1;
}

struct Table {
    // triangles[case] holds edge-index triples.
    std::array<std::vector<std::array<int, 3>>, 256> triangles;
};

namespace detail {

inline Table build_table(bool flip)
{
    Table t;
    for (int cs = 0; cs < 256; ++cs) {
        auto inside = [&](int c) { return ((cs >> c) & 1) != 0; };
        std::array<int, 12> next;
        next.fill(-1);
        for (int axis = 0; axis < 3; ++axis) {
            const int u = (axis + 1) % 3, w = (axis + 2) % 3;
            for (int side = 0; side < 2; ++side) {
                // Counter-clockwise as seen from outside the cube.
                std::array<int, 4> ring;
                const int fixed = side << axis;
                const std::array<int, 4> uv{0, 1 << u, (1 << u) | (1 << w), 1 << w};
                for (int i = 0; i < 4; ++i) ring[i] = fixed | uv[side ? i : (4 - i) % 4];
                for (int i = 0; i < 4; ++i) {
                    const int ci = ring[i], cn = ring[(i + 1) % 4];
                    if (!inside(ci) || inside(cn)) continue;
                    // Leaving an inside run at ci: walk back to the start of the run. Diagonal
                    // inside corners form two runs of length one, which keeps them apart.
                    int j = i;
                    int steps = 0;
                    while (inside(ring[(j + 3) % 4]) && steps < 3) {
                        j = (j + 3) % 4;
                        ++steps;
                    }
                    const int exit_edge = edge_between(ci, cn);
                    const int entry_edge = edge_between(ring[(j + 3) % 4], ring[j]);
                    next[exit_edge] = entry_edge;
                }
            }
        }
        std::array<bool, 12> used{};
        for (int start = 0; start < 12; ++start) {
            if (next[start] < 0 || used[start]) continue;
            std::vector<int> loop;
            for (int e = start; !used[e]; e = next[e]) {
                used[e] = true;
                loop.push_back(e);
            }
            for (std::size_t k = 1; k + 1 < loop.size(); ++k) {
                if (flip)
                    t.triangles[cs].push_back({loop[0], loop[k + 1], loop[k]});
                else
                    t.triangles[cs].push_back({loop[0], loop[k], loop[k + 1]});
            }
        }
    }
    return t;
}

inline Table oriented_table()
{
    // Orient so triangle normals point from inside (low values) to outside.
    Table t = build_table(false);
    const auto& tri = t.triangles[1].at(0);
    double p[3][3];
    for (int k = 0; k < 3; ++k) {
        const EdgeEnds& e = edges[tri[k]];
        for (int d = 0; d < 3; ++d) p[k][d] = ((e.a >> d) & 1) * 1.0 + (d == e.axis ? 0.5 : 0.0);
    }
    double u[3], v[3];
    for (int d = 0; d < 3; ++d) {
        u[d] = p[1][d] - p[0][d];
        v[d] = p[2][d] - p[0][d];
    }
    const double n[3] = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    // Corner 0 is the only inside corner, so the outward direction is +(1,1,1).
    if (n[0] + n[1] + n[2] < 0.0) t = build_table(true);
    return t;
}

} // namespace detail

inline const Table& table()
{
    static const Table t = detail::oriented_table();
    return t;
}

} // namespace nira::mc
