#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nira/errors.hpp"
#include "nira/geometry.hpp"
#include "nira/weights_io.hpp"

namespace nira {

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
};

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * norm(cross(b - a, c - a)); }

// Merges vertices with bit-identical coordinates and remaps triangles.
inline TriangleMesh dedup_vertices(const TriangleMesh& mesh)
{
    TriangleMesh out;
    std::map<Vec3, std::uint32_t> index;
    std::vector<std::uint32_t> remap(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        auto [it, fresh] = index.try_emplace(mesh.vertices[i], static_cast<std::uint32_t>(out.vertices.size()));
        if (fresh) out.vertices.push_back(mesh.vertices[i]);
        remap[i] = it->second;
    }
    out.triangles.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles) out.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
    return out;
}

inline void write_obj(std::ostream& out, const TriangleMesh& mesh)
{
    out << "# nira mesh: " << mesh.vertices.size() << " vertices, " << mesh.triangles.size() << " faces\n";
    for (const Vec3& v : mesh.vertices)
        out << "v " << format_double(v[0]) << ' ' << format_double(v[1]) << ' ' << format_double(v[2]) << '\n';
    for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

inline void export_obj(const TriangleMesh& mesh, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write OBJ file '" + path + "'");
    write_obj(out, dedup_vertices(mesh));
    if (!out) throw IoError("write failed for OBJ file '" + path + "'");
}

inline TriangleMesh read_obj(std::istream& in)
{
    TriangleMesh mesh;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 v{};
            if (!(ss >> v[0] >> v[1] >> v[2])) throw ParseError("OBJ line " + std::to_string(line_no) + ": bad vertex");
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::array<std::uint32_t, 3> t{};
            for (auto& idx : t) {
                std::string tok;
                if (!(ss >> tok)) throw ParseError("OBJ line " + std::to_string(line_no) + ": face needs 3 indices");
                const long v = std::stol(tok.substr(0, tok.find('/')));
                if (v < 1 || static_cast<std::size_t>(v) > mesh.vertices.size())
                    throw ParseError("OBJ line " + std::to_string(line_no) + ": index out of range");
                idx = static_cast<std::uint32_t>(v - 1);
            }
            mesh.triangles.push_back(t);
        }
    }
    return mesh;
}

inline TriangleMesh import_obj(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open OBJ file '" + path + "'");
    return read_obj(in);
}

// Number of undirected edges not shared by exactly two triangles.
inline std::size_t count_non_manifold_edges(const TriangleMesh& mesh)
{
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> uses;
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            std::uint32_t a = t[k], b = t[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            ++uses[{a, b}];
        }
    std::size_t bad = 0;
    for (const auto& [edge, n] : uses)
        if (n != 2) ++bad;
    return bad;
}

} // namespace nira
