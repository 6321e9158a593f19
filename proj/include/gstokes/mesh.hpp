// Structured uniform triangulations of the unit square.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gstokes {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

enum class BoundaryTag : std::uint8_t { Interior, Wall, Lid };

struct Triangle {
    std::array<int, 3> v;  // counter-clockwise vertex indices
};

struct Edge {
    int a = -1, b = -1;    // a < b
    Vec2 midpoint;
    BoundaryTag tag = BoundaryTag::Interior;
};

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class domain_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Triangulation of [0,1]^2. Immutable after construction.
struct TriMesh {
    int nx = 0, ny = 0;                 // vertex counts per axis
    std::vector<Vec2> vertices;
    std::vector<Triangle> triangles;
    std::vector<Edge> edges;
    std::vector<BoundaryTag> vertex_tag;
    std::vector<std::array<int, 3>> triangle_edges;  // edge index per local edge (0,1),(1,2),(2,0)

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }

    double signed_area(int t) const {
        const Vec2& p0 = vertices[triangles[t].v[0]];
        const Vec2& p1 = vertices[triangles[t].v[1]];
        const Vec2& p2 = vertices[triangles[t].v[2]];
        return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
    }
};

namespace detail {

inline bool on_unit_boundary(double c) { return std::abs(c) <= 1e-12 || std::abs(c - 1.0) <= 1e-12; }

inline BoundaryTag classify(Vec2 p) {
    if (!on_unit_boundary(p.x) && !on_unit_boundary(p.y)) return BoundaryTag::Interior;
    // Lid convention: anything on y=1, corners included.
    return std::abs(p.y - 1.0) <= 1e-12 ? BoundaryTag::Lid : BoundaryTag::Wall;
}

}  // namespace detail

// (nx-1)x(ny-1) cells, each split along the lower-left to upper-right diagonal.
inline TriMesh build_uniform(int nx, int ny) {
    if (nx < 2 || ny < 2)
        throw config_error("build_uniform: vertex counts must be >= 2, got " + std::to_string(nx) +
                           "x" + std::to_string(ny));
    TriMesh m;
    m.nx = nx;
    m.ny = ny;
    const double hx = 1.0 / (nx - 1), hy = 1.0 / (ny - 1);
    m.vertices.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            m.vertices.push_back({i * hx, j * hy});
    auto vid = [nx](int i, int j) { return j * nx + i; };

    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            m.triangles.push_back({{a, b, c}});
            m.triangles.push_back({{a, c, d}});
        }
    }

    m.vertex_tag.resize(m.vertices.size());
    for (std::size_t v = 0; v < m.vertices.size(); ++v) m.vertex_tag[v] = detail::classify(m.vertices[v]);

    std::map<std::pair<int, int>, int> edge_of;
    std::vector<int> edge_use;
    m.triangle_edges.resize(m.triangles.size());
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        for (int e = 0; e < 3; ++e) {
            int a = m.triangles[t].v[e], b = m.triangles[t].v[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            auto [it, inserted] = edge_of.try_emplace({a, b}, m.num_edges());
            if (inserted) {
                Edge ed;
                ed.a = a;
                ed.b = b;
                ed.midpoint = 0.5 * (m.vertices[a] + m.vertices[b]);
                m.edges.push_back(ed);
                edge_use.push_back(0);
            }
            ++edge_use[it->second];
            m.triangle_edges[t][e] = it->second;
        }
    }
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
        if (edge_use[e] == 1) m.edges[e].tag = detail::classify(m.edges[e].midpoint);
    }
    return m;
}

inline bool is_boundary(BoundaryTag t) { return t != BoundaryTag::Interior; }

struct PointLocation {
    int triangle = -1;
    std::array<double, 3> bary{};
};

// Barycentric coordinates of x in triangle t (may be negative outside).
inline std::array<double, 3> barycentric(const TriMesh& m, int t, Vec2 x) {
    const Vec2& p0 = m.vertices[m.triangles[t].v[0]];
    const Vec2& p1 = m.vertices[m.triangles[t].v[1]];
    const Vec2& p2 = m.vertices[m.triangles[t].v[2]];
    const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    const double l1 = ((x.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (x.y - p0.y)) / det;
    const double l2 = ((p1.x - p0.x) * (x.y - p0.y) - (x.x - p0.x) * (p1.y - p0.y)) / det;
    return {1.0 - l1 - l2, l1, l2};
}

inline PointLocation locate_point(const TriMesh& m, Vec2 x) {
    if (x.x < -1e-12 || x.x > 1.0 + 1e-12 || x.y < -1e-12 || x.y > 1.0 + 1e-12)
        throw domain_error("locate_point: point outside the unit square");
    // Structured mesh: jump straight to the containing cell.
    const double hx = 1.0 / (m.nx - 1), hy = 1.0 / (m.ny - 1);
    int i = std::min(static_cast<int>(x.x / hx), m.nx - 2);
    int j = std::min(static_cast<int>(x.y / hy), m.ny - 2);
    i = std::max(i, 0);
    j = std::max(j, 0);
    const int cell = 2 * (j * (m.nx - 1) + i);
    for (int cand : {cell, cell + 1}) {
        auto b = barycentric(m, cand, x);
        if (b[0] >= -1e-12 && b[1] >= -1e-12 && b[2] >= -1e-12) return {cand, b};
    }
    // Roundoff near a cell border: fall back to neighbours.
    for (int t = 0; t < m.num_triangles(); ++t) {
        auto b = barycentric(m, t, x);
        if (b[0] >= -1e-10 && b[1] >= -1e-10 && b[2] >= -1e-10) return {t, b};
    }
    throw domain_error("locate_point: no containing triangle found");
}

inline void export_mesh_csv(const TriMesh& m, std::ostream& vertices_out, std::ostream& triangles_out) {
    vertices_out << "id,x,y,tag\n";
    for (int v = 0; v < m.num_vertices(); ++v) {
        const char* tag = m.vertex_tag[v] == BoundaryTag::Interior ? "interior"
                          : m.vertex_tag[v] == BoundaryTag::Lid    ? "lid"
                                                                   : "wall";
        vertices_out << v << ',' << m.vertices[v].x << ',' << m.vertices[v].y << ',' << tag << '\n';
    }
    triangles_out << "id,v0,v1,v2\n";
    for (int t = 0; t < m.num_triangles(); ++t)
        triangles_out << t << ',' << m.triangles[t].v[0] << ',' << m.triangles[t].v[1] << ','
                      << m.triangles[t].v[2] << '\n';
}

}  // namespace gstokes
