// Symmetric triangle quadrature and P1/P2 reference shape functions.
#pragma once

#include <array>
#include <cmath>

#include "gstokes/mesh.hpp"

namespace gstokes {

struct QuadPoint {
    std::array<double, 3> bary{};  // barycentric coordinates on the reference triangle
    double weight = 0.0;           // normalized: weights sum to 1 (multiply by |T|)
};

// 7-point degree-5 symmetric rule (Strang-Fix).
inline const std::array<QuadPoint, 7>& triangle_quadrature() {
    static const std::array<QuadPoint, 7> rule = [] {
        std::array<QuadPoint, 7> q{};
        const double a1 = (6.0 - std::sqrt(15.0)) / 21.0;
        const double a2 = (6.0 + std::sqrt(15.0)) / 21.0;
        const double w1 = (155.0 - std::sqrt(15.0)) / 1200.0;
        const double w2 = (155.0 + std::sqrt(15.0)) / 1200.0;
        q[0] = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 9.0 / 40.0};
        q[1] = {{1.0 - 2.0 * a1, a1, a1}, w1};
        q[2] = {{a1, 1.0 - 2.0 * a1, a1}, w1};
        q[3] = {{a1, a1, 1.0 - 2.0 * a1}, w1};
        q[4] = {{1.0 - 2.0 * a2, a2, a2}, w2};
        q[5] = {{a2, 1.0 - 2.0 * a2, a2}, w2};
        q[6] = {{a2, a2, 1.0 - 2.0 * a2}, w2};
        return q;
    }();
    return rule;
}

// P1 basis = barycentric coordinates themselves.
inline std::array<double, 3> p1_values(const std::array<double, 3>& l) { return l; }

// P2 basis: 3 vertex functions l_i(2 l_i - 1), then edge functions 4 l_i l_j
// on edges (0,1), (1,2), (2,0).
inline std::array<double, 6> p2_values(const std::array<double, 3>& l) {
    return {l[0] * (2.0 * l[0] - 1.0), l[1] * (2.0 * l[1] - 1.0), l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[0] * l[1],         4.0 * l[1] * l[2],         4.0 * l[2] * l[0]};
}

// dphi/dl_k for each of the 6 P2 functions; contract with grad(l_k) for physical gradients.
inline std::array<std::array<double, 3>, 6> p2_bary_gradients(const std::array<double, 3>& l) {
    std::array<std::array<double, 3>, 6> d{};
    d[0] = {4.0 * l[0] - 1.0, 0.0, 0.0};
    d[1] = {0.0, 4.0 * l[1] - 1.0, 0.0};
    d[2] = {0.0, 0.0, 4.0 * l[2] - 1.0};
    d[3] = {4.0 * l[1], 4.0 * l[0], 0.0};
    d[4] = {0.0, 4.0 * l[2], 4.0 * l[1]};
    d[5] = {4.0 * l[2], 0.0, 4.0 * l[0]};
    return d;
}

// Physical gradients of the barycentric coordinates of triangle t.
inline std::array<Vec2, 3> barycentric_gradients(const TriMesh& m, int t) {
    const Vec2& p0 = m.vertices[m.triangles[t].v[0]];
    const Vec2& p1 = m.vertices[m.triangles[t].v[1]];
    const Vec2& p2 = m.vertices[m.triangles[t].v[2]];
    const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    std::array<Vec2, 3> g;
    g[1] = {(p2.y - p0.y) / det, (p0.x - p2.x) / det};
    g[2] = {(p0.y - p1.y) / det, (p1.x - p0.x) / det};
    g[0] = {-g[1].x - g[2].x, -g[1].y - g[2].y};
    return g;
}

}  // namespace gstokes
