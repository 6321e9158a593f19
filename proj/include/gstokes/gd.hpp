// Taylor-Hood gradient discretisation: P2 vector velocity with homogeneous
// Dirichlet constraints, P1 scalar pressure, reconstruction operators
// evaluated at quadrature points.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "gstokes/fields.hpp"
#include "gstokes/mesh.hpp"
#include "gstokes/quadrature.hpp"

namespace gstokes {

using Vector = Eigen::VectorXd;

struct GradientDiscretisation {
    TriMesh mesh;

    int n_p2_nodes = 0;              // scalar P2 nodes: vertices then edge midpoints
    std::vector<Vec2> p2_coords;     // node coordinates
    std::vector<int> free_index;     // scalar node -> free index, -1 if constrained
    std::vector<int> node_of_free;   // inverse map
    int n_free_scalar = 0;

    int dim_X0 = 0;                  // free velocity dofs (2 per free scalar node)
    int dim_Y = 0;                   // pressure dofs (P1 vertices)

    // Per-triangle, per-quadrature-point shape data.
    struct TriData {
        double area = 0.0;
        std::array<Vec2, 7> xq;                       // physical quadrature points
        std::array<std::array<double, 6>, 7> phi;     // P2 values
        std::array<std::array<Vec2, 6>, 7> dphi;      // P2 physical gradients
        std::array<std::array<double, 3>, 7> psi;     // P1 values
    };
    std::vector<TriData> tri;

    // Global scalar P2 node ids of triangle t: vertices 0..2, edge nodes 3..5
    // on local edges (0,1),(1,2),(2,0).
    std::array<int, 6> tri_nodes(int t) const {
        const auto& tv = mesh.triangles[t].v;
        const auto& te = mesh.triangle_edges[t];
        const int nv = mesh.num_vertices();
        return {tv[0], tv[1], tv[2], nv + te[0], nv + te[1], nv + te[2]};
    }

    bool node_constrained(int node) const { return free_index[node] < 0; }
};

inline GradientDiscretisation make_taylor_hood(TriMesh mesh) {
    GradientDiscretisation gd;
    gd.mesh = std::move(mesh);
    const TriMesh& m = gd.mesh;
    const int nv = m.num_vertices(), ne = m.num_edges();
    gd.n_p2_nodes = nv + ne;
    gd.p2_coords.resize(gd.n_p2_nodes);
    for (int v = 0; v < nv; ++v) gd.p2_coords[v] = m.vertices[v];
    for (int e = 0; e < ne; ++e) gd.p2_coords[nv + e] = m.edges[e].midpoint;

    gd.free_index.assign(gd.n_p2_nodes, -1);
    for (int v = 0; v < nv; ++v)
        if (!is_boundary(m.vertex_tag[v])) gd.free_index[v] = gd.n_free_scalar++, gd.node_of_free.push_back(v);
    for (int e = 0; e < ne; ++e)
        if (!is_boundary(m.edges[e].tag)) gd.free_index[nv + e] = gd.n_free_scalar++, gd.node_of_free.push_back(nv + e);

    gd.dim_X0 = 2 * gd.n_free_scalar;
    gd.dim_Y = nv;

    const auto& rule = triangle_quadrature();
    gd.tri.resize(m.num_triangles());
    for (int t = 0; t < m.num_triangles(); ++t) {
        auto& td = gd.tri[t];
        td.area = m.signed_area(t);
        const auto gl = barycentric_gradients(m, t);
        const auto& tv = m.triangles[t].v;
        for (int q = 0; q < 7; ++q) {
            const auto& l = rule[q].bary;
            td.xq[q] = l[0] * m.vertices[tv[0]] + l[1] * m.vertices[tv[1]] + l[2] * m.vertices[tv[2]];
            td.phi[q] = p2_values(l);
            td.psi[q] = p1_values(l);
            const auto db = p2_bary_gradients(l);
            for (int a = 0; a < 6; ++a) {
                Vec2 g{0.0, 0.0};
                for (int k = 0; k < 3; ++k) g = g + db[a][k] * gl[k];
                td.dphi[q][a] = g;
            }
        }
    }
    return gd;
}

// Velocity coefficient views. FreeView is an element of X_{D,0} (zero on the
// boundary); FullView carries all nodal values (used for g).
struct FreeView {
    const Vector& c;
};
struct FullView {
    const Vector& c;
};

inline double node_coeff(const GradientDiscretisation& gd, FreeView v, int node, int comp) {
    const int f = gd.free_index[node];
    return f < 0 ? 0.0 : v.c[2 * f + comp];
}
inline double node_coeff(const GradientDiscretisation&, FullView v, int node, int comp) {
    return v.c[2 * node + comp];
}

struct DiscreteVelocity {
    Vector coeffs;  // length dim_X0
};

struct DiscretePressure {
    Vector coeffs;  // length dim_Y
    bool mean_zero = true;
};

// Pi_D at quadrature point q of triangle t.
template <class View>
Vec2 velocity_at(const GradientDiscretisation& gd, View v, int t, int q) {
    const auto nodes = gd.tri_nodes(t);
    const auto& phi = gd.tri[t].phi[q];
    Vec2 r{0.0, 0.0};
    for (int a = 0; a < 6; ++a) {
        r.x += node_coeff(gd, v, nodes[a], 0) * phi[a];
        r.y += node_coeff(gd, v, nodes[a], 1) * phi[a];
    }
    return r;
}

// grad_D at quadrature point: (i,j) = d v_i / d x_j.
template <class View>
Mat2 gradient_at(const GradientDiscretisation& gd, View v, int t, int q) {
    const auto nodes = gd.tri_nodes(t);
    const auto& dphi = gd.tri[t].dphi[q];
    Mat2 g;
    for (int a = 0; a < 6; ++a) {
        const double cx = node_coeff(gd, v, nodes[a], 0);
        const double cy = node_coeff(gd, v, nodes[a], 1);
        g(0, 0) += cx * dphi[a].x;
        g(0, 1) += cx * dphi[a].y;
        g(1, 0) += cy * dphi[a].x;
        g(1, 1) += cy * dphi[a].y;
    }
    return g;
}

template <class View>
Mat2 symmetric_gradient_at(const GradientDiscretisation& gd, View v, int t, int q) {
    return sym(gradient_at(gd, v, t, q));
}

template <class View>
double divergence_at(const GradientDiscretisation& gd, View v, int t, int q) {
    return trace(gradient_at(gd, v, t, q));
}

// chi_D at quadrature point.
inline double pressure_at(const GradientDiscretisation& gd, const Vector& q_coeffs, int t, int q) {
    const auto& tv = gd.mesh.triangles[t].v;
    const auto& psi = gd.tri[t].psi[q];
    return q_coeffs[tv[0]] * psi[0] + q_coeffs[tv[1]] * psi[1] + q_coeffs[tv[2]] * psi[2];
}

// Pi_D at an arbitrary point of the domain.
template <class View>
Vec2 velocity_value(const GradientDiscretisation& gd, View v, Vec2 x) {
    const auto loc = locate_point(gd.mesh, x);
    const auto phi = p2_values(loc.bary);
    const auto nodes = gd.tri_nodes(loc.triangle);
    Vec2 r{0.0, 0.0};
    for (int a = 0; a < 6; ++a) {
        r.x += node_coeff(gd, v, nodes[a], 0) * phi[a];
        r.y += node_coeff(gd, v, nodes[a], 1) * phi[a];
    }
    return r;
}

// Nodal interpolation of a closed-form field. Returns the full coefficient
// vector (boundary values retained; needed for the boundary datum g).
inline Vector interpolate(const GradientDiscretisation& gd, const FieldExpr& f) {
    Vector c = Vector::Zero(2 * gd.n_p2_nodes);
    if (f.is_zero()) return c;
    for (int n = 0; n < gd.n_p2_nodes; ++n) {
        const Vec2 val = f(gd.p2_coords[n]);
        c[2 * n + 0] = val.x;
        c[2 * n + 1] = val.y;
    }
    return c;
}

// Restriction of a full coefficient vector to the free dofs.
inline Vector restrict_free(const GradientDiscretisation& gd, const Vector& full) {
    Vector c = Vector::Zero(gd.dim_X0);
    for (int f = 0; f < gd.n_free_scalar; ++f) {
        const int n = gd.node_of_free[f];
        c[2 * f + 0] = full[2 * n + 0];
        c[2 * f + 1] = full[2 * n + 1];
    }
    return c;
}

// Embedding of a free coefficient vector into the full layout (zero boundary).
inline Vector embed_full(const GradientDiscretisation& gd, const Vector& free) {
    Vector c = Vector::Zero(2 * gd.n_p2_nodes);
    for (int f = 0; f < gd.n_free_scalar; ++f) {
        const int n = gd.node_of_free[f];
        c[2 * n + 0] = free[2 * f + 0];
        c[2 * n + 1] = free[2 * f + 1];
    }
    return c;
}

}  // namespace gstokes
