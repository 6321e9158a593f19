// Assembly of the discrete forms of the scheme: mass and stiffness matrices,
// pressure-velocity coupling, the antisymmetric noise form, data vectors, and
// the nonlinear viscous residual/Jacobian.
#pragma once

#include <Eigen/Sparse>

#include <optional>
#include <stdexcept>
#include <vector>

#include "gstokes/gd.hpp"
#include "gstokes/rheology.hpp"

namespace gstokes {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AssembledForms {
    SparseMatrix M;        // velocity mass (Pi phi_i, Pi phi_j), dim_X0^2
    SparseMatrix K;        // eps:eps stiffness (the p=2 viscous operator)
    SparseMatrix B;        // coupling B(k,j) = (chi q_k, div phi_j), dim_Y x dim_X0
    SparseMatrix Bsigma;   // noise form, exactly antisymmetric
    Vector F_load;         // (F, Pi phi_i)
    Vector g_noise;        // ((sigma.grad) g, Pi phi_i)
    Vector g_div;          // (div_D g, chi q_k)
    Vector pressure_mean;  // m_k = int chi q_k dx (mean-zero multiplier row)

    // Boundary-datum reconstructions cached per (triangle, quad point).
    bool has_g = false;
    std::vector<std::array<Mat2, 7>> eps_g;   // eps_D g
    std::vector<std::array<double, 7>> div_g; // div_D g
};

namespace detail {

// Accumulate into the free vector if the node is unconstrained.
inline void add_free(const GradientDiscretisation& gd, Vector& out, int node, int comp, double val) {
    const int f = gd.free_index[node];
    if (f >= 0) out[2 * f + comp] += val;
}

}  // namespace detail

inline AssembledForms assemble_static(const GradientDiscretisation& gd, const FieldExpr& sigma,
                                      const std::optional<Vector>& g_full, const FieldExpr& F) {
    const auto& rule = triangle_quadrature();
    const int nT = gd.mesh.num_triangles();

    AssembledForms forms;
    forms.F_load = Vector::Zero(gd.dim_X0);
    forms.g_noise = Vector::Zero(gd.dim_X0);
    forms.g_div = Vector::Zero(gd.dim_Y);
    forms.pressure_mean = Vector::Zero(gd.dim_Y);
    forms.has_g = g_full.has_value();
    if (forms.has_g) {
        forms.eps_g.resize(nT);
        forms.div_g.resize(nT);
    }

    std::vector<Triplet> tM, tK, tB, tC;  // tC: one-sided noise form, antisymmetrized below
    tM.reserve(static_cast<std::size_t>(nT) * 144);
    tK.reserve(static_cast<std::size_t>(nT) * 144);
    tB.reserve(static_cast<std::size_t>(nT) * 36);
    if (!sigma.is_zero()) tC.reserve(static_cast<std::size_t>(nT) * 144);

    for (int t = 0; t < nT; ++t) {
        const auto nodes = gd.tri_nodes(t);
        const auto& td = gd.tri[t];
        const auto& tv = gd.mesh.triangles[t].v;
        for (int q = 0; q < 7; ++q) {
            const double w = rule[q].weight * td.area;
            const auto& phi = td.phi[q];
            const auto& dphi = td.dphi[q];
            const auto& psi = td.psi[q];
            const Vec2 xq = td.xq[q];

            if (forms.has_g) {
                const Mat2 gg = gradient_at(gd, FullView{*g_full}, t, q);
                forms.eps_g[t][q] = sym(gg);
                forms.div_g[t][q] = trace(gg);
            }

            // mass, stiffness, noise form over local vector dofs (a, comp i)
            for (int a = 0; a < 6; ++a) {
                const int fa = gd.free_index[nodes[a]];
                if (fa < 0) continue;
                for (int b = 0; b < 6; ++b) {
                    const int fb = gd.free_index[nodes[b]];
                    if (fb < 0) continue;
                    const double mab = w * phi[a] * phi[b];
                    // eps(phi_a e_i) : eps(phi_b e_j)
                    for (int i = 0; i < 2; ++i) {
                        tM.emplace_back(2 * fa + i, 2 * fb + i, mab);
                        for (int j = 0; j < 2; ++j) {
                            // strain of a scalar basis times unit vector:
                            // eps_kl = (d_a[l] delta_ik + d_a[k] delta_il)/2
                            const Vec2 da = dphi[a], db = dphi[b];
                            double kab;
                            if (i == j) {
                                kab = 0.5 * dot(da, db) + 0.5 * ((i == 0 ? da.x : da.y) * (j == 0 ? db.x : db.y));
                            } else {
                                kab = 0.5 * (i == 0 ? da.y : da.x) * (j == 0 ? db.y : db.x);
                            }
                            tK.emplace_back(2 * fa + i, 2 * fb + j, w * kab);
                        }
                    }
                }
            }

            if (!sigma.is_zero()) {
                const Vec2 s = sigma(xq);
                for (int a = 0; a < 6; ++a) {
                    const int fa = gd.free_index[nodes[a]];
                    if (fa < 0) continue;
                    for (int b = 0; b < 6; ++b) {
                        const int fb = gd.free_index[nodes[b]];
                        if (fb < 0) continue;
                        // ((sigma.grad) phi_b e_i) . (phi_a e_i)
                        const double c = w * (s.x * dphi[b].x + s.y * dphi[b].y) * phi[a];
                        tC.emplace_back(2 * fa + 0, 2 * fb + 0, c);
                        tC.emplace_back(2 * fa + 1, 2 * fb + 1, c);
                    }
                }
            }

            // pressure coupling and mean vector
            for (int k = 0; k < 3; ++k) {
                forms.pressure_mean[tv[k]] += w * psi[k];
                for (int b = 0; b < 6; ++b) {
                    const int fb = gd.free_index[nodes[b]];
                    if (fb < 0) continue;
                    tB.emplace_back(tv[k], 2 * fb + 0, w * psi[k] * dphi[b].x);
                    tB.emplace_back(tv[k], 2 * fb + 1, w * psi[k] * dphi[b].y);
                }
                if (forms.has_g) forms.g_div[tv[k]] += w * psi[k] * forms.div_g[t][q];
            }

            if (!F.is_zero()) {
                const Vec2 fv = F(xq);
                if (!std::isfinite(fv.x) || !std::isfinite(fv.y))
                    throw data_error("assemble_static: forcing evaluates to a non-finite value");
                for (int a = 0; a < 6; ++a) {
                    detail::add_free(gd, forms.F_load, nodes[a], 0, w * fv.x * phi[a]);
                    detail::add_free(gd, forms.F_load, nodes[a], 1, w * fv.y * phi[a]);
                }
            }

            if (forms.has_g && !sigma.is_zero()) {
                const Vec2 s = sigma(xq);
                const Mat2 gg = gradient_at(gd, FullView{*g_full}, t, q);
                const Vec2 sg{gg(0, 0) * s.x + gg(0, 1) * s.y, gg(1, 0) * s.x + gg(1, 1) * s.y};
                for (int a = 0; a < 6; ++a) {
                    detail::add_free(gd, forms.g_noise, nodes[a], 0, w * sg.x * phi[a]);
                    detail::add_free(gd, forms.g_noise, nodes[a], 1, w * sg.y * phi[a]);
                }
            }
        }
    }

    forms.M.resize(gd.dim_X0, gd.dim_X0);
    forms.M.setFromTriplets(tM.begin(), tM.end());
    forms.K.resize(gd.dim_X0, gd.dim_X0);
    forms.K.setFromTriplets(tK.begin(), tK.end());
    forms.B.resize(gd.dim_Y, gd.dim_X0);
    forms.B.setFromTriplets(tB.begin(), tB.end());
    forms.Bsigma.resize(gd.dim_X0, gd.dim_X0);
    if (!tC.empty()) {
        SparseMatrix C(gd.dim_X0, gd.dim_X0);
        C.setFromTriplets(tC.begin(), tC.end());
        // B_sigma = (C - C^T)/2: antisymmetric by construction.
        forms.Bsigma = 0.5 * C - 0.5 * SparseMatrix(C.transpose());
    }
    return forms;
}

// r_i = int S(eps_D w + eps_D g) : eps(phi_i) dx over free dofs.
inline Vector viscous_residual(const GradientDiscretisation& gd, const RheologyParams& rp,
                               const Vector& w_free, const AssembledForms& forms) {
    const auto& rule = triangle_quadrature();
    Vector r = Vector::Zero(gd.dim_X0);
    const FreeView w{w_free};
    for (int t = 0; t < gd.mesh.num_triangles(); ++t) {
        const auto nodes = gd.tri_nodes(t);
        const auto& td = gd.tri[t];
        for (int q = 0; q < 7; ++q) {
            const double wt = rule[q].weight * td.area;
            Mat2 eps = symmetric_gradient_at(gd, w, t, q);
            if (forms.has_g) eps = eps + forms.eps_g[t][q];
            const Mat2 S = stress(rp, eps);
            const auto& dphi = td.dphi[q];
            for (int a = 0; a < 6; ++a) {
                const int fa = gd.free_index[nodes[a]];
                if (fa < 0) continue;
                const Vec2 d = dphi[a];
                // S : eps(phi_a e_i); S symmetric, so equals row i of S dotted with grad
                r[2 * fa + 0] += wt * (S(0, 0) * d.x + S(0, 1) * d.y);
                r[2 * fa + 1] += wt * (S(1, 0) * d.x + S(1, 1) * d.y);
            }
        }
    }
    return r;
}

// J_ij = int DS(eps_D w + eps_D g)[eps(phi_j)] : eps(phi_i) dx; symmetric.
inline SparseMatrix viscous_jacobian(const GradientDiscretisation& gd, const RheologyParams& rp,
                                     const Vector& w_free, const AssembledForms& forms) {
    if (rp.p == 2.0) return forms.K;
    const auto& rule = triangle_quadrature();
    std::vector<Triplet> tJ;
    tJ.reserve(static_cast<std::size_t>(gd.mesh.num_triangles()) * 144);
    const FreeView w{w_free};
    for (int t = 0; t < gd.mesh.num_triangles(); ++t) {
        const auto nodes = gd.tri_nodes(t);
        const auto& td = gd.tri[t];
        for (int q = 0; q < 7; ++q) {
            const double wt = rule[q].weight * td.area;
            Mat2 eps = symmetric_gradient_at(gd, w, t, q);
            if (forms.has_g) eps = eps + forms.eps_g[t][q];
            const auto& dphi = td.dphi[q];
            // local strain basis eps(phi_b e_j)
            std::array<std::array<Mat2, 2>, 6> eb{};
            for (int b = 0; b < 6; ++b) {
                const Vec2 d = dphi[b];
                for (int j = 0; j < 2; ++j) {
                    Mat2 e;
                    e(j, 0) = (j == 0) ? d.x : 0.5 * d.x;
                    e(j, 1) = (j == 1) ? d.y : 0.5 * d.y;
                    // symmetric completion
                    Mat2 es;
                    es(0, 0) = (j == 0) ? d.x : 0.0;
                    es(1, 1) = (j == 1) ? d.y : 0.0;
                    es(0, 1) = es(1, 0) = 0.5 * ((j == 0) ? d.y : d.x);
                    eb[b][j] = es;
                }
            }
            for (int b = 0; b < 6; ++b) {
                const int fb = gd.free_index[nodes[b]];
                if (fb < 0) continue;
                for (int j = 0; j < 2; ++j) {
                    const Mat2 DS = stress_derivative(rp, eps, eb[b][j]);
                    for (int a = 0; a < 6; ++a) {
                        const int fa = gd.free_index[nodes[a]];
                        if (fa < 0) continue;
                        for (int i = 0; i < 2; ++i)
                            tJ.emplace_back(2 * fa + i, 2 * fb + j, wt * frobenius_inner(DS, eb[a][i]));
                    }
                }
            }
        }
    }
    SparseMatrix J(gd.dim_X0, gd.dim_X0);
    J.setFromTriplets(tJ.begin(), tJ.end());
    return J;
}

// Diagnostic Gram matrices for the p=2 compatibility constants.
struct DiagnosticGrams {
    SparseMatrix div_gram;   // (div phi_i, div phi_j)
    SparseMatrix grad_gram;  // (grad phi_i : grad phi_j)
    SparseMatrix pressure_mass;
};

inline DiagnosticGrams assemble_diagnostic_grams(const GradientDiscretisation& gd) {
    const auto& rule = triangle_quadrature();
    std::vector<Triplet> tD, tG, tP;
    for (int t = 0; t < gd.mesh.num_triangles(); ++t) {
        const auto nodes = gd.tri_nodes(t);
        const auto& td = gd.tri[t];
        const auto& tv = gd.mesh.triangles[t].v;
        for (int q = 0; q < 7; ++q) {
            const double w = rule[q].weight * td.area;
            const auto& dphi = td.dphi[q];
            const auto& psi = td.psi[q];
            for (int a = 0; a < 6; ++a) {
                const int fa = gd.free_index[nodes[a]];
                if (fa < 0) continue;
                for (int b = 0; b < 6; ++b) {
                    const int fb = gd.free_index[nodes[b]];
                    if (fb < 0) continue;
                    const Vec2 da = dphi[a], db = dphi[b];
                    // div(phi_a e_i) = d_a[i]; grad Gram is diagonal in components
                    tD.emplace_back(2 * fa + 0, 2 * fb + 0, w * da.x * db.x);
                    tD.emplace_back(2 * fa + 0, 2 * fb + 1, w * da.x * db.y);
                    tD.emplace_back(2 * fa + 1, 2 * fb + 0, w * da.y * db.x);
                    tD.emplace_back(2 * fa + 1, 2 * fb + 1, w * da.y * db.y);
                    const double gab = w * dot(da, db);
                    tG.emplace_back(2 * fa + 0, 2 * fb + 0, gab);
                    tG.emplace_back(2 * fa + 1, 2 * fb + 1, gab);
                }
            }
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) tP.emplace_back(tv[k], tv[l], w * psi[k] * psi[l]);
        }
    }
    DiagnosticGrams g;
    g.div_gram.resize(gd.dim_X0, gd.dim_X0);
    g.div_gram.setFromTriplets(tD.begin(), tD.end());
    g.grad_gram.resize(gd.dim_X0, gd.dim_X0);
    g.grad_gram.setFromTriplets(tG.begin(), tG.end());
    g.pressure_mass.resize(gd.dim_Y, gd.dim_Y);
    g.pressure_mass.setFromTriplets(tP.begin(), tP.end());
    return g;
}

inline double kinetic_energy(const AssembledForms& forms, const Vector& v_free) {
    return 0.5 * v_free.dot(forms.M * v_free);
}

}  // namespace gstokes
