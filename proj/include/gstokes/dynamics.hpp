// Discrete Helmholtz initialisation, the semi-implicit Crank-Nicolson step in
// its half-step form, and full trajectories with seeded Wiener increments.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gstokes/assembly.hpp"
#include "gstokes/solver.hpp"

namespace gstokes {

// Counter-based N(0, tau) increments: the n-th increment is a pure function of
// (master_seed, trajectory_index, n), so trajectories are reproducible
// regardless of evaluation order or thread count.
struct NoisePath {
    std::uint64_t master_seed = 0;
    int trajectory_index = 0;
    double tau = 0.0;

    static std::uint64_t splitmix64(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // standard normal from the counter (Box-Muller, cosine branch)
    double standard_normal(int n) const {
        std::uint64_t key = splitmix64(master_seed ^ splitmix64(static_cast<std::uint64_t>(trajectory_index) + 0x51ed2701ULL));
        key = splitmix64(key ^ static_cast<std::uint64_t>(n));
        const std::uint64_t z1 = splitmix64(key);
        const std::uint64_t z2 = splitmix64(z1 ^ 0xda442d24ULL);
        const double u1 = (static_cast<double>(z1 >> 11) + 0.5) * 0x1.0p-53;
        const double u2 = (static_cast<double>(z2 >> 11) + 0.5) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Delta_n W ~ N(0, tau), n = 1..N
    double increment(int n) const { return std::sqrt(tau) * standard_normal(n); }
};

struct DiscreteState {
    Vector v;    // free velocity coefficients, X_{D,0}
    Vector pi;   // accumulated (time-integrated) pressure, Y_{D,0}
    int n = 0;
    double t = 0.0;
};

struct StepperConfig {
    double tau = 0.0;
    int N = 0;
    RheologyParams rheology;
    NewtonConfig newton;
};

struct StepDiagnostics {
    int newton_iterations = 0;
    double newton_residual = 0.0;
    double energy_identity_residual = 0.0;  // tested local energy identity
    double div_residual_half = 0.0;         // ||B w - g_div||
    double div_residual_integer = 0.0;      // ||B v^{n+1} - g_div||
    double increment_l2_sq = 0.0;           // ||Pi(v^{n+1} - v^n)||_{L^2}^2
};

// Load vector (f, Pi phi_i) over free dofs for a closed-form field.
inline Vector load_vector(const GradientDiscretisation& gd, const FieldExpr& f) {
    const auto& rule = triangle_quadrature();
    Vector rhs = Vector::Zero(gd.dim_X0);
    if (f.is_zero()) return rhs;
    for (int t = 0; t < gd.mesh.num_triangles(); ++t) {
        const auto nodes = gd.tri_nodes(t);
        const auto& td = gd.tri[t];
        for (int q = 0; q < 7; ++q) {
            const double w = rule[q].weight * td.area;
            const Vec2 fv = f(td.xq[q]);
            const auto& phi = td.phi[q];
            for (int a = 0; a < 6; ++a) {
                const int fa = gd.free_index[nodes[a]];
                if (fa < 0) continue;
                rhs[2 * fa + 0] += w * fv.x * phi[a];
                rhs[2 * fa + 1] += w * fv.y * phi[a];
            }
        }
    }
    return rhs;
}

// Discrete Helmholtz decomposition from a precomputed L^2 pairing (v_in, Pi phi_i).
inline DiscreteState helmholtz_init_from_load(const GradientDiscretisation& gd,
                                              const AssembledForms& forms, const Vector& rhs_v) {
    const Vector rhs_q = Vector::Zero(gd.dim_Y);
    const auto sol = solve_saddle(forms.M, forms.B, rhs_v, rhs_q, forms.pressure_mean,
                                  /*mean_zero=*/true, /*bt_sign=*/1.0);
    DiscreteState s;
    s.v = sol.v;
    s.pi = sol.q;
    return s;
}

inline DiscreteState helmholtz_init(const GradientDiscretisation& gd, const AssembledForms& forms,
                                    const FieldExpr& v_in) {
    return helmholtz_init_from_load(gd, forms, load_vector(gd, v_in));
}

// One Crank-Nicolson step. Solves for the half-step velocity w = v^{n+1/2}
// (discretely divergence-free up to the boundary datum) and the pressure
// increment; recovers v^{n+1} = 2w - v^n.
inline DiscreteState cn_step(const GradientDiscretisation& gd, const AssembledForms& forms,
                             const StepperConfig& cfg, const DiscreteState& state, double dW,
                             StepDiagnostics* diag = nullptr,
                             const Vector* warm_start = nullptr) {
    const int nv = gd.dim_X0, nq = gd.dim_Y;
    const int n_tot = nv + nq + 1;
    const double tau = cfg.tau;
    const bool has_noise = forms.Bsigma.nonZeros() > 0;

    const Vector const_rhs = tau * forms.F_load + dW * forms.g_noise;

    auto residual = [&](const Vector& x) {
        const Vector w = x.head(nv);
        const Vector dpi = x.segment(nv, nq);
        const double lam = x[n_tot - 1];
        Vector r = Vector::Zero(n_tot);
        Vector rv = 2.0 * (forms.M * (w - state.v)) + tau * viscous_residual(gd, cfg.rheology, w, forms);
        rv.noalias() -= forms.B.transpose() * dpi;
        if (has_noise) rv.noalias() -= dW * (forms.Bsigma * w);
        rv -= const_rhs;
        r.head(nv) = rv;
        r.segment(nv, nq) = forms.B * w - forms.g_div + lam * forms.pressure_mean;
        r[n_tot - 1] = forms.pressure_mean.dot(dpi);
        return r;
    };

    auto jacobian = [&](const Vector& x) {
        const Vector w = x.head(nv);
        SparseMatrix A = 2.0 * forms.M + tau * viscous_jacobian(gd, cfg.rheology, w, forms);
        if (has_noise) A -= dW * forms.Bsigma;
        std::vector<Triplet> trip;
        trip.reserve(static_cast<std::size_t>(A.nonZeros() + 2 * forms.B.nonZeros() + 2 * nq));
        for (int k = 0; k < A.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(A, k); it; ++it)
                trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        for (int k = 0; k < forms.B.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(forms.B, k); it; ++it) {
                trip.emplace_back(nv + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
                trip.emplace_back(static_cast<int>(it.col()), nv + static_cast<int>(it.row()), -it.value());
            }
        for (int k = 0; k < nq; ++k) {
            trip.emplace_back(nv + k, n_tot - 1, forms.pressure_mean[k]);
            trip.emplace_back(n_tot - 1, nv + k, forms.pressure_mean[k]);
        }
        SparseMatrix J(n_tot, n_tot);
        J.setFromTriplets(trip.begin(), trip.end());
        return J;
    };

    Vector x0 = Vector::Zero(n_tot);
    x0.head(nv) = warm_start ? *warm_start : state.v;

    NewtonReport report;
    Vector x;
    try {
        x = newton_solve(residual, jacobian, std::move(x0), cfg.newton, &report);
    } catch (const nonconvergence_error& e) {
        throw nonconvergence_error("cn_step at index " + std::to_string(state.n) + ": " + e.what(),
                                   e.last_residual);
    }

    const Vector w = x.head(nv);
    const Vector dpi = x.segment(nv, nq);

    DiscreteState next;
    next.v = 2.0 * w - state.v;
    next.pi = state.pi + dpi;
    next.n = state.n + 1;
    next.t = (state.n + 1) * tau;

    if (diag) {
        diag->newton_iterations = report.iterations;
        diag->newton_residual = report.residual;
        const double e_next = kinetic_energy(forms, next.v);
        const double e_curr = kinetic_energy(forms, state.v);
        const double visc_work = tau * w.dot(viscous_residual(gd, cfg.rheology, w, forms));
        double rhs_work = dpi.dot(forms.B * w) + tau * forms.F_load.dot(w) + dW * forms.g_noise.dot(w);
        if (has_noise) rhs_work += dW * w.dot(forms.Bsigma * w);
        diag->energy_identity_residual = e_next - e_curr + visc_work - rhs_work;
        diag->div_residual_half = (forms.B * w - forms.g_div).norm();
        diag->div_residual_integer = (forms.B * next.v - forms.g_div).norm();
        const Vector dv = next.v - state.v;
        diag->increment_l2_sq = dv.dot(forms.M * dv);
    }
    return next;
}

struct TrajectoryObservers {
    // integer states S(n, v_in), n = 0..N, each exactly once in order
    std::function<void(int, const DiscreteState&)> on_integer;
    // shifted states S^{1/2}(n, v_in) = (v^{n+1}+v^n)/2, n = 0..N-1
    std::function<void(int, const Vector&)> on_shifted;
};

struct TrajectoryRecord {
    DiscreteState final_state;
    std::vector<StepDiagnostics> steps;
};

inline TrajectoryRecord run_trajectory(const GradientDiscretisation& gd, const AssembledForms& forms,
                                       const StepperConfig& cfg, const Vector& init_load,
                                       const NoisePath& noise,
                                       const TrajectoryObservers& obs = {}) {
    DiscreteState state = helmholtz_init_from_load(gd, forms, init_load);
    if (obs.on_integer) obs.on_integer(0, state);

    TrajectoryRecord rec;
    rec.steps.reserve(cfg.N);
    Vector w_prev;
    for (int n = 0; n < cfg.N; ++n) {
        const double dW = noise.increment(n + 1);
        StepDiagnostics diag;
        DiscreteState next;
        const Vector* warm = (n > 0) ? &w_prev : nullptr;
        try {
            next = cn_step(gd, forms, cfg, state, dW, &diag, warm);
        } catch (const solver_error& e) {
            throw solver_error("trajectory " + std::to_string(noise.trajectory_index) +
                               " aborted at step " + std::to_string(n + 1) + ": " + e.what());
        }
        w_prev = 0.5 * (next.v + state.v);
        if (obs.on_shifted) obs.on_shifted(n, w_prev);
        state = std::move(next);
        if (obs.on_integer) obs.on_integer(n + 1, state);
        rec.steps.push_back(diag);
    }
    rec.final_state = std::move(state);
    return rec;
}

}  // namespace gstokes
