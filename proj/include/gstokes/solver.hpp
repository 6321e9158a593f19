// Sparse saddle-point solves (direct factorization, scalar mean-zero
// multiplier) and a damped Newton iteration.
#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gstokes/assembly.hpp"

namespace gstokes {

class solver_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class nonconvergence_error : public solver_error {
public:
    nonconvergence_error(const std::string& what, double residual)
        : solver_error(what), last_residual(residual) {}
    double last_residual = 0.0;
};

struct NewtonConfig {
    double abs_tol = 1e-8;
    double rel_tol = 1e-8;
    int max_iter = 50;
    double damping = 0.5;
    int max_halvings = 20;
};

struct SaddleSolution {
    Vector v;       // velocity block
    Vector q;       // pressure block
    double lambda = 0.0;  // mean-zero multiplier
};

// Solve  [ A   s*B^T   0 ] [v]   [rhs_v]
//        [ B   0       m ] [q] = [rhs_q]
//        [ 0   m^T     0 ] [l]   [0]
// where s = bt_sign and m is the pressure-mean vector (dropped unless mean_zero).
inline SaddleSolution solve_saddle(const SparseMatrix& A, const SparseMatrix& B, const Vector& rhs_v,
                                   const Vector& rhs_q, const Vector& pressure_mean, bool mean_zero,
                                   double bt_sign = 1.0, double tol = 1e-8) {
    const int nv = static_cast<int>(A.rows());
    const int nq = static_cast<int>(B.rows());
    const int n = nv + nq + (mean_zero ? 1 : 0);

    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(A.nonZeros() + 2 * B.nonZeros() + 2 * nq));
    for (int k = 0; k < A.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(A, k); it; ++it)
            trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int k = 0; k < B.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(B, k); it; ++it) {
            trip.emplace_back(nv + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
            trip.emplace_back(static_cast<int>(it.col()), nv + static_cast<int>(it.row()),
                              bt_sign * it.value());
        }
    if (mean_zero) {
        for (int k = 0; k < nq; ++k) {
            trip.emplace_back(nv + k, nv + nq, pressure_mean[k]);
            trip.emplace_back(nv + nq, nv + k, pressure_mean[k]);
        }
    }
    SparseMatrix S(n, n);
    S.setFromTriplets(trip.begin(), trip.end());
    S.makeCompressed();

    Vector rhs = Vector::Zero(n);
    rhs.head(nv) = rhs_v;
    rhs.segment(nv, nq) = rhs_q;

    Eigen::SparseLU<SparseMatrix> lu(S);
    if (lu.info() != Eigen::Success) throw solver_error("solve_saddle: singular factorization");
    const Vector x = lu.solve(rhs);

    const double res = (S * x - rhs).norm();
    const double bound = std::max(tol, tol * rhs.norm());
    if (!(res <= bound))
        throw solver_error("solve_saddle: back-substitution residual " + std::to_string(res) +
                           " exceeds tolerance");

    SaddleSolution sol;
    sol.v = x.head(nv);
    sol.q = x.segment(nv, nq);
    if (mean_zero) sol.lambda = x[n - 1];
    return sol;
}

struct NewtonReport {
    int iterations = 0;
    double residual = 0.0;
};

// Damped Newton on a generic residual/Jacobian pair. The Jacobian may be
// nonsymmetric (it carries the skew noise block); SparseLU handles it.
inline Vector newton_solve(const std::function<Vector(const Vector&)>& residual,
                           const std::function<SparseMatrix(const Vector&)>& jacobian, Vector x,
                           const NewtonConfig& cfg, NewtonReport* report = nullptr) {
    Vector r = residual(x);
    const double r0 = r.norm();
    const double target = std::max(cfg.abs_tol, cfg.rel_tol * r0);
    int iter = 0;
    double rn = r0;
    while (rn > target) {
        if (iter >= cfg.max_iter)
            throw nonconvergence_error("newton_solve: no convergence after " +
                                           std::to_string(cfg.max_iter) + " iterations",
                                       rn);
        SparseMatrix J = jacobian(x);
        J.makeCompressed();
        Eigen::SparseLU<SparseMatrix> lu(J);
        if (lu.info() != Eigen::Success)
            throw solver_error("newton_solve: singular Jacobian factorization");
        const Vector dx = lu.solve(-r);

        double alpha = 1.0;
        Vector x_try = x + dx;
        Vector r_try = residual(x_try);
        int halvings = 0;
        while (r_try.norm() >= rn && halvings < cfg.max_halvings) {
            alpha *= cfg.damping;
            x_try = x + alpha * dx;
            r_try = residual(x_try);
            ++halvings;
        }
        if (r_try.norm() >= rn)
            throw nonconvergence_error("newton_solve: line search failed to reduce the residual", rn);
        x = std::move(x_try);
        r = std::move(r_try);
        rn = r.norm();
        ++iter;
    }
    if (report) {
        report->iterations = iter;
        report->residual = rn;
    }
    return x;
}

}  // namespace gstokes
