// Numerical estimation of the p=2 compatibility constants of the
// discretisation: coercivity C_D(2), inf-sup beta_D(2), inverse estimate B_D(2).
#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <stdexcept>

#include "gstokes/assembly.hpp"

namespace gstokes {

class diagnostic_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GdConstants {
    double coercivity = 0.0;        // C_D(2)
    double inf_sup = 0.0;           // beta_D(2)
    double inverse_estimate = 0.0;  // B_D(2)
};

namespace detail {

// Largest eigenvalue of the pencil A x = lambda M x (A, M symmetric, M SPD).
template <class Solver>
double power_iteration_max(const SparseMatrix& A, const SparseMatrix& M, const Solver& m_solver,
                           double tol = 1e-8, int max_iter = 10000) {
    Vector x = Vector::Ones(A.rows());
    for (int i = 0; i < A.rows(); ++i) x[i] += 1e-3 * std::sin(1.0 + i);  // break symmetry
    double lambda_prev = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Vector y = m_solver.solve(A * x);
        y /= y.norm();
        const double num = y.dot(A * y), den = y.dot(M * y);
        const double lambda = num / den;
        x = std::move(y);
        if (it > 0 && std::abs(lambda - lambda_prev) <= tol * std::abs(lambda)) return lambda;
        lambda_prev = lambda;
    }
    throw diagnostic_error("power_iteration_max: no convergence after 10000 steps");
}

}  // namespace detail

inline GdConstants estimate_constants_p2(const GradientDiscretisation& gd) {
    const AssembledForms forms = assemble_static(gd, FieldExpr::zero(), std::nullopt, FieldExpr::zero());
    const DiagnosticGrams grams = assemble_diagnostic_grams(gd);

    GdConstants out;

    // B_D(2)^2 = sup ||eps v||^2 / ||Pi v||^2 = lambda_max(K, M)
    Eigen::SimplicialLDLT<SparseMatrix> m_ldlt(forms.M);
    if (m_ldlt.info() != Eigen::Success) throw diagnostic_error("mass factorization failed");
    out.inverse_estimate = std::sqrt(detail::power_iteration_max(forms.K, forms.M, m_ldlt));

    // C_D(2)^2 = lambda_max(M + div-Gram + grad-Gram, K): squared-sum version of
    // the (||Pi|| + ||div|| + ||grad||)/||eps|| quotient, equivalent up to sqrt(3).
    SparseMatrix num = forms.M + grams.div_gram + grams.grad_gram;
    Eigen::SimplicialLDLT<SparseMatrix> k_ldlt(forms.K);
    if (k_ldlt.info() != Eigen::Success) throw diagnostic_error("stiffness factorization failed");
    out.coercivity = std::sqrt(detail::power_iteration_max(num, forms.K, k_ldlt));

    // beta_D(2): smallest eigenvalue of the pressure Schur complement
    // S = B K^{-1} B^T against the pressure mass, on the mean-zero subspace.
    const int nq = gd.dim_Y;
    Eigen::MatrixXd S(nq, nq);
    {
        Eigen::MatrixXd Bt = Eigen::MatrixXd(forms.B).transpose();
        Eigen::MatrixXd X(gd.dim_X0, nq);
        for (int k = 0; k < nq; ++k) X.col(k) = k_ldlt.solve(Bt.col(k));
        S = Bt.transpose() * X;
    }
    const Eigen::MatrixXd Mp = Eigen::MatrixXd(grams.pressure_mass);
    const Vector m = forms.pressure_mean;

    // Rank-one shift removes the constant-pressure kernel; inverse iteration
    // with deflation of the constant mode finds the smallest remaining eigenvalue.
    Eigen::LDLT<Eigen::MatrixXd> s_ldlt(S + m * m.transpose());
    const Vector ones = Vector::Ones(nq);
    auto deflate = [&](Vector& x) { x -= (ones.dot(Mp * x) / ones.dot(Mp * ones)) * ones; };
    Vector x = Vector::LinSpaced(nq, 1.0, 2.0);
    deflate(x);
    x /= x.norm();
    double lambda_prev = 0.0, lambda = 0.0;
    bool converged = false;
    for (int it = 0; it < 10000; ++it) {
        Vector y = s_ldlt.solve(Mp * x);
        deflate(y);
        y /= y.norm();
        lambda = y.dot(S * y) / y.dot(Mp * y);
        x = std::move(y);
        if (it > 0 && std::abs(lambda - lambda_prev) <= 1e-8 * std::abs(lambda)) {
            converged = true;
            break;
        }
        lambda_prev = lambda;
    }
    if (!converged) throw diagnostic_error("inf-sup inverse iteration: no convergence after 10000 steps");
    // Definition carries the p=2 denominator ||eps v||_{L^p} + ||eps v||_{L^p'} = 2||eps v||.
    out.inf_sup = 0.5 * std::sqrt(lambda);

    return out;
}

}  // namespace gstokes
