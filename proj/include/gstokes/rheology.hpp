// Power-law viscous stress S(A) = (kappa + |A|^2)^((p-2)/2) A, its companion
// tensor V and the directional derivative used for Newton linearization.
#pragma once

#include <cmath>
#include <stdexcept>

#include "gstokes/fields.hpp"

namespace gstokes {

class rheology_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RheologyParams {
    double p = 2.0;
    double kappa = 0.0;

    RheologyParams() = default;
    RheologyParams(double p_, double kappa_) : p(p_), kappa(kappa_) {
        if (p <= 1.0) throw rheology_error("rheology: growth exponent must satisfy p > 1");
        if (kappa < 0.0) throw rheology_error("rheology: kappa must be nonnegative");
    }
};

namespace detail {
inline void check_regular(const RheologyParams& r, double a2) {
    if (r.p < 2.0 && r.kappa == 0.0 && a2 == 0.0)
        throw rheology_error("rheology: singular at A=0 for p<2, kappa=0");
}
}  // namespace detail

inline Mat2 stress(const RheologyParams& r, const Mat2& A) {
    const double a2 = frobenius_norm2(A);
    detail::check_regular(r, a2);
    if (r.p == 2.0) return A;
    return std::pow(r.kappa + a2, 0.5 * (r.p - 2.0)) * A;
}

inline Mat2 v_tensor(const RheologyParams& r, const Mat2& A) {
    const double a2 = frobenius_norm2(A);
    detail::check_regular(r, a2);
    if (r.p == 2.0) return A;
    return std::pow(r.kappa + a2, 0.25 * (r.p - 2.0)) * A;
}

// DS(A)[H] = (kappa+|A|^2)^((p-2)/2) H + (p-2)(kappa+|A|^2)^((p-4)/2) (A:H) A
inline Mat2 stress_derivative(const RheologyParams& r, const Mat2& A, const Mat2& H) {
    const double a2 = frobenius_norm2(A);
    detail::check_regular(r, a2);
    if (r.p == 2.0) return H;
    const double w = r.kappa + a2;
    return std::pow(w, 0.5 * (r.p - 2.0)) * H +
           ((r.p - 2.0) * std::pow(w, 0.5 * (r.p - 4.0)) * frobenius_inner(A, H)) * A;
}

}  // namespace gstokes
