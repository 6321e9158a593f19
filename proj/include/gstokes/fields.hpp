// Closed-form vector fields used as data (initial velocity, noise coefficient,
// boundary condition, forcing).
#pragma once

#include <functional>
#include <utility>

#include "gstokes/mesh.hpp"

namespace gstokes {

struct Mat2 {
    // row-major: m[i][j] = d(component i)/d(x_j) when used as a gradient
    std::array<std::array<double, 2>, 2> m{};

    double& operator()(int i, int j) { return m[i][j]; }
    double operator()(int i, int j) const { return m[i][j]; }
};

inline Mat2 operator+(const Mat2& a, const Mat2& b) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = a(i, j) + b(i, j);
    return r;
}
inline Mat2 operator-(const Mat2& a, const Mat2& b) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = a(i, j) - b(i, j);
    return r;
}
inline Mat2 operator*(double s, const Mat2& a) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = s * a(i, j);
    return r;
}
inline double frobenius_inner(const Mat2& a, const Mat2& b) {
    double s = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) s += a(i, j) * b(i, j);
    return s;
}
inline double frobenius_norm2(const Mat2& a) { return frobenius_inner(a, a); }
inline Mat2 sym(const Mat2& a) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = 0.5 * (a(i, j) + a(j, i));
    return r;
}
inline double trace(const Mat2& a) { return a(0, 0) + a(1, 1); }

// Deterministic, side-effect-free 2D vector field.
struct FieldExpr {
    std::function<Vec2(Vec2)> value;

    Vec2 operator()(Vec2 p) const { return value ? value(p) : Vec2{}; }
    bool is_zero() const { return !static_cast<bool>(value); }

    static FieldExpr zero() { return {}; }
};

inline FieldExpr make_field(std::function<Vec2(Vec2)> f) { return {std::move(f)}; }

}  // namespace gstokes
