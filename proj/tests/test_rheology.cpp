#include "doctest.h"

#include <cmath>
#include <random>

#include "gstokes/rheology.hpp"

using namespace gstokes;

namespace {

Mat2 random_mat(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Mat2 m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = n(rng);
    return m;
}

Mat2 identity() {
    Mat2 m;
    m(0, 0) = m(1, 1) = 1.0;
    return m;
}

}  // namespace

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(RheologyParams(1.0, 0.1), rheology_error);
    CHECK_THROWS_AS(RheologyParams(2.0, -0.5), rheology_error);
}

TEST_CASE("p=2 is the identity map for any kappa") {
    std::mt19937_64 rng(7);
    for (double kappa : {0.0, 0.1, 3.0}) {
        const RheologyParams r(2.0, kappa);
        const Mat2 A = random_mat(rng);
        CHECK(frobenius_norm2(stress(r, A) - A) == doctest::Approx(0.0));
        CHECK(frobenius_norm2(v_tensor(r, A) - A) == doctest::Approx(0.0));
        const Mat2 H = random_mat(rng);
        CHECK(frobenius_norm2(stress_derivative(r, A, H) - H) == doctest::Approx(0.0));
    }
}

TEST_CASE("zero strain with regularization") {
    const RheologyParams r(1.5, 0.1);
    CHECK(frobenius_norm2(stress(r, Mat2{})) == 0.0);
    CHECK(frobenius_norm2(v_tensor(r, Mat2{})) == 0.0);
    // DS(0)[H] = kappa^{(p-2)/2} H
    Mat2 H;
    H(0, 1) = 2.0;
    const Mat2 d = stress_derivative(r, Mat2{}, H);
    CHECK(d(0, 1) == doctest::Approx(std::pow(0.1, -0.25) * 2.0).epsilon(1e-14));
}

TEST_CASE("singularity for p<2, kappa=0, A=0") {
    const RheologyParams r(1.5, 0.0);
    CHECK_THROWS_AS(stress(r, Mat2{}), rheology_error);
}

TEST_CASE("frozen values at p=3, kappa=0.1, A=I") {
    const RheologyParams r(3.0, 0.1);
    const Mat2 S = stress(r, identity());
    // |I|^2 = 2, so S = sqrt(2.1) I
    CHECK(S(0, 0) == doctest::Approx(std::sqrt(2.1)).epsilon(1e-14));
    CHECK(S(0, 0) == doctest::Approx(1.449137675).epsilon(1e-9));
    CHECK(S(0, 1) == 0.0);
    const Mat2 V = v_tensor(r, identity());
    CHECK(V(1, 1) == doctest::Approx(std::pow(2.1, 0.25)).epsilon(1e-14));
}

TEST_CASE("stress preserves symmetry") {
    std::mt19937_64 rng(11);
    const RheologyParams r(3.0, 0.1);
    for (int i = 0; i < 100; ++i) {
        const Mat2 A = sym(random_mat(rng));
        const Mat2 S = stress(r, A);
        CHECK(S(0, 1) == doctest::Approx(S(1, 0)));
    }
}

TEST_CASE("directional derivative matches forward differences, order >= 0.9") {
    std::mt19937_64 rng(13);
    // p=2 is exact (derivative equals H), so the difference quotient is pure
    // roundoff there; the order statement only makes sense for p != 2.
    for (double p : {1.5, 3.0}) {
        const RheologyParams r(p, 0.1);
        for (int trial = 0; trial < 100; ++trial) {
            const Mat2 A = random_mat(rng);
            const Mat2 H = random_mat(rng);
            const Mat2 D = stress_derivative(r, A, H);
            double prev_err = -1.0;
            double order_sum = 0.0;
            int order_count = 0;
            for (double h : {1e-4, 1e-5, 1e-6}) {
                Mat2 fd = (1.0 / h) * (stress(r, A + h * H) - stress(r, A));
                const double err = std::sqrt(frobenius_norm2(fd - D));
                if (prev_err > 1e-11 && err > 1e-11) {
                    order_sum += std::log10(prev_err / err);  // h shrinks by 10 each level
                    ++order_count;
                }
                prev_err = err;
            }
            if (order_count > 0) CHECK(order_sum / order_count >= 0.9);
        }
    }
    {
        const RheologyParams r2(2.0, 0.1);
        const Mat2 A = random_mat(rng), H = random_mat(rng);
        const Mat2 fd = 1e4 * (stress(r2, A + 1e-4 * H) - stress(r2, A));
        CHECK(std::sqrt(frobenius_norm2(fd - stress_derivative(r2, A, H))) < 1e-11);
    }
}

TEST_CASE("central-difference derivative check at h=1e-5, relative error < 1e-5") {
    std::mt19937_64 rng(17);
    for (double p : {1.5, 2.0, 3.0}) {
        const RheologyParams r(p, 0.1);
        for (int trial = 0; trial < 100; ++trial) {
            const Mat2 A = random_mat(rng);
            const Mat2 H = random_mat(rng);
            const Mat2 D = stress_derivative(r, A, H);
            const double h = 1e-5;
            const Mat2 fd = (0.5 / h) * (stress(r, A + h * H) - stress(r, A - h * H));
            const double scale = std::sqrt(frobenius_norm2(D)) + 1e-30;
            CHECK(std::sqrt(frobenius_norm2(fd - D)) / scale < 1e-5);
        }
    }
}

TEST_CASE("monotonicity and tensor-relation bracket") {
    std::mt19937_64 rng(19);
    for (double p : {1.5, 2.0, 3.0}) {
        const RheologyParams r(p, 0.1);
        double ratio_min = 1e300, ratio_max = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const Mat2 A = random_mat(rng, 2.0);
            const Mat2 B = random_mat(rng, 2.0);
            const double dv = frobenius_norm2(v_tensor(r, A) - v_tensor(r, B));
            if (dv < 1e-20) continue;
            const double lhs = frobenius_inner(stress(r, A) - stress(r, B), A - B);
            CHECK(lhs > 0.0);
            const double ratio = lhs / dv;
            ratio_min = std::min(ratio_min, ratio);
            ratio_max = std::max(ratio_max, ratio);
        }
        // equivalence bracket: recorded, positivity asserted
        CHECK(ratio_min > 0.0);
        CHECK(ratio_max < 1e6);
        MESSAGE("p=", p, " tensor-relation ratio in [", ratio_min, ", ", ratio_max, "]");
    }
}

TEST_CASE("generalised Young inequality: a finite c_delta exists for delta=0.5") {
    std::mt19937_64 rng(23);
    for (double p : {1.5, 3.0}) {
        const RheologyParams r(p, 0.1);
        const double delta = 0.5;
        double c_needed = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const Mat2 A = random_mat(rng, 2.0);
            const Mat2 B = random_mat(rng, 2.0);
            const Mat2 C = random_mat(rng, 2.0);
            const double lhs = frobenius_inner(stress(r, A) - stress(r, B), C - B);
            const double vab = frobenius_norm2(v_tensor(r, A) - v_tensor(r, B));
            const double vcb = frobenius_norm2(v_tensor(r, C) - v_tensor(r, B));
            if (vcb < 1e-20) continue;
            const double needed = (lhs - delta * vab) / vcb;
            c_needed = std::max(c_needed, needed);
        }
        CHECK(std::isfinite(c_needed));
        MESSAGE("p=", p, " empirical c_delta(0.5) = ", c_needed);
    }
}

TEST_CASE("increment bounds: sampled ratios stay bounded") {
    std::mt19937_64 rng(29);
    // p >= 2: ||A-B||^p <~ ||V(A)-V(B)||^2 ; p <= 2 with the dual exponent
    {
        const RheologyParams r(3.0, 0.1);
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const Mat2 A = random_mat(rng, 2.0), B = random_mat(rng, 2.0);
            const double dv = frobenius_norm2(v_tensor(r, A) - v_tensor(r, B));
            if (dv < 1e-20) continue;
            worst = std::max(worst, std::pow(frobenius_norm2(A - B), 1.5) / dv);
        }
        CHECK(worst < 1e4);
    }
    {
        const RheologyParams r(1.5, 0.1);
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const Mat2 A = random_mat(rng, 2.0), B = random_mat(rng, 2.0);
            const double dab = frobenius_norm2(A - B);
            if (dab < 1e-20) continue;
            // shear-thinning direction: V-increment controlled by the plain increment
            worst = std::max(worst, frobenius_norm2(v_tensor(r, A) - v_tensor(r, B)) / dab);
        }
        CHECK(worst < 1e4);
    }
}

TEST_CASE("homogeneity at kappa=0: S(lambda A) = lambda^{p-1} S(A)") {
    std::mt19937_64 rng(31);
    for (double p : {1.5, 2.0, 3.0}) {
        const RheologyParams r(p, 0.0);
        for (double lambda : {0.5, 2.0, 7.0}) {
            const Mat2 A = random_mat(rng);
            const Mat2 lhs = stress(r, lambda * A);
            const Mat2 rhs = std::pow(lambda, p - 1.0) * stress(r, A);
            CHECK(std::sqrt(frobenius_norm2(lhs - rhs)) <
                  1e-12 * std::sqrt(frobenius_norm2(rhs)));
        }
    }
}
