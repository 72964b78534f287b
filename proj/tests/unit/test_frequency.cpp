#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nlab/biharmonic.hpp"
#include "nlab/errors.hpp"
#include "nlab/frequency.hpp"
#include "nlab/lift.hpp"
#include "support/synthetic.hpp"

using namespace nlab;
using namespace nlab::synthetic;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST(Frequency, ConstantField) {
    const auto src = constant_pair(1.7, 1.0);
    const auto prof = frequency_profile(src, Vec3{}, {0.1, 0.3});
    ASSERT_EQ(prof.records.size(), 2u);
    EXPECT_NEAR(prof.records[1].n_volume, 0.06, 1e-6);
    EXPECT_NEAR(prof.records[0].n_volume, 2.0 * 0.01 / 3, 1e-6);
    EXPECT_EQ(prof.records[1].d1, 0.0);
    EXPECT_EQ(prof.records[1].n_boundary, 0.0);
}

TEST(Frequency, LinearPairClosedForm) {
    for (double lambda : {1.0, 4.0}) {
        const auto src = linear_pair(lambda);
        for (double r : {0.05, 0.1, 0.3}) {
            const double n = frequency(src, Vec3{}, r, QuadratureRules(QuadratureSpec{}));
            EXPECT_NEAR(n, 1 + (1 + 2 * lambda) * r * r / 10, 1e-6) << lambda << ' ' << r;
        }
    }
    EXPECT_NEAR(frequency(linear_pair(1.0), Vec3{}, 0.1, QuadratureRules(QuadratureSpec{})), 1.003, 1e-6);
}

TEST(Frequency, StoredSumsAreExact) {
    const auto prof = frequency_profile(exact_pde_pair(3.0), Vec3{0.1, 0.2, 0.0}, {0.1, 0.2, 0.25});
    for (const auto& r : prof.records) {
        EXPECT_EQ(r.d, r.d1 + r.d2 + r.d3 + r.d4);
        EXPECT_EQ(r.h, r.h1 + r.h2);
        EXPECT_DOUBLE_EQ(r.hbar, r.h / (4 * pi * r.r * r.r));
        EXPECT_DOUBLE_EQ(r.n_volume, r.r * r.d / r.h);
        EXPECT_GT(r.h, 0.0);
    }
}

TEST(Frequency, VanishingOrderLimit) {
    for (int k = 0; k <= 3; ++k)
        for (int l = 0; l <= 3; ++l) {
            const double n = frequency(homogeneous_pair(k, l, 1.0), Vec3{}, 1e-2, QuadratureRules(QuadratureSpec{}));
            const int m = std::min(k, l);
            EXPECT_NEAR(n, m, 0.05 * std::max(1, m)) << k << ',' << l;
        }
}

TEST(Frequency, FormsAgreeForExactPdePair) {
    for (double lambda : {0.5, 2.0, 10.0}) {
        const auto prof = frequency_profile(exact_pde_pair(lambda), Vec3{0.05, -0.1, 0.0}, {0.05, 0.1, 0.2, 0.3});
        for (const auto& r : prof.records)
            EXPECT_NEAR(r.n_volume, r.n_boundary, 1e-8 * std::max(1.0, std::abs(r.n_volume))) << lambda;
    }
}

TEST(Frequency, AnalyticNavierLift) {
    // g = u e^{√λ t}, h = -2λ g with u the (1,1) sine mode: Δg = 0 and
    // Δg - 2λg = h hold exactly, and gh + 2λg² vanishes pointwise.
    const double lambda = 2 * pi * pi, sl = std::sqrt(lambda);
    const SyntheticLift src(lambda, [&](const Vec3& y) {
        const double e = std::exp(sl * y.t);
        const double u = std::sin(pi * y.x) * std::sin(pi * y.y);
        const Vec3 gg{pi * std::cos(pi * y.x) * std::sin(pi * y.y) * e, pi * std::sin(pi * y.x) * std::cos(pi * y.y) * e,
                      sl * u * e};
        return LiftedSample{u * e, -2 * lambda * u * e, gg, -2 * lambda * gg};
    });
    const auto prof = frequency_profile(src, Vec3{0.5, 0.5, 0.0}, {0.05, 0.1, 0.2, 0.3});
    for (const auto& r : prof.records) {
        EXPECT_LE(std::abs(r.d3 + r.d4), 1e-12 * (std::abs(r.d3) + std::abs(r.d4)));
        EXPECT_NEAR(r.n_volume, r.n_boundary, 1e-8 * std::max(1.0, r.n_volume));
        EXPECT_GE(r.n_volume, -r.r * r.r / (24 * lambda));
    }
}

TEST(Frequency, ComputedModeFormsConverge) {
    auto mismatch = [](double h) {
        const auto d = Domain2D::rectangle(1.0, 1.0);
        const auto g = build_grid(d, h);
        const auto pair = solve_modes(assemble_operator(g, BCType::navier), 1)[0];
        const auto prof = frequency_profile(lift_pair(pair), Vec3{0.5, 0.5, 0.0}, {0.1, 0.2, 0.3});
        double m = 0.0;
        for (const auto& r : prof.records) m = std::max(m, std::abs(r.n_volume - r.n_boundary) / std::max(1.0, r.n_volume));
        return m;
    };
    const double m32 = mismatch(1.0 / 32), m64 = mismatch(1.0 / 64);
    EXPECT_LT(m64, m32);
    EXPECT_LT(m64, 1e-2);
}

TEST(Frequency, LowerBoundOnManyProfiles) {
    const auto d = Domain2D::rectangle(1.0, 1.0);
    const auto g = build_grid(d, 1.0 / 64);
    for (auto [k, l] : {std::pair{1, 1}, {2, 1}, {3, 2}}) {
        const auto lp = lift_pair(navier_modes_analytic(d, k, l, g));
        for (Vec3 c : {Vec3{0.5, 0.5, 0.0}, Vec3{0.37, 0.41, 0.0}}) {
            const auto prof = frequency_profile(lp, c, {0.02, 0.05, 0.1, 0.2});
            for (const auto& r : prof.records) EXPECT_GE(r.n_volume, -r.r * r.r / (24 * lp.lambda()) - 1e-10);
        }
    }
}

TEST(Frequency, BallMomentsOfLinearPair) {
    const double r = 0.2;
    const auto m = ball_moments(linear_pair(1.0), Vec3{}, r, QuadratureRules(QuadratureSpec{}));
    EXPECT_NEAR(m.surface_mean, 2 * r * r / 3, 1e-14);
    EXPECT_NEAR(m.ball_mean, 2 * r * r / 5, 1e-14);
    EXPECT_NEAR(m.g2, 4 * pi * std::pow(r, 5) / 15, 1e-15);
    EXPECT_NEAR(m.h2, m.g2, 1e-18);
}

TEST(Frequency, DegenerateAndInadmissible) {
    const auto zero = constant_pair(0.0, 1.0);
    EXPECT_THROW(frequency(zero, Vec3{}, 0.1, QuadratureRules(QuadratureSpec{})), DegenerateError);
    const auto prof = frequency_profile(zero, Vec3{}, {0.1, 0.2});
    EXPECT_TRUE(prof.records.empty());
    EXPECT_EQ(prof.notes.size(), 2u);
    EXPECT_THROW(frequency_profile(linear_pair(1.0), Vec3{}, {0.2, 0.1}), Error);
    EXPECT_THROW(check_admissible(linear_pair(1.0), Vec3{}, 0.0), Error);

    const auto d = Domain2D::rectangle(1.0, 1.0);
    const auto g = build_grid(d, 1.0 / 32);
    const auto lp = lift_pair(navier_modes_analytic(d, 1, 1, g));
    EXPECT_THROW(check_admissible(lp, Vec3{0.5, 0.5, 0.0}, 0.45), OutOfSupportError);
    EXPECT_NO_THROW(check_admissible(lp, Vec3{0.5, 0.5, 0.0}, 0.4));
    EXPECT_THROW(check_admissible(lp, Vec3{0.5, 0.5, 1.9}, 0.2), OutOfSupportError);
}

TEST(DoublingIndex, Homogeneous) {
    EXPECT_NEAR(doubling_index(homogeneous_pair(1, 0, 1.0), Vec3{}, 0.3), 1.0, 1e-12);
    EXPECT_NEAR(doubling_index(homogeneous_pair(3, 0, 1.0), Vec3{}, 0.3), 3.0, 1e-12);
    EXPECT_NEAR(doubling_index(homogeneous_pair(2, 0, 1.0), Vec3{0.1, 0.0, 0.0}, 1e-3), 0.0, 0.2);
}

TEST(DoublingIndex, NavierModeAtCenter) {
    const auto d = Domain2D::rectangle(1.0, 1.0);
    const auto lp = lift_pair(navier_modes_analytic(d, 1, 1, build_grid(d, 1.0 / 64)));
    // Semi-analytic: sin(πx)sin(πy) peaks at the centre and e^{√λ t} at the
    // top of the ball, so the maximum of |g| sits near (center, t = r).
    const double r = 0.2, sl = lp.sqrt_lambda();
    auto max_g = [&](double rad) {
        double best = 0.0;
        for (int k = 0; k <= 400; ++k) {
            const double t = rad * k / 400.0;
            const double s = std::sqrt(std::max(0.0, rad * rad - t * t));
            // Horizontal displacement s along the axis loses sin(π s) decay.
            for (int q = 0; q <= 40; ++q) {
                const double dx = s * q / 40.0;
                best = std::max(best, 2 * std::cos(pi * dx) * std::exp(sl * t));
            }
        }
        return best;
    };
    const double expect = std::log2(max_g(r) / max_g(r / 2));
    const double idx = doubling_index(lp, Vec3{0.5, 0.5, 0.0}, r);
    EXPECT_NEAR(idx, expect, 0.02);
    EXPECT_GE(idx, 0.0);
    EXPECT_LE(idx, sl * r + 0.5);
}

TEST(DoublingIndex, ZeroFieldThrows) {
    EXPECT_THROW(doubling_index(constant_pair(0.0, 1.0), Vec3{}, 0.1), DegenerateError);
}
