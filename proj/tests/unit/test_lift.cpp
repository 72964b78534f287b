#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nlab/biharmonic.hpp"
#include "nlab/errors.hpp"
#include "nlab/lift.hpp"

using namespace nlab;

namespace {

constexpr double pi = std::numbers::pi;

GridPtr unit_grid(double h) { return build_grid(Domain2D::rectangle(1.0, 1.0), h); }

// max |v + 2 lambda u| over nodes at least 2h from the boundary, relative to
// 2 lambda max|u|.
double navier_v_error(double h) {
    const auto g = unit_grid(h);
    const auto pair = navier_modes_analytic(Domain2D::rectangle(1.0, 1.0), 2, 1, g);
    const auto lp = lift_pair(pair);
    double err = 0.0;
    for (int j = 2; j < g->ny() - 2; ++j)
        for (int i = 2; i < g->nx() - 2; ++i)
            err = std::max(err, std::abs(lp.v().at(i, j) + 2 * pair.lambda * pair.u.at(i, j)));
    return err / (2 * pair.lambda * pair.u.max_abs());
}

}  // namespace

TEST(Lift, AnalyticNavierModeHasVEqualMinusTwoLambdaU) {
    const double e64 = navier_v_error(1.0 / 64), e128 = navier_v_error(1.0 / 128);
    EXPECT_LT(e64, 1e-3);
    EXPECT_NEAR(std::log2(e64 / e128), 2.0, 0.3);
}

TEST(Lift, ZeroFieldLiftsToZero) {
    const auto g = unit_grid(1.0 / 32);
    const ScalarField2D zero(g, std::vector<double>(g->size(), 0.0));
    const auto lp = lift_fields(zero, 3.0);
    EXPECT_EQ(lp.v().max_abs(), 0.0);
    const auto s = lp.eval({0.5, 0.5, 0.3});
    EXPECT_EQ(s.g, 0.0);
    EXPECT_EQ(s.h, 0.0);
}

TEST(Lift, ConstantFieldExponentialFactor) {
    const auto g = unit_grid(1.0 / 32);
    const auto c = ScalarField2D::sample(g, [](Vec2) { return 1.75; });
    const auto lp = lift_fields(c, 1.0);
    const auto s = lp.eval({0.5, 0.5, std::log(2.0)});
    EXPECT_NEAR(s.g, 3.5, 1e-13);
    EXPECT_NEAR(s.grad_g.t, 3.5, 1e-13);
}

TEST(Lift, AtZeroHeightReducesToPlanarField) {
    const auto g = unit_grid(1.0 / 64);
    const auto pair = navier_modes_analytic(Domain2D::rectangle(1.0, 1.0), 1, 2, g);
    const auto lp = lift_pair(pair);
    const Vec2 x{0.31, 0.58};
    const auto s = eval_lifted(lp, {x.x, x.y, 0.0});
    const auto u = pair.u.eval(x);
    EXPECT_EQ(s.g, u.value);
    EXPECT_EQ(s.grad_g.x, u.gradient.x);
    EXPECT_EQ(s.grad_g.y, u.gradient.y);
    EXPECT_DOUBLE_EQ(s.grad_g.t, std::sqrt(pair.lambda) * u.value);
}

TEST(Lift, MatchesAnalyticLift) {
    const auto g = unit_grid(1.0 / 128);
    const auto pair = navier_modes_analytic(Domain2D::rectangle(1.0, 1.0), 1, 1, g);
    const auto lp = lift_pair(pair);
    const Vec3 y{0.37, 0.61, 0.2};
    const double sl = std::sqrt(2.0) * pi, e = std::exp(sl * y.t);
    const double gv = 2 * std::sin(pi * y.x) * std::sin(pi * y.y) * e;
    const double gx = 2 * pi * std::cos(pi * y.x) * std::sin(pi * y.y) * e;
    const double gy = 2 * pi * std::sin(pi * y.x) * std::cos(pi * y.y) * e;
    const auto s = lp.eval(y);
    const double scale = std::sqrt(gx * gx + gy * gy + sl * sl * gv * gv);
    EXPECT_LE(std::abs(s.g - gv) / std::abs(gv), 1e-4);
    EXPECT_LE(std::abs(s.grad_g.x - gx) / scale, 1e-4);
    EXPECT_LE(std::abs(s.grad_g.y - gy) / scale, 1e-4);
    EXPECT_LE(std::abs(s.grad_g.t - sl * gv) / scale, 1e-4);
    // h = -2 lambda g for Navier modes.
    EXPECT_LE(std::abs(s.h + 2 * pair.lambda * gv) / (2 * pair.lambda * std::abs(gv)), 1e-3);
}

TEST(Lift, SeparabilityInHeightIsExact) {
    const auto g = unit_grid(1.0 / 64);
    const auto lp = lift_pair(navier_modes_analytic(Domain2D::rectangle(1.0, 1.0), 2, 3, g));
    const double t1 = 0.13, t2 = -0.41;
    const auto a = lp.eval({0.44, 0.27, t1}), b = lp.eval({0.44, 0.27, t1 + t2});
    const double factor = std::exp(lp.sqrt_lambda() * t2);
    EXPECT_NEAR(b.g, factor * a.g, 1e-14 * std::abs(b.g) + 1e-300);
    EXPECT_NEAR(b.h, factor * a.h, 1e-14 * std::abs(b.h) + 1e-300);
    // Vertical derivatives are √λ times the values by construction.
    EXPECT_DOUBLE_EQ(b.grad_h.t, lp.sqrt_lambda() * b.h);
    EXPECT_DOUBLE_EQ(b.grad_g.t, lp.sqrt_lambda() * b.g);
    EXPECT_DOUBLE_EQ(lp.g_value({0.44, 0.27, t1}), a.g);
}

TEST(Lift, NavierIntegrandCancels) {
    const auto g = unit_grid(1.0 / 128);
    const auto lp = lift_pair(navier_modes_analytic(Domain2D::rectangle(1.0, 1.0), 3, 2, g));
    for (Vec3 y : {Vec3{0.3, 0.3, 0.1}, Vec3{0.52, 0.71, -0.2}}) {
        const auto s = lp.eval(y);
        const double lam = lp.lambda();
        EXPECT_LE(std::abs(s.g * s.h + 2 * lam * s.g * s.g), 2e-3 * 2 * lam * s.g * s.g);
    }
}

TEST(Lift, ClampedResidualsConvergeAtSecondOrder) {
    // Measured on a fixed interior region: within a few cells of the wall the
    // mirrored-ghost closure keeps the nested 5-point Laplacians at O(1).
    auto residuals = [](double h) {
        const auto g = unit_grid(h);
        const auto pair = solve_modes(assemble_operator(g, BCType::clamped), 1)[0];
        return lift_residuals(lift_pair(pair), 0.25);
    };
    const auto r64 = residuals(1.0 / 64), r128 = residuals(1.0 / 128);
    EXPECT_NEAR(std::log2(r64.harmonic / r128.harmonic), 2.0, 0.3);
    EXPECT_NEAR(std::log2(r64.coupled / r128.coupled), 2.0, 0.3);
}

TEST(Lift, Guards) {
    const auto g = unit_grid(1.0 / 32);
    const auto pair = navier_modes_analytic(Domain2D::rectangle(1.0, 1.0), 1, 1, g);
    const auto lp = lift_pair(pair);
    EXPECT_THROW(lp.eval({0.5, 0.5, 2.5}), OutOfSupportError);
    EXPECT_THROW(lp.eval({0.02, 0.5, 0.0}), OutOfSupportError);
    EXPECT_NEAR(lp.max_radius({0.5, 0.5}), 0.5 - 2.0 / 32, 1e-15);
    EXPECT_LT(lp.max_radius({1.5, 0.5}), 0.0);

    EigenPair bad = pair;
    bad.lambda = -1.0;
    EXPECT_THROW(lift_pair(bad), Error);
    EigenPair scaled{pair.lambda, ScalarField2D::sample(g, [](Vec2 p) { return 3 * p.x * (1 - p.x); }), 0.0, 0.0,
                     BCType::navier, true};
    EXPECT_THROW(lift_pair(scaled), Error);
    EigenPair noisy = pair;
    noisy.analytic = false;
    noisy.relative_residual = 1e-3;
    EXPECT_THROW(lift_pair(noisy), Error);
}

TEST(Synthetic, EvaluatesCallable) {
    const SyntheticLift s(2.0, [](const Vec3& y) {
        LiftedSample out;
        out.g = y.x;
        out.grad_g = {1, 0, 0};
        return out;
    });
    EXPECT_EQ(s.lambda(), 2.0);
    EXPECT_EQ(s.eval({0.25, 0, 0}).g, 0.25);
    EXPECT_TRUE(std::isinf(s.max_radius({0, 0})));
}
