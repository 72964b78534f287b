#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "nlab/biharmonic.hpp"
#include "nlab/errors.hpp"

using namespace nlab;

namespace {

constexpr double pi = std::numbers::pi;

GridPtr unit_grid(double h) { return build_grid(Domain2D::rectangle(1.0, 1.0), h); }

// Eigenvalue of the Dirichlet 5-point Laplacian on the unit square for the
// discrete sine mode (k, l).
double discrete_laplace_eig(int k, int l, double h) {
    const double sk = std::sin(k * pi * h / 2), sl = std::sin(l * pi * h / 2);
    return 4.0 / (h * h) * (sk * sk + sl * sl);
}

double max_rel_error_on_sine(double h) {
    const auto g = unit_grid(h);
    const auto op = assemble_operator(g, BCType::navier);
    const auto f = ScalarField2D::sample(g, [](Vec2 p) { return std::sin(pi * p.x) * std::sin(pi * p.y); });
    const Eigen::VectorXd u = op.restrict(f);
    const Eigen::VectorXd au = op.matrix * u;
    const double mu = 4 * std::pow(pi, 4);
    return (au - mu * u).cwiseAbs().maxCoeff() / (mu * u.cwiseAbs().maxCoeff());
}

}  // namespace

TEST(BCType, StringRoundTrip) {
    EXPECT_EQ(bc_from_string(to_string(BCType::navier)), BCType::navier);
    EXPECT_EQ(bc_from_string(to_string(BCType::clamped)), BCType::clamped);
    EXPECT_THROW(bc_from_string("free"), ConfigError);
}

TEST(Operator, NavierIsSquaredLaplacian) {
    const auto op = assemble_operator(unit_grid(0.25), BCType::navier);
    ASSERT_EQ(op.dim(), 9);
    const Eigen::MatrixXd a(op.matrix), l(op.laplacian);
    EXPECT_LE((a - l * l).norm(), 1e-12 * a.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(a), el(l);
    const Eigen::VectorXd squared = el.eigenvalues().array().square();
    for (int k = 0; k < 9; ++k) EXPECT_NEAR(ea.eigenvalues()[k], squared[k], 1e-10 * squared.maxCoeff());
}

TEST(Operator, DeepInteriorRowsAnnihilateConstants) {
    for (BCType bc : {BCType::navier, BCType::clamped}) {
        const auto g = unit_grid(1.0 / 16);
        const auto op = assemble_operator(g, bc);
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(op.dim());
        const Eigen::VectorXd rows = op.matrix * ones;
        for (int j = 3; j < g->ny() - 3; ++j)
            for (int i = 3; i < g->nx() - 3; ++i)
                EXPECT_NEAR(rows[op.dof_of_node[g->index(i, j)]], 0.0, 1e-6) << to_string(bc);
        // Thirteen nonzeros in a deep-interior row.
        const int dof = op.dof_of_node[g->index(8, 8)];
        int nnz = 0;
        for (SparseMatrix::InnerIterator it(op.matrix, dof); it; ++it) nnz += it.value() != 0.0;
        EXPECT_EQ(nnz, 13);
    }
}

TEST(Operator, SymmetricAndPositive) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (BCType bc : {BCType::navier, BCType::clamped}) {
        const auto op = assemble_operator(build_grid(Domain2D::lshape(1.0, 1.0, 0.5, 0.5), 1.0 / 32), bc);
        auto random_vec = [&] {
            Eigen::VectorXd x(op.dim());
            for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = normal(rng);
            return x;
        };
        for (int t = 0; t < 50; ++t) {
            const Eigen::VectorXd x = random_vec(), y = random_vec();
            const double xay = x.dot(op.matrix * y), axy = (op.matrix * x).dot(y);
            EXPECT_LE(std::abs(xay - axy), 1e-12 * std::max(std::abs(xay), std::abs(axy)));
        }
        for (int t = 0; t < 20; ++t) {
            const Eigen::VectorXd x = random_vec();
            EXPECT_GT(x.dot(op.matrix * x), 0.0);
        }
    }
}

TEST(Operator, SineModeConvergesAtSecondOrder) {
    const double e1 = max_rel_error_on_sine(1.0 / 64), e2 = max_rel_error_on_sine(1.0 / 128);
    EXPECT_LT(e1, 1e-2);
    const double order = std::log2(e1 / e2);
    EXPECT_GE(order, 1.7);
    EXPECT_LE(order, 2.3);
}

TEST(Operator, ClampedNeedsTwoInteriorLayers) {
    // A single interior row leaves no room for the mirrored ghosts.
    const auto thin = build_grid(Domain2D::rectangle(1.0, 0.5), 0.25);
    EXPECT_THROW(assemble_operator(thin, BCType::clamped), GridError);
    EXPECT_NO_THROW(assemble_operator(thin, BCType::navier));
    EXPECT_NO_THROW(assemble_operator(unit_grid(0.25), BCType::clamped));
}

TEST(Solver, NavierLadderMatchesDiscreteSpectrum) {
    const double h = 1.0 / 64;
    const auto op = assemble_operator(unit_grid(h), BCType::navier);
    const auto pairs = solve_modes(op, 5);
    ASSERT_EQ(pairs.size(), 5u);
    const double expect[] = {discrete_laplace_eig(1, 1, h), discrete_laplace_eig(1, 2, h),
                             discrete_laplace_eig(2, 1, h), discrete_laplace_eig(2, 2, h),
                             discrete_laplace_eig(1, 3, h)};
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(pairs[k].lambda, expect[k], 1e-9 * expect[k]);
}

TEST(Solver, NavierSquareAtFineGrid) {
    const auto op = assemble_operator(unit_grid(1.0 / 128), BCType::navier);
    const auto pairs = solve_modes(op, 5);
    const double ladder[] = {2, 5, 5, 8, 10};
    for (int k = 0; k < 5; ++k) {
        EXPECT_LE(std::abs(pairs[k].lambda - ladder[k] * pi * pi), 5e-3 * ladder[k] * pi * pi);
        EXPECT_LE(pairs[k].relative_residual, 1e-14);
        EXPECT_NEAR(pairs[k].u.l2_norm(), 1.0, 1e-9);
        EXPECT_NEAR(residual_norm(op, pairs[k]), pairs[k].residual, 1e-6 * pairs[k].residual + 1e-12);
        if (k > 0) EXPECT_LE(pairs[k - 1].lambda, pairs[k].lambda);
    }
    // Pairwise orthogonal under the same trapezoidal inner product.
    const double h2 = std::pow(1.0 / 128, 2);
    for (int a = 0; a < 5; ++a)
        for (int b = a + 1; b < 5; ++b) {
            double dot = 0.0;
            for (std::size_t n = 0; n < pairs[a].u.values().size(); ++n)
                dot += pairs[a].u.values()[n] * pairs[b].u.values()[n];
            EXPECT_LE(std::abs(dot * h2), 1e-6);
        }
}

TEST(Solver, SignConvention) {
    const auto g = unit_grid(1.0 / 32);
    const auto pairs = solve_modes(assemble_operator(g, BCType::navier), 3);
    for (const auto& p : pairs) {
        double first = 0.0;
        for (int j = 0; j < g->ny() && first == 0.0; ++j)
            for (int i = 0; i < g->nx(); ++i)
                if (g->mask(i, j) && std::abs(p.u.at(i, j)) > 1e-8 * p.u.max_abs()) {
                    first = p.u.at(i, j);
                    break;
                }
        EXPECT_GT(first, 0.0);
    }
}

TEST(Solver, ClampedSelfConvergesAndExceedsNavier) {
    auto first = [](double h, BCType bc) { return solve_modes(assemble_operator(unit_grid(h), bc), 1)[0].lambda; };
    const double c64 = first(1.0 / 64, BCType::clamped), c128 = first(1.0 / 128, BCType::clamped);
    EXPECT_LE(std::abs(c64 - c128) / c128, 1e-2);
    EXPECT_GT(c128, first(1.0 / 128, BCType::navier));
}

TEST(Solver, LShapeRefinementIsConsistent) {
    const auto d = Domain2D::lshape(1.0, 1.0, 0.5, 0.5);
    const auto a = solve_modes(assemble_operator(build_grid(d, 1.0 / 64), BCType::navier), 3);
    const auto b = solve_modes(assemble_operator(build_grid(d, 1.0 / 128), BCType::navier), 3);
    for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(a[k].lambda - b[k].lambda) / b[k].lambda, 1e-2);
}

TEST(Solver, RejectsBadModeCounts) {
    const auto op = assemble_operator(unit_grid(0.25), BCType::navier);
    EXPECT_THROW(solve_modes(op, 0), Error);
    EXPECT_THROW(solve_modes(op, 9), Error);
    const auto big = assemble_operator(unit_grid(1.0 / 16), BCType::navier);
    EXPECT_THROW(solve_modes(big, 51), Error);
}

TEST(Solver, IterationCapSurfacesResidual) {
    const auto op = assemble_operator(unit_grid(1.0 / 32), BCType::navier);
    SolverOptions opts;
    opts.max_iterations = 1;
    opts.tol = 1e-300;
    try {
        solve_modes(op, 4, opts);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_GT(e.attained_residual(), 0.0);
    }
}

TEST(Analytic, NavierModes) {
    const auto d = Domain2D::rectangle(1.0, 1.0);
    const auto g = unit_grid(1.0 / 64);
    const auto p11 = navier_modes_analytic(d, 1, 1, g);
    EXPECT_DOUBLE_EQ(p11.lambda, 2 * pi * pi);
    EXPECT_NEAR(p11.u.l2_norm(), 1.0, 1e-12);
    EXPECT_TRUE(p11.analytic);
    EXPECT_DOUBLE_EQ(navier_modes_analytic(d, 3, 2, g).lambda, 13 * pi * pi);
    EXPECT_NEAR(p11.u.at(32, 32), 2.0, 1e-14);
    EXPECT_THROW(navier_modes_analytic(Domain2D::lshape(1, 1, 0.5, 0.5), 1, 1, g), Error);
    EXPECT_THROW(navier_modes_analytic(d, 0, 1, g), Error);
}

TEST(Analytic, RectangleNormalization) {
    const auto d = Domain2D::rectangle(2.0, 1.0);
    const auto p = navier_modes_analytic(d, 2, 1, build_grid(d, 1.0 / 32));
    EXPECT_DOUBLE_EQ(p.lambda, pi * pi * (1.0 + 1.0));
    EXPECT_NEAR(p.u.l2_norm(), 1.0, 1e-12);
}

TEST(Analytic, ResidualDecaysAtSecondOrder) {
    const auto d = Domain2D::rectangle(1.0, 1.0);
    auto res = [&](double h) {
        const auto g = unit_grid(h);
        return residual_norm(assemble_operator(g, BCType::navier), navier_modes_analytic(d, 1, 1, g));
    };
    const double r64 = res(1.0 / 64), r128 = res(1.0 / 128);
    EXPECT_NEAR(r64 / r128, 4.0, 0.4);
}

TEST(Residual, RandomFieldIsRejected) {
    const auto g = unit_grid(1.0 / 32);
    const auto op = assemble_operator(g, BCType::navier);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> v(g->size(), 0.0);
    for (int j = 0; j < g->ny(); ++j)
        for (int i = 0; i < g->nx(); ++i)
            if (g->mask(i, j)) v[g->index(i, j)] = uni(rng);
    EigenPair p{10.0, ScalarField2D(g, v), 0.0, 0.0, BCType::navier, false};
    EXPECT_GT(residual_norm(op, p), 1e-3);
    EigenPair other{10.0, ScalarField2D::sample(unit_grid(1.0 / 16), [](Vec2) { return 1.0; }), 0.0, 0.0,
                    BCType::navier, false};
    EXPECT_THROW(residual_norm(op, other), Error);
}

TEST(Ladder, SortedAndComplete) {
    const auto ladder = navier_ladder(Domain2D::rectangle(1.0, 1.0), 4);
    ASSERT_EQ(ladder.size(), 16u);
    for (std::size_t k = 1; k < ladder.size(); ++k) EXPECT_LE(ladder[k - 1].lambda, ladder[k].lambda);
    EXPECT_EQ(ladder.front().k, 1);
    EXPECT_EQ(ladder.back().k, 4);
    EXPECT_EQ(ladder.back().l, 4);
}
