#include "nlab/biharmonic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "nlab/errors.hpp"

namespace nlab {

std::string to_string(BCType bc) { return bc == BCType::navier ? "navier" : "clamped"; }

BCType bc_from_string(const std::string& s) {
    if (s == "navier" || s == "Navier") return BCType::navier;
    if (s == "clamped" || s == "Clamped") return BCType::clamped;
    throw ConfigError("unknown boundary condition '" + s + "'");
}

Eigen::VectorXd DiscreteOperator::restrict(const ScalarField2D& f) const {
    if (f.grid().nx() != grid->nx() || f.grid().ny() != grid->ny())
        throw Error("field grid does not match operator grid");
    Eigen::VectorXd x(dim());
    for (Eigen::Index k = 0; k < dim(); ++k) x[k] = f.values()[node_of_dof[k]];
    return x;
}

std::vector<double> DiscreteOperator::prolong(const Eigen::VectorXd& x) const {
    std::vector<double> v(grid->size(), 0.0);
    for (Eigen::Index k = 0; k < dim(); ++k) v[node_of_dof[k]] = x[k];
    return v;
}

DiscreteOperator assemble_operator(GridPtr grid, BCType bc) {
    const Grid2D& g = *grid;
    DiscreteOperator op;
    op.grid = grid;
    op.bc = bc;
    op.dof_of_node.assign(g.size(), -1);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            if (g.mask(i, j)) {
                op.dof_of_node[g.index(i, j)] = static_cast<int>(op.node_of_dof.size());
                op.node_of_dof.push_back(g.index(i, j));
            }
    const auto n = static_cast<Eigen::Index>(op.node_of_dof.size());
    const double h2 = g.h() * g.h();
    const double h4 = h2 * h2;

    std::vector<Eigen::Triplet<double>> lap;
    lap.reserve(static_cast<std::size_t>(n) * 5);
    for (Eigen::Index k = 0; k < n; ++k) {
        const std::size_t id = op.node_of_dof[k];
        const int i = static_cast<int>(id % g.nx()), j = static_cast<int>(id / g.nx());
        lap.emplace_back(k, k, 4.0 / h2);
        const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& d : nb) {
            const int q = op.dof_of_node[g.index(i + d[0], j + d[1])];
            if (q >= 0) lap.emplace_back(k, q, -1.0 / h2);
        }
    }
    op.laplacian.resize(n, n);
    op.laplacian.setFromTriplets(lap.begin(), lap.end());

    if (bc == BCType::navier) {
        op.matrix = (op.laplacian * op.laplacian).pruned();
    } else {
        if (g.nx() < 5 || g.ny() < 5) throw GridError("grid too coarse for the clamped stencil");
        std::vector<Eigen::Triplet<double>> bih;
        bih.reserve(static_cast<std::size_t>(n) * 13);
        struct Tap {
            int di, dj;
            double w;
        };
        static constexpr Tap taps[] = {
            {0, 0, 20.0},  {1, 0, -8.0},  {-1, 0, -8.0}, {0, 1, -8.0},  {0, -1, -8.0},
            {1, 1, 2.0},   {1, -1, 2.0},  {-1, 1, 2.0},  {-1, -1, 2.0}, {2, 0, 1.0},
            {-2, 0, 1.0},  {0, 2, 1.0},   {0, -2, 1.0}};
        for (Eigen::Index k = 0; k < n; ++k) {
            const std::size_t id = op.node_of_dof[k];
            const int i = static_cast<int>(id % g.nx()), j = static_cast<int>(id / g.nx());
            for (const Tap& t : taps) {
                const int ti = i + t.di, tj = j + t.dj;
                if (g.in_range(ti, tj) && g.kind(ti, tj) == NodeKind::interior) {
                    bih.emplace_back(k, op.dof_of_node[g.index(ti, tj)], t.w / h4);
                } else if (g.in_range(ti, tj) && g.kind(ti, tj) == NodeKind::boundary) {
                    // u = 0 on the boundary.
                } else {
                    // Ghost node: only the distance-two axis taps can leave the
                    // closed domain on these grid-aligned boundaries; mirror
                    // through the boundary node lands back on (i, j).
                    const bool axis2 = (std::abs(t.di) == 2 && t.dj == 0) ||
                                       (std::abs(t.dj) == 2 && t.di == 0);
                    const int mi = i + t.di / 2, mj = j + t.dj / 2;
                    if (!axis2 || !g.in_range(mi, mj) || g.kind(mi, mj) != NodeKind::boundary)
                        throw GridError("unsupported ghost configuration in clamped stencil");
                    bih.emplace_back(k, k, t.w / h4);
                }
            }
        }
        op.matrix.resize(n, n);
        op.matrix.setFromTriplets(bih.begin(), bih.end());
    }
    op.matrix.makeCompressed();
    for (Eigen::Index r = 0; r < n; ++r) {
        double s = 0.0;
        for (SparseMatrix::InnerIterator it(op.matrix, r); it; ++it) s += std::abs(it.value());
        op.norm_inf = std::max(op.norm_inf, s);
    }
    return op;
}

namespace {

class ShiftInvert {
public:
    explicit ShiftInvert(const DiscreteOperator& op) : navier_(op.bc == BCType::navier) {
        // Navier: A = L^2, so A^{-1} x = L^{-1} L^{-1} x with the sparser factor.
        solver_.compute(navier_ ? op.laplacian : op.matrix);
        if (solver_.info() != Eigen::Success)
            throw SolverError("sparse Cholesky factorization failed", NAN);
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd y = solver_.solve(x);
        if (navier_) y = solver_.solve(y);
        return y;
    }

private:
    bool navier_;
    Eigen::SimplicialLDLT<SparseMatrix> solver_;
};

void orthonormalize(Eigen::MatrixXd& x) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    x = qr.householderQ() * Eigen::MatrixXd::Identity(x.rows(), x.cols());
}

}  // namespace

std::vector<EigenPair> solve_modes(const DiscreteOperator& op, int m, const SolverOptions& options) {
    const Eigen::Index n = op.dim();
    if (m < 1 || m > 50) throw Error("mode count must be in [1, 50]");
    if (m >= n) throw Error("mode count must be smaller than the matrix dimension");
    const Eigen::Index p = std::min<Eigen::Index>(n, std::max(m + 8, 2 * m));

    ShiftInvert inv(op);
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index c = 0; c < p; ++c)
        for (Eigen::Index r = 0; r < n; ++r) x(r, c) = normal(rng);
    orthonormalize(x);

    const double target = options.tol * op.norm_inf;
    Eigen::VectorXd theta;
    Eigen::MatrixXd ax;
    double worst = INFINITY;
    bool converged = false;
    for (int it = 0; it < options.max_iterations; ++it) {
        x = inv.apply(x);
        orthonormalize(x);
        Eigen::MatrixXd aq = op.matrix * x;
        Eigen::MatrixXd t = x.transpose() * aq;
        t = 0.5 * (t + t.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        theta = es.eigenvalues();
        x = x * es.eigenvectors();
        ax = aq * es.eigenvectors();
        worst = 0.0;
        for (int k = 0; k < m; ++k)
            worst = std::max(worst, (ax.col(k) - theta[k] * x.col(k)).norm() / x.col(k).norm());
        if (worst <= target) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "subspace iteration did not converge: residual " << worst << " > target " << target;
        throw SolverError(os.str(), worst);
    }

    const Grid2D& g = *op.grid;
    std::vector<EigenPair> out;
    out.reserve(m);
    for (int k = 0; k < m; ++k) {
        Eigen::VectorXd v = x.col(k);
        const double vmax = v.cwiseAbs().maxCoeff();
        for (Eigen::Index r = 0; r < n; ++r) {
            if (std::abs(v[r]) > 1e-8 * vmax) {
                if (v[r] < 0) v = -v;
                break;
            }
        }
        // Trapezoidal L2 norm: boundary values vanish, interior weight h^2.
        v /= g.h() * v.norm();
        const double lambda_sq = theta[k];
        if (!(lambda_sq > 0.0)) throw SolverError("non-positive eigenvalue", NAN);
        const double res = (op.matrix * v - lambda_sq * v).norm() / v.norm();
        out.push_back(EigenPair{std::sqrt(lambda_sq),
                                ScalarField2D(op.grid, op.prolong(v), "u" + std::to_string(k)),
                                res, res / op.norm_inf, op.bc, false});
    }
    return out;
}

EigenPair navier_modes_analytic(const Domain2D& rect, int k, int l, GridPtr grid) {
    if (rect.kind() != DomainKind::rectangle)
        throw Error("analytic Navier modes exist only on rectangles");
    if (k < 1 || l < 1) throw Error("mode indices must be >= 1");
    const double a = rect.a(), b = rect.b();
    const Vec2 o = rect.origin();
    const double pi = std::numbers::pi;
    const double amp = 2.0 / std::sqrt(a * b);
    ScalarField2D u = ScalarField2D::sample(
        grid,
        [&](Vec2 p) {
            return amp * std::sin(k * pi * (p.x - o.x) / a) * std::sin(l * pi * (p.y - o.y) / b);
        },
        "u" + std::to_string(k) + "_" + std::to_string(l));
    // Boundary traces are exactly zero; sin(nπ) rounding is not.
    std::vector<double> vals = u.values();
    for (int j = 0; j < grid->ny(); ++j)
        for (int i = 0; i < grid->nx(); ++i)
            if (grid->kind(i, j) == NodeKind::boundary) vals[grid->index(i, j)] = 0.0;
    const double lambda = pi * pi * (double(k) * k / (a * a) + double(l) * l / (b * b));
    return EigenPair{lambda, ScalarField2D(grid, std::move(vals), u.name()), 0.0, 0.0,
                     BCType::navier, true};
}

double residual_norm(const DiscreteOperator& op, const EigenPair& pair) {
    if (pair.u.grid().size() != op.grid->size() || pair.u.grid().h() != op.grid->h())
        throw Error("eigenpair grid does not match operator grid");
    const Eigen::VectorXd v = op.restrict(pair.u);
    const double nv = v.norm();
    if (nv == 0.0) throw DegenerateError("zero eigenvector");
    return (op.matrix * v - pair.lambda * pair.lambda * v).norm() / nv;
}

std::vector<ModeIndex> navier_ladder(const Domain2D& rect, int kmax) {
    const double pi = std::numbers::pi;
    std::vector<ModeIndex> ladder;
    for (int k = 1; k <= kmax; ++k)
        for (int l = 1; l <= kmax; ++l)
            ladder.push_back(
                {k, l, pi * pi * (double(k) * k / (rect.a() * rect.a()) + double(l) * l / (rect.b() * rect.b()))});
    std::stable_sort(ladder.begin(), ladder.end(),
                     [](const ModeIndex& x, const ModeIndex& y) { return x.lambda < y.lambda; });
    return ladder;
}

}  // namespace nlab
