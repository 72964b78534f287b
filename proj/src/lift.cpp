#include "nlab/lift.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlab/errors.hpp"

namespace nlab {

LiftedPair::LiftedPair(ScalarField2D u, ScalarField2D v, double lambda)
    : u_(std::move(u)), v_(std::move(v)), lambda_(lambda), sqrt_lambda_(std::sqrt(lambda)) {
    if (!(lambda > 0.0)) throw Error("lift requires lambda > 0");
    if (u_.grid().nx() != v_.grid().nx() || u_.grid().ny() != v_.grid().ny())
        throw Error("u and v live on different grids");
}

double LiftedPair::growth(double t) const {
    if (!(std::abs(t) <= max_abs_t)) {
        std::ostringstream os;
        os << "lifted evaluation at t = " << t << " exceeds the guard |t| <= " << max_abs_t;
        throw OutOfSupportError(os.str());
    }
    return std::exp(sqrt_lambda_ * t);
}

LiftedSample LiftedPair::eval(const Vec3& y) const {
    const double e = growth(y.t);
    const Vec2 x = horizontal(y);
    const FieldSample su = u_.eval(x);
    const FieldSample sv = v_.eval(x);
    LiftedSample s;
    s.g = su.value * e;
    s.h = sv.value * e;
    s.grad_g = {su.gradient.x * e, su.gradient.y * e, sqrt_lambda_ * s.g};
    s.grad_h = {sv.gradient.x * e, sv.gradient.y * e, sqrt_lambda_ * s.h};
    return s;
}

double LiftedPair::g_value(const Vec3& y) const {
    return u_.value(horizontal(y)) * growth(y.t);
}

double LiftedPair::max_radius(Vec2 x) const {
    const Grid2D& g = grid();
    if (!g.domain().contains(x)) return -1.0;
    return g.domain().distance_to_boundary(x) - 2.0 * g.h();
}

ScalarField2D compute_v(const ScalarField2D& u, double lambda, BCType bc) {
    const Grid2D& g = u.grid();
    const double inv_h2 = 1.0 / (g.h() * g.h());
    const double ghost_sign = bc == BCType::navier ? -1.0 : 1.0;
    std::vector<double> v(g.size(), 0.0);
    const int dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            const NodeKind k = g.kind(i, j);
            if (k == NodeKind::exterior) continue;
            const double c = u.at(i, j);
            double lap = -4.0 * c;
            for (const auto& d : dirs) {
                const int ni = i + d[0], nj = j + d[1];
                if (g.in_closure(ni, nj)) {
                    lap += u.at(ni, nj);
                } else {
                    const int mi = i - d[0], mj = j - d[1];
                    lap += g.in_closure(mi, mj) ? ghost_sign * u.at(mi, mj) : 0.0;
                }
            }
            v[g.index(i, j)] = lap * inv_h2 - lambda * c;
        }
    }
    return ScalarField2D(u.grid_ptr(), std::move(v), "v");
}

LiftedPair lift_fields(const ScalarField2D& u, double lambda, BCType bc) {
    if (!(lambda > 0.0)) throw Error("lift requires lambda > 0");
    return LiftedPair(u, compute_v(u, lambda, bc), lambda);
}

LiftedPair lift_pair(const EigenPair& pair) {
    if (!(pair.lambda > 0.0)) throw Error("lift requires lambda > 0");
    const double n = pair.u.l2_norm();
    if (std::abs(n - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "eigenfunction is not L2-normalized (norm " << n << ")";
        throw Error(os.str());
    }
    if (!pair.analytic && !(pair.relative_residual <= 1e-10))
        throw Error("eigenpair residual too large to lift");
    return lift_fields(pair.u, pair.lambda, pair.bc);
}

LiftedSample eval_lifted(const LiftedPair& lp, const Vec3& y) { return lp.eval(y); }

LiftResiduals lift_residuals(const LiftedPair& lp, double margin) {
    const Grid2D& g = lp.grid();
    const double h = g.h();
    const double min_dist = std::max(margin, 2.0 * h);
    const double lambda = lp.lambda();
    auto lap9 = [&](const ScalarField2D& f, int i, int j) {
        const double axis = f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) + f.at(i, j - 1);
        const double diag = f.at(i + 1, j + 1) + f.at(i - 1, j + 1) + f.at(i + 1, j - 1) +
                            f.at(i - 1, j - 1);
        return (4.0 * axis + diag - 20.0 * f.at(i, j)) / (6.0 * h * h);
    };
    LiftResiduals r;
    for (int j = 1; j + 1 < g.ny(); ++j) {
        for (int i = 1; i + 1 < g.nx(); ++i) {
            if (!g.mask(i, j) || g.distance_to_boundary()[g.index(i, j)] < min_dist * (1 - 1e-12))
                continue;
            const double u = lp.u().at(i, j), v = lp.v().at(i, j);
            r.coupled = std::max(r.coupled, std::abs(lap9(lp.u(), i, j) - lambda * u - v));
            r.harmonic = std::max(r.harmonic, std::abs(lap9(lp.v(), i, j) + lambda * v));
        }
    }
    const double scale = lambda * lambda * std::max(lp.u().max_abs(), 1e-300);
    r.coupled /= scale;
    r.harmonic /= scale;
    return r;
}

}  // namespace nlab
