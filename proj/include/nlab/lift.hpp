#pragma once

#include <functional>
#include <limits>

#include "nlab/biharmonic.hpp"
#include "nlab/field.hpp"

namespace nlab {

// Values and gradients of the lifted pair at one point of Ω × R.
struct LiftedSample {
    double g = 0.0;
    double h = 0.0;
    Vec3 grad_g;
    Vec3 grad_h;
};

/// Anything the frequency machinery can integrate: a pair (g, h) on a subset
/// of R^3 together with its eigenvalue parameter. Eigenfunction lifts and
/// closed-form synthetic pairs both implement this.
class LiftedSource {
public:
    virtual ~LiftedSource() = default;
    virtual double lambda() const = 0;
    virtual LiftedSample eval(const Vec3& y) const = 0;
    virtual double g_value(const Vec3& y) const { return eval(y).g; }
    // Largest admissible radius of a ball centred above x; infinite when the
    // source is defined everywhere.
    virtual double max_radius(Vec2 /*x*/) const { return std::numeric_limits<double>::infinity(); }
};

/// g(x, t) = u(x) e^{√λ t}, h(x, t) = v(x) e^{√λ t} with v = (Δ - λ) u.
/// Stored as two planar fields plus the analytic exponential factor.
class LiftedPair final : public LiftedSource {
public:
    static constexpr double max_abs_t = 2.0;

    LiftedPair(ScalarField2D u, ScalarField2D v, double lambda);

    double lambda() const override { return lambda_; }
    double sqrt_lambda() const { return sqrt_lambda_; }
    const ScalarField2D& u() const { return u_; }
    const ScalarField2D& v() const { return v_; }
    const Grid2D& grid() const { return u_.grid(); }

    LiftedSample eval(const Vec3& y) const override;
    double g_value(const Vec3& y) const override;
    double max_radius(Vec2 x) const override;

private:
    double growth(double t) const;

    ScalarField2D u_;
    ScalarField2D v_;
    double lambda_;
    double sqrt_lambda_;
};

// v = Δ_h u - λ u with the 5-point Laplacian. Interior nodes use the stencil
// directly; boundary nodes use ghost values mirrored through the node (odd for
// Navier, even for clamped), matching each condition's symmetry.
ScalarField2D compute_v(const ScalarField2D& u, double lambda, BCType bc);

// Checked lift of a solver or analytic eigenpair.
LiftedPair lift_pair(const EigenPair& pair);
// Unchecked lift of an arbitrary field (synthetic tests).
LiftedPair lift_fields(const ScalarField2D& u, double lambda, BCType bc = BCType::navier);

LiftedSample eval_lifted(const LiftedPair& lp, const Vec3& y);

// Consistency of a lift on nodes at distance >= max(margin, 2h) from the boundary, using an
// isotropic 9-point Laplacian independent of the 5-point one inside compute_v.
// Both are normalized by λ² max|u|.
struct LiftResiduals {
    double coupled = 0.0;   // max |Δ u - λ u - v|
    double harmonic = 0.0;  // max |Δ v + λ v|
};
LiftResiduals lift_residuals(const LiftedPair& lp, double margin = 0.0);

/// Closed-form pairs given as callables; used to check the frequency
/// machinery against analytic moments.
class SyntheticLift final : public LiftedSource {
public:
    using Fn = std::function<LiftedSample(const Vec3&)>;

    SyntheticLift(double lambda, Fn fn) : lambda_(lambda), fn_(std::move(fn)) {}

    double lambda() const override { return lambda_; }
    LiftedSample eval(const Vec3& y) const override { return fn_(y); }

private:
    double lambda_;
    Fn fn_;
};

}  // namespace nlab
