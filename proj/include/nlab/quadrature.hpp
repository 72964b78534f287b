#pragma once

#include <vector>

#include "nlab/geometry.hpp"

namespace nlab {

/// Product rules for spheres and balls in R^3 (and disks in R^2).
/// Sphere: Gauss-Legendre in cos θ (n_theta nodes) times n_phi equispaced
/// azimuths. Ball: the sphere rule times n_r Gauss-Legendre radial nodes
/// carrying the ρ² Jacobian.
struct QuadratureSpec {
    int n_theta = 16;
    int n_phi = 32;
    int n_r = 16;

    void validate() const;
    // Same shape, every count scaled to `order` (n_phi = 2 * order).
    static QuadratureSpec with_order(int order);
};

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss-Legendre on [a, b].
GaussRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

struct WeightedPoint3 {
    Vec3 p;
    double w;
};

struct WeightedPoint2 {
    Vec2 p;
    double w;
};

class QuadratureRules {
public:
    explicit QuadratureRules(const QuadratureSpec& spec);

    const QuadratureSpec& spec() const { return spec_; }
    // Unit sphere directions, weights summing to 4π.
    const std::vector<WeightedPoint3>& sphere() const { return sphere_; }
    // Unit ball points, weights summing to 4π/3.
    const std::vector<WeightedPoint3>& ball() const { return ball_; }
    // Unit disk points, weights summing to π.
    const std::vector<WeightedPoint2>& disk() const { return disk_; }

    template <class F>
    double sphere_integral(F&& f, Vec3 center, double r) const {
        KahanSum s;
        for (const auto& q : sphere_) s.add(q.w * f(center + r * q.p));
        return r * r * s.value();
    }

    template <class F>
    double ball_integral(F&& f, Vec3 center, double r) const {
        KahanSum s;
        for (const auto& q : ball_) s.add(q.w * f(center + r * q.p));
        return r * r * r * s.value();
    }

    template <class F>
    double disk_integral(F&& f, Vec2 center, double r) const {
        KahanSum s;
        for (const auto& q : disk_) s.add(q.w * f(center + r * q.p));
        return r * r * s.value();
    }

private:
    QuadratureSpec spec_;
    std::vector<WeightedPoint3> sphere_;
    std::vector<WeightedPoint3> ball_;
    std::vector<WeightedPoint2> disk_;
};

template <class F>
double sphere_integral(F&& f, Vec3 center, double r, const QuadratureSpec& spec = {}) {
    return QuadratureRules(spec).sphere_integral(std::forward<F>(f), center, r);
}

template <class F>
double ball_integral(F&& f, Vec3 center, double r, const QuadratureSpec& spec = {}) {
    return QuadratureRules(spec).ball_integral(std::forward<F>(f), center, r);
}

}  // namespace nlab
