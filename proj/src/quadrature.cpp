#include "nlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nlab/errors.hpp"

namespace nlab {

void QuadratureSpec::validate() const {
    if (n_theta < 4 || n_phi < 4 || n_r < 4)
        throw Error("quadrature node counts must all be >= 4");
}

QuadratureSpec QuadratureSpec::with_order(int order) { return {order, 2 * order, order}; }

GaussRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw Error("Gauss-Legendre needs at least one node");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = mid - half * z;
        rule.nodes[n - 1 - i] = mid + half * z;
        rule.weights[i] = rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

QuadratureRules::QuadratureRules(const QuadratureSpec& spec) : spec_(spec) {
    spec.validate();
    const double pi = std::numbers::pi;
    const GaussRule polar = gauss_legendre(spec.n_theta, -1.0, 1.0);
    const double dphi = 2.0 * pi / spec.n_phi;
    sphere_.reserve(static_cast<std::size_t>(spec.n_theta) * spec.n_phi);
    for (int a = 0; a < spec.n_theta; ++a) {
        const double z = polar.nodes[a];
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        for (int b = 0; b < spec.n_phi; ++b) {
            const double phi = (b + 0.5) * dphi;
            sphere_.push_back({{s * std::cos(phi), s * std::sin(phi), z}, polar.weights[a] * dphi});
        }
    }
    const GaussRule radial = gauss_legendre(spec.n_r, 0.0, 1.0);
    ball_.reserve(sphere_.size() * spec.n_r);
    for (int k = 0; k < spec.n_r; ++k) {
        const double rho = radial.nodes[k];
        const double wr = radial.weights[k] * rho * rho;
        for (const auto& q : sphere_) ball_.push_back({rho * q.p, wr * q.w});
    }
    const double dang = 2.0 * pi / spec.n_phi;
    for (int k = 0; k < spec.n_r; ++k) {
        const double rho = radial.nodes[k];
        for (int b = 0; b < spec.n_phi; ++b) {
            const double phi = (b + 0.5) * dang;
            disk_.push_back({{rho * std::cos(phi), rho * std::sin(phi)}, radial.weights[k] * rho * dang});
        }
    }
}

}  // namespace nlab
