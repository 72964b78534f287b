#pragma once

#include <string>
#include <vector>

#include "nlab/lift.hpp"
#include "nlab/quadrature.hpp"

namespace nlab {

/// Ball and sphere integrals of the lifted pair at one radius, and the two
/// forms of the frequency built from them:
///   N_volume   = r (D1 + D2 + D3 + D4) / H
///   N_boundary = r ∫_{∂B} (g g_n + h h_n) dσ / H
/// where D1 = ∫|∇g|², D2 = ∫|∇h|², D3 = ∫gh, D4 = 2λ∫g² over the ball and
/// H = H1 + H2 = ∫(g² + h²) over the sphere. hbar is the surface mean H/(4πr²).
struct FrequencyRecord {
    double r = 0.0;
    double d1 = 0.0, d2 = 0.0, d3 = 0.0, d4 = 0.0, d = 0.0;
    double h1 = 0.0, h2 = 0.0, h = 0.0;
    double boundary_flux = 0.0;
    double n_volume = 0.0;
    double n_boundary = 0.0;
    double hbar = 0.0;
};

struct FrequencyProfile {
    Vec3 center;
    double lambda = 0.0;
    std::vector<FrequencyRecord> records;
    std::vector<std::string> notes;  // rejected radii

    std::vector<double> radii() const;
};

/// Builds a profile at ascending radii. Radii whose sphere integral H falls
/// below 1e-30 are dropped with a note. Throws OutOfSupportError when a ball
/// is not admissible for the source.
FrequencyProfile frequency_profile(const LiftedSource& src, Vec3 center,
                                   const std::vector<double>& radii,
                                   const QuadratureRules& rules);
FrequencyProfile frequency_profile(const LiftedSource& src, Vec3 center,
                                   const std::vector<double>& radii,
                                   const QuadratureSpec& spec = {});

// Single-radius helper (volume form). Throws DegenerateError when H < 1e-30.
double frequency(const LiftedSource& src, Vec3 center, double r, const QuadratureRules& rules);

// Ball and surface means of g² + h², and ball integrals of g² and h².
struct BallMoments {
    double surface_mean = 0.0;  // ⨍_{∂B_r} (g² + h²)
    double ball_mean = 0.0;     // ⨍_{B_r} (g² + h²)
    double g2 = 0.0;            // ∫_{B_r} g²
    double h2 = 0.0;            // ∫_{B_r} h²
};
BallMoments ball_moments(const LiftedSource& src, Vec3 center, double r, const QuadratureRules& rules);

/// log2( max_{B_r}|g| / max_{B_{r/2}}|g| ), with the maxima taken over a
/// lattice of density^3 points clipped to the ball plus the sphere nodes of a
/// product rule, refined by one pattern-search step. Both balls use the same
/// lattice scaled with the radius.
double doubling_index(const LiftedSource& src, Vec3 center, double r, int density = 24);

void check_admissible(const LiftedSource& src, Vec3 center, double r);

}  // namespace nlab
