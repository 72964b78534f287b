#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nlab/field.hpp"
#include "nlab/verify.hpp"

namespace nlab {

/// Zero level set of a planar field as vertex chains. Closed loops repeat
/// their first vertex at the end.
struct NodalSet {
    std::vector<std::vector<Vec2>> polylines;
    std::string source;
    double h = 0.0;

    std::size_t segment_count() const;
};

/// Marching squares with linear edge interpolation over cells whose four
/// corners are in the closed domain.
///
/// Node values are preprocessed before contouring:
///  - boundary nodes whose trace vanishes take the mean of their interior axis
///    neighbours (diagonal ones at convex corners), so lines reach the boundary
///    instead of hugging it;
///  - remaining values with |u| <= 1e-12 ||u||_inf are set to +1e-12 ||u||_inf.
/// Saddle cells are split by the sign of the mean of the four corners.
/// Throws DegenerateError for an identically zero field.
NodalSet extract_nodal(const ScalarField2D& field, int threads = 1);

struct Region {
    enum class Kind { whole, ball };
    Kind kind = Kind::whole;
    Vec2 center;
    double radius = 0.0;

    static Region whole() { return {}; }
    // Throws for radius <= 0.
    static Region ball(Vec2 center, double radius);
};

// Length of the part of segment [a, b] inside the closed disk.
double clipped_length(const Segment& s, Vec2 center, double radius);

double nodal_length(const NodalSet& ns, const Region& region = Region::whole());

/// Sign changes of the interpolated field at parameters t0, t0 + step, ...,
/// t1 along p + t * dir (dir is normalized). Bicubic values where the sample is
/// at least 2h from the boundary, bilinear closer in; samples with
/// |u| <= 1e-12 ||u||_inf are skipped. A tangential zero contributes 0 or 2.
/// Requires step <= h/2 and the whole segment in the closed domain.
int line_zero_count(const ScalarField2D& field, Vec2 p, Vec2 dir, double t0, double t1, double step);

struct CroftonEstimate {
    double estimate = 0.0;
    double stderr_estimate = 0.0;
    std::size_t lines = 0;
};

/// Cauchy-Crofton estimate of the nodal length within a region. Lines are
/// drawn uniformly in (angle in [0, pi), signed offset in [-R, R]) about the
/// region's enclosing disk of radius R; the estimate is
/// (line-space measure 2 pi R) * mean crossing count / 2. Lines are processed
/// in batches of 1000, each with its own stream seeded from (seed, batch), so
/// the result does not depend on `threads`. Needs n_lines >= 1000.
CroftonEstimate crofton_length(const ScalarField2D& field, const Region& region, std::size_t n_lines,
                               std::uint64_t seed, int threads = 1);

/// Nodal length in B_{r/16}(x0) against
///   (max{N(y0, r0), C0} + ln lambda + sqrt(lambda) r - ln r) r
/// with y0 = (x0, t). Requires 0 < r < r0/4 and B_{r0}(y0) admissible.
VerificationReport verify_ball_bound(const LiftedSource& src, const NodalSet& ns, Vec3 center, double r,
                                     double r0, const QuadratureRules& rules, double c0 = 1.0,
                                     double c_cap = 1e3);

/// Nodal length per dyadic shell around the corner set: entry j covers
/// points with R0/2^(j+1) < dist(x, corners) <= R0/2^j. `inner` is the part
/// within R0/2^levels, `outer` the part beyond R0. Segments are split into 16
/// pieces, each assigned by its midpoint.
struct ShellBreakdown {
    std::vector<double> shells;
    double inner = 0.0;
    double outer = 0.0;
};
ShellBreakdown shell_lengths(const NodalSet& ns, const Domain2D& domain, double r0, int levels = 5);

// polyline_id,vertex_x,vertex_y
void write_nodal_csv(std::ostream& os, const NodalSet& ns);
void write_nodal_svg(std::ostream& os, const NodalSet& ns, const Domain2D& domain, double pixels = 512.0);

}  // namespace nlab
