#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlab/biharmonic.hpp"
#include "nlab/nodal.hpp"
#include "nlab/verify.hpp"

namespace nlab {

/// Everything an experiment run depends on. The text form is key=value, one
/// per line, and round-trips exactly (doubles are written with %.17g).
struct ExperimentConfig {
    Domain2D domain = Domain2D::rectangle(1.0, 1.0);
    BCType bc = BCType::navier;
    double h = 1.0 / 128.0;
    int modes = 5;
    double c0 = 1.0;
    double r0 = 0.0;  // corner-distance threshold R0; 0 selects 0.25 * diameter
    int quad_sphere = 16;
    int quad_radial = 16;
    std::size_t crofton_lines = 10000;
    std::uint64_t seed = 12345;
    int threads = 1;
    std::string out = "nlab_out";

    double solver_tol = 1e-14;
    int solver_max_iterations = 300;

    std::string scaling_source = "computed";  // computed | analytic
    int scaling_kmax = 4;
    double scaling_radius = 0.1;

    int verify_modes = 0;    // 0 verifies every mode
    int verify_centers = 3;  // lattice points per axis; 0 disables all scans
    int verify_radii = 9;
    int verify_near_points = 4;
    double verify_c_cap = 50.0;
    double verify_forms_tol = 2e-2;
    double verify_reduction_tol = 1e-8;

    std::vector<double> tube_c1 = {1.0, 10.0, 100.0, 1000.0};

    static ExperimentConfig parse_text(const std::string& text);
    static ExperimentConfig load(const std::string& path);
    std::string to_text() const;
    void validate() const;

    QuadratureSpec quadrature() const { return {quad_sphere, 2 * quad_sphere, quad_radial}; }
    double corner_distance() const { return r0 > 0.0 ? r0 : 0.25 * domain.diameter(); }
    // Key used to decide whether an existing archive matches this config.
    std::string solve_signature() const;

    bool operator==(const ExperimentConfig& other) const { return to_text() == other.to_text(); }
};

// Per-mode labels; k = l = 0 when the mode came from the numerical solver.
struct ModeSet {
    std::vector<EigenPair> pairs;
    std::vector<ModeIndex> labels;
};

/// Solves for `modes` eigenpairs and writes mode_###.nlab snapshots,
/// manifest.csv and config.txt under config.out.
ModeSet cmd_solve(const ExperimentConfig& config);
// Reuses the archive under config.out when its solve signature matches.
ModeSet load_or_solve(const ExperimentConfig& config);
// Analytic Navier modes (k, l <= kmax) on a rectangle, ascending in lambda.
ModeSet analytic_ladder(const ExperimentConfig& config, int kmax);

struct ScalingRecord {
    int mode_index = 0;
    int k = 0, l = 0;
    double lambda = 0.0;
    double sqrt_lambda = 0.0;
    double length = 0.0;           // marching squares
    double length_crofton = 0.0;
    double crofton_stderr = 0.0;
    double max_frequency = 0.0;    // over sampled centers at scaling_radius
    double max_doubling = 0.0;
    double ratio = 0.0;            // length / sqrt_lambda
    double exact_length = -1.0;    // closed form when known, else -1
};

struct ScalingSummary {
    double sup_ratio = 0.0;
    double sup_ratio_crofton = 0.0;
    double slope = 0.0;      // least squares L = slope * sqrt(lambda) + intercept
    double intercept = 0.0;
    double exact_sup = -1.0; // closed-form sup over the rectangle Navier ladder, if applicable
    // Over modes with nonzero length, in ascending lambda: ratio of L/sqrt(lambda)
    // at the largest and smallest lambda (larger over smaller), and max/min.
    double stability = 0.0;
    double spread = 0.0;
    std::vector<std::string> notes;
};

struct ScalingResult {
    std::vector<ScalingRecord> records;
    ScalingSummary summary;
    std::vector<ShellBreakdown> shells;  // per record; empty unless the domain is an L-shape
};

ScalingResult run_scaling(const ExperimentConfig& config, const ModeSet& modes);
// Writes scaling.csv, summary.txt and (L-shape) shells.csv.
ScalingResult cmd_scaling(const ExperimentConfig& config);

/// ||u||_{L2(T_r)} / ||u||_{L2(domain)} with T_r the closed r-neighbourhood of
/// the boundary, from an 8x8 sub-cell midpoint rule on the bilinear
/// interpolant. Sub-cell data are sorted by distance once, so each query is a
/// binary search.
class TubeMass {
public:
    explicit TubeMass(const ScalarField2D& u, int subdivisions = 8);
    double ratio(double r) const;
    // Smallest r with ratio(r) >= q.
    double radius_for(double q) const;
    double resolution() const { return resolution_; }

private:
    std::vector<double> dist_;
    std::vector<double> cumulative_;
    double resolution_;
};

struct TubeSweepRow {
    int mode_index = 0;
    double c1 = 0.0;
    double r = 0.0;
    double ratio = 0.0;
};

struct TubeResult {
    // One sample per mode: implied constant r_half * lambda^2, where r_half is
    // the tube width at which the ratio reaches 1/2. The report's constant is
    // the minimum over modes, i.e. the largest C1 keeping every ratio <= 1/2.
    VerificationReport report;
    // Ratios at r = C1 * lambda^-2 for each configured C1 (n = 2).
    std::vector<TubeSweepRow> sweep;
};

TubeResult run_tube_mass(const ExperimentConfig& config, const ModeSet& modes);
// Writes tube_mass.csv (report rows) and tube_sweep.csv.
TubeResult cmd_tube_mass(const ExperimentConfig& config);

struct VerifyResult {
    std::vector<VerificationReport> reports;
    std::vector<FrequencyProfile> profiles;

    bool any_failed() const;
    int exit_code() const { return any_failed() ? 1 : 0; }
};

// Implied C in N <= C sqrt(lambda) away from the corners, per mode; pass iff
// the constants at the largest and smallest lambda differ by at most a factor 2.
VerificationReport interior_frequency_scan(const ExperimentConfig& config, const ModeSet& modes,
                                           std::vector<FrequencyProfile>* profiles = nullptr);
// Implied C in N <= C (-sqrt(lambda) ln r + ln^2 r) for centers at corner
// distances in [0.02, 0.2] along the corner bisectors, same stability rule.
VerificationReport near_corner_frequency_scan(const ExperimentConfig& config, const ModeSet& modes);

VerifyResult run_verify(const ExperimentConfig& config, const ModeSet& modes);
// Writes reports.csv, profiles.csv and summary.txt.
VerifyResult cmd_verify(const ExperimentConfig& config);

// Writes nodal_###.svg and nodal_###.csv for one mode (1-based).
NodalSet cmd_nodal(const ExperimentConfig& config, int mode);

// Point farthest from the boundary among interior grid nodes (first in
// row-major order on ties).
Vec2 deepest_point(const Grid2D& grid);

}  // namespace nlab
