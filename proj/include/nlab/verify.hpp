#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "nlab/frequency.hpp"

namespace nlab {

struct VerificationSample {
    std::string id;
    double lhs = 0.0;
    double rhs = 0.0;
    double implied = 0.0;
    bool pass = true;
};

/// Result of checking one inequality over a sample set. For upper-bound
/// families the implied constant is the largest per-sample constant; for
/// lower-bound families (where the inequality holds for every constant up to
/// the implied one) it is the smallest.
struct VerificationReport {
    std::string id;
    std::vector<VerificationSample> samples;
    double implied_constant = 0.0;
    double tolerance = 0.0;
    bool lower_family = false;
    bool pass = true;
    bool vacuous = true;
    std::vector<std::string> notes;

    VerificationReport() = default;
    explicit VerificationReport(std::string report_id, double tol = 0.0, bool lower = false)
        : id(std::move(report_id)), tolerance(tol), lower_family(lower) {}

    void add(VerificationSample s);
    void note(std::string text) { notes.push_back(std::move(text)); }
    void fail(std::string why);
    // Appends the samples and notes of `other` (same inequality), prefixing
    // sample ids with `prefix`.
    void merge(const VerificationReport& other, const std::string& prefix = "");
    bool failed() const { return !vacuous && !pass; }
};

// inequality_id,sample_id,lhs,rhs,implied_const,pass
void write_reports_csv(std::ostream& os, const std::vector<VerificationReport>& reports);
// center_x,center_y,r,D1,D2,D3,D4,H1,H2,N_vol,N_bdy,Hbar
void write_profiles_csv(std::ostream& os, const std::vector<FrequencyProfile>& profiles);

struct MonotonicityOptions {
    double c0 = 1.0;
    double c_cap = 50.0;
    double stability_rel = 0.2;
    double stability_abs = 0.5;
};

/// Finite-difference slopes of ln N over maximal runs of radii with N >= C0.
/// The implied constant is the most negative slope, negated (0 if none is
/// negative). Needs at least 8 radii. Stability compares the constant from
/// all radii with the one from every other radius.
VerificationReport verify_monotonicity(const FrequencyProfile& profile, const MonotonicityOptions& opts = {});

/// Every recorded N_volume >= -r^2 / (24 lambda) - tol.
VerificationReport verify_lower_bound(const FrequencyProfile& profile, double tol = 1e-8);

/// Post-pass over a profile: N(r1) <= exp(C (r2 - r1)) max{C0, N(r2)} for all
/// recorded r1 < r2, with C the constant fitted by verify_monotonicity.
VerificationReport verify_frequency_control(const FrequencyProfile& profile, double c0, double fitted_c,
                                            double rel_tol = 1e-9);

/// |N_volume - N_boundary| <= tol * max(1, |N_volume|) at every radius.
VerificationReport verify_frequency_forms(const FrequencyProfile& profile, double tol);

/// |D3 + D4| <= tol * (|D3| + |D4|) at every radius (Navier pairs have h = -2 lambda g).
VerificationReport verify_navier_reduction(const FrequencyProfile& profile, double tol);

/// d ln Hbar / d rho against 2 N_boundary / rho, by a five-point centered derivative
/// in ln rho wherever the full stencil fits. Tolerance max(rel * |2N/rho|, tol_fd);
/// rel is 0.01 for exact pairs and doubled for computed ones.
VerificationReport verify_surface_mean_derivative(const FrequencyProfile& profile, bool exact_pair = true,
                                                  double tol_fd = 1e-6);

struct DoublingOptions {
    double c0 = 1.0;
    double c_cap = 50.0;
    int sub_profile_points = 9;
};

/// Doubling inequalities for each admissible (r1, r2) pair: surface and ball
/// means (upper and lower families), the g-only bound at r = r2, the h-vs-g
/// ratio, the any-radius g bound, and the u bound on horizontal disks.
std::vector<VerificationReport> verify_doubling(const LiftedSource& src, Vec3 center,
                                                const std::vector<std::pair<double, double>>& pairs,
                                                const QuadratureRules& rules, const DoublingOptions& opts = {});

struct CenterSample {
    Vec3 p;
    double rho;
};

/// N(p, rho) / max{N(center, r0), C0} over samples with |p - center| < r0/4
/// and rho <= (r0 - |p - center|)/2. Inadmissible samples are skipped with a note.
VerificationReport verify_changing_center(const LiftedSource& src, Vec3 center, double r0,
                                          const std::vector<CenterSample>& samples,
                                          const QuadratureRules& rules, double c0 = 1.0,
                                          double c_cap = 50.0);

/// Doubling index vs frequency, both directions:
///   index(r) <= C (ln lambda - ln r + N(2r))
///   N(r/2)   <= C' (ln lambda - ln r + index(r))
/// Requires lambda > 1 and B_{2r} admissible.
std::vector<VerificationReport> verify_index_relation(const LiftedSource& src, Vec3 center, double r,
                                                      const QuadratureRules& rules, int density = 24,
                                                      double c_cap = 50.0);

/// sup_{B_r}|u| * r^2 / (lambda * (||u||_{B_{s r}} + ||v||_{B_{s r}})) on
/// horizontal disks, with u = g and v = h on t = 0.
VerificationReport verify_linf_bound(const LiftedSource& src, Vec2 center, const std::vector<double>& radii,
                                     double stretch, const QuadratureRules& rules, double c_cap = 1e3);

}  // namespace nlab
