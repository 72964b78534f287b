#include "nlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "nlab/errors.hpp"

namespace nlab {

namespace {

constexpr double kTiny = 1e-30;

std::string radius_id(double a) { return "r=" + format_double(a); }

std::string pair_id(double a, double b) { return "r1=" + format_double(a) + ";r2=" + format_double(b); }

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) out[k] = a + (b - a) * k / (n - 1);
    out.back() = b;
    return out;
}

}  // namespace

void VerificationReport::add(VerificationSample s) {
    if (vacuous) {
        implied_constant = s.implied;
        vacuous = false;
    } else if (lower_family) {
        implied_constant = std::min(implied_constant, s.implied);
    } else {
        implied_constant = std::max(implied_constant, s.implied);
    }
    if (!s.pass || !std::isfinite(s.implied)) pass = false;
    samples.push_back(std::move(s));
}

void VerificationReport::fail(std::string why) {
    pass = false;
    note(std::move(why));
}

void VerificationReport::merge(const VerificationReport& other, const std::string& prefix) {
    for (auto s : other.samples) {
        s.id = prefix + s.id;
        add(std::move(s));
    }
    for (const auto& n : other.notes) note(prefix + n);
    if (!other.pass && !other.vacuous) pass = false;
}

void write_reports_csv(std::ostream& os, const std::vector<VerificationReport>& reports) {
    os << "inequality_id,sample_id,lhs,rhs,implied_const,pass\n";
    for (const auto& r : reports)
        for (const auto& s : r.samples)
            os << r.id << ',' << s.id << ',' << format_double(s.lhs) << ',' << format_double(s.rhs) << ','
               << format_double(s.implied) << ',' << (s.pass ? 1 : 0) << '\n';
}

void write_profiles_csv(std::ostream& os, const std::vector<FrequencyProfile>& profiles) {
    os << "center_x,center_y,r,D1,D2,D3,D4,H1,H2,N_vol,N_bdy,Hbar\n";
    for (const auto& p : profiles)
        for (const auto& r : p.records)
            os << format_double(p.center.x) << ',' << format_double(p.center.y) << ',' << format_double(r.r)
               << ',' << format_double(r.d1) << ',' << format_double(r.d2) << ',' << format_double(r.d3) << ','
               << format_double(r.d4) << ',' << format_double(r.h1) << ',' << format_double(r.h2) << ','
               << format_double(r.n_volume) << ',' << format_double(r.n_boundary) << ','
               << format_double(r.hbar) << '\n';
}

namespace {

struct SlopeFit {
    std::vector<VerificationSample> samples;
    double implied = 0.0;
};

SlopeFit fit_slopes(const FrequencyProfile& prof, const MonotonicityOptions& opts, std::size_t stride) {
    SlopeFit fit;
    const auto& rec = prof.records;
    for (std::size_t a = 0; a + stride < rec.size(); a += stride) {
        const std::size_t b = a + stride;
        if (rec[a].n_volume < opts.c0 || rec[b].n_volume < opts.c0) continue;
        const double slope =
            (std::log(rec[b].n_volume) - std::log(rec[a].n_volume)) / (rec[b].r - rec[a].r);
        const double implied = std::max(0.0, -slope);
        fit.implied = std::max(fit.implied, implied);
        fit.samples.push_back({pair_id(rec[a].r, rec[b].r), slope, -opts.c_cap, implied, implied <= opts.c_cap});
    }
    return fit;
}

}  // namespace

VerificationReport verify_monotonicity(const FrequencyProfile& profile, const MonotonicityOptions& opts) {
    if (profile.records.size() < 8) throw Error("monotonicity check needs at least 8 radii");
    if (!(opts.c0 > 0.0)) throw ConfigError("C0 must be positive");
    VerificationReport rep("monotonicity", opts.stability_rel);
    const SlopeFit full = fit_slopes(profile, opts, 1);
    for (const auto& s : full.samples) rep.add(s);
    if (rep.vacuous) {
        rep.note("no radius run with N >= C0");
        return rep;
    }
    const SlopeFit coarse = fit_slopes(profile, opts, 2);
    if (coarse.samples.empty()) {
        rep.note("stability not assessed: coarse radius set has no run with N >= C0");
        return rep;
    }
    const double diff = std::abs(full.implied - coarse.implied);
    const double allowed = opts.stability_rel * std::max(full.implied, coarse.implied) + opts.stability_abs;
    std::ostringstream os;
    os << "implied C " << full.implied << " (all radii) vs " << coarse.implied << " (every other radius)";
    if (diff > allowed)
        rep.fail("unstable under radius refinement: " + os.str());
    else
        rep.note(os.str());
    return rep;
}

VerificationReport verify_lower_bound(const FrequencyProfile& profile, double tol) {
    VerificationReport rep("lower_bound", tol, true);
    for (const auto& r : profile.records) {
        const double bound = -r.r * r.r / (24.0 * profile.lambda);
        // Implied constant: margin above the bound (negative means violated).
        rep.add({radius_id(r.r), r.n_volume, bound, r.n_volume - bound, r.n_volume >= bound - tol});
    }
    return rep;
}

VerificationReport verify_frequency_control(const FrequencyProfile& profile, double c0, double fitted_c,
                                            double rel_tol) {
    VerificationReport rep("frequency_control", rel_tol);
    const auto& rec = profile.records;
    for (std::size_t a = 0; a < rec.size(); ++a) {
        for (std::size_t b = a + 1; b < rec.size(); ++b) {
            const double bracket = std::max(c0, rec[b].n_volume);
            const double allowed = std::exp(fitted_c * (rec[b].r - rec[a].r));
            const double ratio = rec[a].n_volume / bracket;
            rep.add({pair_id(rec[a].r, rec[b].r), rec[a].n_volume, bracket, ratio,
                     ratio <= allowed * (1.0 + rel_tol)});
        }
    }
    return rep;
}

VerificationReport verify_frequency_forms(const FrequencyProfile& profile, double tol) {
    VerificationReport rep("frequency_forms", tol);
    for (const auto& r : profile.records) {
        const double scale = std::max(1.0, std::abs(r.n_volume));
        const double mismatch = std::abs(r.n_volume - r.n_boundary) / scale;
        rep.add({radius_id(r.r), r.n_volume, r.n_boundary, mismatch, mismatch <= tol});
    }
    return rep;
}

VerificationReport verify_navier_reduction(const FrequencyProfile& profile, double tol) {
    VerificationReport rep("navier_reduction", tol);
    for (const auto& r : profile.records) {
        const double scale = std::abs(r.d3) + std::abs(r.d4);
        const double rel = scale > 0.0 ? std::abs(r.d3 + r.d4) / scale : 0.0;
        rep.add({radius_id(r.r), r.d3 + r.d4, scale, rel, rel <= tol});
    }
    return rep;
}

VerificationReport verify_surface_mean_derivative(const FrequencyProfile& profile, bool exact_pair,
                                                  double tol_fd) {
    const auto& rec = profile.records;
    if (rec.size() < 8) throw Error("surface-mean derivative check needs at least 8 radii");
    const double rel = exact_pair ? 0.01 : 0.02;
    VerificationReport rep("surface_mean_derivative", rel);
    // Five-point centered Lagrange derivative in s = ln rho; three points are
    // too coarse for linearly spaced radii.
    for (std::size_t k = 2; k + 2 < rec.size(); ++k) {
        double s[5], f[5];
        for (int j = 0; j < 5; ++j) {
            s[j] = std::log(rec[k - 2 + j].r);
            f[j] = std::log(rec[k - 2 + j].hbar);
        }
        double dfds = 0.0;
        for (int j = 0; j < 5; ++j) {
            double w = 0.0;
            if (j == 2) {
                for (int m = 0; m < 5; ++m)
                    if (m != 2) w += 1.0 / (s[2] - s[m]);
            } else {
                double num = 1.0, den = 1.0;
                for (int m = 0; m < 5; ++m) {
                    if (m == j) continue;
                    den *= s[j] - s[m];
                    if (m != 2) num *= s[2] - s[m];
                }
                w = num / den;
            }
            dfds += w * f[j];
        }
        const double lhs = dfds / rec[k].r;
        const double rhs = 2.0 * rec[k].n_boundary / rec[k].r;
        const double mismatch = std::abs(lhs - rhs);
        const double allowed = std::max(rel * std::abs(rhs), tol_fd);
        const double implied = std::abs(rhs) > 0.0 ? mismatch / std::abs(rhs) : mismatch;
        rep.add({radius_id(rec[k].r), lhs, rhs, implied, mismatch <= allowed});
    }
    return rep;
}

std::vector<VerificationReport> verify_doubling(const LiftedSource& src, Vec3 center,
                                                const std::vector<std::pair<double, double>>& pairs,
                                                const QuadratureRules& rules, const DoublingOptions& opts) {
    VerificationReport surface("doubling.surface"), ball("doubling.ball");
    VerificationReport surface_lower("doubling.surface_lower", 0.0, true);
    VerificationReport ball_lower("doubling.ball_lower", 0.0, true);
    VerificationReport g_only("doubling.g_only"), h_vs_g("doubling.h_vs_g");
    VerificationReport g_any("doubling.g_any_radius"), u_disk("doubling.u_disk");
    std::vector<VerificationReport*> all = {&surface, &ball, &surface_lower, &ball_lower,
                                            &g_only, &h_vs_g, &g_any, &u_disk};
    auto note_all = [&](const std::string& msg) {
        for (auto* r : all) r->note(msg);
    };
    const double lambda = src.lambda();
    const double sqrt_lambda = std::sqrt(lambda);

    for (const auto& [r1, r2] : pairs) {
        const std::string id = pair_id(r1, r2);
        if (!(r1 > 0.0 && r1 < r2)) {
            note_all(id + ": skipped, needs 0 < r1 < r2");
            continue;
        }
        BallMoments m1, m2, mh;
        try {
            m1 = ball_moments(src, center, r1, rules);
            m2 = ball_moments(src, center, r2, rules);
            mh = ball_moments(src, center, 0.5 * r2, rules);
        } catch (const OutOfSupportError& e) {
            note_all(id + ": skipped, " + e.what());
            continue;
        }
        if (m1.surface_mean < kTiny || m1.ball_mean < kTiny || m1.g2 < kTiny || mh.g2 < kTiny ||
            m2.g2 < kTiny) {
            note_all(id + ": rejected, degenerate denominator");
            continue;
        }
        const FrequencyProfile sub =
            frequency_profile(src, center, linspace(r1, r2, std::max(2, opts.sub_profile_points)), rules);
        if (sub.records.empty() || sub.records.back().r != r2) {
            note_all(id + ": rejected, frequency undefined at r2");
            continue;
        }
        double n_min = std::numeric_limits<double>::infinity();
        for (const auto& rec : sub.records) n_min = std::min(n_min, rec.n_volume);
        const double n_r2 = sub.records.back().n_volume;
        const double m = std::max(n_r2, opts.c0);
        const double log_ratio = std::log(r2 / r1);

        const double ls = std::log(m2.surface_mean / m1.surface_mean);
        const double lb = std::log(m2.ball_mean / m1.ball_mean);
        surface.add({id, ls, log_ratio * m, ls / (log_ratio * m), ls / (log_ratio * m) <= opts.c_cap});
        ball.add({id, lb, log_ratio * m, lb / (log_ratio * m), lb / (log_ratio * m) <= opts.c_cap});
        if (n_min > 0.0) {
            const double cs = ls / (log_ratio * n_min), cb = lb / (log_ratio * n_min);
            surface_lower.add({id, ls, log_ratio * n_min, cs, cs > 0.0});
            ball_lower.add({id, lb, log_ratio * n_min, cb, cb > 0.0});
        } else {
            surface_lower.note(id + ": min N <= 0 on [r1, r2], lower bound carries no content");
            ball_lower.note(id + ": min N <= 0 on [r1, r2], lower bound carries no content");
        }

        // g-only doubling at r = r2: ball means over B_r and B_{r/2}.
        const double r4 = std::pow(r2, 4);
        const double weight = 1.0 / r4 + lambda * lambda;
        const double mean_ratio = m2.g2 / (8.0 * mh.g2);
        const double lg = std::log2(mean_ratio / weight);
        g_only.add({id, lg, m, lg / m, lg / m <= opts.c_cap});

        if (r2 < 0.5) {
            const double hv = mh.h2 / (weight * m2.g2);
            h_vs_g.add({id, mh.h2, weight * m2.g2, hv, hv <= opts.c_cap});
        } else {
            h_vs_g.note(id + ": skipped, needs r < 1/2");
        }

        const double la = std::log(m2.g2 / m1.g2) - std::log(lambda * lambda + 1.0 / std::pow(r2 - r1, 4));
        g_any.add({id, la, log_ratio * m, la / (log_ratio * m), la / (log_ratio * m) <= opts.c_cap});

        const double big = std::numbers::sqrt2 * r2;
        if (r2 >= std::numbers::sqrt2 / 2.0) {
            u_disk.note(id + ": skipped, needs r2 < sqrt(2)/2");
            continue;
        }
        try {
            const double n_big = frequency(src, center, big, rules);
            const Vec2 x0 = horizontal(center);
            auto u2 = [&](Vec2 x) {
                const double u = src.g_value({x.x, x.y, center.t});
                return u * u;
            };
            const double big_u = rules.disk_integral(u2, x0, r2);
            const double small_u = rules.disk_integral(u2, x0, r1);
            if (small_u < kTiny) {
                u_disk.note(id + ": rejected, u vanishes on the inner disk");
                continue;
            }
            const double mu = std::max(n_big, opts.c0);
            const double base = std::log(big / r1);
            const double lhs = std::log(big_u / small_u) / base - sqrt_lambda * r2 + std::log(r2 - r1);
            u_disk.add({id, lhs, mu, lhs / mu, lhs / mu <= opts.c_cap});
        } catch (const OutOfSupportError& e) {
            u_disk.note(id + ": skipped, " + e.what());
        } catch (const DegenerateError& e) {
            u_disk.note(id + ": rejected, " + e.what());
        }
    }
    std::vector<VerificationReport> out;
    for (auto* r : all) out.push_back(std::move(*r));
    return out;
}

VerificationReport verify_changing_center(const LiftedSource& src, Vec3 center, double r0,
                                          const std::vector<CenterSample>& samples,
                                          const QuadratureRules& rules, double c0, double c_cap) {
    VerificationReport rep("changing_center");
    const double outer = frequency(src, center, r0, rules);
    const double bracket = std::max(outer, c0);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        const double d = norm(s.p - center);
        std::ostringstream id;
        id << "p" << k << ";rho=" << format_double(s.rho);
        if (!(d < 0.25 * r0) || !(s.rho > 0.0) || s.rho > 0.5 * (r0 - d) * (1.0 + 1e-12)) {
            rep.note(id.str() + ": skipped, violates |p| < r0/4 or rho <= (r0 - |p|)/2");
            continue;
        }
        try {
            const double n = frequency(src, s.p, s.rho, rules);
            rep.add({id.str(), n, bracket, n / bracket, n / bracket <= c_cap});
        } catch (const OutOfSupportError& e) {
            rep.note(id.str() + ": skipped, " + e.what());
        } catch (const DegenerateError& e) {
            rep.note(id.str() + ": skipped, " + e.what());
        }
    }
    return rep;
}

std::vector<VerificationReport> verify_index_relation(const LiftedSource& src, Vec3 center, double r,
                                                      const QuadratureRules& rules, int density,
                                                      double c_cap) {
    const double lambda = src.lambda();
    if (!(lambda > 1.0)) throw Error("index relation needs lambda > 1");
    check_admissible(src, center, 2.0 * r);
    VerificationReport upper("index_relation.index_bound"), lower("index_relation.frequency_bound");
    const double index = doubling_index(src, center, r, density);
    const double n_double = frequency(src, center, 2.0 * r, rules);
    const double n_half = frequency(src, center, 0.5 * r, rules);
    const double base = std::log(lambda) - std::log(r);
    const std::string id = radius_id(r);
    const double b1 = base + n_double, b2 = base + index;
    if (b1 > 0.0)
        upper.add({id, index, b1, index / b1, index / b1 <= c_cap});
    else
        upper.note(id + ": non-positive bracket");
    if (b2 > 0.0)
        lower.add({id, n_half, b2, n_half / b2, n_half / b2 <= c_cap});
    else
        lower.note(id + ": non-positive bracket");
    return {upper, lower};
}

VerificationReport verify_linf_bound(const LiftedSource& src, Vec2 center, const std::vector<double>& radii,
                                     double stretch, const QuadratureRules& rules, double c_cap) {
    if (!(stretch > 1.0)) throw Error("L-infinity bound needs a stretch factor > 1");
    VerificationReport rep("linf_bound");
    const double lambda = src.lambda();
    const Vec3 c3{center.x, center.y, 0.0};
    for (double r : radii) {
        const std::string id = radius_id(r);
        try {
            check_admissible(src, c3, stretch * r);
        } catch (const OutOfSupportError& e) {
            rep.note(id + ": skipped, " + e.what());
            continue;
        }
        double sup = 0.0;
        auto probe = [&](Vec2 x) { sup = std::max(sup, std::abs(src.g_value({x.x, x.y, 0.0}))); };
        probe(center);
        for (const auto& q : rules.disk()) probe(center + r * q.p);
        const int n = 24;
        for (int a = 0; a <= n; ++a)
            for (int b = 0; b <= n; ++b) {
                const Vec2 p{-1.0 + 2.0 * a / n, -1.0 + 2.0 * b / n};
                if (p.x * p.x + p.y * p.y <= 1.0) probe(center + r * p);
            }
        const double big = stretch * r;
        const double nu = std::sqrt(rules.disk_integral(
            [&](Vec2 x) {
                const double u = src.g_value({x.x, x.y, 0.0});
                return u * u;
            },
            center, big));
        const double nv = std::sqrt(rules.disk_integral(
            [&](Vec2 x) {
                const double v = src.eval({x.x, x.y, 0.0}).h;
                return v * v;
            },
            center, big));
        const double bracket = lambda / (r * r) * (nu + nv);
        if (!(bracket > kTiny)) {
            rep.note(id + ": rejected, u and v vanish on the outer disk");
            continue;
        }
        rep.add({id, sup, bracket, sup / bracket, sup / bracket <= c_cap});
    }
    return rep;
}

}  // namespace nlab
