#include "nlab/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nlab/errors.hpp"

namespace nlab {

namespace {
constexpr double kMinH = 1e-30;
}

std::vector<double> FrequencyProfile::radii() const {
    std::vector<double> r;
    for (const auto& rec : records) r.push_back(rec.r);
    return r;
}

void check_admissible(const LiftedSource& src, Vec3 center, double r) {
    if (!(r > 0.0)) throw Error("radius must be positive");
    const double rmax = src.max_radius(horizontal(center));
    if (!(r <= rmax * (1.0 + 1e-12))) {
        std::ostringstream os;
        os << "ball of radius " << r << " at (" << center.x << ", " << center.y
           << ") leaves the safe region (max admissible radius " << rmax << ")";
        throw OutOfSupportError(os.str());
    }
    if (std::abs(center.t) + r > 2.0 && std::isfinite(rmax))
        throw OutOfSupportError("ball exceeds the |t| <= 2 evaluation guard");
}

namespace {

FrequencyRecord record_at(const LiftedSource& src, Vec3 c, double r, const QuadratureRules& rules) {
    const double lambda = src.lambda();
    KahanSum d1, d2, d3, d4;
    for (const auto& q : rules.ball()) {
        const LiftedSample s = src.eval(c + r * q.p);
        d1.add(q.w * dot(s.grad_g, s.grad_g));
        d2.add(q.w * dot(s.grad_h, s.grad_h));
        d3.add(q.w * s.g * s.h);
        d4.add(q.w * 2.0 * lambda * s.g * s.g);
    }
    KahanSum h1, h2, flux;
    for (const auto& q : rules.sphere()) {
        const LiftedSample s = src.eval(c + r * q.p);
        h1.add(q.w * s.g * s.g);
        h2.add(q.w * s.h * s.h);
        // q.p is the outward unit normal.
        flux.add(q.w * (s.g * dot(s.grad_g, q.p) + s.h * dot(s.grad_h, q.p)));
    }
    const double r3 = r * r * r, r2 = r * r;
    FrequencyRecord rec;
    rec.r = r;
    rec.d1 = r3 * d1.value();
    rec.d2 = r3 * d2.value();
    rec.d3 = r3 * d3.value();
    rec.d4 = r3 * d4.value();
    rec.d = rec.d1 + rec.d2 + rec.d3 + rec.d4;
    rec.h1 = r2 * h1.value();
    rec.h2 = r2 * h2.value();
    rec.h = rec.h1 + rec.h2;
    rec.boundary_flux = r2 * flux.value();
    if (rec.h >= kMinH) {
        rec.n_volume = r * rec.d / rec.h;
        rec.n_boundary = r * rec.boundary_flux / rec.h;
    }
    rec.hbar = rec.h / (4.0 * std::numbers::pi * r2);
    return rec;
}

}  // namespace

FrequencyProfile frequency_profile(const LiftedSource& src, Vec3 center,
                                   const std::vector<double>& radii, const QuadratureRules& rules) {
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (k > 0 && !(radii[k] > radii[k - 1])) throw Error("radii must be strictly ascending");
        check_admissible(src, center, radii[k]);
    }
    FrequencyProfile prof;
    prof.center = center;
    prof.lambda = src.lambda();
    for (double r : radii) {
        FrequencyRecord rec = record_at(src, center, r, rules);
        if (rec.h < kMinH) {
            std::ostringstream os;
            os << "radius " << r << " rejected: sphere integral H = " << rec.h
               << " (center on a common nodal sphere)";
            prof.notes.push_back(os.str());
            continue;
        }
        prof.records.push_back(rec);
    }
    return prof;
}

FrequencyProfile frequency_profile(const LiftedSource& src, Vec3 center,
                                   const std::vector<double>& radii, const QuadratureSpec& spec) {
    return frequency_profile(src, center, radii, QuadratureRules(spec));
}

double frequency(const LiftedSource& src, Vec3 center, double r, const QuadratureRules& rules) {
    check_admissible(src, center, r);
    const FrequencyRecord rec = record_at(src, center, r, rules);
    if (rec.h < kMinH) throw DegenerateError("sphere integral H vanishes");
    return rec.n_volume;
}

BallMoments ball_moments(const LiftedSource& src, Vec3 c, double r, const QuadratureRules& rules) {
    check_admissible(src, c, r);
    KahanSum g2, h2;
    for (const auto& q : rules.ball()) {
        const LiftedSample s = src.eval(c + r * q.p);
        g2.add(q.w * s.g * s.g);
        h2.add(q.w * s.h * s.h);
    }
    KahanSum sph;
    for (const auto& q : rules.sphere()) {
        const LiftedSample s = src.eval(c + r * q.p);
        sph.add(q.w * (s.g * s.g + s.h * s.h));
    }
    const double pi = std::numbers::pi;
    BallMoments m;
    m.g2 = r * r * r * g2.value();
    m.h2 = r * r * r * h2.value();
    m.ball_mean = (m.g2 + m.h2) / (4.0 * pi * r * r * r / 3.0);
    m.surface_mean = sph.value() / (4.0 * pi);
    return m;
}

double doubling_index(const LiftedSource& src, Vec3 center, double r, int density) {
    if (density < 4) throw Error("doubling-index lattice density must be >= 4");
    check_admissible(src, center, r);
    // Unit-ball sample set shared by both radii so homogeneous fields scale
    // exactly.
    std::vector<Vec3> pts;
    const double step = 2.0 / density;
    for (int a = 0; a < density; ++a)
        for (int b = 0; b < density; ++b)
            for (int c = 0; c < density; ++c) {
                const Vec3 p{-1.0 + (a + 0.5) * step, -1.0 + (b + 0.5) * step, -1.0 + (c + 0.5) * step};
                if (dot(p, p) <= 1.0) pts.push_back(p);
            }
    for (const auto& q : QuadratureRules(QuadratureSpec{8, 16, 4}).sphere()) pts.push_back(q.p);

    auto max_abs_g = [&](double radius) {
        double best = -1.0;
        Vec3 arg;
        for (const auto& p : pts) {
            const double v = std::abs(src.g_value(center + radius * p));
            if (v > best) {
                best = v;
                arg = p;
            }
        }
        // One pattern-search step around the best lattice point.
        const double delta = 0.5 * step;
        const Vec3 moves[6] = {{delta, 0, 0}, {-delta, 0, 0}, {0, delta, 0},
                               {0, -delta, 0}, {0, 0, delta}, {0, 0, -delta}};
        const Vec3 base = arg;
        for (const auto& m : moves) {
            Vec3 p = base + m;
            const double n = norm(p);
            if (n > 1.0) p = (1.0 / n) * p;
            const double v = std::abs(src.g_value(center + radius * p));
            if (v > best) best = v;
        }
        return best;
    };
    const double outer = max_abs_g(r);
    const double inner = max_abs_g(0.5 * r);
    if (!(inner >= 1e-30)) throw DegenerateError("max |g| over the inner ball vanishes");
    return std::log2(outer / inner);
}

}  // namespace nlab
