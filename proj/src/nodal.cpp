#include "nlab/nodal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "nlab/errors.hpp"
#include "nlab/parallel.hpp"

namespace nlab {

namespace {

constexpr double kZeroRel = 1e-12;

bool in_closed_domain(const Domain2D& d, Vec2 p) {
    return d.contains(p) || d.distance_to_boundary(p) <= 1e-12 * d.diameter();
}

// Field used for contouring: vanishing boundary traces replaced by the inward
// neighbour value, exact zeros nudged positive.
std::vector<double> contour_values(const ScalarField2D& field, double zero) {
    const Grid2D& g = field.grid();
    std::vector<double> w = field.values();
    const int axis[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    const int diag[4][2] = {{1, 1}, {-1, 1}, {1, -1}, {-1, -1}};
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (g.kind(i, j) != NodeKind::boundary || std::abs(field.at(i, j)) > zero) continue;
            for (const auto* dirs : {axis, diag}) {
                double sum = 0.0;
                int count = 0;
                for (int k = 0; k < 4; ++k) {
                    const int ni = i + dirs[k][0], nj = j + dirs[k][1];
                    if (g.in_range(ni, nj) && g.mask(ni, nj)) {
                        sum += field.at(ni, nj);
                        ++count;
                    }
                }
                if (count > 0) {
                    w[g.index(i, j)] = sum / count;
                    break;
                }
            }
        }
    }
    for (std::size_t k = 0; k < w.size(); ++k)
        if (std::abs(w[k]) <= zero) w[k] = zero;
    return w;
}

using EdgeId = std::uint64_t;
using EdgePair = std::array<EdgeId, 2>;

EdgeId horizontal_edge(const Grid2D& g, int i, int j) { return 2 * static_cast<EdgeId>(g.index(i, j)); }
EdgeId vertical_edge(const Grid2D& g, int i, int j) { return 2 * static_cast<EdgeId>(g.index(i, j)) + 1; }

Vec2 edge_point(const Grid2D& g, const std::vector<double>& w, EdgeId e) {
    const std::size_t node = e / 2;
    const int i = static_cast<int>(node % g.nx()), j = static_cast<int>(node / g.nx());
    const int oi = (e % 2 == 0) ? i + 1 : i, oj = (e % 2 == 0) ? j : j + 1;
    const double wa = w[g.index(i, j)], wb = w[g.index(oi, oj)];
    const double t = wa / (wa - wb);
    const Vec2 a = g.node(i, j), b = g.node(oi, oj);
    return a + t * (b - a);
}

}  // namespace

std::size_t NodalSet::segment_count() const {
    std::size_t n = 0;
    for (const auto& p : polylines) n += p.size() > 1 ? p.size() - 1 : 0;
    return n;
}

NodalSet extract_nodal(const ScalarField2D& field, int threads) {
    const Grid2D& g = field.grid();
    const double umax = field.max_abs();
    if (!(umax > 0.0)) throw DegenerateError("nodal set of an identically zero field is undefined");
    const double zero = kZeroRel * umax;
    const std::vector<double> w = contour_values(field, zero);

    std::vector<std::vector<EdgePair>> rows(g.ny() > 1 ? g.ny() - 1 : 0);
    parallel_for(rows.size(), threads, [&](std::size_t row) {
        const int j = static_cast<int>(row);
        auto& out = rows[row];
        for (int i = 0; i + 1 < g.nx(); ++i) {
            if (!g.in_closure(i, j) || !g.in_closure(i + 1, j) || !g.in_closure(i + 1, j + 1) ||
                !g.in_closure(i, j + 1))
                continue;
            const double c[4] = {w[g.index(i, j)], w[g.index(i + 1, j)], w[g.index(i + 1, j + 1)],
                                 w[g.index(i, j + 1)]};
            const bool pos[4] = {c[0] > 0, c[1] > 0, c[2] > 0, c[3] > 0};
            // e0 bottom, e1 right, e2 top, e3 left.
            const EdgeId edges[4] = {horizontal_edge(g, i, j), vertical_edge(g, i + 1, j),
                                     horizontal_edge(g, i, j + 1), vertical_edge(g, i, j)};
            const bool cut[4] = {pos[0] != pos[1], pos[1] != pos[2], pos[3] != pos[2], pos[0] != pos[3]};
            const int ncut = cut[0] + cut[1] + cut[2] + cut[3];
            if (ncut == 2) {
                EdgePair seg{};
                int k = 0;
                for (int e = 0; e < 4; ++e)
                    if (cut[e]) seg[k++] = edges[e];
                out.push_back(seg);
            } else if (ncut == 4) {
                const bool center_pos = (c[0] + c[1] + c[2] + c[3]) > 0.0;
                if (center_pos == pos[0]) {
                    out.push_back({edges[0], edges[1]});
                    out.push_back({edges[2], edges[3]});
                } else {
                    out.push_back({edges[3], edges[0]});
                    out.push_back({edges[1], edges[2]});
                }
            }
        }
    });

    std::vector<EdgePair> segs;
    for (auto& r : rows) segs.insert(segs.end(), r.begin(), r.end());

    std::unordered_map<EdgeId, std::array<int, 2>> incident;
    incident.reserve(segs.size() * 2);
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
        for (EdgeId e : segs[s]) {
            auto [it, fresh] = incident.try_emplace(e, std::array<int, 2>{-1, -1});
            (it->second[0] < 0 ? it->second[0] : it->second[1]) = s;
        }
    }
    auto degree = [&](EdgeId e) {
        const auto& inc = incident.at(e);
        return (inc[0] >= 0) + (inc[1] >= 0);
    };

    NodalSet ns;
    ns.source = field.name();
    ns.h = g.h();
    std::vector<char> used(segs.size(), 0);
    auto walk = [&](int s, EdgeId start) {
        std::vector<Vec2> chain{edge_point(g, w, start)};
        EdgeId at = start;
        while (s >= 0 && !used[s]) {
            used[s] = 1;
            at = segs[s][0] == at ? segs[s][1] : segs[s][0];
            chain.push_back(edge_point(g, w, at));
            const auto& inc = incident.at(at);
            s = inc[0] == s ? inc[1] : inc[0];
        }
        ns.polylines.push_back(std::move(chain));
    };
    // Open chains first, from their free ends; then closed loops.
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
        if (used[s]) continue;
        if (degree(segs[s][0]) == 1)
            walk(s, segs[s][0]);
        else if (degree(segs[s][1]) == 1)
            walk(s, segs[s][1]);
    }
    for (int s = 0; s < static_cast<int>(segs.size()); ++s)
        if (!used[s]) walk(s, segs[s][0]);
    return ns;
}

Region Region::ball(Vec2 center, double radius) {
    if (!(radius > 0.0)) throw Error("region radius must be positive");
    Region r;
    r.kind = Kind::ball;
    r.center = center;
    r.radius = radius;
    return r;
}

double clipped_length(const Segment& s, Vec2 center, double radius) {
    const Vec2 d = s.b - s.a;
    const double a = dot(d, d);
    if (a == 0.0) return 0.0;
    const Vec2 f = s.a - center;
    const double b = 2.0 * dot(f, d);
    const double c = dot(f, f) - radius * radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc <= 0.0) return 0.0;
    const double sq = std::sqrt(disc);
    const double lo = std::max(0.0, (-b - sq) / (2.0 * a));
    const double hi = std::min(1.0, (-b + sq) / (2.0 * a));
    return hi > lo ? (hi - lo) * std::sqrt(a) : 0.0;
}

double nodal_length(const NodalSet& ns, const Region& region) {
    if (region.kind == Region::Kind::ball && !(region.radius > 0.0))
        throw Error("region radius must be positive");
    KahanSum total;
    for (const auto& line : ns.polylines) {
        for (std::size_t k = 0; k + 1 < line.size(); ++k) {
            const Segment s{line[k], line[k + 1]};
            total.add(region.kind == Region::Kind::whole ? s.length()
                                                         : clipped_length(s, region.center, region.radius));
        }
    }
    return total.value();
}

namespace {

// Sign-change counter along a sampled path; near-zero samples are skipped and
// a sample outside the admissible set breaks the run.
class CrossingCounter {
public:
    CrossingCounter(const ScalarField2D& f) : f_(f), zero_(kZeroRel * f.max_abs()), two_h_(2.0 * f.grid().h()) {}

    void sample(Vec2 p) {
        const double v = f_.grid().is_safe(p, two_h_) ? f_.value(p) : f_.bilinear(p);
        if (std::abs(v) <= zero_) return;
        const int s = v > 0.0 ? 1 : -1;
        if (prev_ != 0 && s != prev_) ++count_;
        prev_ = s;
    }
    void gap() { prev_ = 0; }
    int count() const { return count_; }

private:
    const ScalarField2D& f_;
    double zero_;
    double two_h_;
    int prev_ = 0;
    int count_ = 0;
};

}  // namespace

int line_zero_count(const ScalarField2D& field, Vec2 p, Vec2 dir, double t0, double t1, double step) {
    const Grid2D& g = field.grid();
    if (!(step > 0.0) || step > 0.5 * g.h() * (1.0 + 1e-12)) throw Error("line step must be in (0, h/2]");
    if (!(t1 > t0)) throw Error("line parameter range is empty");
    const double len = norm(dir);
    if (!(len > 0.0)) throw Error("line direction must be nonzero");
    const Vec2 u = (1.0 / len) * dir;
    const long n = static_cast<long>(std::ceil((t1 - t0) / step - 1e-9));
    CrossingCounter counter(field);
    for (long k = 0; k <= n; ++k) {
        const double t = k == n ? t1 : t0 + k * step;
        const Vec2 x = p + t * u;
        if (!in_closed_domain(g.domain(), x)) throw OutOfSupportError("segment exits the domain");
        counter.sample(x);
    }
    return counter.count();
}

CroftonEstimate crofton_length(const ScalarField2D& field, const Region& region, std::size_t n_lines,
                               std::uint64_t seed, int threads) {
    if (n_lines < 1000) throw Error("Crofton estimate needs at least 1000 lines");
    const Grid2D& g = field.grid();
    const Domain2D& dom = g.domain();
    Vec2 c;
    double radius;
    if (region.kind == Region::Kind::whole) {
        c = 0.5 * (dom.bbox_min() + dom.bbox_max());
        radius = 0.5 * norm(dom.bbox_max() - dom.bbox_min());
    } else {
        c = region.center;
        radius = region.radius;
    }
    if (!(radius > 0.0)) throw DegenerateError("Crofton region is degenerate");
    if (!(field.max_abs() > 0.0)) throw DegenerateError("field is identically zero");
    const double step = 0.5 * g.h();
    const bool clip = region.kind == Region::Kind::ball;

    constexpr std::size_t batch = 1000;
    const std::size_t nbatch = (n_lines + batch - 1) / batch;
    std::vector<std::int64_t> sums(nbatch, 0), squares(nbatch, 0);
    parallel_for(nbatch, threads, [&](std::size_t b) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(b)};
        std::mt19937_64 rng(seq);
        auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        const std::size_t lo = b * batch, hi = std::min(n_lines, lo + batch);
        for (std::size_t k = lo; k < hi; ++k) {
            const double theta = std::numbers::pi * uniform();
            const double offset = radius * (2.0 * uniform() - 1.0);
            const Vec2 normal{std::cos(theta), std::sin(theta)};
            const Vec2 along{-normal.y, normal.x};
            const double half = std::sqrt(std::max(0.0, radius * radius - offset * offset));
            const Vec2 base = c + offset * normal;
            const long n = static_cast<long>(std::ceil(2.0 * half / step));
            CrossingCounter counter(field);
            for (long s = 0; s <= n; ++s) {
                const double t = s == n ? half : -half + s * step;
                const Vec2 x = base + t * along;
                if (!in_closed_domain(dom, x) || (clip && norm(x - c) > radius)) {
                    counter.gap();
                    continue;
                }
                counter.sample(x);
            }
            sums[b] += counter.count();
            squares[b] += static_cast<std::int64_t>(counter.count()) * counter.count();
        }
    });
    std::int64_t total = 0, total_sq = 0;
    for (std::size_t b = 0; b < nbatch; ++b) {
        total += sums[b];
        total_sq += squares[b];
    }
    const double n = static_cast<double>(n_lines);
    const double mean = total / n;
    const double var = n > 1 ? std::max(0.0, (total_sq - n * mean * mean) / (n - 1)) : 0.0;
    const double scale = std::numbers::pi * radius;  // (2 pi R) / 2
    return {scale * mean, scale * std::sqrt(var / n), n_lines};
}

VerificationReport verify_ball_bound(const LiftedSource& src, const NodalSet& ns, Vec3 center, double r,
                                     double r0, const QuadratureRules& rules, double c0, double c_cap) {
    if (!(r > 0.0 && r < 0.25 * r0)) throw Error("ball bound needs 0 < r < r0/4");
    VerificationReport rep("ball_bound");
    const double lambda = src.lambda();
    const double n0 = frequency(src, center, r0, rules);
    const double lhs = nodal_length(ns, Region::ball(horizontal(center), r / 16.0));
    const double bracket = std::max(n0, c0) + std::log(lambda) + std::sqrt(lambda) * r - std::log(r);
    std::ostringstream id;
    id << "r=" << format_double(r) << ";r0=" << format_double(r0);
    if (!(bracket > 0.0)) {
        rep.note(id.str() + ": non-positive bracket");
        return rep;
    }
    const double implied = lhs / (bracket * r);
    rep.add({id.str(), lhs, bracket * r, implied, implied <= c_cap});
    return rep;
}

ShellBreakdown shell_lengths(const NodalSet& ns, const Domain2D& domain, double r0, int levels) {
    if (!(r0 > 0.0) || levels < 1) throw Error("shell breakdown needs r0 > 0 and levels >= 1");
    ShellBreakdown out;
    out.shells.assign(levels, 0.0);
    constexpr int pieces = 16;
    for (const auto& line : ns.polylines) {
        for (std::size_t k = 0; k + 1 < line.size(); ++k) {
            const Vec2 a = line[k], d = line[k + 1] - line[k];
            const double piece = norm(d) / pieces;
            for (int p = 0; p < pieces; ++p) {
                const double dist = domain.distance_to_gamma(a + ((p + 0.5) / pieces) * d);
                if (dist > r0) {
                    out.outer += piece;
                    continue;
                }
                int j = 0;
                double upper = r0;
                while (j < levels && dist <= 0.5 * upper) {
                    upper *= 0.5;
                    ++j;
                }
                if (j >= levels)
                    out.inner += piece;
                else
                    out.shells[j] += piece;
            }
        }
    }
    return out;
}

void write_nodal_csv(std::ostream& os, const NodalSet& ns) {
    os << "polyline_id,vertex_x,vertex_y\n";
    for (std::size_t k = 0; k < ns.polylines.size(); ++k)
        for (const auto& p : ns.polylines[k])
            os << k << ',' << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

void write_nodal_svg(std::ostream& os, const NodalSet& ns, const Domain2D& domain, double pixels) {
    const Vec2 lo = domain.bbox_min(), hi = domain.bbox_max();
    const double scale = pixels / std::max(hi.x - lo.x, hi.y - lo.y);
    const double margin = 8.0;
    const double width = (hi.x - lo.x) * scale + 2 * margin, height = (hi.y - lo.y) * scale + 2 * margin;
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return std::string(buf);
    };
    auto px = [&](Vec2 p) { return fmt(margin + (p.x - lo.x) * scale) + "," + fmt(margin + (hi.y - p.y) * scale); };
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
       << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n";
    os << "<path d=\"";
    for (const auto& s : domain.boundary_pieces()) os << 'M' << px(s.a) << " L" << px(s.b) << ' ';
    os << "\" fill=\"none\" stroke=\"#555\" stroke-width=\"1.5\"/>\n";
    for (const auto& line : ns.polylines) {
        os << "<polyline points=\"";
        for (std::size_t k = 0; k < line.size(); ++k) os << (k ? " " : "") << px(line[k]);
        os << "\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1\"/>\n";
    }
    os << "</svg>\n";
}

}  // namespace nlab
