#include "nlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "nlab/errors.hpp"
#include "nlab/parallel.hpp"

namespace nlab {

namespace fs = std::filesystem;

namespace {

double parse_real(const std::string& key, const std::string& text) {
    try {
        const auto slash = text.find('/');
        std::size_t used = 0;
        if (slash != std::string::npos) {
            const std::string num = text.substr(0, slash), den = text.substr(slash + 1);
            std::size_t u1 = 0, u2 = 0;
            const double a = std::stod(num, &u1), b = std::stod(den, &u2);
            if (u1 != num.size() || u2 != den.size()) throw std::invalid_argument(text);
            return a / b;
        }
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' expects a number, got '" + text + "'");
    }
}

long long parse_integer(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' expects an integer, got '" + text + "'");
    }
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        if (!text.empty() && text[0] == '-') throw std::invalid_argument(text);
        const unsigned long long v = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' expects an unsigned integer, got '" + text + "'");
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(parse_real(key, item.substr(b, e - b + 1)));
    }
    return out;
}

std::string mode_file(int index, const char* stem, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%03d.%s", stem, index, ext);
    return buf;
}

std::string mode_prefix(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "mode%03d:", index);
    return buf;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path.string());
    return os;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) out[k] = n == 1 ? b : a + (b - a) * k / (n - 1);
    if (n > 0) out.back() = b;
    return out;
}

// Lattice of n x n points at cell centres of the bounding box, inside the domain.
std::vector<Vec2> lattice_centers(const Domain2D& d, int n) {
    std::vector<Vec2> out;
    const Vec2 lo = d.bbox_min(), hi = d.bbox_max();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec2 p{lo.x + (i + 0.5) / n * (hi.x - lo.x), lo.y + (j + 0.5) / n * (hi.y - lo.y)};
            if (d.contains(p)) out.push_back(p);
        }
    return out;
}

Vec3 lifted(Vec2 x) { return {x.x, x.y, 0.0}; }

// Ratio of the implied constants at the largest and smallest lambda, whichever
// way round is larger. Both arguments must be positive.
double endpoint_ratio(double first, double last) { return std::max(first / last, last / first); }

// Samples are in ascending lambda order. Compares the first and last positive
// finite implied constants and fails the report when their ratio exceeds
// `limit`; the max/min spread over all modes is noted for reference.
void apply_lambda_stability(VerificationReport& rep, double limit) {
    std::vector<double> c;
    for (const auto& s : rep.samples)
        if (s.implied > 0.0 && std::isfinite(s.implied)) c.push_back(s.implied);
    if (c.size() < 2) return;
    const double ratio = endpoint_ratio(c.front(), c.back());
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    std::ostringstream os;
    os << "lambda stability: implied constant at largest vs smallest lambda = " << ratio << " (limit " << limit
       << "); max/min over the ladder = " << *hi / *lo;
    if (ratio > limit)
        rep.fail(os.str());
    else
        rep.note(os.str());
}

}  // namespace

// ---------------------------------------------------------------- config

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
    const auto kv = parse_key_values(text);
    ExperimentConfig c;
    std::map<std::string, std::string> dom;
    for (const auto& [key, value] : kv) {
        if (key.rfind("domain.", 0) == 0) {
            static const char* known[] = {"domain.kind", "domain.a", "domain.b", "domain.c",
                                          "domain.d", "domain.x0", "domain.y0"};
            if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
                std::end(known))
                throw ConfigError("unknown config key '" + key + "'");
            dom[key] = value;
            continue;
        }
        if (key == "bc") c.bc = bc_from_string(value);
        else if (key == "h") c.h = parse_real(key, value);
        else if (key == "modes") c.modes = static_cast<int>(parse_integer(key, value));
        else if (key == "c0") c.c0 = parse_real(key, value);
        else if (key == "r0") c.r0 = parse_real(key, value);
        else if (key == "quad.sphere") c.quad_sphere = static_cast<int>(parse_integer(key, value));
        else if (key == "quad.radial") c.quad_radial = static_cast<int>(parse_integer(key, value));
        else if (key == "crofton.lines") c.crofton_lines = parse_unsigned(key, value);
        else if (key == "seed") c.seed = parse_unsigned(key, value);
        else if (key == "threads") c.threads = static_cast<int>(parse_integer(key, value));
        else if (key == "out") c.out = value;
        else if (key == "solver.tol") c.solver_tol = parse_real(key, value);
        else if (key == "solver.max_iterations") c.solver_max_iterations = static_cast<int>(parse_integer(key, value));
        else if (key == "scaling.source") c.scaling_source = value;
        else if (key == "scaling.kmax") c.scaling_kmax = static_cast<int>(parse_integer(key, value));
        else if (key == "scaling.radius") c.scaling_radius = parse_real(key, value);
        else if (key == "verify.modes") c.verify_modes = static_cast<int>(parse_integer(key, value));
        else if (key == "verify.centers") c.verify_centers = static_cast<int>(parse_integer(key, value));
        else if (key == "verify.radii") c.verify_radii = static_cast<int>(parse_integer(key, value));
        else if (key == "verify.near_points") c.verify_near_points = static_cast<int>(parse_integer(key, value));
        else if (key == "verify.c_cap") c.verify_c_cap = parse_real(key, value);
        else if (key == "verify.forms_tol") c.verify_forms_tol = parse_real(key, value);
        else if (key == "verify.reduction_tol") c.verify_reduction_tol = parse_real(key, value);
        else if (key == "tube.c1") c.tube_c1 = parse_list(key, value);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    if (!dom.empty()) c.domain = Domain2D::parse(dom);
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream os;
    std::istringstream dom(domain.to_text());
    for (std::string line; std::getline(dom, line);)
        if (!line.empty()) os << "domain." << line << '\n';
    os << "bc=" << to_string(bc) << '\n';
    os << "h=" << format_double(h) << '\n';
    os << "modes=" << modes << '\n';
    os << "c0=" << format_double(c0) << '\n';
    os << "r0=" << format_double(r0) << '\n';
    os << "quad.sphere=" << quad_sphere << '\n';
    os << "quad.radial=" << quad_radial << '\n';
    os << "crofton.lines=" << crofton_lines << '\n';
    os << "seed=" << seed << '\n';
    os << "threads=" << threads << '\n';
    os << "out=" << out << '\n';
    os << "solver.tol=" << format_double(solver_tol) << '\n';
    os << "solver.max_iterations=" << solver_max_iterations << '\n';
    os << "scaling.source=" << scaling_source << '\n';
    os << "scaling.kmax=" << scaling_kmax << '\n';
    os << "scaling.radius=" << format_double(scaling_radius) << '\n';
    os << "verify.modes=" << verify_modes << '\n';
    os << "verify.centers=" << verify_centers << '\n';
    os << "verify.radii=" << verify_radii << '\n';
    os << "verify.near_points=" << verify_near_points << '\n';
    os << "verify.c_cap=" << format_double(verify_c_cap) << '\n';
    os << "verify.forms_tol=" << format_double(verify_forms_tol) << '\n';
    os << "verify.reduction_tol=" << format_double(verify_reduction_tol) << '\n';
    os << "tube.c1=";
    for (std::size_t k = 0; k < tube_c1.size(); ++k) os << (k ? "," : "") << format_double(tube_c1[k]);
    os << '\n';
    return os.str();
}

void ExperimentConfig::validate() const {
    if (!(h > 0.0)) throw ConfigError("h must be positive");
    if (modes < 1 || modes > 50) throw ConfigError("modes must be in [1, 50]");
    if (!(c0 > 0.0)) throw ConfigError("c0 must be positive");
    if (!(r0 >= 0.0)) throw ConfigError("r0 must be non-negative");
    if (quad_sphere < 4 || quad_radial < 4) throw ConfigError("quadrature orders must be >= 4");
    if (crofton_lines < 1000) throw ConfigError("crofton.lines must be >= 1000");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (out.empty()) throw ConfigError("out must be non-empty");
    if (!(solver_tol > 0.0) || solver_max_iterations < 1) throw ConfigError("invalid solver settings");
    if (scaling_source != "computed" && scaling_source != "analytic")
        throw ConfigError("scaling.source must be 'computed' or 'analytic'");
    if (scaling_kmax < 1 || scaling_kmax > 12) throw ConfigError("scaling.kmax must be in [1, 12]");
    if (!(scaling_radius > 0.0)) throw ConfigError("scaling.radius must be positive");
    if (verify_modes < 0 || verify_centers < 0) throw ConfigError("verify counts must be non-negative");
    if (verify_radii < 8) throw ConfigError("verify.radii must be >= 8");
    if (verify_near_points < 1) throw ConfigError("verify.near_points must be >= 1");
    if (!(verify_c_cap > 0.0) || !(verify_forms_tol >= 0.0) || !(verify_reduction_tol >= 0.0))
        throw ConfigError("invalid verify tolerances");
    for (double c : tube_c1)
        if (!(c > 0.0)) throw ConfigError("tube.c1 entries must be positive");
    // Grid compatibility is checked here so errors surface before any work.
    try {
        Grid2D probe(domain, h);
    } catch (const GridError& e) {
        throw ConfigError(e.what());
    }
}

std::string ExperimentConfig::solve_signature() const {
    std::ostringstream os;
    os << domain.to_text() << "bc=" << to_string(bc) << "\nh=" << format_double(h) << "\nmodes=" << modes
       << "\nseed=" << seed << "\nsolver.tol=" << format_double(solver_tol)
       << "\nsolver.max_iterations=" << solver_max_iterations << '\n';
    return os.str();
}

// ---------------------------------------------------------------- solve

ModeSet cmd_solve(const ExperimentConfig& config) {
    config.validate();
    const GridPtr grid = build_grid(config.domain, config.h);
    const DiscreteOperator op = assemble_operator(grid, config.bc);
    SolverOptions opts;
    opts.tol = config.solver_tol;
    opts.max_iterations = config.solver_max_iterations;
    opts.seed = config.seed;
    ModeSet set;
    set.pairs = solve_modes(op, config.modes, opts);
    set.labels.assign(set.pairs.size(), ModeIndex{0, 0, 0.0});
    for (std::size_t k = 0; k < set.pairs.size(); ++k) set.labels[k].lambda = set.pairs[k].lambda;

    const fs::path dir(config.out);
    fs::create_directories(dir);
    auto manifest = open_output(dir / "manifest.csv");
    manifest << "mode_index,lambda,lambda_sq,residual,relative_residual,h,bc\n";
    for (std::size_t k = 0; k < set.pairs.size(); ++k) {
        const auto& p = set.pairs[k];
        const int idx = static_cast<int>(k) + 1;
        write_snapshot((dir / mode_file(idx, "mode", "nlab")).string(), p.u);
        manifest << idx << ',' << format_double(p.lambda) << ',' << format_double(p.lambda * p.lambda) << ','
                 << format_double(p.residual) << ',' << format_double(p.relative_residual) << ','
                 << format_double(config.h) << ',' << to_string(config.bc) << '\n';
    }
    auto cfg = open_output(dir / "config.txt");
    cfg << config.to_text();
    return set;
}

ModeSet load_or_solve(const ExperimentConfig& config) {
    const fs::path dir(config.out);
    const fs::path manifest_path = dir / "manifest.csv", config_path = dir / "config.txt";
    if (!fs::exists(manifest_path) || !fs::exists(config_path)) return cmd_solve(config);
    ExperimentConfig stored;
    try {
        stored = ExperimentConfig::load(config_path.string());
    } catch (const Error&) {
        return cmd_solve(config);
    }
    if (stored.solve_signature() != config.solve_signature()) return cmd_solve(config);

    const GridPtr grid = build_grid(config.domain, config.h);
    std::ifstream in(manifest_path);
    std::string line;
    std::getline(in, line);  // header
    ModeSet set;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
        if (cols.size() != 7) throw Error("malformed manifest row: " + line);
        const int idx = static_cast<int>(parse_integer("mode_index", cols[0]));
        const Snapshot snap = read_snapshot((dir / mode_file(idx, "mode", "nlab")).string());
        EigenPair p{parse_real("lambda", cols[1]), field_from_snapshot(grid, snap, "u"),
                    parse_real("residual", cols[3]), parse_real("relative_residual", cols[4]), config.bc, false};
        set.labels.push_back({0, 0, p.lambda});
        set.pairs.push_back(std::move(p));
    }
    if (static_cast<int>(set.pairs.size()) != config.modes) return cmd_solve(config);
    return set;
}

ModeSet analytic_ladder(const ExperimentConfig& config, int kmax) {
    if (config.domain.kind() != DomainKind::rectangle || config.bc != BCType::navier)
        throw ConfigError("analytic modes exist only for Navier conditions on a rectangle");
    const GridPtr grid = build_grid(config.domain, config.h);
    ModeSet set;
    for (const auto& m : navier_ladder(config.domain, kmax)) {
        set.pairs.push_back(navier_modes_analytic(config.domain, m.k, m.l, grid));
        set.labels.push_back(m);
    }
    return set;
}

// ---------------------------------------------------------------- scaling

namespace {

ModeSet scaling_modes(const ExperimentConfig& config) {
    if (config.scaling_source == "analytic") return analytic_ladder(config, config.scaling_kmax);
    return load_or_solve(config);
}

}  // namespace

ScalingResult run_scaling(const ExperimentConfig& config, const ModeSet& modes) {
    ScalingResult res;
    const std::size_t n = modes.pairs.size();
    if (n == 0) return res;
    res.records.resize(n);
    const bool lshape = config.domain.kind() == DomainKind::lshape;
    if (lshape) res.shells.resize(n);
    const QuadratureRules rules(config.quadrature());
    const double radius = config.scaling_radius;
    const std::vector<Vec2> lattice = lattice_centers(config.domain, std::max(1, config.verify_centers));
    std::vector<std::string> notes(n);

    parallel_for(n, config.threads, [&](std::size_t k) {
        const EigenPair& pair = modes.pairs[k];
        ScalingRecord& rec = res.records[k];
        rec.mode_index = static_cast<int>(k) + 1;
        rec.k = modes.labels[k].k;
        rec.l = modes.labels[k].l;
        rec.lambda = pair.lambda;
        rec.sqrt_lambda = std::sqrt(pair.lambda);
        const NodalSet ns = extract_nodal(pair.u);
        rec.length = nodal_length(ns);
        const CroftonEstimate cro = crofton_length(pair.u, Region::whole(), config.crofton_lines, config.seed + k);
        rec.length_crofton = cro.estimate;
        rec.crofton_stderr = cro.stderr_estimate;
        rec.ratio = rec.length / rec.sqrt_lambda;
        if (rec.k > 0) rec.exact_length = (rec.k - 1) * config.domain.b() + (rec.l - 1) * config.domain.a();
        if (lshape) res.shells[k] = shell_lengths(ns, config.domain, config.corner_distance());

        const LiftedPair lp = lift_pair(pair);
        int used = 0;
        for (const Vec2& x : lattice) {
            if (lp.max_radius(x) < radius) continue;
            try {
                rec.max_frequency = std::max(rec.max_frequency, frequency(lp, lifted(x), radius, rules));
                const double idx = doubling_index(lp, lifted(x), radius);
                rec.max_doubling = used == 0 ? idx : std::max(rec.max_doubling, idx);
                ++used;
            } catch (const DegenerateError&) {
            }
        }
        if (used == 0) notes[k] = mode_prefix(rec.mode_index) + " no admissible frequency center";
    });
    for (auto& s : notes)
        if (!s.empty()) res.summary.notes.push_back(s);

    ScalingSummary& sum = res.summary;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> nonzero;
    int zero = 0;
    for (const auto& r : res.records) {
        sum.sup_ratio = std::max(sum.sup_ratio, r.ratio);
        sum.sup_ratio_crofton = std::max(sum.sup_ratio_crofton, r.length_crofton / r.sqrt_lambda);
        sx += r.sqrt_lambda;
        sy += r.length;
        sxx += r.sqrt_lambda * r.sqrt_lambda;
        sxy += r.sqrt_lambda * r.length;
        if (r.length > 1e-12)
            nonzero.push_back(r.ratio);
        else
            ++zero;
    }
    const double m = static_cast<double>(n);
    const double den = m * sxx - sx * sx;
    if (n >= 2 && den > 0.0) {
        sum.slope = (m * sxy - sx * sy) / den;
        sum.intercept = (sy - sum.slope * sx) / m;
    }
    if (nonzero.size() >= 2) {
        const auto [lo, hi] = std::minmax_element(nonzero.begin(), nonzero.end());
        sum.stability = endpoint_ratio(nonzero.front(), nonzero.back());
        sum.spread = *hi / *lo;
    }
    if (zero > 0)
        sum.notes.push_back(std::to_string(zero) + " mode(s) without interior nodal set excluded from stability");

    if (config.domain.kind() == DomainKind::rectangle && config.bc == BCType::navier) {
        std::vector<ModeIndex> ladder;
        if (config.scaling_source == "analytic") {
            ladder = modes.labels;
        } else {
            ladder = navier_ladder(config.domain, static_cast<int>(n));
            ladder.resize(std::min(ladder.size(), n));
        }
        for (const auto& mi : ladder) {
            const double len = (mi.k - 1) * config.domain.b() + (mi.l - 1) * config.domain.a();
            sum.exact_sup = std::max(sum.exact_sup, len / std::sqrt(mi.lambda));
        }
    }
    return res;
}

ScalingResult cmd_scaling(const ExperimentConfig& config) {
    config.validate();
    const ScalingResult res = run_scaling(config, scaling_modes(config));
    const fs::path dir(config.out);
    fs::create_directories(dir);
    {
        auto os = open_output(dir / "scaling.csv");
        os << "mode_index,k,l,lambda,sqrt_lambda,length_ms,length_crofton,crofton_stderr,max_frequency,"
              "max_doubling,ratio,exact_length\n";
        for (const auto& r : res.records) {
            os << r.mode_index << ',' << r.k << ',' << r.l << ',' << format_double(r.lambda) << ','
               << format_double(r.sqrt_lambda) << ',' << format_double(r.length) << ','
               << format_double(r.length_crofton) << ',' << format_double(r.crofton_stderr) << ','
               << format_double(r.max_frequency) << ',' << format_double(r.max_doubling) << ','
               << format_double(r.ratio) << ',';
            if (r.exact_length >= 0.0) os << format_double(r.exact_length);
            os << '\n';
        }
    }
    {
        const auto& s = res.summary;
        auto os = open_output(dir / "summary.txt");
        os << "modes=" << res.records.size() << '\n';
        os << "sup_ratio=" << format_double(s.sup_ratio) << '\n';
        os << "sup_ratio_crofton=" << format_double(s.sup_ratio_crofton) << '\n';
        os << "ls_slope=" << format_double(s.slope) << '\n';
        os << "ls_intercept=" << format_double(s.intercept) << '\n';
        os << "ratio_stability=" << format_double(s.stability) << '\n';
        os << "ratio_spread=" << format_double(s.spread) << '\n';
        if (s.exact_sup >= 0.0) {
            os << "exact_sup_ratio=" << format_double(s.exact_sup) << '\n';
            os << "relative_error=" << format_double(std::abs(s.sup_ratio - s.exact_sup) / s.exact_sup) << '\n';
        }
        for (const auto& n : s.notes) os << "note=" << n << '\n';
    }
    if (!res.shells.empty()) {
        auto os = open_output(dir / "shells.csv");
        os << "mode_index,shell,r_outer,r_inner,length\n";
        const double r0 = config.corner_distance();
        for (std::size_t k = 0; k < res.shells.size(); ++k) {
            const auto& sh = res.shells[k];
            const int idx = static_cast<int>(k) + 1;
            os << idx << ",outer,," << format_double(r0) << ',' << format_double(sh.outer) << '\n';
            double upper = r0;
            for (std::size_t j = 0; j < sh.shells.size(); ++j, upper *= 0.5)
                os << idx << ',' << j << ',' << format_double(upper) << ',' << format_double(0.5 * upper) << ','
                   << format_double(sh.shells[j]) << '\n';
            os << idx << ",inner," << format_double(upper) << ",0," << format_double(sh.inner) << '\n';
        }
    }
    return res;
}

// ---------------------------------------------------------------- tube mass

TubeMass::TubeMass(const ScalarField2D& u, int subdivisions) {
    if (subdivisions < 1) throw Error("tube mass needs at least one subdivision");
    const Grid2D& g = u.grid();
    const Domain2D& dom = g.domain();
    const double h = g.h();
    const double w = (h / subdivisions) * (h / subdivisions);
    resolution_ = h / subdivisions;
    std::vector<std::pair<double, double>> cells;
    cells.reserve(static_cast<std::size_t>(g.nx()) * g.ny() * subdivisions * subdivisions);
    for (int j = 0; j + 1 < g.ny(); ++j) {
        for (int i = 0; i + 1 < g.nx(); ++i) {
            if (!g.in_closure(i, j) || !g.in_closure(i + 1, j) || !g.in_closure(i, j + 1) ||
                !g.in_closure(i + 1, j + 1))
                continue;
            const double f00 = u.at(i, j), f10 = u.at(i + 1, j), f01 = u.at(i, j + 1), f11 = u.at(i + 1, j + 1);
            const Vec2 base = g.node(i, j);
            for (int b = 0; b < subdivisions; ++b) {
                const double t = (b + 0.5) / subdivisions;
                for (int a = 0; a < subdivisions; ++a) {
                    const double s = (a + 0.5) / subdivisions;
                    const double v = (1 - s) * (1 - t) * f00 + s * (1 - t) * f10 + (1 - s) * t * f01 + s * t * f11;
                    const Vec2 p{base.x + s * h, base.y + t * h};
                    cells.emplace_back(dom.distance_to_boundary(p), w * v * v);
                }
            }
        }
    }
    std::sort(cells.begin(), cells.end());
    dist_.reserve(cells.size());
    cumulative_.reserve(cells.size());
    KahanSum acc;
    for (const auto& [d, m] : cells) {
        acc.add(m);
        dist_.push_back(d);
        cumulative_.push_back(acc.value());
    }
    if (cumulative_.empty() || !(cumulative_.back() > 0.0)) throw DegenerateError("field has zero L2 norm");
}

double TubeMass::ratio(double r) const {
    const auto it = std::upper_bound(dist_.begin(), dist_.end(), r);
    if (it == dist_.begin()) return 0.0;
    const double part = cumulative_[static_cast<std::size_t>(it - dist_.begin()) - 1];
    return std::sqrt(std::min(1.0, part / cumulative_.back()));
}

double TubeMass::radius_for(double q) const {
    const double target = q * q * cumulative_.back();
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) return dist_.back();
    return dist_[static_cast<std::size_t>(it - cumulative_.begin())];
}

TubeResult run_tube_mass(const ExperimentConfig& config, const ModeSet& modes) {
    TubeResult res;
    res.report = VerificationReport("tube_mass", 0.5, true);
    const std::size_t n = modes.pairs.size();
    std::vector<VerificationSample> samples(n);
    std::vector<std::vector<TubeSweepRow>> sweeps(n);
    std::vector<std::string> notes(n);
    parallel_for(n, config.threads, [&](std::size_t k) {
        const EigenPair& p = modes.pairs[k];
        const int idx = static_cast<int>(k) + 1;
        const TubeMass tm(p.u);
        const double lambda2 = p.lambda * p.lambda;
        for (double c1 : config.tube_c1) {
            const double r = c1 / lambda2;
            if (r < tm.resolution()) continue;
            sweeps[k].push_back({idx, c1, r, tm.ratio(r)});
        }
        const double r_half = tm.radius_for(0.5);
        if (r_half < tm.resolution()) {
            notes[k] = mode_prefix(idx) + " skipped, half-mass tube below sub-cell resolution";
            return;
        }
        // Just below r_half the ratio is still under 1/2.
        const double r_safe = std::nextafter(r_half, 0.0);
        const double c1 = r_half * lambda2;
        samples[k] = {mode_prefix(idx) + "r_half=" + format_double(r_half), tm.ratio(r_safe), 0.5, c1,
                      tm.ratio(r_safe) <= 0.5};
    });
    for (std::size_t k = 0; k < n; ++k) {
        if (notes[k].empty())
            res.report.add(samples[k]);
        else
            res.report.note(notes[k]);
        res.sweep.insert(res.sweep.end(), sweeps[k].begin(), sweeps[k].end());
    }
    return res;
}

TubeResult cmd_tube_mass(const ExperimentConfig& config) {
    config.validate();
    const TubeResult res = run_tube_mass(config, load_or_solve(config));
    const fs::path dir(config.out);
    fs::create_directories(dir);
    {
        auto os = open_output(dir / "tube_mass.csv");
        write_reports_csv(os, {res.report});
    }
    {
        auto os = open_output(dir / "tube_sweep.csv");
        os << "mode_index,c1,r,ratio\n";
        for (const auto& row : res.sweep)
            os << row.mode_index << ',' << format_double(row.c1) << ',' << format_double(row.r) << ','
               << format_double(row.ratio) << '\n';
    }
    return res;
}

// ---------------------------------------------------------------- verify

bool VerifyResult::any_failed() const {
    return std::any_of(reports.begin(), reports.end(), [](const VerificationReport& r) { return r.failed(); });
}

Vec2 deepest_point(const Grid2D& grid) {
    double best = -1.0;
    Vec2 arg;
    for (int j = 0; j < grid.ny(); ++j)
        for (int i = 0; i < grid.nx(); ++i) {
            if (!grid.mask(i, j)) continue;
            const double d = grid.distance_to_boundary()[grid.index(i, j)];
            if (d > best * (1.0 + 1e-12)) {
                best = d;
                arg = grid.node(i, j);
            }
        }
    return arg;
}

namespace {

std::size_t verified_count(const ExperimentConfig& config, const ModeSet& modes) {
    const std::size_t n = modes.pairs.size();
    return config.verify_modes == 0 ? n : std::min<std::size_t>(n, config.verify_modes);
}

}  // namespace

VerificationReport interior_frequency_scan(const ExperimentConfig& config, const ModeSet& modes,
                                           std::vector<FrequencyProfile>* profiles) {
    VerificationReport rep("frequency_bound.interior");
    const std::size_t n = verified_count(config, modes);
    if (n == 0 || config.verify_centers == 0) {
        rep.note("no samples configured");
        return rep;
    }
    const double r0 = config.corner_distance();
    const Grid2D& grid = modes.pairs.front().u.grid();
    const double min_radius = 4.0 * grid.h();
    std::vector<Vec2> centers;
    std::vector<std::vector<double>> radii;
    for (const Vec2& x : lattice_centers(config.domain, config.verify_centers)) {
        if (config.domain.distance_to_gamma(x) < r0) continue;
        const double r_max = std::min(0.5 * r0 * (1.0 - 1e-9),
                                      config.domain.distance_to_boundary(x) - 2.0 * grid.h());
        if (r_max < min_radius) continue;
        centers.push_back(x);
        radii.push_back(linspace(r_max / config.verify_radii, r_max, config.verify_radii));
    }
    if (centers.empty()) {
        rep.note("no lattice center at corner distance >= R0 with an admissible radius");
        return rep;
    }
    const QuadratureRules rules(config.quadrature());
    std::vector<std::vector<FrequencyProfile>> per_mode(n);
    parallel_for(n, config.threads, [&](std::size_t k) {
        const LiftedPair lp = lift_pair(modes.pairs[k]);
        for (std::size_t c = 0; c < centers.size(); ++c)
            per_mode[k].push_back(frequency_profile(lp, lifted(centers[c]), radii[c], rules));
    });
    for (std::size_t k = 0; k < n; ++k) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& prof : per_mode[k])
            for (const auto& r : prof.records) best = std::max(best, r.n_volume);
        const double sl = std::sqrt(modes.pairs[k].lambda);
        const std::string id = mode_prefix(static_cast<int>(k) + 1) + "lambda=" + format_double(modes.pairs[k].lambda);
        if (!std::isfinite(best)) {
            rep.note(id + ": every radius rejected");
            continue;
        }
        rep.add({id, best, sl, best / sl, best / sl <= config.verify_c_cap});
        if (profiles) profiles->insert(profiles->end(), per_mode[k].begin(), per_mode[k].end());
    }
    apply_lambda_stability(rep, 2.0);
    return rep;
}

VerificationReport near_corner_frequency_scan(const ExperimentConfig& config, const ModeSet& modes) {
    VerificationReport rep("frequency_bound.near_corner");
    const std::size_t n = verified_count(config, modes);
    if (config.domain.kind() != DomainKind::lshape) {
        rep.note("near-corner scan runs on the L-shape only");
        return rep;
    }
    if (n == 0 || config.verify_centers == 0) {
        rep.note("no samples configured");
        return rep;
    }
    const Domain2D& dom = config.domain;
    const double h = modes.pairs.front().u.grid().h();
    struct Sample {
        Vec2 x;
        double rbar;
        std::vector<double> radii;
    };
    std::vector<Sample> samples;
    const double inv = 1.0 / std::numbers::sqrt2;
    const Vec2 diagonals[4] = {{inv, inv}, {-inv, inv}, {inv, -inv}, {-inv, -inv}};
    const int m = config.verify_near_points;
    for (const Vec2& corner : dom.gamma()) {
        const double eps = 1e-6 * dom.diameter();
        Vec2 dir{};
        bool found = false;
        for (const Vec2& d : diagonals)
            if (dom.contains(corner + eps * d) && !dom.contains(corner - eps * d)) {
                dir = d;
                found = true;
                break;
            }
        if (!found) continue;
        for (int k = 0; k < m; ++k) {
            const double target = m == 1 ? 0.02 : 0.02 * std::pow(10.0, static_cast<double>(k) / (m - 1));
            const Vec2 x = corner + target * dir;
            if (!dom.contains(x)) continue;
            const double rbar = dom.distance_to_gamma(x);
            if (rbar < 0.02 * (1 - 1e-9) || rbar > 0.2 * (1 + 1e-9)) continue;
            const double r_max = std::min(0.999 * rbar, dom.distance_to_boundary(x) - 2.0 * h);
            if (r_max < 0.5 * h) {
                rep.note("center at corner distance " + format_double(rbar) + " skipped: no admissible radius");
                continue;
            }
            samples.push_back({x, rbar, linspace(0.25 * r_max, r_max, 4)});
        }
    }
    if (samples.empty()) {
        rep.note("no admissible near-corner centers");
        return rep;
    }
    const QuadratureRules rules(config.quadrature());
    std::vector<double> best(n, -std::numeric_limits<double>::infinity());
    parallel_for(n, config.threads, [&](std::size_t k) {
        const LiftedPair lp = lift_pair(modes.pairs[k]);
        const double sl = lp.sqrt_lambda();
        for (const auto& s : samples) {
            const FrequencyProfile prof = frequency_profile(lp, lifted(s.x), s.radii, rules);
            for (const auto& r : prof.records) {
                const double lr = std::log(r.r);
                const double bracket = -sl * lr + lr * lr;
                best[k] = std::max(best[k], r.n_volume / bracket);
            }
        }
    });
    for (std::size_t k = 0; k < n; ++k) {
        const std::string id = mode_prefix(static_cast<int>(k) + 1) + "lambda=" + format_double(modes.pairs[k].lambda);
        if (!std::isfinite(best[k])) {
            rep.note(id + ": every radius rejected");
            continue;
        }
        rep.add({id, best[k], 1.0, best[k], best[k] <= config.verify_c_cap});
    }
    apply_lambda_stability(rep, 2.0);
    return rep;
}

namespace {

const char* kSuiteIds[] = {"monotonicity",
                           "monotonicity.quadrature",
                           "lower_bound",
                           "frequency_control",
                           "surface_mean_derivative",
                           "frequency_forms",
                           "navier_reduction",
                           "doubling.surface",
                           "doubling.ball",
                           "doubling.surface_lower",
                           "doubling.ball_lower",
                           "doubling.g_only",
                           "doubling.h_vs_g",
                           "doubling.g_any_radius",
                           "doubling.u_disk",
                           "changing_center",
                           "index_relation.index_bound",
                           "index_relation.frequency_bound",
                           "ball_bound",
                           "linf_bound"};

struct ModeSuite {
    std::vector<VerificationReport> reports;
    FrequencyProfile profile;
};

ModeSuite mode_suite(const ExperimentConfig& config, const EigenPair& pair) {
    ModeSuite out;
    const LiftedPair lp = lift_pair(pair);
    const QuadratureRules rules(config.quadrature());
    const QuadratureRules fine(QuadratureSpec{config.quad_sphere + 8, 2 * (config.quad_sphere + 8),
                                              config.quad_radial + 8});
    const Vec2 x0 = deepest_point(lp.grid());
    const Vec3 y0 = lifted(x0);
    const double max_r = lp.max_radius(x0);
    const double rp = std::min(0.25, max_r);
    const std::vector<double> radii = linspace(0.2 * rp, rp, config.verify_radii);
    auto& reps = out.reports;

    out.profile = frequency_profile(lp, y0, radii, rules);
    const FrequencyProfile& prof = out.profile;
    MonotonicityOptions mopts;
    mopts.c0 = config.c0;
    mopts.c_cap = config.verify_c_cap;
    const bool enough = prof.records.size() >= 8;

    VerificationReport mono("monotonicity"), mono_q("monotonicity.quadrature", 0.2);
    if (enough) {
        mono = verify_monotonicity(prof, mopts);
        const FrequencyProfile prof_fine = frequency_profile(lp, y0, radii, fine);
        if (prof_fine.records.size() >= 8) {
            const VerificationReport mono_f = verify_monotonicity(prof_fine, mopts);
            if (!mono.vacuous && !mono_f.vacuous) {
                const double a = mono.implied_constant, b = mono_f.implied_constant;
                const double diff = std::abs(a - b);
                const double allowed = 0.2 * std::max(a, b) + mopts.stability_abs;
                mono_q.add({"order " + std::to_string(config.quad_sphere) + " vs " +
                                std::to_string(config.quad_sphere + 8),
                            a, b, diff, diff <= allowed});
            } else {
                mono_q.note("vacuous at one quadrature order");
            }
        }
    } else {
        mono.note("fewer than 8 recorded radii");
    }
    reps.push_back(mono);
    reps.push_back(mono_q);
    reps.push_back(verify_lower_bound(prof));
    reps.push_back(verify_frequency_control(prof, config.c0, mono.vacuous ? 0.0 : mono.implied_constant));
    if (enough) {
        reps.push_back(verify_surface_mean_derivative(prof, pair.analytic));
    } else {
        VerificationReport smd("surface_mean_derivative");
        smd.note("fewer than 8 recorded radii");
        reps.push_back(smd);
    }
    reps.push_back(verify_frequency_forms(prof, config.verify_forms_tol));
    if (pair.bc == BCType::navier) {
        reps.push_back(verify_navier_reduction(prof, config.verify_reduction_tol));
    } else {
        VerificationReport red("navier_reduction");
        red.note("clamped mode");
        reps.push_back(red);
    }

    DoublingOptions dopts;
    dopts.c0 = config.c0;
    dopts.c_cap = config.verify_c_cap;
    for (auto& r : verify_doubling(lp, y0, {{0.25 * rp, 0.5 * rp}, {0.5 * rp, rp}, {0.25 * rp, rp}}, rules, dopts))
        reps.push_back(std::move(r));

    std::vector<CenterSample> cs{{y0, 0.5 * rp}};
    for (int k = 0; k < 8; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 8;
        cs.push_back({{x0.x + rp / 8 * std::cos(a), x0.y + rp / 8 * std::sin(a), 0.0}, 0.4 * rp});
    }
    reps.push_back(verify_changing_center(lp, y0, rp, cs, rules, config.c0, config.verify_c_cap));

    if (lp.lambda() > 1.0) {
        for (auto& r : verify_index_relation(lp, y0, 0.5 * rp, rules, 24, config.verify_c_cap))
            reps.push_back(std::move(r));
    } else {
        VerificationReport a("index_relation.index_bound"), b("index_relation.frequency_bound");
        a.note("lambda <= 1");
        b.note("lambda <= 1");
        reps.push_back(a);
        reps.push_back(b);
    }

    const NodalSet ns = extract_nodal(pair.u);
    const double r0b = max_r;
    reps.push_back(verify_ball_bound(lp, ns, y0, 0.9 * r0b / 4.0, r0b, rules, config.c0, 1e3));
    reps.push_back(verify_linf_bound(lp, x0, {0.25 * rp, 0.5 * rp}, 1.5, rules));
    return out;
}

}  // namespace

VerifyResult run_verify(const ExperimentConfig& config, const ModeSet& modes) {
    VerifyResult res;
    const std::size_t n = verified_count(config, modes);
    res.reports.push_back(interior_frequency_scan(config, modes, nullptr));
    res.reports.push_back(near_corner_frequency_scan(config, modes));

    std::vector<VerificationReport> merged;
    for (const char* id : kSuiteIds) merged.emplace_back(id);
    if (n == 0 || config.verify_centers == 0) {
        for (auto& r : merged) r.note("no samples configured");
    } else {
        std::vector<ModeSuite> suites(n);
        parallel_for(n, config.threads, [&](std::size_t k) { suites[k] = mode_suite(config, modes.pairs[k]); });
        for (std::size_t k = 0; k < n; ++k) {
            const std::string prefix = mode_prefix(static_cast<int>(k) + 1);
            for (const auto& r : suites[k].reports) {
                auto it = std::find_if(merged.begin(), merged.end(),
                                       [&](const VerificationReport& m) { return m.id == r.id; });
                if (it == merged.end()) throw Error("unexpected report id " + r.id);
                if (it->samples.empty() && it->notes.empty()) {
                    it->tolerance = r.tolerance;
                    it->lower_family = r.lower_family;
                }
                it->merge(r, prefix);
            }
            res.profiles.push_back(std::move(suites[k].profile));
        }
    }
    for (auto& r : merged) res.reports.push_back(std::move(r));
    return res;
}

VerifyResult cmd_verify(const ExperimentConfig& config) {
    config.validate();
    const VerifyResult res = run_verify(config, load_or_solve(config));
    const fs::path dir(config.out);
    fs::create_directories(dir);
    {
        auto os = open_output(dir / "reports.csv");
        write_reports_csv(os, res.reports);
    }
    {
        auto os = open_output(dir / "profiles.csv");
        write_profiles_csv(os, res.profiles);
    }
    {
        auto os = open_output(dir / "summary.txt");
        for (const auto& r : res.reports) {
            const char* status = r.vacuous ? "VACUOUS" : (r.pass ? "PASS" : "FAIL");
            os << r.id << ": " << status << " samples=" << r.samples.size();
            if (!r.vacuous) os << " implied_constant=" << format_double(r.implied_constant);
            os << '\n';
            for (const auto& n : r.notes) os << "  note: " << n << '\n';
        }
        os << "exit_status=" << res.exit_code() << '\n';
    }
    return res;
}

NodalSet cmd_nodal(const ExperimentConfig& config, int mode) {
    config.validate();
    const ModeSet modes = load_or_solve(config);
    if (mode < 1 || mode > static_cast<int>(modes.pairs.size()))
        throw ConfigError("mode index out of range: " + std::to_string(mode));
    const NodalSet ns = extract_nodal(modes.pairs[mode - 1].u, config.threads);
    const fs::path dir(config.out);
    fs::create_directories(dir);
    {
        auto os = open_output(dir / mode_file(mode, "nodal", "svg"));
        write_nodal_svg(os, ns, config.domain);
    }
    {
        auto os = open_output(dir / mode_file(mode, "nodal", "csv"));
        write_nodal_csv(os, ns);
    }
    return ns;
}

}  // namespace nlab
