#include "nlab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "nlab/errors.hpp"

namespace nlab {

std::string to_string(DomainKind kind) {
    return kind == DomainKind::rectangle ? "rectangle" : "lshape";
}

DomainKind domain_kind_from_string(const std::string& s) {
    if (s == "rectangle" || s == "rect" || s == "square") return DomainKind::rectangle;
    if (s == "lshape" || s == "L" || s == "l-shape" || s == "L-shape") return DomainKind::lshape;
    throw ConfigError("unknown domain kind '" + s + "'");
}

Domain2D Domain2D::rectangle(double a, double b, Vec2 origin) {
    if (!(a > 0.0) || !(b > 0.0)) throw GridError("rectangle sides must be positive");
    Domain2D d;
    d.kind_ = DomainKind::rectangle;
    d.a_ = a;
    d.b_ = b;
    d.origin_ = origin;
    d.build_boundary();
    return d;
}

Domain2D Domain2D::lshape(double a, double b, double c, double d, Vec2 origin) {
    if (!(a > 0.0) || !(b > 0.0)) throw GridError("L-shape sides must be positive");
    if (!(c > 0.0 && c < a) || !(d > 0.0 && d < b))
        throw GridError("L-shape cut-out must satisfy 0 < c < a and 0 < d < b");
    Domain2D dom;
    dom.kind_ = DomainKind::lshape;
    dom.a_ = a;
    dom.b_ = b;
    dom.c_ = c;
    dom.d_ = d;
    dom.origin_ = origin;
    dom.build_boundary();
    return dom;
}

void Domain2D::build_boundary() {
    const double x0 = origin_.x, y0 = origin_.y;
    std::vector<Vec2> v;
    if (kind_ == DomainKind::rectangle) {
        v = {{x0, y0}, {x0 + a_, y0}, {x0 + a_, y0 + b_}, {x0, y0 + b_}};
    } else {
        v = {{x0, y0},
             {x0 + a_, y0},
             {x0 + a_, y0 + b_ - d_},
             {x0 + a_ - c_, y0 + b_ - d_},
             {x0 + a_ - c_, y0 + b_},
             {x0, y0 + b_}};
    }
    pieces_.clear();
    for (std::size_t k = 0; k < v.size(); ++k) pieces_.push_back({v[k], v[(k + 1) % v.size()]});
    // Every vertex of these polygons is a corner, so gamma is the vertex list.
    gamma_ = v;
}

double Domain2D::diameter() const { return std::hypot(a_, b_); }

double Domain2D::area() const {
    return kind_ == DomainKind::rectangle ? a_ * b_ : a_ * b_ - c_ * d_;
}

bool Domain2D::contains(Vec2 p) const {
    const double x = p.x - origin_.x, y = p.y - origin_.y;
    if (!(x > 0.0 && x < a_ && y > 0.0 && y < b_)) return false;
    if (kind_ == DomainKind::lshape && x >= a_ - c_ && y >= b_ - d_) return false;
    return true;
}

double Domain2D::distance_to_boundary(Vec2 p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : pieces_) best = std::min(best, distance(p, s));
    return best;
}

double Domain2D::distance_to_gamma(Vec2 p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : gamma_) best = std::min(best, norm(p - g));
    return best;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

namespace {

double get_number(const std::map<std::string, std::string>& kv, const std::string& key,
                  double fallback, bool required) {
    auto it = kv.find("domain." + key);
    if (it == kv.end()) it = kv.find(key);
    if (it == kv.end()) {
        if (required) throw ConfigError("missing domain key '" + key + "'");
        return fallback;
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("domain key '" + key + "' is not a number: " + it->second);
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Domain2D Domain2D::parse(const std::map<std::string, std::string>& kv) {
    auto it = kv.find("domain.kind");
    if (it == kv.end()) it = kv.find("kind");
    const DomainKind kind =
        it == kv.end() ? DomainKind::rectangle : domain_kind_from_string(it->second);
    const double a = get_number(kv, "a", 1.0, false);
    const double b = get_number(kv, "b", a, false);
    const Vec2 origin{get_number(kv, "x0", 0.0, false), get_number(kv, "y0", 0.0, false)};
    if (kind == DomainKind::rectangle) return rectangle(a, b, origin);
    const double c = get_number(kv, "c", 0.5 * a, false);
    const double d = get_number(kv, "d", 0.5 * b, false);
    return lshape(a, b, c, d, origin);
}

Domain2D Domain2D::parse_text(const std::string& text) { return parse(parse_key_values(text)); }

std::string Domain2D::to_text() const {
    std::ostringstream os;
    os << "kind=" << to_string(kind_) << "\n";
    os << "a=" << format_double(a_) << "\n";
    os << "b=" << format_double(b_) << "\n";
    if (kind_ == DomainKind::lshape) {
        os << "c=" << format_double(c_) << "\n";
        os << "d=" << format_double(d_) << "\n";
    }
    os << "x0=" << format_double(origin_.x) << "\n";
    os << "y0=" << format_double(origin_.y) << "\n";
    return os.str();
}

namespace {

int tile_count(double length, double h, const char* what) {
    const double n = length / h;
    const double rounded = std::round(n);
    if (rounded < 1.0 || std::abs(rounded * h - length) > 1e-12 * length)
        throw GridError(std::string("h does not tile the domain side ") + what);
    return static_cast<int>(rounded);
}

}  // namespace

Grid2D::Grid2D(const Domain2D& domain, double h) : domain_(domain), h_(h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw GridError("grid spacing h must be positive");
    const int na = tile_count(domain.a(), h, "a");
    const int nb = tile_count(domain.b(), h, "b");
    int nc = 0, nd = 0;
    if (domain.kind() == DomainKind::lshape) {
        nc = tile_count(domain.c(), h, "c");
        nd = tile_count(domain.d(), h, "d");
    }
    nx_ = na + 1;
    ny_ = nb + 1;
    origin_ = domain.origin();
    kinds_.assign(size(), NodeKind::exterior);
    dist_boundary_.assign(size(), 0.0);
    dist_gamma_.assign(size(), 0.0);
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            NodeKind k;
            const bool on_rect_edge = i == 0 || j == 0 || i == na || j == nb;
            if (domain.kind() == DomainKind::lshape && i >= na - nc && j >= nb - nd) {
                k = (i > na - nc && j > nb - nd) ? NodeKind::exterior : NodeKind::boundary;
            } else {
                k = on_rect_edge ? NodeKind::boundary : NodeKind::interior;
            }
            const std::size_t id = index(i, j);
            kinds_[id] = k;
            const Vec2 p = node(i, j);
            if (k == NodeKind::interior) {
                ++interior_count_;
                dist_boundary_[id] = domain.distance_to_boundary(p);
            }
            dist_gamma_[id] = domain.distance_to_gamma(p);
        }
    }
    if (interior_count_ == 0) throw GridError("grid spacing too large: no interior nodes");
}

bool Grid2D::is_safe(Vec2 p, double margin) const {
    return domain_.contains(p) && domain_.distance_to_boundary(p) >= margin * (1.0 - 1e-12);
}

GridPtr build_grid(const Domain2D& domain, double h) {
    return std::make_shared<const Grid2D>(domain, h);
}

}  // namespace nlab
