#include "nlab/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "nlab/errors.hpp"

namespace nlab {

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

namespace {

// Keys cubic convolution weights (a = -1/2) for nodes i-1, i, i+1, i+2.
inline void keys_weights(double s, double w[4]) {
    const double s2 = s * s, s3 = s2 * s;
    w[0] = 0.5 * (-s3 + 2.0 * s2 - s);
    w[1] = 0.5 * (3.0 * s3 - 5.0 * s2 + 2.0);
    w[2] = 0.5 * (-3.0 * s3 + 4.0 * s2 + s);
    w[3] = 0.5 * (s3 - s2);
}

}  // namespace

ScalarField2D::ScalarField2D(GridPtr grid, std::vector<double> values, std::string name)
    : grid_(std::move(grid)), values_(std::move(values)), name_(std::move(name)) {
    if (!grid_) throw Error("field requires a grid");
    if (values_.size() != grid_->size()) throw Error("field size does not match grid");
    for (int j = 0; j < grid_->ny(); ++j) {
        for (int i = 0; i < grid_->nx(); ++i) {
            double& v = values_[grid_->index(i, j)];
            if (grid_->kind(i, j) == NodeKind::exterior) {
                v = 0.0;
            } else if (!std::isfinite(v)) {
                throw Error("field '" + name_ + "' has non-finite nodal values");
            }
        }
    }
    compute_gradients();
}

ScalarField2D ScalarField2D::sample(GridPtr grid, const std::function<double(Vec2)>& f,
                                    std::string name) {
    std::vector<double> v(grid->size(), 0.0);
    for (int j = 0; j < grid->ny(); ++j)
        for (int i = 0; i < grid->nx(); ++i)
            if (grid->kind(i, j) != NodeKind::exterior) v[grid->index(i, j)] = f(grid->node(i, j));
    return ScalarField2D(std::move(grid), std::move(v), std::move(name));
}

void ScalarField2D::compute_gradients() {
    const Grid2D& g = *grid_;
    const double h = g.h();
    grad_x_.assign(g.size(), 0.0);
    grad_y_.assign(g.size(), 0.0);
    auto diff = [&](int i, int j, int di, int dj) {
        auto ok = [&](int k) { return g.in_closure(i + k * di, j + k * dj); };
        auto f = [&](int k) { return values_[g.index(i + k * di, j + k * dj)]; };
        if (ok(-1) && ok(1)) {
            if (ok(-2) && ok(2)) return (-f(2) + 8.0 * f(1) - 8.0 * f(-1) + f(-2)) / (12.0 * h);
            return (f(1) - f(-1)) / (2.0 * h);
        }
        if (ok(1) && ok(2)) return (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
        if (ok(-1) && ok(-2)) return (3.0 * f(0) - 4.0 * f(-1) + f(-2)) / (2.0 * h);
        return 0.0;
    };
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (g.kind(i, j) == NodeKind::exterior) continue;
            grad_x_[g.index(i, j)] = diff(i, j, 1, 0);
            grad_y_[g.index(i, j)] = diff(i, j, 0, 1);
        }
    }
}

double ScalarField2D::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

void ScalarField2D::check_support(Vec2 p) const {
    if (!grid_->is_safe(p, 2.0 * grid_->h())) {
        std::ostringstream os;
        os << "evaluation point (" << p.x << ", " << p.y
           << ") is outside the safe region (distance to boundary < 2h)";
        throw OutOfSupportError(os.str());
    }
}

double ScalarField2D::value(Vec2 p) const {
    check_support(p);
    const Grid2D& g = *grid_;
    const double fx = (p.x - g.origin().x) / g.h();
    const double fy = (p.y - g.origin().y) / g.h();
    const int i = static_cast<int>(std::floor(fx));
    const int j = static_cast<int>(std::floor(fy));
    double wx[4], wy[4];
    keys_weights(fx - i, wx);
    keys_weights(fy - j, wy);
    double acc = 0.0;
    for (int b = 0; b < 4; ++b) {
        const double* row = values_.data() + g.index(i - 1, j - 1 + b);
        acc += wy[b] * (wx[0] * row[0] + wx[1] * row[1] + wx[2] * row[2] + wx[3] * row[3]);
    }
    return acc;
}

FieldSample ScalarField2D::eval(Vec2 p) const {
    check_support(p);
    const Grid2D& g = *grid_;
    const double fx = (p.x - g.origin().x) / g.h();
    const double fy = (p.y - g.origin().y) / g.h();
    const int i = static_cast<int>(std::floor(fx));
    const int j = static_cast<int>(std::floor(fy));
    double wx[4], wy[4];
    keys_weights(fx - i, wx);
    keys_weights(fy - j, wy);
    double v = 0.0, gx = 0.0, gy = 0.0;
    for (int b = 0; b < 4; ++b) {
        const std::size_t base = g.index(i - 1, j - 1 + b);
        const double* fv = values_.data() + base;
        const double* fgx = grad_x_.data() + base;
        const double* fgy = grad_y_.data() + base;
        v += wy[b] * (wx[0] * fv[0] + wx[1] * fv[1] + wx[2] * fv[2] + wx[3] * fv[3]);
        gx += wy[b] * (wx[0] * fgx[0] + wx[1] * fgx[1] + wx[2] * fgx[2] + wx[3] * fgx[3]);
        gy += wy[b] * (wx[0] * fgy[0] + wx[1] * fgy[1] + wx[2] * fgy[2] + wx[3] * fgy[3]);
    }
    return {v, {gx, gy}};
}

double ScalarField2D::bilinear(Vec2 p) const {
    const Grid2D& g = *grid_;
    const double fx = (p.x - g.origin().x) / g.h();
    const double fy = (p.y - g.origin().y) / g.h();
    int i = static_cast<int>(std::floor(fx));
    int j = static_cast<int>(std::floor(fy));
    i = std::clamp(i, 0, g.nx() - 2);
    j = std::clamp(j, 0, g.ny() - 2);
    const double s = fx - i, t = fy - j;
    if (s < -1e-9 || s > 1.0 + 1e-9 || t < -1e-9 || t > 1.0 + 1e-9)
        throw OutOfSupportError("bilinear evaluation outside the grid");
    if (!g.in_closure(i, j) || !g.in_closure(i + 1, j) || !g.in_closure(i, j + 1) ||
        !g.in_closure(i + 1, j + 1))
        throw OutOfSupportError("bilinear evaluation outside the domain");
    return (1 - s) * (1 - t) * at(i, j) + s * (1 - t) * at(i + 1, j) + (1 - s) * t * at(i, j + 1) +
           s * t * at(i + 1, j + 1);
}

double ScalarField2D::l2_norm() const {
    const Grid2D& g = *grid_;
    // Trapezoidal weight: h^2/4 per incident cell lying in the domain.
    KahanSum sum;
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (g.kind(i, j) == NodeKind::exterior) continue;
            const double v = at(i, j);
            if (v == 0.0) continue;
            int cells = 0;
            for (int dj = -1; dj <= 0; ++dj)
                for (int di = -1; di <= 0; ++di) {
                    const int ci = i + di, cj = j + dj;
                    if (g.in_closure(ci, cj) && g.in_closure(ci + 1, cj) &&
                        g.in_closure(ci, cj + 1) && g.in_closure(ci + 1, cj + 1))
                        ++cells;
                }
            sum.add(0.25 * cells * v * v);
        }
    }
    return g.h() * std::sqrt(sum.value());
}

FieldSample eval_field(const ScalarField2D& field, Vec2 p, EvalOrder order) {
    if (order == EvalOrder::value) return {field.value(p), {0.0, 0.0}};
    return field.eval(p);
}

namespace {

constexpr char kMagic[5] = {'N', 'L', 'A', 'B', '1'};

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw Error("truncated snapshot");
    return v;
}

}  // namespace

void write_snapshot(std::ostream& out, const ScalarField2D& field) {
    const Grid2D& g = field.grid();
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.nx()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.ny()));
    put<double>(out, g.origin().x);
    put<double>(out, g.origin().y);
    put<double>(out, g.h());
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) put<std::uint8_t>(out, g.mask(i, j) ? 1 : 0);
    out.write(reinterpret_cast<const char*>(field.values().data()),
              static_cast<std::streamsize>(field.values().size() * sizeof(double)));
}

void write_snapshot(const std::string& path, const ScalarField2D& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    write_snapshot(out, field);
    if (!out) throw Error("failed writing " + path);
}

Snapshot read_snapshot(std::istream& in) {
    char magic[5];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw Error("not an NLAB1 snapshot");
    Snapshot s;
    s.nx = get<std::uint32_t>(in);
    s.ny = get<std::uint32_t>(in);
    s.origin_x = get<double>(in);
    s.origin_y = get<double>(in);
    s.h = get<double>(in);
    const std::size_t n = static_cast<std::size_t>(s.nx) * s.ny;
    s.mask.resize(n);
    in.read(reinterpret_cast<char*>(s.mask.data()), static_cast<std::streamsize>(n));
    s.values.resize(n);
    in.read(reinterpret_cast<char*>(s.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw Error("truncated snapshot");
    return s;
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    return read_snapshot(in);
}

ScalarField2D field_from_snapshot(GridPtr grid, const Snapshot& snap, std::string name) {
    if (static_cast<int>(snap.nx) != grid->nx() || static_cast<int>(snap.ny) != grid->ny() ||
        std::abs(snap.h - grid->h()) > 1e-14 * grid->h() ||
        std::abs(snap.origin_x - grid->origin().x) > 1e-12 ||
        std::abs(snap.origin_y - grid->origin().y) > 1e-12)
        throw Error("snapshot does not match the grid");
    for (int j = 0; j < grid->ny(); ++j)
        for (int i = 0; i < grid->nx(); ++i)
            if ((snap.mask[grid->index(i, j)] != 0) != grid->mask(i, j))
                throw Error("snapshot mask does not match the grid");
    return ScalarField2D(std::move(grid), snap.values, std::move(name));
}

}  // namespace nlab
