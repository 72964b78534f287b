#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nlab/geometry.hpp"

namespace nlab {

enum class DomainKind { rectangle, lshape };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& s);

/// Planar computational domain with piecewise straight (hence analytic)
/// boundary. The rectangle is [x0, x0+a] x [y0, y0+b]; the L-shape is that
/// rectangle minus its upper-right c x d block.
///
/// `gamma` is the non-analytic part of the boundary, i.e. the corner points.
class Domain2D {
public:
    static Domain2D rectangle(double a, double b, Vec2 origin = {});
    static Domain2D lshape(double a, double b, double c, double d, Vec2 origin = {});

    DomainKind kind() const { return kind_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double c() const { return c_; }
    double d() const { return d_; }
    Vec2 origin() const { return origin_; }

    const std::vector<Segment>& boundary_pieces() const { return pieces_; }
    const std::vector<Vec2>& gamma() const { return gamma_; }
    Vec2 bbox_min() const { return origin_; }
    Vec2 bbox_max() const { return {origin_.x + a_, origin_.y + b_}; }
    double diameter() const;
    double area() const;

    // Strictly inside (open set).
    bool contains(Vec2 p) const;
    double distance_to_boundary(Vec2 p) const;
    double distance_to_gamma(Vec2 p) const;

    // Plain-text key=value form: kind, a, b, c, d, x0, y0. Keys may carry a
    // "domain." prefix so the same parser reads experiment configs.
    static Domain2D parse(const std::map<std::string, std::string>& kv);
    static Domain2D parse_text(const std::string& text);
    std::string to_text() const;

private:
    Domain2D() = default;
    void build_boundary();

    DomainKind kind_ = DomainKind::rectangle;
    double a_ = 1.0, b_ = 1.0, c_ = 0.0, d_ = 0.0;
    Vec2 origin_;
    std::vector<Segment> pieces_;
    std::vector<Vec2> gamma_;
};

enum class NodeKind : std::uint8_t { exterior = 0, interior = 1, boundary = 2 };

/// Uniform Cartesian grid over the bounding box of a domain. Immutable.
class Grid2D {
public:
    Grid2D(const Domain2D& domain, double h);

    const Domain2D& domain() const { return domain_; }
    double h() const { return h_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    Vec2 origin() const { return origin_; }
    std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
    Vec2 node(int i, int j) const { return {origin_.x + i * h_, origin_.y + j * h_}; }
    bool in_range(int i, int j) const { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }

    NodeKind kind(int i, int j) const { return kinds_[index(i, j)]; }
    // Interior mask: true iff the node is strictly inside the domain.
    bool mask(int i, int j) const { return kind(i, j) == NodeKind::interior; }
    // Interior or on the boundary, with out-of-range indices treated as outside.
    bool in_closure(int i, int j) const {
        return in_range(i, j) && kind(i, j) != NodeKind::exterior;
    }
    std::size_t interior_count() const { return interior_count_; }

    const std::vector<double>& distance_to_boundary() const { return dist_boundary_; }
    const std::vector<double>& distance_to_gamma() const { return dist_gamma_; }

    // Points farther than `margin` from the boundary, inside the domain.
    bool is_safe(Vec2 p, double margin) const;

private:
    Domain2D domain_;
    double h_;
    int nx_ = 0, ny_ = 0;
    Vec2 origin_;
    std::vector<NodeKind> kinds_;
    std::vector<double> dist_boundary_;
    std::vector<double> dist_gamma_;
    std::size_t interior_count_ = 0;
};

using GridPtr = std::shared_ptr<const Grid2D>;

GridPtr build_grid(const Domain2D& domain, double h);

std::map<std::string, std::string> parse_key_values(const std::string& text);

// Shortest round-tripping text form (%.17g).
std::string format_double(double v);

}  // namespace nlab
