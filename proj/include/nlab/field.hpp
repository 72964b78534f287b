#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "nlab/domain.hpp"

namespace nlab {

struct FieldSample {
    double value = 0.0;
    Vec2 gradient;
};

/// Nodal scalar field on a Grid2D. Values at exterior nodes are stored as 0 and
/// never read by the interpolation paths; boundary nodes carry the boundary
/// trace (0 for eigenfunctions).
///
/// Construction precomputes nodal gradients by centered differences: fourth
/// order where the five-point stencil stays in the closed domain, second order
/// next to the boundary, one-sided on the boundary itself.
class ScalarField2D {
public:
    ScalarField2D(GridPtr grid, std::vector<double> values, std::string name = "u");

    // Samples f at every non-exterior node.
    static ScalarField2D sample(GridPtr grid, const std::function<double(Vec2)>& f,
                                std::string name = "f");

    const Grid2D& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    const std::string& name() const { return name_; }
    double at(int i, int j) const { return values_[grid_->index(i, j)]; }
    double max_abs() const;

    // Bicubic (Catmull-Rom / Keys) interpolation. Requires p inside the
    // domain with dist(p, boundary) >= 2h; throws OutOfSupportError otherwise.
    double value(Vec2 p) const;
    FieldSample eval(Vec2 p) const;

    // Bilinear interpolation of the nodal values; valid on the whole closed
    // domain.
    double bilinear(Vec2 p) const;

    // Trapezoidal grid quadrature of f^2 over the domain (boundary values are
    // zero for eigenfunctions, so only interior nodes contribute weight h^2).
    double l2_norm() const;

private:
    void compute_gradients();
    void check_support(Vec2 p) const;

    GridPtr grid_;
    std::vector<double> values_;
    std::vector<double> grad_x_;
    std::vector<double> grad_y_;
    std::string name_;
};

enum class EvalOrder { value, gradient };

// Thin wrapper for the `eval_field` operation; gradient is zero when only the
// value was requested.
FieldSample eval_field(const ScalarField2D& field, Vec2 p, EvalOrder order = EvalOrder::gradient);

// Binary snapshot: "NLAB1", u32 nx, u32 ny, f64 origin_x, f64 origin_y, f64 h,
// u8 mask per node, f64 values row-major (x fastest). Little-endian.
void write_snapshot(std::ostream& out, const ScalarField2D& field);
void write_snapshot(const std::string& path, const ScalarField2D& field);

struct Snapshot {
    std::uint32_t nx = 0;
    std::uint32_t ny = 0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    double h = 0.0;
    std::vector<std::uint8_t> mask;
    std::vector<double> values;
};

Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::string& path);

// Rebuilds a field from a snapshot; the grid must match in shape and spacing.
ScalarField2D field_from_snapshot(GridPtr grid, const Snapshot& snap, std::string name = "u");

}  // namespace nlab
