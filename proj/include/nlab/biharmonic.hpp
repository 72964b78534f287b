#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "nlab/field.hpp"

namespace nlab {

// Navier: u = 0 and Δu = 0 on the boundary (simply supported plate).
// Clamped: u = 0 and ∂u/∂n = 0 on the boundary.
enum class BCType { navier, clamped };

std::string to_string(BCType bc);
BCType bc_from_string(const std::string& s);

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Discrete bi-Laplacian on the interior nodes of a grid.
///
/// `laplacian` is the Dirichlet 5-point operator -Δ_h (positive definite);
/// for Navier conditions `matrix` equals laplacian * laplacian exactly. For
/// clamped conditions `matrix` is the 13-point stencil with ghost values
/// mirrored through the boundary node, which enforces ∂u/∂n = 0 to second
/// order and keeps the matrix symmetric.
struct DiscreteOperator {
    GridPtr grid;
    BCType bc = BCType::navier;
    SparseMatrix matrix;
    SparseMatrix laplacian;
    std::vector<int> dof_of_node;            // -1 for non-interior nodes
    std::vector<std::size_t> node_of_dof;
    double norm_inf = 0.0;                   // ||matrix||_inf

    Eigen::Index dim() const { return matrix.rows(); }
    Eigen::VectorXd restrict(const ScalarField2D& f) const;
    std::vector<double> prolong(const Eigen::VectorXd& x) const;
};

DiscreteOperator assemble_operator(GridPtr grid, BCType bc);

struct EigenPair {
    double lambda = 0.0;             // Δ² eigenvalue is lambda^2
    ScalarField2D u;
    double residual = 0.0;           // ||A u - lambda^2 u||_2 / ||u||_2 (0 for analytic)
    double relative_residual = 0.0;  // residual / ||A||_inf
    BCType bc = BCType::navier;
    bool analytic = false;
};

struct SolverOptions {
    // Convergence when every requested Ritz residual satisfies
    // ||A x - θ x|| / ||x|| <= tol * ||A||_inf.
    double tol = 1e-14;
    int max_iterations = 300;
    std::uint64_t seed = 12345;
};

/// Smallest m eigenpairs, ascending, by shift-invert subspace iteration with
/// Rayleigh-Ritz. Eigenfunctions are L²-normalized (trapezoidal rule) with the
/// first non-negligible interior value positive.
std::vector<EigenPair> solve_modes(const DiscreteOperator& op, int m,
                                   const SolverOptions& options = {});

// (2/sqrt(ab)) sin(kπx/a) sin(lπy/b) with lambda = π²(k²/a² + l²/b²).
EigenPair navier_modes_analytic(const Domain2D& rectangle, int k, int l, GridPtr grid);

double residual_norm(const DiscreteOperator& op, const EigenPair& pair);

// Sorted analytic Navier ladder on a rectangle: (k, l) with k, l <= kmax.
struct ModeIndex {
    int k = 1;
    int l = 1;
    double lambda = 0.0;
};
std::vector<ModeIndex> navier_ladder(const Domain2D& rectangle, int kmax);

}  // namespace nlab
