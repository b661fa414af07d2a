#pragma once

// Geometric communication graph, Laplacian assembly and the centralized
// spectral oracle (exact lambda_2, Fiedler vector and lambda_2 gradient).
// The oracle is ground truth for validation only; agents never read it.

#include "connmaint/types.hpp"

#include <span>

namespace connmaint {

// Communication range and Gaussian weight width. Build with make().
struct RangeParams {
  double range = 4.0;   // R, meters
  double delta = 0.01;  // weight at distance R
  double sigma = 0.0;   // derived, see sigma_from_range

  static RangeParams make(double range, double delta);
};

// sigma such that exp(-R^2 / (2 sigma^2)) == delta.
double sigma_from_range(double range, double delta);

// Gaussian edge weight, exactly zero beyond the communication range.
// The weight jumps from delta to 0 at distance R.
double edge_weight(const Position& pi, const Position& pj, const RangeParams& params);

struct CommGraph {
  Eigen::MatrixXd weights;    // a_ij, symmetric, zero diagonal
  Eigen::VectorXd degrees;    // d_i = sum_j a_ij
  Eigen::MatrixXd laplacian;  // D - A

  std::size_t size() const { return static_cast<std::size_t>(weights.rows()); }
  bool adjacent(std::size_t i, std::size_t j) const { return i != j && weights(i, j) > 0.0; }
  std::vector<std::size_t> neighbors(std::size_t i) const;
};

CommGraph build_graph(std::span<const Position> positions, const RangeParams& params);

// Laplacian of an explicitly weighted graph (tests and fixtures).
CommGraph graph_from_weights(const Eigen::MatrixXd& weights);

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column k pairs with values(k)
  int sweeps = 0;
};

// Cyclic Jacobi rotations. Converged when the off-diagonal Frobenius norm
// drops below tolerance * max(1, ||A||_F).
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, double tolerance = 1e-12,
                            int max_sweeps = 100);

struct SpectralResult {
  double lambda2 = 0.0;
  Eigen::VectorXd fiedler;          // unit norm, first nonzero entry positive
  Eigen::VectorXd all_eigenvalues;  // ascending
  bool degenerate = false;          // lambda_3 - lambda_2 < kDegenerateGap
};

inline constexpr double kDegenerateGap = 1e-9;

SpectralResult spectral_oracle(const CommGraph& graph);

struct GradientResult {
  std::vector<Vec> per_agent;
  bool reliable = true;  // false when lambda_2 is repeated
};

// Exact d(lambda_2)/d(p_i) for every agent from a unit Fiedler vector:
//   sum_j -a_ij (v_i - v_j)^2 (p_i - p_j) / sigma^2
GradientResult lambda2_gradient_exact(std::span<const Position> positions, const CommGraph& graph,
                                      const Eigen::VectorXd& fiedler, double sigma,
                                      bool degenerate = false);

}  // namespace connmaint
