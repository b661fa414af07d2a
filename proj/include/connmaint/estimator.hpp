#pragma once

// Per-agent decentralized estimation of the Fiedler eigenvector component,
// the local algebraic-connectivity estimate and its position gradient.
//
// Eigenvector dynamics (one agent, neighbors j):
//   dv_i/dt = -k1 z1_i - k2 sum_j a_ij (v_i - v_j) - k3 (z2_i - 1) v_i
// where z1_i and z2_i are PI average-consensus trackers of Ave(v) and
// Ave(v^2):
//   dz_i/dt = gamma (u_i - z_i) - kp sum_j a_ij (z_i - z_j) + ki sum_j a_ij (w_i - w_j)
//   dw_i/dt = -ki sum_j a_ij (z_i - z_j)
// At equilibrium v is a Laplacian eigenvector with eigenvalue
// (k3/k2)(1 - Ave(v^2)), which is the local estimate lambda2_local().

#include "connmaint/types.hpp"

#include <span>

namespace connmaint {

struct EstimatorGains {
  double k1 = 90.0;
  double k2 = 15.0;
  double k3 = 100.0;
  double gamma = 100.0;
  double kp = 200.0;
  double ki = 200.0;

  // k2 > 0 (it divides); the others must be >= 0 and finite.
  void validate() const;
};

struct PiState {
  double z = 0.0;
  double w = 0.0;
};

struct EstimatorState {
  double nu = 0.0;
  PiState avg1;  // tracks Ave(nu)
  PiState avg2;  // tracks Ave(nu^2)

  // PI trackers start at the agent's own instantaneous values.
  static EstimatorState initial(double nu);
  bool finite() const;
};

// What agent i receives from neighbor j in one synchronous round.
// nu may have been corrupted in transit; the PI states travel clean.
struct NeighborMessage {
  double weight = 0.0;  // a_ij
  double nu = 0.0;
  PiState avg1;
  PiState avg2;
};

// One explicit-Euler round. Reads nothing but the agent's own state and its
// neighbors' messages. Throws InvalidParameter on non-finite input.
EstimatorState estimator_step(const EstimatorState& self, std::span<const NeighborMessage> neighbors,
                              const EstimatorGains& gains, double dt);

// (k3/k2) (1 - avg2.z)
double lambda2_local(const EstimatorState& state, const EstimatorGains& gains);

// sum_j -a_ij (v_i - v_j)^2 (p_i - p_j) / sigma^2 over the agent's neighborhood.
Vec lambda2_gradient_local(double nu_i, std::span<const double> neighbor_nus, const Position& p_i,
                           std::span<const Position> neighbor_positions,
                           std::span<const double> weights, double sigma);

}  // namespace connmaint
