#include "connmaint/estimator.hpp"

#include <cmath>
#include <string>

namespace connmaint {

void EstimatorGains::validate() const {
  auto check = [](double v, const char* name, bool strict) {
    if (!std::isfinite(v) || v < 0.0 || (strict && v == 0.0)) {
      throw InvalidParameter(std::string("estimator gain ") + name + " out of range: " +
                             std::to_string(v));
    }
  };
  check(k1, "k1", false);
  check(k2, "k2", true);
  check(k3, "k3", false);
  check(gamma, "gamma", false);
  check(kp, "kp", false);
  check(ki, "ki", false);
}

EstimatorState EstimatorState::initial(double nu) {
  EstimatorState s;
  s.nu = nu;
  s.avg1 = {nu, 0.0};
  s.avg2 = {nu * nu, 0.0};
  return s;
}

bool EstimatorState::finite() const {
  return std::isfinite(nu) && std::isfinite(avg1.z) && std::isfinite(avg1.w) &&
         std::isfinite(avg2.z) && std::isfinite(avg2.w);
}

namespace {

PiState pi_consensus_step(const PiState& self, double input, double sum_dz, double sum_dw,
                          const EstimatorGains& g, double dt) {
  const double zdot = g.gamma * (input - self.z) - g.kp * sum_dz + g.ki * sum_dw;
  const double wdot = -g.ki * sum_dz;
  return {self.z + dt * zdot, self.w + dt * wdot};
}

}  // namespace

EstimatorState estimator_step(const EstimatorState& self, std::span<const NeighborMessage> neighbors,
                              const EstimatorGains& gains, double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("estimator_step: dt must be positive");
  double coupling = 0.0;
  double dz1 = 0.0, dw1 = 0.0, dz2 = 0.0, dw2 = 0.0;
  for (const auto& m : neighbors) {
    if (!std::isfinite(m.weight) || !std::isfinite(m.nu) || !std::isfinite(m.avg1.z) ||
        !std::isfinite(m.avg1.w) || !std::isfinite(m.avg2.z) || !std::isfinite(m.avg2.w)) {
      throw InvalidParameter("estimator_step: non-finite neighbor input");
    }
    coupling += m.weight * (self.nu - m.nu);
    dz1 += m.weight * (self.avg1.z - m.avg1.z);
    dw1 += m.weight * (self.avg1.w - m.avg1.w);
    dz2 += m.weight * (self.avg2.z - m.avg2.z);
    dw2 += m.weight * (self.avg2.w - m.avg2.w);
  }

  const double nudot = -gains.k1 * self.avg1.z - gains.k2 * coupling -
                       gains.k3 * (self.avg2.z - 1.0) * self.nu;

  EstimatorState next;
  next.nu = self.nu + dt * nudot;
  next.avg1 = pi_consensus_step(self.avg1, self.nu, dz1, dw1, gains, dt);
  next.avg2 = pi_consensus_step(self.avg2, self.nu * self.nu, dz2, dw2, gains, dt);
  return next;
}

double lambda2_local(const EstimatorState& state, const EstimatorGains& gains) {
  return (gains.k3 / gains.k2) * (1.0 - state.avg2.z);
}

Vec lambda2_gradient_local(double nu_i, std::span<const double> neighbor_nus, const Position& p_i,
                           std::span<const Position> neighbor_positions,
                           std::span<const double> weights, double sigma) {
  if (neighbor_nus.size() != neighbor_positions.size() || weights.size() != neighbor_nus.size()) {
    throw InvalidParameter("lambda2_gradient_local: neighbor lists are not index-aligned");
  }
  Vec g = Vec::Zero(p_i.size());
  const double inv_s2 = 1.0 / (sigma * sigma);
  for (std::size_t k = 0; k < neighbor_nus.size(); ++k) {
    const double dv = nu_i - neighbor_nus[k];
    g -= weights[k] * dv * dv * inv_s2 * (p_i - neighbor_positions[k]);
  }
  return g;
}

}  // namespace connmaint
