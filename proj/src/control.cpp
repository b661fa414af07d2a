#include "connmaint/control.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace connmaint {

std::string_view to_string(ConsensusWeights w) {
  return w == ConsensusWeights::gaussian ? "gaussian" : "binary";
}

ConsensusWeights consensus_weights_from_string(std::string_view text) {
  if (text == "gaussian") return ConsensusWeights::gaussian;
  if (text == "binary") return ConsensusWeights::binary;
  throw InvalidParameter("consensus weights must be 'gaussian' or 'binary', got '" +
                         std::string(text) + "'");
}

void ControlParams::validate(std::size_t n_agents) const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidParameter(std::string("control.") + name + " must be positive, got " +
                             std::to_string(v));
    }
  };
  positive(epsilon, "epsilon");
  positive(epsilon_bar, "epsilon_bar");
  positive(epsilon_tilde, "epsilon_tilde");
  positive(u_c_max, "u_c_max");
  positive(csch_floor, "csch_floor");
  if (!(k_margin > 1.0)) {
    throw InvalidParameter("control.k_margin must exceed 1, got " + std::to_string(k_margin));
  }
  if (!gamma.empty() && gamma.size() != n_agents) {
    throw InvalidParameter("control.gamma must list one gain per agent");
  }
  for (double g : gamma) positive(g, "gamma");
}

double csch2_clamped(double x, double floor) {
  const double s = std::sinh(std::max(x, floor));
  return 1.0 / (s * s);
}

double modified_edge_weight(std::size_t i, double lambda2_i, double nu_i, double nu_j, double a_ij,
                            const ControlParams& params, double sigma) {
  const double dv = nu_i - nu_j;
  return params.gamma_for(i) * csch2_clamped(lambda2_i - params.epsilon_bar, params.csch_floor) *
         dv * dv * a_ij / (sigma * sigma);
}

Vec connectivity_control(std::size_t i, double lambda2_i, const Vec& gradient,
                         const ControlParams& params) {
  const double gain =
      params.gamma_for(i) * csch2_clamped(lambda2_i - params.epsilon_bar, params.csch_floor);
  return cap_norm(gain * gradient, params.u_c_max);
}

Vec centralized_connectivity_control(double lambda2, const Vec& gradient,
                                     const ControlParams& params) {
  const double gain = csch2_clamped(lambda2 - params.epsilon, params.csch_floor);
  return cap_norm(gain * gradient, params.u_c_max);
}

Eigen::MatrixXd modified_laplacian(const CommGraph& graph, const Eigen::VectorXd& lambda2_est,
                                   const Eigen::VectorXd& nus, const ControlParams& params,
                                   double sigma) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  Eigen::MatrixXd lbar = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!graph.adjacent(i, j)) continue;
      const double abar = modified_edge_weight(static_cast<std::size_t>(i), lambda2_est(i), nus(i),
                                               nus(j), graph.weights(i, j), params, sigma);
      lbar(i, j) = -abar;
      lbar(i, i) += abar;
    }
  }
  return lbar;
}

std::vector<Vec> apply_negative_laplacian(const Eigen::MatrixXd& laplacian,
                                          std::span<const Position> positions) {
  const std::size_t n = positions.size();
  std::vector<Vec> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec u = Vec::Zero(positions[i].size());
    for (std::size_t j = 0; j < n; ++j) u -= laplacian(i, j) * positions[j];
    out.push_back(std::move(u));
  }
  return out;
}

Vec rendezvous_control(std::size_t i, std::span<const Position> positions, const CommGraph& graph,
                       ConsensusWeights weights) {
  Vec u = Vec::Zero(positions[i].size());
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (!graph.adjacent(i, j)) continue;
    const double w = weights == ConsensusWeights::gaussian ? graph.weights(i, j) : 1.0;
    u -= w * (positions[i] - positions[j]);
  }
  return u;
}

std::vector<Vec> rendezvous_control(std::span<const Position> positions, const CommGraph& graph,
                                    ConsensusWeights weights) {
  std::vector<Vec> out;
  out.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out.push_back(rendezvous_control(i, positions, graph, weights));
  }
  return out;
}

FormationSpec FormationSpec::regular_polygon(std::size_t n, double radius, std::size_t dim) {
  if (dim < 2) throw InvalidParameter("regular_polygon needs at least two dimensions");
  FormationSpec spec;
  spec.offsets.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    Position p = Position::Zero(static_cast<Eigen::Index>(dim));
    p(0) = radius * std::cos(angle);
    p(1) = radius * std::sin(angle);
    spec.offsets.push_back(std::move(p));
  }
  return spec;
}

Vec formation_bias(std::size_t i, const CommGraph& graph, double lambda2_i, double nu_i,
                   const Eigen::VectorXd& received_nus, const FormationSpec& spec,
                   const ControlParams& params, double sigma) {
  const double switch_level = params.k_margin * params.epsilon_tilde;
  const double weight_arg = lambda2_i > switch_level ? lambda2_i : switch_level;
  Vec b = Vec::Zero(spec.offsets.at(i).size());
  for (std::size_t j = 0; j < graph.size(); ++j) {
    if (!graph.adjacent(i, j)) continue;
    const double abar = modified_edge_weight(i, weight_arg, nu_i, received_nus(j),
                                             graph.weights(i, j), params, sigma);
    b += (1.0 + abar) * (spec.offsets[i] - spec.offsets[j]);
  }
  return b;
}

Vec formation_control(std::size_t i, std::span<const Position> positions, const CommGraph& graph,
                      double lambda2_i, double nu_i, const Eigen::VectorXd& received_nus,
                      const FormationSpec& spec, const ControlParams& params, double sigma) {
  return rendezvous_control(i, positions, graph, params.consensus) +
         formation_bias(i, graph, lambda2_i, nu_i, received_nus, spec, params, sigma);
}

std::vector<Vec> formation_control(std::span<const Position> positions, const CommGraph& graph,
                                   const Eigen::VectorXd& lambda2_est, const Eigen::VectorXd& nus,
                                   const FormationSpec& spec, const ControlParams& params,
                                   double sigma) {
  std::vector<Vec> out;
  out.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out.push_back(formation_control(i, positions, graph, lambda2_est(i), nus(i), nus, spec,
                                    params, sigma));
  }
  return out;
}

void ObstacleField::validate() const {
  if (!(influence_radius > 0.0)) throw InvalidParameter("obstacles.influence_radius must be > 0");
  if (!(repulsion_gain > 0.0)) throw InvalidParameter("obstacles.gain must be > 0");
  if (!(u_obst_max > 0.0)) throw InvalidParameter("obstacles.max_push must be > 0");
}

Vec obstacle_avoidance(const Position& p, const ObstacleField& field, RandomStream& rng) {
  Vec u = Vec::Zero(p.size());
  const double rho = field.influence_radius;
  for (const auto& o : field.points) {
    const Vec diff = p - o;
    const double d = diff.norm();
    if (d >= rho) continue;
    if (d == 0.0) {
      Vec dir(p.size());
      for (Eigen::Index k = 0; k < dir.size(); ++k) dir(k) = rng.gaussian();
      if (dir.norm() == 0.0) dir(0) = 1.0;
      return dir.normalized() * field.u_obst_max;
    }
    u += field.repulsion_gain * (1.0 / d - 1.0 / rho) / (d * d) * (diff / d);
  }
  return cap_norm(u, field.u_obst_max);
}

std::vector<Vec> total_control(std::span<const Vec> u_c, std::span<const Vec> u_d,
                               std::span<const Vec> u_obst) {
  if (u_c.size() != u_d.size() || u_c.size() != u_obst.size()) {
    throw InvalidParameter("total_control: control lists are not aligned");
  }
  std::vector<Vec> out;
  out.reserve(u_c.size());
  for (std::size_t i = 0; i < u_c.size(); ++i) out.push_back(u_c[i] + u_d[i] + u_obst[i]);
  return out;
}

}  // namespace connmaint
