#pragma once

// Connectivity-preserving control u^c (modified Laplacian form and the
// equivalent csch^2-scaled gradient form), desired-behavior control u^d for
// rendezvous and formation, and a bounded point-obstacle repulsion.

#include "connmaint/disturbance.hpp"
#include "connmaint/graph.hpp"
#include "connmaint/types.hpp"

#include <span>
#include <string_view>

namespace connmaint {

// Edge weights of the consensus Laplacian L_* in u^d = -L_* p.
enum class ConsensusWeights {
  gaussian,  // a_ij of the communication graph
  binary,    // 1 for every in-range neighbor
};

std::string_view to_string(ConsensusWeights w);
ConsensusWeights consensus_weights_from_string(std::string_view text);

struct ControlParams {
  double epsilon = 0.1;        // floor for the centralized law
  double epsilon_bar = 0.1;    // floor inside the modified weights
  double epsilon_tilde = 0.2;  // formation-bias switch level
  double k_margin = 2.0;       // bias switches at k_margin * epsilon_tilde
  std::vector<double> gamma;   // per-agent gain, empty means 1 for everyone
  double u_c_max = 300.0;        // norm cap on each agent's u^c
  double csch_floor = 1e-3;    // csch^2 argument clamp
  ConsensusWeights consensus = ConsensusWeights::binary;

  double gamma_for(std::size_t i) const { return gamma.empty() ? 1.0 : gamma.at(i); }
  void validate(std::size_t n_agents) const;
};

// csch^2(max(x, floor)). The clamp also absorbs negative connectivity
// estimates, which happen under heavy failure rates.
double csch2_clamped(double x, double floor);

// gamma_i csch^2(lambda2_i - epsilon_bar) (v_i - v_j)^2 a_ij / sigma^2
double modified_edge_weight(std::size_t i, double lambda2_i, double nu_i, double nu_j, double a_ij,
                            const ControlParams& params, double sigma);

// Agent-local u^c: gamma_i csch^2(lambda2_i - epsilon_bar) * gradient, norm-capped.
Vec connectivity_control(std::size_t i, double lambda2_i, const Vec& gradient,
                         const ControlParams& params);

// Centralized law with the true lambda_2 and floor epsilon, norm-capped.
Vec centralized_connectivity_control(double lambda2, const Vec& gradient,
                                     const ControlParams& params);

// Modified Laplacian L_bar = D_bar - A_bar. Row i uses agent i's estimate
// lambda2_est(i); nus(j) is the eigenvector component agent i sees for j.
// Not symmetric in general.
Eigen::MatrixXd modified_laplacian(const CommGraph& graph, const Eigen::VectorXd& lambda2_est,
                                   const Eigen::VectorXd& nus, const ControlParams& params,
                                   double sigma);

// Row i of -M p, where p stacks the agents' positions.
std::vector<Vec> apply_negative_laplacian(const Eigen::MatrixXd& laplacian,
                                          std::span<const Position> positions);

// u_i^d = -sum_j w_ij (p_i - p_j), w_ij = a_ij or 1 per `weights`.
std::vector<Vec> rendezvous_control(std::span<const Position> positions, const CommGraph& graph,
                                    ConsensusWeights weights = ConsensusWeights::gaussian);
Vec rendezvous_control(std::size_t i, std::span<const Position> positions, const CommGraph& graph,
                       ConsensusWeights weights = ConsensusWeights::gaussian);

struct FormationSpec {
  PositionList offsets;  // desired relative positions, up to translation

  // Regular polygon of the given circumradius in the first two coordinates.
  static FormationSpec regular_polygon(std::size_t n, double radius, std::size_t dim = 2);
};

// Formation bias for agent i. received_nus(j) is what agent i sees of
// agent j's eigenvector component; only neighbor entries are read. The
// weight argument freezes at k_margin * epsilon_tilde once lambda2_i falls
// to that level, which keeps the bias bounded.
Vec formation_bias(std::size_t i, const CommGraph& graph, double lambda2_i, double nu_i,
                   const Eigen::VectorXd& received_nus, const FormationSpec& spec,
                   const ControlParams& params, double sigma);

// u_i^d = -(L_* p)_i + b_i(p), L_* weighted per params.consensus
Vec formation_control(std::size_t i, std::span<const Position> positions, const CommGraph& graph,
                      double lambda2_i, double nu_i, const Eigen::VectorXd& received_nus,
                      const FormationSpec& spec, const ControlParams& params, double sigma);

// Whole-group formation control with undisturbed eigenvector components.
std::vector<Vec> formation_control(std::span<const Position> positions, const CommGraph& graph,
                                   const Eigen::VectorXd& lambda2_est, const Eigen::VectorXd& nus,
                                   const FormationSpec& spec, const ControlParams& params,
                                   double sigma);

struct ObstacleField {
  PositionList points;
  double influence_radius = 0.4;
  double repulsion_gain = 0.05;
  double u_obst_max = 3.0;

  void validate() const;
};

// sum over obstacles with d < influence_radius of
//   gain (1/d - 1/rho) (1/d^2) unit(p - o),
// norm-capped at u_obst_max. An agent sitting exactly on an obstacle gets a
// full-magnitude push in a direction drawn from rng.
Vec obstacle_avoidance(const Position& p, const ObstacleField& field, RandomStream& rng);

std::vector<Vec> total_control(std::span<const Vec> u_c, std::span<const Vec> u_d,
                               std::span<const Vec> u_obst);

}  // namespace connmaint
