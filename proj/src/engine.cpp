#include "connmaint/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace connmaint {

std::string_view to_string(Mode mode) {
  return mode == Mode::rendezvous ? "rendezvous" : "formation";
}

std::string_view to_string(FilterTarget target) {
  return target == FilterTarget::connectivity ? "connectivity" : "total";
}

void ScenarioConfig::validate() const {
  if (n_agents < 2) throw ConfigError("agents.count must be >= 2");
  if (dim < 2) throw ConfigError("agents.dim must be >= 2");
  if (!(dt > 0.0)) throw ConfigError("time.dt must be positive");
  if (!(horizon > 0.0)) throw ConfigError("time.T must be positive");
  if (!(init_box > 0.0)) throw ConfigError("world.init_box must be positive");
  if (!(formation_radius >= 0.0)) throw ConfigError("formation.radius must be >= 0");
  if (!(cutoff > 0.0)) throw ConfigError("actuation.cutoff must be positive");
  if (drift.size() != 0 && static_cast<std::size_t>(drift.size()) != dim) {
    throw ConfigError("migration.velocity must have agents.dim components");
  }
  if (obstacles.band_x_max < obstacles.band_x_min || obstacles.band_y_max < obstacles.band_y_min) {
    throw ConfigError("obstacle band bounds are inverted");
  }
  if (!(range.range > 0.0) || !(range.delta > 0.0 && range.delta < 1.0)) {
    throw ConfigError("range parameters out of bounds");
  }
  try {
    gains.validate();
    control.validate(n_agents);
    disturbance.validate();
    ObstacleField{{}, obstacles.influence_radius, obstacles.gain, obstacles.max_push}.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
}

std::size_t ScenarioConfig::steps() const {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

Vec ScenarioConfig::drift_velocity() const {
  if (drift.size() != 0) return drift;
  Vec v = Vec::Zero(static_cast<Eigen::Index>(dim));
  v(0) = 1.0;
  return v;
}

FormationSpec ScenarioConfig::formation() const {
  return FormationSpec::regular_polygon(n_agents, formation_radius, dim);
}

ScenarioConfig ScenarioConfig::with_seed(std::uint64_t s) const {
  ScenarioConfig c = *this;
  c.seed = s;
  c.disturbance.seed = s;
  return c;
}

PositionList sample_initial_positions(const ScenarioConfig& config) {
  RandomStream rng(config.seed, 0, StreamPurpose::world);
  const auto dim = static_cast<Eigen::Index>(config.dim);
  for (int attempt = 0; attempt < config.max_init_retries; ++attempt) {
    PositionList p;
    p.reserve(config.n_agents);
    for (std::size_t i = 0; i < config.n_agents; ++i) {
      Position x = Position::Zero(dim);
      for (Eigen::Index k = 0; k < dim; ++k) x(k) = (rng.uniform() - 0.5) * config.init_box;
      x(0) += config.init_center_x;
      x(1) += config.init_center_y;
      p.push_back(std::move(x));
    }
    if (config.n_agents == 1) return p;
    const CommGraph g = build_graph(p, config.range);
    if (spectral_oracle(g).lambda2 > kConnectedTolerance) return p;
  }
  throw ConfigError("no connected initial configuration after " +
                    std::to_string(config.max_init_retries) + " draws");
}

PositionList sample_obstacles(const ScenarioConfig& config) {
  RandomStream rng(config.seed, 0, StreamPurpose::obstacle);
  const auto& oc = config.obstacles;
  PositionList out;
  out.reserve(oc.count);
  for (std::size_t k = 0; k < oc.count; ++k) {
    Position o = Position::Zero(static_cast<Eigen::Index>(config.dim));
    o(0) = oc.band_x_min + rng.uniform() * (oc.band_x_max - oc.band_x_min);
    o(1) = oc.band_y_min + rng.uniform() * (oc.band_y_max - oc.band_y_min);
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<double> sample_initial_estimates(const ScenarioConfig& config) {
  std::vector<double> nu(config.n_agents);
  for (std::size_t i = 0; i < config.n_agents; ++i) {
    RandomStream rng(config.seed, i, StreamPurpose::init);
    nu[i] = 2.0 * rng.uniform() - 1.0;
  }
  return nu;
}

namespace {

bool state_finite(const PositionList& positions, const std::vector<EstimatorState>& states) {
  for (const auto& p : positions)
    if (!p.allFinite()) return false;
  for (const auto& s : states)
    if (!s.finite()) return false;
  return true;
}

}  // namespace

RunResult simulate(const ScenarioConfig& input, const RunOptions& options) {
  ScenarioConfig config = input.with_seed(input.seed);
  config.validate();

  const std::size_t n = config.n_agents;
  const double dt = config.dt;
  const double sigma = config.range.sigma;
  const FormationSpec formation = config.formation();
  const Vec drift = config.drift_velocity();
  const DisturbanceConfig& dist = config.disturbance;
  const bool disturbed = dist.active();

  RunResult result;
  result.config = config;
  result.seed = config.seed;
  result.obstacles = sample_obstacles(config);
  const ObstacleField field{result.obstacles, config.obstacles.influence_radius,
                            config.obstacles.gain, config.obstacles.max_push};

  PositionList positions = sample_initial_positions(config);
  std::vector<EstimatorState> states;
  for (double nu : sample_initial_estimates(config)) states.push_back(EstimatorState::initial(nu));

  std::vector<CorruptionStreams> corruption;
  std::vector<RandomStream> obstacle_rng;
  std::vector<LowPassFilter> filters;
  for (std::size_t i = 0; i < n; ++i) {
    corruption.emplace_back(dist.seed, i);
    obstacle_rng.emplace_back(config.seed, i + n, StreamPurpose::obstacle);
    filters.emplace_back(config.dim, config.cutoff, config.ideal);
  }

  const std::size_t steps = config.steps();
  result.trace.reserve(steps + 1);
  bool latched_valid = true;

  std::vector<char> broadcast_failed(n, 0);
  Eigen::VectorXd received(static_cast<Eigen::Index>(n));
  std::vector<NeighborMessage> messages;
  std::vector<double> nbr_nus, nbr_weights;
  PositionList nbr_positions;
  std::vector<Vec> applied(n);
  std::vector<EstimatorState> next_states(n);

  for (std::size_t k = 0; k <= steps; ++k) {
    const CommGraph graph = build_graph(positions, config.range);
    SpectralResult oracle = spectral_oracle(graph);
    if (options.oracle_hook) options.oracle_hook(oracle);

    TraceRecord rec;
    rec.t = static_cast<double>(k) * dt;
    rec.lambda2_true = oracle.lambda2;
    rec.lambda2_bar = oracle.lambda2;
    rec.connected = oracle.lambda2 > kConnectedTolerance;
    if (!rec.connected && latched_valid) {
      latched_valid = false;
      result.outcome = Outcome::lost;
      result.t_loss = rec.t;
    }
    rec.estimates_valid = latched_valid;
    rec.lambda2_est.resize(n);
    rec.nu_est.resize(n);
    rec.u_c_agent_norms.resize(n);
    rec.positions = positions;

    if (disturbed && dist.scope == FailureScope::broadcast) {
      for (std::size_t j = 0; j < n; ++j) {
        broadcast_failed[j] = corruption[j].failure.bernoulli(dist.p_fail) ? 1 : 0;
      }
    }

    double uc_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const EstimatorState& self = states[i];
      messages.clear();
      nbr_nus.clear();
      nbr_weights.clear();
      nbr_positions.clear();
      received.setZero();
      for (std::size_t j = 0; j < n; ++j) {
        if (!graph.adjacent(i, j)) continue;
        double nu_j = states[j].nu;
        if (disturbed) {
          nu_j = dist.scope == FailureScope::link
                     ? corrupt_estimate(nu_j, dist, corruption[i])
                     : corrupt_estimate(nu_j, broadcast_failed[j] != 0, dist, corruption[i].noise);
        }
        received(static_cast<Eigen::Index>(j)) = nu_j;
        messages.push_back({graph.weights(i, j), nu_j, states[j].avg1, states[j].avg2});
        nbr_nus.push_back(nu_j);
        nbr_weights.push_back(graph.weights(i, j));
        nbr_positions.push_back(positions[j]);
      }

      const double l2 = lambda2_local(self, config.gains);
      const Vec grad =
          lambda2_gradient_local(self.nu, nbr_nus, positions[i], nbr_positions, nbr_weights, sigma);
      const Vec u_c = connectivity_control(i, l2, grad, config.control);

      Vec u_d = config.mode == Mode::rendezvous
                    ? rendezvous_control(i, positions, graph, config.control.consensus)
                    : formation_control(i, positions, graph, l2, self.nu, received, formation,
                                        config.control, sigma);
      u_d += drift;
      const Vec u_obst = obstacle_avoidance(positions[i], field, obstacle_rng[i]);

      Vec u_c_applied;
      if (config.filter_target == FilterTarget::connectivity) {
        u_c_applied = filters[i].step(u_c, dt);
        applied[i] = u_c_applied + u_d + u_obst;
      } else {
        u_c_applied = u_c;
        applied[i] = filters[i].step(u_c + u_d + u_obst, dt);
      }

      next_states[i] = estimator_step(self, messages, config.gains, dt);

      rec.lambda2_est[i] = l2;
      rec.nu_est[i] = self.nu;
      rec.u_c_agent_norms[i] = u_c_applied.norm();
      uc_sq += u_c_applied.squaredNorm();
    }
    rec.u_c_norm = std::sqrt(uc_sq);
    result.trace.push_back(std::move(rec));

    if (k == steps) break;
    for (std::size_t i = 0; i < n; ++i) positions[i] = integrate_step(positions[i], applied[i], dt);
    states = next_states;
    if (!state_finite(positions, states)) {
      result.aborted = true;
      std::ostringstream msg;
      msg << "non-finite state after step " << k << " (t=" << result.trace.back().t << ")";
      result.diagnostic = msg.str();
      if (result.outcome == Outcome::maintained) {
        result.outcome = Outcome::lost;
        result.t_loss = result.trace.back().t;
      }
      break;
    }
  }
  return result;
}

RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  RunResult result = simulate(config, options);
  if (!config.reference_run || !config.disturbance.active()) return result;

  attach_reference(result, simulate(undisturbed(config)));
  return result;
}

ScenarioConfig undisturbed(const ScenarioConfig& config) {
  ScenarioConfig twin = config;
  twin.disturbance.p_fail = 0.0;
  twin.disturbance.eta = 0.0;
  return twin;
}

void attach_reference(RunResult& result, const RunResult& reference) {
  for (std::size_t k = 0; k < result.trace.size(); ++k) {
    result.trace[k].lambda2_bar = k < reference.trace.size()
                                      ? reference.trace[k].lambda2_true
                                      : std::numeric_limits<double>::quiet_NaN();
  }
}

std::vector<BatchItem> batch_run(const ScenarioConfig& config, std::span<const std::uint64_t> seeds,
                                 unsigned workers) {
  if (seeds.empty()) throw ConfigError("batch_run needs at least one seed");
  std::vector<BatchItem> items(seeds.size());
  for (std::size_t k = 0; k < seeds.size(); ++k) items[k].seed = seeds[k];

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(seeds.size()));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < items.size(); k = next++) {
      try {
        items[k].result = run_scenario(config.with_seed(items[k].seed));
      } catch (const std::exception& e) {
        items[k].error = e.what();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  pool.clear();
  return items;
}

}  // namespace connmaint
