#pragma once

// Scenario orchestration. One run advances all agents in synchronous rounds:
// every agent reads the estimates published at the start of the round, so
// results do not depend on agent update order.

#include "connmaint/actuation.hpp"
#include "connmaint/control.hpp"
#include "connmaint/disturbance.hpp"
#include "connmaint/estimator.hpp"
#include "connmaint/graph.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace connmaint {

enum class Mode { rendezvous, formation };
enum class FilterTarget { connectivity, total };

std::string_view to_string(Mode mode);
std::string_view to_string(FilterTarget target);

inline constexpr double kConnectedTolerance = 1e-6;

struct ObstacleConfig {
  std::size_t count = 150;
  double influence_radius = 0.4;
  double gain = 0.05;
  double max_push = 3.0;
  // Rectangle (first two coordinates) obstacles are scattered over.
  double band_x_min = 2.5;
  double band_x_max = 5.5;
  double band_y_min = -4.0;
  double band_y_max = 4.0;
};

struct ScenarioConfig {
  std::size_t n_agents = 5;
  std::size_t dim = 2;
  Mode mode = Mode::formation;
  double formation_radius = 1.5;
  Vec drift = Vec::Zero(0);  // common velocity added to u^d; empty means (1, 0, ...)

  double init_box = 1.5;  // side of the square initial positions are drawn from
  double init_center_x = 0.0;
  double init_center_y = 0.0;
  int max_init_retries = 10000;

  ObstacleConfig obstacles;
  RangeParams range = RangeParams::make(4.0, 0.01);
  EstimatorGains gains;
  ControlParams control;
  DisturbanceConfig disturbance;

  bool ideal = false;  // bypass the actuator filter
  double cutoff = kDefaultCutoff;
  FilterTarget filter_target = FilterTarget::connectivity;

  double dt = 1e-3;
  double horizon = 5.0;
  std::uint64_t seed = 1;
  bool reference_run = true;  // twin undisturbed run for lambda2_bar

  void validate() const;
  std::size_t steps() const;
  Vec drift_velocity() const;
  FormationSpec formation() const;
  // Copy with the scenario and disturbance seeds set to s.
  ScenarioConfig with_seed(std::uint64_t s) const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TraceRecord {
  double t = 0.0;
  double lambda2_true = 0.0;
  double lambda2_bar = 0.0;           // undisturbed twin, equals lambda2_true when undisturbed
  std::vector<double> lambda2_est;    // per agent
  std::vector<double> nu_est;         // per agent
  double u_c_norm = 0.0;              // Euclidean norm over all agents' applied u^c
  std::vector<double> u_c_agent_norms;
  PositionList positions;
  bool connected = true;
  bool estimates_valid = true;        // false from the first disconnection on
};

enum class Outcome { maintained, lost };

struct RunResult {
  std::vector<TraceRecord> trace;
  Outcome outcome = Outcome::maintained;
  double t_loss = 0.0;
  bool aborted = false;
  std::string diagnostic;
  PositionList obstacles;
  ScenarioConfig config;
  std::uint64_t seed = 0;
};

struct RunOptions {
  // Observes and may rewrite the oracle result before it is recorded.
  // The oracle never reaches the agents, so this cannot change their motion.
  std::function<void(SpectralResult&)> oracle_hook;
};

// Draws initial positions until the graph is connected.
PositionList sample_initial_positions(const ScenarioConfig& config);
PositionList sample_obstacles(const ScenarioConfig& config);
std::vector<double> sample_initial_estimates(const ScenarioConfig& config);

// Single run without the reference twin.
RunResult simulate(const ScenarioConfig& config, const RunOptions& options = {});

// Full run; fills lambda2_bar from an undisturbed twin when disturbances are on.
RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

// Same scenario with failures and noise switched off.
ScenarioConfig undisturbed(const ScenarioConfig& config);
// Copies the reference run's lambda2 into result's lambda2_bar column.
void attach_reference(RunResult& result, const RunResult& reference);

struct BatchItem {
  std::uint64_t seed = 0;
  std::optional<RunResult> result;
  std::string error;
};

// Independent runs, one per seed, in seed order. workers == 0 uses the
// hardware concurrency. A failing run reports its error without stopping
// the others.
std::vector<BatchItem> batch_run(const ScenarioConfig& config, std::span<const std::uint64_t> seeds,
                                 unsigned workers = 0);

}  // namespace connmaint
