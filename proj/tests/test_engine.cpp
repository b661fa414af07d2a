#include "connmaint/analysis.hpp"
#include "connmaint/engine.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace connmaint;

namespace {

ScenarioConfig short_config(double horizon = 0.3) {
  ScenarioConfig c;
  c.horizon = horizon;
  return c;
}

std::string trace_text(const RunResult& r) {
  std::ostringstream os;
  write_trace_csv(os, r);
  return os.str();
}

}  // namespace

TEST_CASE("records cover every step including the initial state") {
  const ScenarioConfig c = short_config();
  const RunResult r = simulate(c);
  REQUIRE(r.trace.size() == c.steps() + 1);
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    CHECK(r.trace[k].t == doctest::Approx(k * c.dt).epsilon(1e-12));
    CHECK(r.trace[k].positions.size() == c.n_agents);
    CHECK(r.trace[k].lambda2_est.size() == c.n_agents);
  }
  CHECK(r.obstacles.size() == c.obstacles.count);
}

TEST_CASE("initial layout is connected and inside the box") {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const ScenarioConfig c = short_config().with_seed(s);
    const auto p = sample_initial_positions(c);
    for (const auto& x : p) {
      CHECK(std::abs(x(0) - c.init_center_x) <= 0.5 * c.init_box);
      CHECK(std::abs(x(1) - c.init_center_y) <= 0.5 * c.init_box);
    }
    CHECK(spectral_oracle(build_graph(p, c.range)).lambda2 > kConnectedTolerance);
  }
}

TEST_CASE("same seed gives the same trace, a different seed does not") {
  ScenarioConfig c = short_config();
  c.disturbance.p_fail = 0.2;
  c.disturbance.eta = 0.5;
  const std::string a = trace_text(run_scenario(c));
  CHECK(a == trace_text(run_scenario(c)));
  CHECK(a != trace_text(run_scenario(c.with_seed(2))));
}

TEST_CASE("the oracle cannot steer the agents") {
  const ScenarioConfig c = short_config();
  RunOptions opts;
  opts.oracle_hook = [](SpectralResult& s) { s.lambda2 = -1.0; };
  const RunResult plain = simulate(c);
  const RunResult hooked = simulate(c, opts);
  REQUIRE(plain.trace.size() == hooked.trace.size());
  for (std::size_t k = 0; k < plain.trace.size(); ++k) {
    for (std::size_t i = 0; i < c.n_agents; ++i)
      CHECK((plain.trace[k].positions[i] - hooked.trace[k].positions[i]).norm() == 0.0);
    CHECK(plain.trace[k].lambda2_est == hooked.trace[k].lambda2_est);
  }
  CHECK(hooked.trace.back().lambda2_true == -1.0);
}

TEST_CASE("reference column") {
  SUBCASE("equals the true value without disturbances") {
    const RunResult r = run_scenario(short_config());
    for (const auto& rec : r.trace) CHECK(rec.lambda2_bar == rec.lambda2_true);
  }
  SUBCASE("follows the undisturbed twin") {
    ScenarioConfig c = short_config();
    c.disturbance.eta = 0.5;
    const RunResult r = run_scenario(c);
    const RunResult twin = simulate(undisturbed(c));
    REQUIRE(r.trace.size() == twin.trace.size());
    for (std::size_t k = 0; k < r.trace.size(); ++k) CHECK(r.trace[k].lambda2_bar == twin.trace[k].lambda2_true);
    CHECK(undisturbed(c).disturbance.eta == 0.0);
    CHECK(undisturbed(c).seed == c.seed);
  }
}

TEST_CASE("two-agent rendezvous closes the gap") {
  ScenarioConfig c;
  c.n_agents = 2;
  c.mode = Mode::rendezvous;
  c.drift = Vec::Zero(2);
  c.obstacles.count = 0;
  c.horizon = 1.0;
  const RunResult r = simulate(c);
  const auto gap = [&](std::size_t k) { return (r.trace[k].positions[0] - r.trace[k].positions[1]).norm(); };
  for (std::size_t k = 100; k < r.trace.size(); k += 100) CHECK(gap(k) <= gap(k - 100));
  CHECK(gap(r.trace.size() - 1) < 0.5 * gap(0));
  CHECK(r.outcome == Outcome::maintained);
}

TEST_CASE("undisturbed formation keeps connectivity") {
  const RunResult r = run_scenario(ScenarioConfig{});
  CHECK(r.outcome == Outcome::maintained);
  CHECK_FALSE(r.aborted);
  for (const auto& rec : r.trace) CHECK(rec.connected);
  CHECK(r.trace.back().t == doctest::Approx(5.0));
}

TEST_CASE("batch runs come back in seed order and match single runs") {
  const ScenarioConfig c = short_config(0.1);
  const std::vector<std::uint64_t> seeds{5, 2, 9};
  const auto items = batch_run(c, seeds, 3);
  REQUIRE(items.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(items[k].seed == seeds[k]);
    REQUIRE(items[k].result.has_value());
    CHECK(trace_text(*items[k].result) == trace_text(run_scenario(c.with_seed(seeds[k]))));
  }
}

TEST_CASE("invalid scenarios are refused") {
  ScenarioConfig c;
  c.dt = 0.0;
  CHECK_THROWS_AS(simulate(c), ConfigError);
  c = {};
  c.drift = Vec::Zero(3);
  CHECK_THROWS_AS(simulate(c), ConfigError);
  c = {};
  c.init_box = 40.0;
  c.max_init_retries = 3;
  CHECK_THROWS(sample_initial_positions(c));
}
