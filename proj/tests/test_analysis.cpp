#include "connmaint/analysis.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

using namespace connmaint;

namespace {

std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
      acc += x[t] * std::polar(1.0, ang);
    }
    out[k] = acc;
  }
  return out;
}

std::vector<double> random_series(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

// Hand-built trace with known extrema and estimate errors.
RunResult fixture() {
  RunResult r;
  r.config.n_agents = 2;
  r.config.dt = 0.5;
  const double l2[] = {2.0, 1.5, 0.7, 1.1};
  const double bar[] = {2.0, 1.4, 1.0, 1.0};
  for (int k = 0; k < 4; ++k) {
    TraceRecord rec;
    rec.t = 0.5 * k;
    rec.lambda2_true = l2[k];
    rec.lambda2_bar = bar[k];
    rec.lambda2_est = {l2[k] + 0.1 * k, l2[k] - 0.05};
    rec.nu_est = {0.5, -0.5};
    rec.u_c_norm = 1.0;
    r.trace.push_back(rec);
  }
  r.trace[3].estimates_valid = false;
  r.trace[3].lambda2_est = {100.0, 100.0};
  return r;
}

}  // namespace

TEST_CASE("dft agrees with the direct sum") {
  for (std::size_t n : {1u, 2u, 7u, 16u, 45u}) {
    const auto x = random_series(n, n);
    const auto fast = dft(x);
    const auto slow = naive_dft(x);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(fast[k] - slow[k]) < 1e-10);
  }
}

TEST_CASE("inverse dft round trip and Parseval") {
  const auto x = random_series(101, 3);
  const auto X = dft(x);
  const auto back = inverse_dft(X);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(back[k] == doctest::Approx(x[k]).epsilon(1e-12));
  const auto s = spectrum(x, 1e-3);
  CHECK(s.spectral_energy == doctest::Approx(s.time_energy).epsilon(1e-12));
}

TEST_CASE("a sinusoid on a bin shows its amplitude at its frequency") {
  const double dt = 1e-3, f0 = 25.0, amp = 3.0;
  std::vector<double> x(1000);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = 0.5 + amp * std::sin(2.0 * std::numbers::pi * f0 * dt * k);
  const auto s = spectrum(x, dt);
  REQUIRE(s.freqs.size() == 501);
  CHECK(s.freqs[25] == doctest::Approx(25.0));
  CHECK(s.magnitude[25] == doctest::Approx(amp).epsilon(1e-9));
  CHECK(s.magnitude[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(s.magnitude[24] < 1e-9);
  // DC counts in the denominator: 1000 * 0.25 vs 1000 * 9 / 2
  CHECK(s.hf_fraction == doctest::Approx(4.5 / 4.75).epsilon(1e-9));
}

TEST_CASE("high-frequency share thresholds strictly above the cutoff") {
  const double dt = 1e-2;
  std::vector<double> low(100), high(100);
  for (std::size_t k = 0; k < 100; ++k) {
    low[k] = std::cos(2.0 * std::numbers::pi * 10.0 * dt * k);
    high[k] = std::cos(2.0 * std::numbers::pi * 11.0 * dt * k);
  }
  CHECK(spectrum(low, dt, 10.0).hf_fraction < 1e-20);
  CHECK(spectrum(high, dt, 10.0).hf_fraction == doctest::Approx(1.0));
  CHECK(spectrum(std::vector<double>(10, 0.0), dt).hf_fraction == 0.0);
}

TEST_CASE("spectrum input checks") {
  const std::vector<double> t{0.0, 0.1, 0.2, 0.35}, v{1, 2, 3, 4};
  CHECK_THROWS_AS(spectrum_from_times(t, v), InvalidParameter);
  const std::vector<double> t_ok{0.0, 0.1, 0.2, 0.3};
  CHECK_NOTHROW(spectrum_from_times(t_ok, v));
  CHECK_THROWS_AS(spectrum_from_times(t_ok, std::vector<double>{1.0}), InvalidParameter);
  CHECK_THROWS_AS(spectrum(std::vector<double>{1.0}, 0.1), InvalidParameter);
}

TEST_CASE("metrics on a hand-built trace") {
  const RunResult r = fixture();
  const RunMetrics m = compute_metrics(r);
  CHECK(m.lambda2_min == 0.7);
  CHECK(m.t_min == 1.0);
  CHECK(m.xi == doctest::Approx(0.2));  // the invalid last record is skipped
  CHECK(m.xi_bar == doctest::Approx(0.3));
  // lambda2_tilde with nu = (0.5, -0.5): (100/15)(1 - 0.25)
  const double tilde = (100.0 / 15.0) * 0.75;
  CHECK(lambda2_tilde(r.trace[0].nu_est, r.config.gains) == doctest::Approx(tilde));
  CHECK(m.xi_prime == doctest::Approx(tilde - (0.7 - 0.05)));
  CHECK(compute_metrics(r, nullptr, 0.6).xi == doctest::Approx(0.2));
  CHECK(compute_metrics(r, nullptr, 1.1).xi == 0.0);
  CHECK(m.hf_fraction == 0.0);  // constant effort is all DC

  RunResult ref = r;
  for (auto& rec : ref.trace) rec.lambda2_true += 0.25;
  CHECK(compute_metrics(r, &ref).xi_bar == doctest::Approx(0.25));
}

TEST_CASE("sweep summary") {
  std::map<CellKey, CellInput> cells;
  RunMetrics a, b;
  a.lambda2_min = 1.0;
  a.xi = 0.2;
  b.outcome = Outcome::lost;
  b.lambda2_min = 0.0;
  b.xi = 0.4;
  cells[{0.2, 0.0}] = {2, {a, b}};
  cells[{0.1, 0.5}] = {3, {a}};
  const auto rows = sweep_summary(cells);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].key.p_fail == 0.1);
  CHECK_FALSE(rows[0].complete);
  CHECK(rows[0].expected == 3);
  CHECK(rows[1].complete);
  CHECK(rows[1].maintenance_rate == 0.5);
  CHECK(rows[1].mean_lambda2_min == 0.5);
  CHECK(rows[1].mean_xi == doctest::Approx(0.3));

  std::ostringstream os;
  write_summary_csv(os, rows);
  CHECK(os.str().rfind("p_fail,eta,runs,expected,maintained,", 0) == 0);
  CHECK(os.str().find("\n0.20000000000000001,0,2,2,1,0.5,") != std::string::npos);
}

TEST_CASE("trace CSV layout and reader") {
  RunResult r = fixture();
  for (auto& rec : r.trace) rec.positions = {Position::Zero(2), Position::Ones(2)};
  r.trace[2].u_c_norm = 0.1;
  std::ostringstream os;
  write_trace_csv(os, r);
  const std::string text = os.str();
  CHECK(text.rfind("t,lambda2,lambda2_bar,lambda2_i_1,lambda2_i_2,uc_norm,x_1,y_1,x_2,y_2,connected\n", 0) == 0);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  std::istringstream is(text);
  const auto cols = read_trace_columns(is);
  REQUIRE(cols.t.size() == 4);
  CHECK(cols.t[3] == 1.5);
  CHECK(cols.uc_norm[2] == 0.1);

  std::istringstream bad("t,uc_norm\n0,1\n0.1\n");
  CHECK_THROWS_AS(read_trace_columns(bad), InvalidParameter);
  std::istringstream missing("t,other\n0,1\n");
  CHECK_THROWS_AS(read_trace_columns(missing), InvalidParameter);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 4.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
}
