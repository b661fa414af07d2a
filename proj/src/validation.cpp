#include "connmaint/validation.hpp"

#include "connmaint/actuation.hpp"
#include "connmaint/disturbance.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace connmaint {

namespace {

PositionList random_connected_layout(RandomStream& rng, std::size_t n, double box,
                                     const RangeParams& range) {
  for (;;) {
    PositionList p;
    for (std::size_t i = 0; i < n; ++i) {
      Position x(2);
      x << (rng.uniform() - 0.5) * box, (rng.uniform() - 0.5) * box;
      p.push_back(x);
    }
    const SpectralResult s = spectral_oracle(build_graph(p, range));
    if (s.lambda2 > 1e-3 && !s.degenerate &&
        s.all_eigenvalues(2) - s.all_eigenvalues(1) > 1e-2) {
      return p;
    }
  }
}

double lambda2_at(const PositionList& p, const RangeParams& range) {
  return spectral_oracle(build_graph(p, range)).lambda2;
}

}  // namespace

CheckResult check_gradient(const GradientFn& gradient, std::uint64_t seed, int cases) {
  const GradientFn fn = gradient ? gradient : GradientFn(&lambda2_gradient_exact);
  const RangeParams range = RangeParams::make(4.0, 0.01);
  RandomStream rng(seed);
  const double h = 1e-6;
  double worst = 0.0;
  for (int c = 0; c < cases; ++c) {
    PositionList p = random_connected_layout(rng, 5, 4.0, range);
    const CommGraph g = build_graph(p, range);
    const SpectralResult s = spectral_oracle(g);
    const GradientResult analytic = fn(p, g, s.fiedler, range.sigma, s.degenerate);
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (Eigen::Index k = 0; k < p[i].size(); ++k) {
        PositionList plus = p, minus = p;
        plus[i](k) += h;
        minus[i](k) -= h;
        const double fd = (lambda2_at(plus, range) - lambda2_at(minus, range)) / (2.0 * h);
        const double err = std::abs(fd - analytic.per_agent.at(i)(k)) / std::max(1.0, std::abs(fd));
        worst = std::max(worst, err);
      }
    }
  }
  const bool ok = worst < 1e-5;
  return {"gradient", ok,
          fmt::format("{} layouts, worst relative deviation from finite differences {:.3g}", cases,
                      worst)};
}

CheckResult check_filter(double cutoff) {
  std::string detail;
  bool ok = true;

  // Step response sampled on the grid matches 1 - exp(-w t) exactly.
  {
    const double dt = 1e-3;
    LowPassFilter f(1, cutoff);
    double worst = 0.0;
    for (int k = 1; k <= 2000; ++k) {
      const double y = f.step(Vec::Ones(1), dt)(0);
      worst = std::max(worst, std::abs(y - (1.0 - std::exp(-cutoff * k * dt))));
    }
    ok = ok && worst < 1e-12;
    detail += fmt::format("step error {:.2g}", worst);
  }

  // Sinusoid at the cutoff: steady-state amplitude 1/sqrt(2), lag 45 degrees.
  {
    const double dt = 1e-5;
    const double settle = 30.0 / cutoff;
    const double period = 2.0 * std::numbers::pi / cutoff;
    const auto steps = static_cast<long>(std::llround((settle + 4.0 * period) / dt));
    LowPassFilter f(1, cutoff);
    double sc = 0.0, ss = 0.0, cc = 0.0, ys = 0.0, yc = 0.0;
    for (long k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      const double u = std::sin(cutoff * (t + 0.5 * dt));
      const double y = f.step(Vec::Constant(1, u), dt)(0);
      const double te = t + dt;
      if (te < settle) continue;
      const double s = std::sin(cutoff * te), c = std::cos(cutoff * te);
      ss += s * s;
      cc += c * c;
      sc += s * c;
      ys += y * s;
      yc += y * c;
    }
    const double det = ss * cc - sc * sc;
    const double a = (ys * cc - yc * sc) / det;
    const double b = (yc * ss - ys * sc) / det;
    const double gain = std::hypot(a, b);
    const double phase = std::atan2(b, a);
    const double db = 20.0 * std::log10(gain);
    const bool at_cutoff = std::abs(gain - 1.0 / std::sqrt(2.0)) < 1e-3 &&
                           std::abs(phase + std::numbers::pi / 4.0) < 1e-3;
    ok = ok && at_cutoff;
    detail += fmt::format(", |H(j{:g})| = {:.5f} ({:.3f} dB), phase {:.4f} rad", cutoff, gain, db,
                          phase);
  }

  // Constant input passes with unit gain.
  {
    LowPassFilter f(2, cutoff);
    Vec y;
    for (int k = 0; k < 20000; ++k) y = f.step(Vec::Constant(2, 3.0), 1e-3);
    const bool dc = (y.array() - 3.0).abs().maxCoeff() < 1e-9;
    ok = ok && dc;
    detail += dc ? ", unit DC gain" : ", DC gain off";
  }
  return {"filter", ok, detail};
}

CheckResult check_disturbance(std::uint64_t seed) {
  constexpr int draws = 100000;
  bool ok = true;
  std::string detail;

  {
    const double p = 0.3;
    DisturbanceConfig cfg;
    cfg.p_fail = p;
    cfg.nu_default = 1.0;
    CorruptionStreams streams(seed, 0);
    int failures = 0;
    // The true value is far from nu_default, so failures are identifiable.
    for (int k = 0; k < draws; ++k)
      if (corrupt_estimate(-5.0, cfg, streams) == 1.0) ++failures;
    const double rate = static_cast<double>(failures) / draws;
    const double se = std::sqrt(p * (1.0 - p) / draws);
    const bool pass = std::abs(rate - p) < 3.0 * se;
    ok = ok && pass;
    detail += fmt::format("failure rate {:.4f} (p = {}, 3 SE = {:.4f})", rate, p, 3.0 * se);
  }

  for (double eta : {0.1, 0.5, 5.0}) {
    DisturbanceConfig cfg;
    cfg.eta = eta;
    CorruptionStreams streams(seed + 1, 1);
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < draws; ++k) {
      const double z = corrupt_estimate(0.0, cfg, streams);
      sum += z;
      sq += z * z;
    }
    const double mean = sum / draws;
    const double var = (sq - draws * mean * mean) / (draws - 1);
    const bool pass = std::abs(var - eta) < 0.04 * eta;
    ok = ok && pass;
    detail += fmt::format(", var {:.4f} at eta {}", var, eta);
  }

  const bool sys = system_failure_rate(5, 0.2) == 1.0 && system_failure_rate(7, 0.0) == 0.0;
  ok = ok && sys;
  detail += sys ? ", system rate 5 x 0.2 = 1" : ", system rate wrong";
  return {"disturbance", ok, detail};
}

CheckResult check_spectral() {
  bool ok = true;
  std::string detail;
  const auto expect = [&](const char* name, const Eigen::MatrixXd& w, double lambda2) {
    const double got = spectral_oracle(graph_from_weights(w)).lambda2;
    const bool pass = std::abs(got - lambda2) < 1e-10;
    ok = ok && pass;
    if (!detail.empty()) detail += ", ";
    detail += fmt::format("{} {:.12g}", name, got);
  };
  Eigen::MatrixXd k5 = Eigen::MatrixXd::Ones(5, 5) - Eigen::MatrixXd::Identity(5, 5);
  expect("K5", k5, 5.0);
  Eigen::MatrixXd p3 = Eigen::MatrixXd::Zero(3, 3);
  p3(0, 1) = p3(1, 0) = p3(1, 2) = p3(2, 1) = 1.0;
  expect("P3", p3, 1.0);
  Eigen::MatrixXd split = Eigen::MatrixXd::Zero(4, 4);
  split(0, 1) = split(1, 0) = split(2, 3) = split(3, 2) = 1.0;
  expect("2xK2", split, 0.0);
  return {"spectral", ok, detail};
}

std::vector<CheckResult> run_validation() {
  return {check_spectral(), check_gradient(), check_filter(), check_disturbance()};
}

}  // namespace connmaint
