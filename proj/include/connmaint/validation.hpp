#pragma once

// Self-checks run by `connmaint validate`: each group compares a library
// routine against an independent computation and reports pass/fail.

#include "connmaint/graph.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace connmaint {

struct CheckResult {
  std::string group;
  bool passed = false;
  std::string detail;
};

using GradientFn = std::function<GradientResult(std::span<const Position>, const CommGraph&,
                                                const Eigen::VectorXd&, double, bool)>;

// Analytic lambda2 gradient against central differences of the oracle.
// `gradient` defaults to lambda2_gradient_exact; tests inject broken variants.
CheckResult check_gradient(const GradientFn& gradient = {}, std::uint64_t seed = 7,
                           int cases = 20);

// Step response, DC gain and the -3 dB point of the actuator filter.
CheckResult check_filter(double cutoff = 10.0);

// Failure frequency, noise variance and the system failure rate formula.
CheckResult check_disturbance(std::uint64_t seed = 11);

// Eigensolver on graphs with known spectra.
CheckResult check_spectral();

std::vector<CheckResult> run_validation();

}  // namespace connmaint
