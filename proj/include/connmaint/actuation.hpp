#pragma once

// First-order actuator model H(s) = w / (s + w) and single-integrator
// kinematics.

#include "connmaint/types.hpp"

#include <utility>

namespace connmaint {

inline constexpr double kDefaultCutoff = 10.0;  // rad/s

struct FilterState {
  Vec y;
  double cutoff = kDefaultCutoff;
};

// Exact zero-order-hold discretization:
//   y <- exp(-w dt) y + (1 - exp(-w dt)) u
std::pair<FilterState, Vec> lowpass_step(const FilterState& state, const Vec& u, double dt);

// Stateful wrapper. ideal() bypasses filtering altogether.
class LowPassFilter {
 public:
  LowPassFilter(std::size_t dim, double cutoff, bool ideal = false);

  const Vec& step(const Vec& u, double dt);
  const Vec& output() const { return state_.y; }
  bool ideal() const { return ideal_; }

 private:
  FilterState state_;
  bool ideal_;
};

// Explicit Euler: p + dt u
Position integrate_step(const Position& p, const Vec& u, double dt);

}  // namespace connmaint
