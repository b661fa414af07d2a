#include "connmaint/actuation.hpp"

#include <cmath>

namespace connmaint {

std::pair<FilterState, Vec> lowpass_step(const FilterState& state, const Vec& u, double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("lowpass_step: dt must be positive");
  if (!(state.cutoff > 0.0)) throw InvalidParameter("lowpass_step: cutoff must be positive");
  if (state.y.size() != u.size()) throw InvalidParameter("lowpass_step: dimension mismatch");
  const double decay = std::exp(-state.cutoff * dt);
  FilterState next{decay * state.y + (1.0 - decay) * u, state.cutoff};
  Vec out = next.y;
  return {std::move(next), std::move(out)};
}

LowPassFilter::LowPassFilter(std::size_t dim, double cutoff, bool ideal)
    : state_{Vec::Zero(static_cast<Eigen::Index>(dim)), cutoff}, ideal_(ideal) {
  if (!(cutoff > 0.0)) throw InvalidParameter("low-pass cutoff must be positive");
}

const Vec& LowPassFilter::step(const Vec& u, double dt) {
  if (ideal_) {
    state_.y = u;
    return state_.y;
  }
  auto [next, out] = lowpass_step(state_, u, dt);
  state_ = std::move(next);
  return state_.y;
}

Position integrate_step(const Position& p, const Vec& u, double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("integrate_step: dt must be positive");
  if (p.size() != u.size()) throw InvalidParameter("integrate_step: dimension mismatch");
  return p + dt * u;
}

}  // namespace connmaint
