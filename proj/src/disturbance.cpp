#include "connmaint/disturbance.hpp"

#include "connmaint/types.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace connmaint {

std::string_view to_string(FailureScope scope) {
  return scope == FailureScope::link ? "link" : "broadcast";
}

FailureScope failure_scope_from_string(std::string_view text) {
  if (text == "link") return FailureScope::link;
  if (text == "broadcast") return FailureScope::broadcast;
  throw InvalidParameter("failure scope must be 'link' or 'broadcast', got '" +
                         std::string(text) + "'");
}

void DisturbanceConfig::validate() const {
  if (!(p_fail >= 0.0 && p_fail <= 1.0)) {
    throw InvalidParameter("p_fail must lie in [0,1], got " + std::to_string(p_fail));
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw InvalidParameter("eta must be finite and >= 0, got " + std::to_string(eta));
  }
  if (!std::isfinite(nu_default)) throw InvalidParameter("nu_default must be finite");
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t agent, StreamPurpose purpose) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s = h ^ (agent * 0xD1B54A32D192ED03ULL);
  h = splitmix64(s);
  s = h ^ (static_cast<std::uint64_t>(purpose) * 0xA0761D6478BD642FULL);
  engine_.seed(splitmix64(s));
}

double RandomStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::gaussian() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double corrupt_estimate(double nu_true, bool failed, const DisturbanceConfig& cfg,
                        RandomStream& noise) {
  const double z = std::sqrt(cfg.eta) * noise.gaussian();
  return (failed ? cfg.nu_default : nu_true) + z;
}

double corrupt_estimate(double nu_true, const DisturbanceConfig& cfg, CorruptionStreams& streams) {
  const bool failed = streams.failure.bernoulli(cfg.p_fail);
  return corrupt_estimate(nu_true, failed, cfg, streams.noise);
}

double system_failure_rate(std::size_t n_agents, double p_fail) {
  if (n_agents == 0) throw InvalidParameter("system_failure_rate: N must be >= 1");
  return static_cast<double>(n_agents) * p_fail;
}

}  // namespace connmaint
