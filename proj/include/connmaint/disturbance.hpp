#pragma once

// Communication failures and additive white Gaussian noise applied to the
// eigenvector estimates an agent receives from its neighbors.
//
// Randomness: every (agent, purpose) pair owns an independent std::mt19937_64
// stream seeded through SplitMix64. Both algorithms are fully specified, and
// normal variates come from the Box-Muller cosine branch (one variate per two
// uniforms, the sine branch is discarded), so traces reproduce across
// platforms that share an IEEE libm.

#include <cstdint>
#include <random>
#include <string_view>

namespace connmaint {

enum class FailureScope {
  link,       // each received value fails independently
  broadcast,  // a failure hits every receiver of the sender's value
};

std::string_view to_string(FailureScope scope);
FailureScope failure_scope_from_string(std::string_view text);

struct DisturbanceConfig {
  double p_fail = 0.0;
  double eta = 0.0;         // noise variance
  double nu_default = 1.0;  // value substituted on failure
  std::uint64_t seed = 0;
  FailureScope scope = FailureScope::link;

  void validate() const;
  bool active() const { return p_fail > 0.0 || eta > 0.0; }
};

enum class StreamPurpose : std::uint64_t {
  failure = 1,
  noise = 2,
  init = 3,
  obstacle = 4,
  world = 5,
};

std::uint64_t splitmix64(std::uint64_t& state);

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t seed, std::uint64_t agent, StreamPurpose purpose);

  // [0, 1) with 53 random bits.
  double uniform();
  // Standard normal, Box-Muller.
  double gaussian();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

struct CorruptionStreams {
  RandomStream failure;
  RandomStream noise;

  CorruptionStreams(std::uint64_t seed, std::uint64_t agent)
      : failure(seed, agent, StreamPurpose::failure), noise(seed, agent, StreamPurpose::noise) {}
};

// nu_default + Z with probability p_fail, nu_true + Z otherwise,
// Z ~ N(0, eta). Always consumes one Bernoulli and one Gaussian draw.
double corrupt_estimate(double nu_true, const DisturbanceConfig& cfg, CorruptionStreams& streams);

// Same law with an externally decided failure (broadcast scope). Consumes
// one Gaussian draw.
double corrupt_estimate(double nu_true, bool failed, const DisturbanceConfig& cfg,
                        RandomStream& noise);

// Expected failures per interaction across the group: N * p_fail.
double system_failure_rate(std::size_t n_agents, double p_fail);

}  // namespace connmaint
