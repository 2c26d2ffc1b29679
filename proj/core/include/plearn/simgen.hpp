#pragma once

#include <cstdint>
#include <vector>

#include "plearn/model.hpp"

namespace plearn {

/// Known POMDP plus the continuous emissions that stand in for sensor data.
///
/// The human factor is the most significant state factor (the whole state
/// when the model is not factored); emissions[h] belongs to human state h.
struct GroundTruthScenario {
  PomdpModel pomdp;
  std::vector<GaussianEmission> emissions;
  /// Action distribution used while collecting data; empty means uniform.
  Vector logging_policy;

  int human_states() const;
  /// Number of flat states per human state.
  int rest_states() const;
};

std::vector<Violation> validate_scenario(const GroundTruthScenario& scenario);

/// Transition and observation rows ~ Dirichlet(1), rewards ~ U[0, r_max], uniform b0.
PomdpModel random_pomdp(int num_states, int num_actions, int num_observations, double r_max,
                        std::uint64_t seed);

/// K trajectories of length T under the logging policy. latent_states holds
/// the human state of every step and actions the logged action between steps.
/// Sequence i uses substream(seed, i).
Dataset simulate_continuous(const GroundTruthScenario& scenario, int num_sequences, int length,
                            std::uint64_t seed, int threads = 1);

struct SimulationResult {
  double mean = 0.0;
  double std_err = 0.0;
  std::int64_t episodes = 0;
};

/// Monte Carlo estimate of the policy's expected H-step reward. Episodes run
/// in fixed chunks of 65536, each on its own substream, so the result is
/// independent of `threads`.
SimulationResult simulate_discrete(const PomdpModel& model, const PolicyTree& policy, int horizon,
                                   std::int64_t episodes, std::uint64_t seed, int threads = 1);

/// Bundled benchmark: 3 human states in 2-D with unit covariance and means
/// 6 apart, sticky action-dependent transitions (self 0.95 / 0.90), 2 actions,
/// identity-like observation of the human state, uniform logging policy.
GroundTruthScenario driver_like_scenario();

}  // namespace plearn
