#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "plearn/model.hpp"

namespace plearn {

/// An exact computation would exceed its configured size limit.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The observation has probability zero under the current belief.
class ImpossibleObservation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct PlannerCaps {
  /// (N |O|)^H state-observation sequences per exact evaluation
  double sequences = 1e7;
  /// |A|^(policy slots) candidate trees for exhaustive search
  double trees = 1e6;
  /// |O|^H observation histories for backward induction
  double histories = 1e7;
};

struct EvaluationResult {
  double value = 0.0;
  std::int64_t num_sequences = 0;
  int horizon = 0;
  /// Total probability of all enumerated sequences (1 up to rounding).
  double probability_mass = 0.0;
};

/// Expected H-step reward by enumerating every (s_1, o_1, ..., s_H, o_H).
///
/// Step t: the system is in s_t, emits o_t ~ E(.|s_t), plays
/// a_t = policy(o_1..o_t), collects R(s_t, a_t), then moves to s_{t+1} ~ T(.|s_t, a_t).
EvaluationResult evaluate_policy_exact(const PomdpModel& model, const PolicyTree& policy, int horizon,
                                       const PlannerCaps& caps = {});

struct PlanResult {
  PolicyTree policy;
  double value = 0.0;
};

/// Exhaustive search over every policy tree; the first tree in lexicographic
/// slot order wins ties. Trees are split across `threads` workers and reduced in order.
PlanResult solve_optimal_enum(const PomdpModel& model, int horizon, const PlannerCaps& caps = {},
                              int threads = 1);

/// Backward induction over observation histories. Unreachable histories get action 0.
PlanResult solve_optimal_dp(const PomdpModel& model, int horizon, const PlannerCaps& caps = {});

/// b'(s') proportional to E(o|s') sum_s T(s'|s,a) b(s).
Belief belief_update(const Belief& belief, int action, int observation, const PomdpModel& model);

/// b'(s) proportional to E(o|s) b(s): conditioning on the first observation.
Belief condition_on_observation(const Belief& belief, int observation, const PomdpModel& model);

/// Throws std::invalid_argument unless the tree matches the model and horizon.
void check_policy(const PomdpModel& model, const PolicyTree& policy, int horizon);

}  // namespace plearn
