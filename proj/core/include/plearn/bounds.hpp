#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plearn/model.hpp"
#include "plearn/planner.hpp"

namespace plearn {

/// Copy of `model` whose transition rows are moved by at most alpha entrywise.
///
/// Each row p moves toward a Dirichlet(1) point q: p + t (q - p) with
/// t = min(1, u / max|q - p|), u ~ U(0, alpha]. The result is a convex
/// combination, so it stays on the simplex without clipping.
PomdpModel perturb_model(const PomdpModel& model, double alpha, std::uint64_t seed);

/// epsilon / (H^2 N r_max), halved for the optimal-policy bound. Throws
/// std::domain_error unless the result lies in (0, 1).
double alpha_for_epsilon(double epsilon, int horizon, int num_states, double r_max, int theorem);

struct BoundsConfig {
  /// 1: same policy on both models; 2: each model's own optimal policy.
  int theorem = 1;
  double epsilon = 0.5;
  int horizon = 3;
  int trials = 100;
  std::uint64_t seed = 0;
  int num_states = 3;
  int num_actions = 2;
  int num_observations = 2;
  double r_max = 1.0;
  /// Random policy trees checked per trial in addition to the optimal ones.
  int random_policies = 10;
  /// Overrides the alpha derived from epsilon (e.g. 0 to compare a model with itself).
  std::optional<double> alpha_override;
  /// Optimal policies are cross-checked by exhaustive search when |A|^slots is at most this.
  double enum_check_trees = 4096;
  PlannerCaps caps;
  int threads = 1;
};

struct PolicyGap {
  std::string policy;
  double value_true = 0.0;
  double value_other = 0.0;
  double gap = 0.0;
};

struct TrialRecord {
  int trial = 0;
  double alpha_used = 0.0;
  double alpha_measured = 0.0;
  /// Largest gap of the trial: V^f_M vs V^f_Mbar, or V^g_M vs V^f_M.
  double value_true_policy = 0.0;
  double value_learned_policy = 0.0;
  double gap = 0.0;
  std::vector<PolicyGap> policies;
  bool sandwich_ok = true;
  bool enum_checked = false;
};

struct BoundReport {
  int theorem = 1;
  double epsilon = 0.0;
  double alpha = 0.0;
  std::vector<TrialRecord> trials;
  double max_gap = 0.0;
  /// epsilon / max_gap; infinite when every gap is 0
  double slack = 0.0;
  int sandwich_violations = 0;
  bool pass = false;
};

BoundReport verify_theorem1(const BoundsConfig& config);
BoundReport verify_theorem2(const BoundsConfig& config);
BoundReport verify_bounds(const BoundsConfig& config);

}  // namespace plearn
