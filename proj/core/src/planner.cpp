#include "plearn/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "plearn/parallel.hpp"

namespace plearn {

namespace {

void require_valid(const PomdpModel& model) {
  const auto bad = validate_model(model);
  if (!bad.empty()) throw std::invalid_argument("invalid model: " + bad.front().to_string());
}

void require_horizon(int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
}

std::string cap_message(const char* what, double size, double cap) {
  std::ostringstream os;
  os << what << " " << size << " exceeds the cap " << cap;
  return os.str();
}

/// Depth-first sum over sequences; no validation.
struct Enumerator {
  const PomdpModel& m;
  const PolicyTree& f;
  int horizon;
  double value = 0.0;
  double mass = 0.0;

  void visit(int t, int s, double p, std::size_t parent, double reward) {
    const auto num_obs = static_cast<int>(m.num_observations());
    const auto n = static_cast<int>(m.num_states());
    for (int o = 0; o < num_obs; ++o) {
      const double po = p * m.observation_fn(s, o);
      const std::size_t h = t == 0 ? static_cast<std::size_t>(o) : f.child_index(parent, o);
      const int a = f.actions_at(t)[h];
      const double r = reward + m.reward(s, a);
      if (t + 1 == horizon) {
        value += po * r;
        mass += po;
        continue;
      }
      for (int s2 = 0; s2 < n; ++s2) visit(t + 1, s2, po * m.transition[a](s, s2), h, r);
    }
  }

  void run() {
    for (int s = 0; s < static_cast<int>(m.num_states()); ++s) visit(0, s, m.initial_belief(s), 0, 0.0);
  }
};

double enumerate_value(const PomdpModel& m, const PolicyTree& f, int horizon) {
  Enumerator e{m, f, horizon};
  e.run();
  return e.value;
}

/// Fills `tree` below history (depth t, index h) and returns the optimal
/// value of the unnormalized joint `beta` of (s_t, o_1..o_t).
struct Dp {
  const PomdpModel& m;
  int horizon;
  PolicyTree& tree;

  double node(int t, std::size_t h, const Vector& beta) {
    const auto num_actions = static_cast<int>(m.num_actions());
    if (beta.sum() <= 0.0) {
      fill_default(t, h);
      return 0.0;
    }
    int best = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_actions; ++a) {
      const double q = action_value(t, h, beta, a);
      if (q > best_q) {
        best_q = q;
        best = a;
      }
    }
    if (best != num_actions - 1 && t + 1 < horizon) action_value(t, h, beta, best);
    tree.actions_at(t)[h] = best;
    return best_q;
  }

  double action_value(int t, std::size_t h, const Vector& beta, int a) {
    double q = beta.dot(m.reward.col(a));
    if (t + 1 == horizon) return q;
    const Vector alpha = m.transition[a].transpose() * beta;
    for (int o = 0; o < static_cast<int>(m.num_observations()); ++o)
      q += node(t + 1, tree.child_index(h, o), alpha.cwiseProduct(m.observation_fn.col(o)));
    return q;
  }

  void fill_default(int t, std::size_t h) {
    tree.actions_at(t)[h] = 0;
    if (t + 1 == horizon) return;
    for (int o = 0; o < tree.num_observations(); ++o) fill_default(t + 1, tree.child_index(h, o));
  }
};

}  // namespace

void check_policy(const PomdpModel& model, const PolicyTree& policy, int horizon) {
  if (policy.horizon() != horizon)
    throw std::invalid_argument("policy depth " + std::to_string(policy.horizon()) + " != horizon " +
                                std::to_string(horizon));
  if (policy.num_observations() != static_cast<int>(model.num_observations()))
    throw std::invalid_argument("policy observation count does not match the model");
  for (std::size_t k = 0; k < policy.num_slots(); ++k) {
    const int a = policy.slot(k);
    if (a < 0 || a >= static_cast<int>(model.num_actions()))
      throw std::invalid_argument("policy slot " + std::to_string(k) + " has unknown action " + std::to_string(a));
  }
}

EvaluationResult evaluate_policy_exact(const PomdpModel& model, const PolicyTree& policy, int horizon,
                                       const PlannerCaps& caps) {
  require_horizon(horizon);
  require_valid(model);
  check_policy(model, policy, horizon);
  const double count = std::pow(static_cast<double>(model.num_states() * model.num_observations()), horizon);
  if (count > caps.sequences)
    throw CapExceeded(cap_message("exact evaluation over", count, caps.sequences) +
                      " sequences; use Monte Carlo simulation instead");
  Enumerator e{model, policy, horizon};
  e.run();
  if (std::abs(e.mass - 1.0) > kProbTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "sequence probabilities sum to " << e.mass;
    throw std::logic_error(os.str());
  }
  EvaluationResult out;
  out.value = e.value;
  out.num_sequences = static_cast<std::int64_t>(std::llround(count));
  out.horizon = horizon;
  out.probability_mass = e.mass;
  return out;
}

PlanResult solve_optimal_enum(const PomdpModel& model, int horizon, const PlannerCaps& caps, int threads) {
  require_horizon(horizon);
  require_valid(model);
  const PolicyTree shape(horizon, static_cast<int>(model.num_observations()));
  const std::size_t slots = shape.num_slots();
  const auto num_actions = static_cast<std::uint64_t>(model.num_actions());
  const double trees = std::pow(static_cast<double>(num_actions), static_cast<double>(slots));
  if (trees > caps.trees) throw CapExceeded(cap_message("policy search over", trees, caps.trees) + " trees");
  const double sequences =
      std::pow(static_cast<double>(model.num_states() * model.num_observations()), horizon);
  if (sequences > caps.sequences)
    throw CapExceeded(cap_message("exact evaluation over", sequences, caps.sequences) + " sequences");

  const auto total = static_cast<std::uint64_t>(std::llround(trees));
  constexpr std::uint64_t kChunk = 4096;
  const std::uint64_t chunks = (total + kChunk - 1) / kChunk;
  struct Best {
    std::uint64_t index = 0;
    double value = -std::numeric_limits<double>::infinity();
  };
  std::vector<Best> best(chunks);
  // tree index k: slot 0 is the most significant base-|A| digit
  auto decode = [&](std::uint64_t k, PolicyTree& tree) {
    for (std::size_t j = slots; j-- > 0;) {
      tree.set_slot(j, static_cast<int>(k % num_actions));
      k /= num_actions;
    }
  };
  parallel_for(chunks, threads, [&](std::size_t c) {
    PolicyTree tree = shape;
    const std::uint64_t end = std::min<std::uint64_t>(total, (c + 1) * kChunk);
    for (std::uint64_t k = c * kChunk; k < end; ++k) {
      decode(k, tree);
      const double v = enumerate_value(model, tree, horizon);
      if (v > best[c].value) best[c] = {k, v};
    }
  });
  Best winner = best.front();
  for (const auto& b : best)
    if (b.value > winner.value) winner = b;
  PlanResult out{shape, winner.value};
  decode(winner.index, out.policy);
  return out;
}

PlanResult solve_optimal_dp(const PomdpModel& model, int horizon, const PlannerCaps& caps) {
  require_horizon(horizon);
  require_valid(model);
  const double histories = std::pow(static_cast<double>(model.num_observations()), horizon);
  if (histories > caps.histories)
    throw CapExceeded(cap_message("backward induction over", histories, caps.histories) + " histories");
  PlanResult out{PolicyTree(horizon, static_cast<int>(model.num_observations())), 0.0};
  Dp dp{model, horizon, out.policy};
  for (int o = 0; o < static_cast<int>(model.num_observations()); ++o)
    out.value += dp.node(0, static_cast<std::size_t>(o), model.initial_belief.cwiseProduct(model.observation_fn.col(o)));
  return out;
}

Belief condition_on_observation(const Belief& belief, int observation, const PomdpModel& model) {
  if (belief.size() != model.num_states()) throw std::invalid_argument("belief size does not match the model");
  if (observation < 0 || observation >= static_cast<int>(model.num_observations()))
    throw std::invalid_argument("observation id out of range");
  const Vector b = belief.probs().cwiseProduct(model.observation_fn.col(observation));
  const double z = b.sum();
  if (!(z > 0.0))
    throw ImpossibleObservation("observation '" + model.observations[static_cast<std::size_t>(observation)] +
                                "' has probability zero under the belief");
  return Belief(b / z);
}

Belief belief_update(const Belief& belief, int action, int observation, const PomdpModel& model) {
  if (belief.size() != model.num_states()) throw std::invalid_argument("belief size does not match the model");
  if (action < 0 || action >= static_cast<int>(model.num_actions()))
    throw std::invalid_argument("action id out of range");
  const Vector predicted = model.transition[static_cast<std::size_t>(action)].transpose() * belief.probs();
  return condition_on_observation(Belief(predicted / predicted.sum()), observation, model);
}

}  // namespace plearn
