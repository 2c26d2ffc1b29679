#include "pipeline.hpp"

#include <cmath>
#include <stdexcept>

namespace plearn::cli {

namespace {

std::vector<int> flatten_labels(const std::vector<std::vector<int>>& labels) {
  std::vector<int> out;
  for (const auto& z : labels) out.insert(out.end(), z.begin(), z.end());
  return out;
}

}  // namespace

PipelineResult run_pipeline(const GroundTruthScenario& scenario, const PipelineConfig& c) {
  if (scenario.rest_states() != 1)
    throw std::invalid_argument("pipeline: scenario states must be the human states (no extra factors)");
  if (c.labels != "map" && c.labels != "truth") throw std::invalid_argument("labels must be 'map' or 'truth'");
  if (c.solver != "dp" && c.solver != "enum") throw std::invalid_argument("solver must be 'dp' or 'enum'");
  PipelineResult r;
  r.data = simulate_continuous(scenario, c.sequences, c.length, c.seed, c.threads);

  std::vector<std::vector<int>> truth;
  for (const auto& s : r.data) truth.push_back(s.latent_states);

  std::vector<std::vector<int>> labels;
  std::vector<GaussianEmission> emissions;
  if (c.labels == "map") {
    const BpHmmHyperparams hyper = default_hyperparams(r.data, c.ar_order);
    FitConfig fc;
    fc.sweeps = c.sweeps;
    fc.burn_in = c.burn_in;
    fc.seed = c.seed;
    fc.threads = c.threads;
    r.fit = fit_bphmm(r.data, hyper, fc);
    labels = r.fit.map.labels;
    emissions = r.fit.map.emissions;
  } else {
    labels = truth;
    emissions = scenario.emissions;
  }
  const int num_states = static_cast<int>(emissions.size());

  const auto matching = match_states(flatten_labels(labels), flatten_labels(truth));
  r.state_map = matching.permutation;
  r.state_map.resize(static_cast<std::size_t>(num_states), -1);
  r.hamming_error = matching.hamming_error;

  r.observation = estimate_observation_matrix(emissions, c.n_mc, c.seed, c.threads);

  std::vector<LabeledSequence> seqs;
  for (std::size_t i = 0; i < r.data.size(); ++i) seqs.push_back({labels[i], r.data[i].actions});
  const auto& truth_model = scenario.pomdp;
  r.counts = count_transitions(seqs, num_states, static_cast<int>(truth_model.num_actions()));
  r.transitions = estimate_transitions(r.counts);
  r.required_samples = required_samples(c.alpha, c.delta);

  PomdpModel& m = r.model;
  for (int k = 0; k < num_states; ++k) {
    const int t = r.state_map[static_cast<std::size_t>(k)];
    m.states.push_back(t >= 0 ? truth_model.states[static_cast<std::size_t>(t)] + "~z" + std::to_string(k)
                              : "z" + std::to_string(k));
    m.observations.push_back("o" + std::to_string(k));
  }
  m.actions = truth_model.actions;
  m.transition = r.transitions.transition;
  m.observation_fn = r.observation.probs;
  m.reward = Matrix::Zero(num_states, static_cast<Eigen::Index>(m.actions.size()));
  for (int k = 0; k < num_states; ++k) {
    const int t = r.state_map[static_cast<std::size_t>(k)];
    if (t >= 0) m.reward.row(k) = truth_model.reward.row(t);
  }
  m.r_max = truth_model.r_max;
  m.initial_belief = Vector::Constant(num_states, 1.0 / num_states);
  const auto bad = validate_model(m);
  if (!bad.empty()) throw std::logic_error("pipeline produced an invalid model: " + bad.front().to_string());

  bool bijective = num_states == scenario.human_states();
  for (int t : r.state_map) bijective = bijective && t >= 0;
  if (bijective) {
    double err = 0.0;
    for (std::size_t a = 0; a < m.transition.size(); ++a)
      for (int s = 0; s < num_states; ++s)
        for (int s2 = 0; s2 < num_states; ++s2)
          err = std::max(err, std::abs(m.transition[a](s, s2) -
                                       truth_model.transition[a](r.state_map[s], r.state_map[s2])));
    r.transition_error = err;
  }

  r.plan = c.solver == "dp" ? solve_optimal_dp(m, c.horizon) : solve_optimal_enum(m, c.horizon, {}, c.threads);
  r.evaluation = evaluate_policy_exact(m, r.plan.policy, c.horizon);
  r.simulation = simulate_discrete(m, r.plan.policy, c.horizon, c.episodes, c.seed, c.threads);
  return r;
}

}  // namespace plearn::cli
