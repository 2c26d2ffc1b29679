#include "plearn/simgen.hpp"

#include <cmath>
#include <stdexcept>

#include "plearn/gaussian.hpp"
#include "plearn/parallel.hpp"
#include "plearn/planner.hpp"
#include "plearn/random.hpp"

namespace plearn {

namespace {

/// Inverse-CDF draw from a row whose cumulative sums are precomputed.
int draw_from_cumulative(Rng& rng, const double* cum, int n) {
  const double u = uniform01(rng) * cum[n - 1];
  for (int k = 0; k < n - 1; ++k)
    if (u < cum[k]) return k;
  return n - 1;
}

std::vector<double> cumulative_rows(const Matrix& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      acc += m(r, c);
      out[static_cast<std::size_t>(r * m.cols() + c)] = acc;
    }
  }
  return out;
}

std::vector<std::string> numbered(const char* prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

struct Welford {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const Welford& o) {
    if (o.n == 0) return;
    const auto total = n + o.n;
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.n) / static_cast<double>(total);
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / static_cast<double>(total);
    n = total;
  }
};

}  // namespace

int GroundTruthScenario::human_states() const {
  return pomdp.factors.empty() ? static_cast<int>(pomdp.num_states())
                               : static_cast<int>(pomdp.factors.front().labels.size());
}

int GroundTruthScenario::rest_states() const {
  const int h = human_states();
  return h == 0 ? 0 : static_cast<int>(pomdp.num_states()) / h;
}

std::vector<Violation> validate_scenario(const GroundTruthScenario& s) {
  auto out = validate_model(s.pomdp);
  if (static_cast<int>(s.emissions.size()) != s.human_states())
    out.push_back({"emissions", -1, "count " + std::to_string(s.emissions.size()) +
                                        " differs from the human state count " + std::to_string(s.human_states())});
  for (std::size_t h = 0; h < s.emissions.size(); ++h) {
    for (auto v : validate_emission(s.emissions[h])) {
      v.row = static_cast<long>(h);
      out.push_back(v);
    }
    if (s.emissions[h].dim() != s.emissions.front().dim())
      out.push_back({"emissions", static_cast<long>(h), "dimension differs from emission 0"});
  }
  if (s.logging_policy.size() != 0) {
    if (s.logging_policy.size() != static_cast<Eigen::Index>(s.pomdp.num_actions()))
      out.push_back({"logging_policy", -1, "length differs from the action count"});
    else if ((s.logging_policy.array() < 0.0).any() || std::abs(s.logging_policy.sum() - 1.0) > kProbTolerance)
      out.push_back({"logging_policy", -1, "not a probability vector"});
  }
  return out;
}

PomdpModel random_pomdp(int num_states, int num_actions, int num_observations, double r_max,
                        std::uint64_t seed) {
  if (num_states < 1 || num_actions < 1 || num_observations < 1)
    throw std::invalid_argument("random_pomdp: sizes must be >= 1");
  if (!(r_max > 0.0)) throw std::invalid_argument("random_pomdp: r_max must be positive");
  Rng rng(seed);
  PomdpModel m;
  m.states = numbered("s", num_states);
  m.actions = numbered("a", num_actions);
  m.observations = numbered("o", num_observations);
  for (int a = 0; a < num_actions; ++a) {
    Matrix t(num_states, num_states);
    for (int s = 0; s < num_states; ++s) t.row(s) = dirichlet_symmetric(rng, num_states, 1.0).transpose();
    m.transition.push_back(std::move(t));
  }
  m.observation_fn.resize(num_states, num_observations);
  for (int s = 0; s < num_states; ++s)
    m.observation_fn.row(s) = dirichlet_symmetric(rng, num_observations, 1.0).transpose();
  m.reward.resize(num_states, num_actions);
  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < num_actions; ++a) m.reward(s, a) = r_max * uniform01(rng);
  m.r_max = r_max;
  m.initial_belief = Vector::Constant(num_states, 1.0 / num_states);
  return m;
}

Dataset simulate_continuous(const GroundTruthScenario& scenario, int num_sequences, int length,
                            std::uint64_t seed, int threads) {
  const auto bad = validate_scenario(scenario);
  if (!bad.empty()) throw std::invalid_argument("invalid scenario: " + bad.front().to_string());
  if (num_sequences < 0 || length < 1) throw std::invalid_argument("need length >= 1 and K >= 0");
  const auto& m = scenario.pomdp;
  const int n_states = static_cast<int>(m.num_states());
  const int n_actions = static_cast<int>(m.num_actions());
  const int rest = scenario.rest_states();
  const Vector policy = scenario.logging_policy.size() ? scenario.logging_policy
                                                       : Vector::Constant(n_actions, 1.0 / n_actions);
  std::vector<std::vector<double>> trans_cum;
  for (const auto& t : m.transition) trans_cum.push_back(cumulative_rows(t));
  const auto init_cum = cumulative_rows(m.initial_belief.transpose());
  const auto policy_cum = cumulative_rows(policy.transpose());
  std::vector<Matrix> chols;
  for (const auto& e : scenario.emissions) chols.push_back(Eigen::LLT<Matrix>(e.covariance).matrixL());
  const int dim = scenario.emissions.front().dim();

  Dataset out(static_cast<std::size_t>(num_sequences));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    Rng rng = substream(seed, i);
    TimeSeries s;
    s.id = "seq" + std::to_string(i);
    s.values.resize(length, dim);
    int state = draw_from_cumulative(rng, init_cum.data(), n_states);
    for (int t = 0; t < length; ++t) {
      const int h = state / rest;
      const auto& e = scenario.emissions[static_cast<std::size_t>(h)];
      Vector mu = e.mean;
      if (t >= e.ar_order())
        for (int j = 0; j < e.ar_order(); ++j) mu += e.ar_coeffs[j] * s.values.row(t - 1 - j).transpose();
      s.values.row(t) = (mu + chols[static_cast<std::size_t>(h)] * standard_normal_vector(rng, dim)).transpose();
      s.latent_states.push_back(h);
      if (t + 1 == length) break;
      const int a = draw_from_cumulative(rng, policy_cum.data(), n_actions);
      s.actions.push_back(a);
      state = draw_from_cumulative(rng, trans_cum[static_cast<std::size_t>(a)].data() + state * n_states, n_states);
    }
    out[i] = std::move(s);
  });
  return out;
}

SimulationResult simulate_discrete(const PomdpModel& model, const PolicyTree& policy, int horizon,
                                   std::int64_t episodes, std::uint64_t seed, int threads) {
  const auto bad = validate_model(model);
  if (!bad.empty()) throw std::invalid_argument("invalid model: " + bad.front().to_string());
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  check_policy(model, policy, horizon);
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  const int n = static_cast<int>(model.num_states());
  const int n_obs = static_cast<int>(model.num_observations());
  std::vector<std::vector<double>> trans_cum;
  for (const auto& t : model.transition) trans_cum.push_back(cumulative_rows(t));
  const auto obs_cum = cumulative_rows(model.observation_fn);
  const auto init_cum = cumulative_rows(model.initial_belief.transpose());

  constexpr std::int64_t kChunk = 65536;
  const auto chunks = static_cast<std::size_t>((episodes + kChunk - 1) / kChunk);
  std::vector<Welford> acc(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    Rng rng = substream(seed, c);
    const std::int64_t begin = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t end = std::min(episodes, begin + kChunk);
    for (std::int64_t e = begin; e < end; ++e) {
      int s = draw_from_cumulative(rng, init_cum.data(), n);
      std::size_t h = 0;
      double total = 0.0;
      for (int t = 0; t < horizon; ++t) {
        const int o = draw_from_cumulative(rng, obs_cum.data() + s * n_obs, n_obs);
        h = t == 0 ? static_cast<std::size_t>(o) : policy.child_index(h, o);
        const int a = policy.actions_at(t)[h];
        total += model.reward(s, a);
        if (t + 1 < horizon) s = draw_from_cumulative(rng, trans_cum[static_cast<std::size_t>(a)].data() + s * n, n);
      }
      acc[c].add(total);
    }
  });
  Welford all;
  for (const auto& w : acc) all.merge(w);
  SimulationResult out;
  out.episodes = all.n;
  out.mean = all.mean;
  out.std_err = all.n > 1 ? std::sqrt(std::max(0.0, all.m2) / static_cast<double>(all.n - 1) / static_cast<double>(all.n)) : 0.0;
  return out;
}

GroundTruthScenario driver_like_scenario() {
  GroundTruthScenario s;
  auto& m = s.pomdp;
  m.states = {"steady", "drifting", "distracted"};
  m.actions = {"observe", "alert"};
  m.observations = m.states;
  Matrix keep(3, 3), alert(3, 3);
  keep << 0.95, 0.025, 0.025,
          0.025, 0.95, 0.025,
          0.025, 0.025, 0.95;
  alert << 0.90, 0.02, 0.08,
           0.08, 0.90, 0.02,
           0.02, 0.08, 0.90;
  m.transition = {keep, alert};
  m.observation_fn = Matrix::Identity(3, 3);
  m.reward.resize(3, 2);
  m.reward << 1.0, 0.2,
              0.3, 0.6,
              -0.5, 0.8;
  m.r_max = 1.0;
  m.initial_belief = Vector::Constant(3, 1.0 / 3.0);
  const double side = 6.0;
  const Vector centers[3] = {Vector::Zero(2), (Vector(2) << side, 0.0).finished(),
                             (Vector(2) << side / 2, side * std::sqrt(3.0) / 2).finished()};
  for (const auto& c : centers) {
    GaussianEmission e;
    e.mean = c;
    e.covariance = Matrix::Identity(2, 2);
    s.emissions.push_back(e);
  }
  return s;
}

}  // namespace plearn
