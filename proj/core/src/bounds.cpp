#include "plearn/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "plearn/parallel.hpp"
#include "plearn/random.hpp"
#include "plearn/simgen.hpp"

namespace plearn {

namespace {

double exact_value(const PomdpModel& m, const PolicyTree& f, int horizon, const PlannerCaps& caps) {
  return evaluate_policy_exact(m, f, horizon, caps).value;
}

PolicyTree random_policy(Rng& rng, int horizon, int num_obs, int num_actions) {
  PolicyTree f(horizon, num_obs);
  for (std::size_t k = 0; k < f.num_slots(); ++k)
    f.set_slot(k, static_cast<int>(uniform01(rng) * num_actions));
  return f;
}

void check_config(const BoundsConfig& c) {
  if (c.theorem != 1 && c.theorem != 2) throw std::invalid_argument("theorem must be 1 or 2");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (c.horizon < 1 || c.trials < 1) throw std::invalid_argument("horizon and trials must be >= 1");
  if (c.num_states < 1 || c.num_actions < 1 || c.num_observations < 1)
    throw std::invalid_argument("model sizes must be >= 1");
  if (c.random_policies < 0) throw std::invalid_argument("random_policies must be >= 0");
  if (c.alpha_override && !(*c.alpha_override >= 0.0 && *c.alpha_override < 1.0))
    throw std::invalid_argument("alpha override must lie in [0, 1)");
}

double plan_value_checked(const PomdpModel& m, const BoundsConfig& c, PolicyTree& out, bool& checked) {
  const PlanResult dp = solve_optimal_dp(m, c.horizon, c.caps);
  out = dp.policy;
  const double slots = static_cast<double>(dp.policy.num_slots());
  if (std::pow(static_cast<double>(c.num_actions), slots) <= c.enum_check_trees) {
    const PlanResult en = solve_optimal_enum(m, c.horizon, c.caps);
    if (std::abs(en.value - dp.value) > 1e-9) {
      std::ostringstream os;
      os.precision(17);
      os << "backward induction value " << dp.value << " disagrees with exhaustive search " << en.value;
      throw std::logic_error(os.str());
    }
    checked = true;
  }
  return dp.value;
}

BoundReport run(const BoundsConfig& c) {
  check_config(c);
  BoundReport report;
  report.theorem = c.theorem;
  report.epsilon = c.epsilon;
  report.alpha = c.alpha_override ? *c.alpha_override
                                  : alpha_for_epsilon(c.epsilon, c.horizon, c.num_states, c.r_max, c.theorem);
  report.trials.resize(static_cast<std::size_t>(c.trials));
  parallel_for(report.trials.size(), c.threads, [&](std::size_t i) {
    Rng rng = substream(c.seed, i);
    const PomdpModel m = random_pomdp(c.num_states, c.num_actions, c.num_observations, c.r_max, rng());
    const PomdpModel mbar = perturb_model(m, report.alpha, rng());
    TrialRecord rec;
    rec.trial = static_cast<int>(i);
    rec.alpha_used = report.alpha;
    rec.alpha_measured = alpha_distance(m, mbar).value();
    PolicyTree f(c.horizon, c.num_observations);
    PolicyTree g(c.horizon, c.num_observations);
    bool checked_f = false, checked_g = false;
    plan_value_checked(mbar, c, f, checked_f);
    plan_value_checked(m, c, g, checked_g);
    // both sides go through the same exact evaluator so identical trees give identical values
    const double vg = exact_value(m, g, c.horizon, c.caps);
    rec.enum_checked = checked_f && checked_g;
    auto add = [&](std::string name, double v_true, double v_other) {
      rec.policies.push_back({std::move(name), v_true, v_other, std::abs(v_true - v_other)});
    };
    if (c.theorem == 1) {
      add("optimal_on_perturbed", exact_value(m, f, c.horizon, c.caps), exact_value(mbar, f, c.horizon, c.caps));
      add("optimal_on_true", vg, exact_value(mbar, g, c.horizon, c.caps));
      for (int k = 0; k < c.random_policies; ++k) {
        const PolicyTree r = random_policy(rng, c.horizon, c.num_observations, c.num_actions);
        add("random_" + std::to_string(k), exact_value(m, r, c.horizon, c.caps),
            exact_value(mbar, r, c.horizon, c.caps));
      }
    } else {
      const double vf = exact_value(m, f, c.horizon, c.caps);
      add("optimal_on_true_vs_perturbed", vg, vf);
      rec.sandwich_ok = vf <= vg + 1e-9;
    }
    const auto worst = std::max_element(rec.policies.begin(), rec.policies.end(),
                                        [](const PolicyGap& a, const PolicyGap& b) { return a.gap < b.gap; });
    rec.value_true_policy = worst->value_true;
    rec.value_learned_policy = worst->value_other;
    rec.gap = worst->gap;
    report.trials[i] = std::move(rec);
  });
  for (const auto& t : report.trials) {
    report.max_gap = std::max(report.max_gap, t.gap);
    if (!t.sandwich_ok) ++report.sandwich_violations;
  }
  report.slack = report.max_gap > 0.0 ? c.epsilon / report.max_gap : std::numeric_limits<double>::infinity();
  report.pass = report.max_gap <= c.epsilon && report.sandwich_violations == 0;
  return report;
}

}  // namespace

PomdpModel perturb_model(const PomdpModel& model, double alpha, std::uint64_t seed) {
  const auto bad = validate_model(model);
  if (!bad.empty()) throw std::invalid_argument("invalid model: " + bad.front().to_string());
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
  PomdpModel out = model;
  if (alpha == 0.0) return out;
  Rng rng(seed);
  const int n = static_cast<int>(model.num_states());
  for (auto& t : out.transition) {
    for (int s = 0; s < n; ++s) {
      const Vector p = t.row(s).transpose();
      const Vector dir = dirichlet_symmetric(rng, n, 1.0) - p;
      const double u = alpha * (1.0 - uniform01(rng));
      const double reach = dir.cwiseAbs().maxCoeff();
      if (!(reach > 0.0)) continue;
      // shave a few ulps so rounding can never push the move past alpha
      const double step = std::min(1.0, u / reach) * (1.0 - 1e-12);
      t.row(s) = (p + step * dir).cwiseMax(0.0).cwiseMin(1.0).transpose();
    }
  }
  return out;
}

double alpha_for_epsilon(double epsilon, int horizon, int num_states, double r_max, int theorem) {
  if (!(epsilon > 0.0) || horizon < 1 || num_states < 1 || !(r_max > 0.0))
    throw std::domain_error("epsilon, horizon, N and r_max must be positive");
  if (theorem != 1 && theorem != 2) throw std::domain_error("theorem must be 1 or 2");
  const double alpha =
      epsilon / ((theorem == 2 ? 2.0 : 1.0) * horizon * horizon * num_states * r_max);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream os;
    os << "alpha = " << alpha << " is outside (0, 1)";
    throw std::domain_error(os.str());
  }
  return alpha;
}

BoundReport verify_theorem1(const BoundsConfig& config) {
  BoundsConfig c = config;
  c.theorem = 1;
  return run(c);
}

BoundReport verify_theorem2(const BoundsConfig& config) {
  BoundsConfig c = config;
  c.theorem = 2;
  return run(c);
}

BoundReport verify_bounds(const BoundsConfig& config) { return run(config); }

}  // namespace plearn
