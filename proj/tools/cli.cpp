#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pipeline.hpp"
#include "plearn/io.hpp"

namespace plearn::cli {

namespace {

namespace fs = std::filesystem;

/// A failed checked condition; maps to exit code 2.
struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Typed JSON value for a resolved option string.
Json typed(const std::string& s) {
  if (s.empty()) return nullptr;
  try {
    Json j = Json::parse(s);
    if (j.is_number() || j.is_boolean()) return j;
  } catch (const Json::exception&) {
  }
  return s;
}

std::string json_scalar_to_arg(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

/// Every long option of the subcommand with its effective value.
Json resolved_config(const CLI::App& app) {
  Json cfg = Json::object();
  for (const CLI::Option* opt : app.get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || names.front() == "help" || names.front() == "config") continue;
    if (opt->get_type_size() == 0) {
      cfg[names.front()] = opt->count() > 0;
      continue;
    }
    std::string value;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      for (std::size_t i = 0; i < res.size(); ++i) value += (i ? " " : "") + res[i];
    } else {
      value = opt->get_default_str();
    }
    cfg[names.front()] = typed(value);
  }
  return cfg;
}

Json envelope(const std::string& command, const CLI::App& app, std::uint64_t seed) {
  return {{"tool", "plearn"}, {"version", PLEARN_VERSION}, {"command", command},
          {"seed", seed}, {"config", resolved_config(app)}};
}

void ensure_parent(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_json(const std::string& path, const Json& j) {
  ensure_parent(path);
  write_text_file(path, j.dump(2) + "\n");
}

std::string fixed(double x, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

/// Merges `--config file.json` into argv: keys become `--key value` unless the
/// flag is already on the command line (flags override the file).
std::vector<std::string> expand_config(std::vector<std::string> args) {
  if (args.empty()) return args;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw ParseError(path, e.what());
  }
  // accept both a bare config object and a recorded output envelope
  if (j.contains("config") && j["config"].is_object()) j = j["config"];
  if (!j.is_object()) throw ParseError(path, "config must be a JSON object");
  auto given = [&](const std::string& key) {
    for (const auto& a : args)
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    return false;
  };
  std::vector<std::string> extra;
  for (const auto& [key, value] : j.items()) {
    if (given(key) || value.is_null()) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back("--" + key);
      continue;
    }
    if (value.is_object() || value.is_array()) throw ParseError(path + ": " + key, "expected a scalar");
    extra.push_back("--" + key);
    extra.push_back(json_scalar_to_arg(value));
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

GroundTruthScenario load_scenario(const std::string& path) {
  if (path.empty() || path == "builtin") return driver_like_scenario();
  Json j = Json::parse(read_text_file(path));
  if (j.contains("scenario")) j = j["scenario"];
  return scenario_from_json(j);
}

std::vector<GaussianEmission> emissions_from_posterior(const Json& j) {
  const Json& src = j.contains("posterior") ? j["posterior"] : j;
  if (!src.contains("map") || !src["map"].contains("emissions"))
    throw ParseError("map.emissions", "missing field");
  std::vector<GaussianEmission> out;
  const Json& em = src["map"]["emissions"];
  for (std::size_t i = 0; i < em.size(); ++i)
    out.push_back(emission_from_json(em[i], "map.emissions[" + std::to_string(i) + "]"));
  return out;
}

struct Command {
  CLI::App* app;
  std::function<int()> body;
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"plearn: learn POMDP models from multivariate time series", "plearn"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::map<std::string, Command> commands;
  int threads = 1;
  std::string config_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON file with option values (flags override it)");
    sub->add_option("--threads", threads, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  };

  // gen-data
  std::string scenario_path;
  int sequences = 4, length = 500;
  std::uint64_t seed = 0;
  std::string out_path;
  {
    auto* sub = app.add_subcommand("gen-data", "simulate continuous trajectories from a ground-truth scenario");
    add_common(sub);
    sub->add_option("--scenario", scenario_path, "scenario JSON ('builtin' or empty: bundled driver-like scenario)");
    sub->add_option("--sequences", sequences)->check(CLI::PositiveNumber);
    sub->add_option("--length", length)->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed);
    sub->add_option("--out", out_path, "output directory")->required();
    commands["gen-data"] = {sub, [&, sub] {
      const auto scenario = load_scenario(scenario_path);
      const auto data = simulate_continuous(scenario, sequences, length, seed, threads);
      fs::create_directories(out_path);
      write_text_file((fs::path(out_path) / "series.csv").string(), series_to_csv(data));
      Json truth = envelope("gen-data", *sub, seed);
      truth["scenario"] = scenario_to_json(scenario);
      write_json((fs::path(out_path) / "truth.json").string(), truth);
      out << "wrote " << data.size() << " sequences x " << length << " samples to " << out_path << "\n";
      return 0;
    }};
  }

  // learn-states
  std::string data_path, labels_out;
  int sweeps = 1000, burn_in = -1, ar_order = 0, proposals = 4, window = 15, thin = 1;
  std::optional<double> mass, gamma, kappa;
  bool check_lj = false;
  {
    auto* sub = app.add_subcommand("learn-states", "discover hidden states with the beta-process HMM sampler");
    add_common(sub);
    sub->add_option("--data", data_path, "time-series CSV")->required();
    sub->add_option("--sweeps", sweeps)->check(CLI::PositiveNumber);
    sub->add_option("--burn-in", burn_in, "negative: half of the sweeps");
    sub->add_option("--seed", seed);
    sub->add_option("--ar-order", ar_order)->check(CLI::NonNegativeNumber);
    sub->add_option("--mass", mass, "beta-process mass c");
    sub->add_option("--gamma", gamma, "transition Dirichlet concentration");
    sub->add_option("--kappa", kappa, "sticky self-transition bias (default 25 gamma)");
    sub->add_option("--proposals", proposals, "birth/death proposals per sequence and sweep")->check(CLI::NonNegativeNumber);
    sub->add_option("--window", window, "block length of the birth proposal")->check(CLI::PositiveNumber);
    sub->add_option("--thin", thin)->check(CLI::PositiveNumber);
    sub->add_flag("--check-log-joint", check_lj, "recompute the log joint from scratch every sweep");
    sub->add_option("--out", out_path, "posterior JSON")->required();
    sub->add_option("--labels-out", labels_out, "MAP labels as CSV");
    commands["learn-states"] = {sub, [&, sub] {
      const Dataset data = series_from_csv(read_text_file(data_path));
      BpHmmHyperparams hyper = default_hyperparams(data, ar_order);
      if (mass) hyper.mass = *mass;
      if (gamma) {
        hyper.gamma = *gamma;
        if (!kappa) hyper.kappa = 25.0 * *gamma;
      }
      if (kappa) hyper.kappa = *kappa;
      FitConfig fc;
      fc.sweeps = sweeps;
      fc.burn_in = burn_in;
      fc.seed = seed;
      fc.birth_death_proposals_per_sweep = proposals;
      fc.proposal_window = window;
      fc.thin = thin;
      fc.threads = threads;
      fc.check_log_joint = check_lj;
      const FitResult fit = fit_bphmm(data, hyper, fc);
      Json j = envelope("learn-states", *sub, seed);
      j["hyperparameters"] = hyperparams_to_json(hyper);
      j["posterior"] = posterior_to_json(fit, data);
      write_json(out_path, j);
      if (!labels_out.empty()) {
        LabelTable t;
        t.has_actions = !data.empty() && data.front().has_actions();
        for (std::size_t i = 0; i < data.size(); ++i) {
          t.ids.push_back(data[i].id);
          t.sequences.push_back({fit.map.labels[i], t.has_actions ? data[i].actions : std::vector<int>{}});
        }
        ensure_parent(labels_out);
        write_text_file(labels_out, labels_to_csv(t));
      }
      out << "MAP sample: " << fit.map.num_states << " states, log joint " << fixed(fit.map.log_joint, 3)
          << " (sweep " << fit.map.sweep << ")\n";
      return 0;
    }};
  }

  // obs-matrix
  std::string posterior_path;
  long n_mc = 1000000;
  {
    auto* sub = app.add_subcommand("obs-matrix", "Monte Carlo observation matrix of the ML decision rule");
    add_common(sub);
    sub->add_option("--posterior", posterior_path, "posterior JSON from learn-states");
    sub->add_option("--scenario", scenario_path, "use a scenario's true emissions instead");
    sub->add_option("--n-mc", n_mc, "samples per row")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed);
    sub->add_option("--out", out_path, "observation-matrix JSON")->required();
    commands["obs-matrix"] = {sub, [&, sub] {
      std::vector<GaussianEmission> emissions;
      if (!posterior_path.empty())
        emissions = emissions_from_posterior(Json::parse(read_text_file(posterior_path)));
      else if (!scenario_path.empty())
        emissions = load_scenario(scenario_path).emissions;
      else
        throw CLI::ValidationError("obs-matrix", "one of --posterior or --scenario is required");
      const auto m = estimate_observation_matrix(emissions, n_mc, seed, threads);
      Json j = envelope("obs-matrix", *sub, seed);
      j.update(observation_matrix_to_json(m));
      write_json(out_path, j);
      out << "observation matrix " << m.probs.rows() << "x" << m.probs.cols() << ", max std_err "
          << m.std_err.maxCoeff() << "\n";
      return 0;
    }};
  }

  // estimate-trans
  std::string labels_path, model_path, model_out;
  int trans_states = 0, trans_actions = 0;
  double alpha = 0.05, delta = 0.9;
  {
    auto* sub = app.add_subcommand("estimate-trans", "sample-mean transition estimate from labeled sequences");
    add_common(sub);
    sub->add_option("--labels", labels_path, "label CSV with an action column")->required();
    sub->add_option("--states", trans_states, "state count (0: largest label + 1)");
    sub->add_option("--actions", trans_actions, "action count (0: largest action + 1)");
    sub->add_option("--alpha", alpha, "per-entry accuracy for the coverage report");
    sub->add_option("--delta", delta, "per-entry confidence for the coverage report");
    sub->add_option("--model", model_path, "model JSON whose transitions are replaced");
    sub->add_option("--model-out", model_out, "where to write the updated model");
    sub->add_option("--out", out_path, "transition estimate JSON")->required();
    commands["estimate-trans"] = {sub, [&, sub] {
      const LabelTable table = labels_from_csv(read_text_file(labels_path));
      if (!table.has_actions) throw ParseError(labels_path, "label CSV needs an action column");
      int n = trans_states, a = trans_actions;
      for (const auto& s : table.sequences) {
        if (trans_states == 0)
          for (int z : s.states) n = std::max(n, z + 1);
        if (trans_actions == 0)
          for (int x : s.actions) a = std::max(a, x + 1);
      }
      const auto counts = count_transitions(table.sequences, n, a);
      const auto est = estimate_transitions(counts);
      const auto need = required_samples(alpha, delta);
      Json j = envelope("estimate-trans", *sub, 0);
      Json t = Json::array(), c = Json::array(), gaps = Json::array();
      for (int act = 0; act < a; ++act) {
        t.push_back(matrix_to_json(est.transition[static_cast<std::size_t>(act)]));
        Json rows = Json::array();
        for (int s = 0; s < n; ++s) {
          Json row = Json::array();
          for (int s2 = 0; s2 < n; ++s2) row.push_back(counts.count(s, act, s2));
          rows.push_back(row);
        }
        c.push_back(rows);
      }
      for (const auto& g : est.coverage.empty_rows) gaps.push_back({{"state", g.state}, {"action", g.action}});
      j["transition"] = t;
      j["counts"] = c;
      j["coverage"] = {{"empty_rows", gaps},
                       {"min_total", est.coverage.min_total},
                       {"required_samples", need},
                       {"meets_requirement", est.coverage.min_total >= need},
                       {"note", "guarantee holds per (s, a, s') entry; no union bound is applied"}};
      write_json(out_path, j);
      if (!model_path.empty()) {
        PomdpModel m = deserialize_model(read_text_file(model_path));
        if (static_cast<int>(m.num_states()) != n || static_cast<int>(m.num_actions()) != a)
          throw std::invalid_argument("estimate-trans: model shape does not match the labels");
        m.transition = est.transition;
        write_text_file(model_out.empty() ? model_path : model_out, serialize_model(m));
      }
      for (const auto& g : est.coverage.empty_rows)
        err << "warning: no transitions observed from state " << g.state << " under action " << g.action
            << "; row set uniform\n";
      out << "min w(s,a) = " << est.coverage.min_total << ", required " << need << " for alpha=" << alpha
          << " delta=" << delta << " (per entry, no union bound)\n";
      return 0;
    }};
  }

  // sample-size
  bool as_json = false;
  {
    auto* sub = app.add_subcommand("sample-size", "Chernoff sample size for per-entry accuracy alpha at confidence delta");
    sub->add_option("--alpha", alpha)->required();
    sub->add_option("--delta", delta)->required();
    sub->add_flag("--json", as_json);
    commands["sample-size"] = {sub, [&, sub] {
      const auto w = required_samples(alpha, delta);
      const auto floor_w = truncated_samples(alpha, delta);
      if (as_json) {
        Json j = envelope("sample-size", *sub, 0);
        j["required_samples"] = w;
        j["confidence"] = confidence_of(alpha, w);
        j["truncated_samples"] = floor_w;
        j["truncated_confidence"] = confidence_of(alpha, floor_w);
        out << j.dump(2) << "\n";
        return 0;
      }
      out << w << "\n";
      out << "confidence_of(" << alpha << ", " << w << ") = " << fixed(confidence_of(alpha, w), 6) << " >= " << delta
          << "\n";
      if (floor_w != w)
        out << "note: rounding down gives " << floor_w << ", the commonly quoted value, which reaches only "
            << fixed(confidence_of(alpha, floor_w), 9) << " < " << delta << "; " << w
            << " is the smallest integer meeting the bound\n";
      out << "note: the guarantee is per (s, a, s') entry; no union bound over entries or (s, a) pairs\n";
      return 0;
    }};
  }

  // plan
  int horizon = 3;
  std::string solver = "dp";
  {
    auto* sub = app.add_subcommand("plan", "optimal finite-horizon policy tree");
    add_common(sub);
    sub->add_option("--model", model_path)->required();
    sub->add_option("--horizon", horizon)->check(CLI::PositiveNumber);
    sub->add_option("--solver", solver)->check(CLI::IsMember({"dp", "enum"}));
    sub->add_option("--out", out_path, "policy JSON")->required();
    commands["plan"] = {sub, [&, sub] {
      const PomdpModel m = deserialize_model(read_text_file(model_path));
      const PlanResult p = solver == "dp" ? solve_optimal_dp(m, horizon) : solve_optimal_enum(m, horizon, {}, threads);
      Json j = envelope("plan", *sub, 0);
      j["value"] = p.value;
      j["policy"] = policy_to_json(p.policy, m);
      write_json(out_path, j);
      out << "value " << std::setprecision(17) << p.value << "\n";
      return 0;
    }};
  }

  // evaluate
  std::string policy_path;
  std::int64_t episodes = 0;
  {
    auto* sub = app.add_subcommand("evaluate", "exact (and optionally Monte Carlo) value of a policy tree");
    add_common(sub);
    sub->add_option("--model", model_path)->required();
    sub->add_option("--policy", policy_path)->required();
    sub->add_option("--episodes", episodes, "Monte Carlo episodes (0: exact only)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed);
    sub->add_option("--out", out_path, "evaluation report JSON");
    commands["evaluate"] = {sub, [&, sub] {
      const PomdpModel m = deserialize_model(read_text_file(model_path));
      Json pj = Json::parse(read_text_file(policy_path));
      if (pj.contains("policy")) pj = pj["policy"];
      const PolicyTree f = policy_from_json(pj, m);
      const auto ev = evaluate_policy_exact(m, f, f.horizon());
      Json j = envelope("evaluate", *sub, seed);
      j["exact"] = {{"value", ev.value}, {"num_sequences", ev.num_sequences}, {"horizon", ev.horizon}};
      out << "exact value " << std::setprecision(17) << ev.value << " over " << ev.num_sequences << " sequences\n";
      if (episodes > 0) {
        const auto sim = simulate_discrete(m, f, f.horizon(), episodes, seed, threads);
        j["monte_carlo"] = {{"mean", sim.mean}, {"std_err", sim.std_err}, {"episodes", sim.episodes}};
        out << "monte carlo " << sim.mean << " +- " << sim.std_err << " (" << sim.episodes << " episodes)\n";
      }
      if (!out_path.empty()) write_json(out_path, j);
      return 0;
    }};
  }

  // verify-bounds
  int theorem = 1, trials = 100, obs = 2, random_policies = 10;
  double epsilon = 0.5, r_max = 1.0;
  std::optional<double> alpha_override;
  int num_states = 3, num_actions = 2;
  {
    auto* sub = app.add_subcommand("verify-bounds", "check the value-loss bounds on random alpha-approximate models");
    add_common(sub);
    sub->add_option("--theorem", theorem)->check(CLI::IsMember({1, 2}));
    sub->add_option("--epsilon", epsilon);
    sub->add_option("--horizon", horizon)->check(CLI::PositiveNumber);
    sub->add_option("--trials", trials)->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed);
    sub->add_option("--states", num_states)->check(CLI::PositiveNumber);
    sub->add_option("--actions", num_actions)->check(CLI::PositiveNumber);
    sub->add_option("--observations", obs)->check(CLI::PositiveNumber);
    sub->add_option("--r-max", r_max);
    sub->add_option("--random-policies", random_policies)->check(CLI::NonNegativeNumber);
    sub->add_option("--alpha", alpha_override, "override the alpha derived from epsilon");
    sub->add_option("--out", out_path, "bound report JSON");
    commands["verify-bounds"] = {sub, [&, sub] {
      BoundsConfig bc;
      bc.theorem = theorem;
      bc.epsilon = epsilon;
      bc.horizon = horizon;
      bc.trials = trials;
      bc.seed = seed;
      bc.num_states = num_states;
      bc.num_actions = num_actions;
      bc.num_observations = obs;
      bc.r_max = r_max;
      bc.random_policies = random_policies;
      bc.alpha_override = alpha_override;
      bc.threads = threads;
      const BoundReport r = verify_bounds(bc);
      Json j = envelope("verify-bounds", *sub, seed);
      j["report"] = bound_report_to_json(r);
      if (!out_path.empty()) write_json(out_path, j);
      out << (r.pass ? "PASS" : "FAIL") << " theorem " << theorem << ": max gap " << std::setprecision(6) << r.max_gap
          << " vs epsilon " << epsilon << " over " << trials << " trials (alpha " << r.alpha << ", slack "
          << (std::isfinite(r.slack) ? fixed(r.slack, 1) : std::string("inf")) << ")";
      if (theorem == 2) out << ", " << r.sandwich_violations << " ordering violations";
      out << "\n";
      return r.pass ? 0 : 2;
    }};
  }

  // pipeline
  PipelineConfig pc;
  {
    auto* sub = app.add_subcommand("pipeline", "simulate, learn states, build E and T, plan and evaluate");
    add_common(sub);
    sub->add_option("--scenario", scenario_path, "scenario JSON (default: bundled driver-like scenario)");
    sub->add_option("--sequences", pc.sequences)->check(CLI::PositiveNumber);
    sub->add_option("--length", pc.length)->check(CLI::PositiveNumber);
    sub->add_option("--seed", pc.seed);
    sub->add_option("--sweeps", pc.sweeps)->check(CLI::PositiveNumber);
    sub->add_option("--burn-in", pc.burn_in);
    sub->add_option("--ar-order", pc.ar_order)->check(CLI::NonNegativeNumber);
    sub->add_option("--n-mc", pc.n_mc)->check(CLI::PositiveNumber);
    sub->add_option("--horizon", pc.horizon)->check(CLI::PositiveNumber);
    sub->add_option("--solver", pc.solver)->check(CLI::IsMember({"dp", "enum"}));
    sub->add_option("--labels", pc.labels, "state labels for counting: map or truth")
        ->check(CLI::IsMember({"map", "truth"}));
    sub->add_option("--alpha", pc.alpha);
    sub->add_option("--delta", pc.delta);
    sub->add_option("--episodes", pc.episodes)->check(CLI::PositiveNumber);
    sub->add_option("--out", out_path, "output directory")->required();
    commands["pipeline"] = {sub, [&, sub] {
      pc.threads = threads;
      const auto scenario = load_scenario(scenario_path);
      const PipelineResult r = run_pipeline(scenario, pc);
      const fs::path dir(out_path);
      fs::create_directories(dir);
      const Json env = envelope("pipeline", *sub, pc.seed);
      write_text_file((dir / "series.csv").string(), series_to_csv(r.data));
      if (pc.labels == "map") {
        Json post = env;
        post["posterior"] = posterior_to_json(r.fit, r.data);
        write_json((dir / "posterior.json").string(), post);
      }
      Json obsj = env;
      obsj.update(observation_matrix_to_json(r.observation));
      write_json((dir / "obs_matrix.json").string(), obsj);
      Json model = model_to_json(r.model);
      model["run"] = env;
      write_json((dir / "model.json").string(), model);
      Json policy = env;
      policy["value"] = r.plan.value;
      policy["policy"] = policy_to_json(r.plan.policy, r.model);
      write_json((dir / "policy.json").string(), policy);

      Json report = env;
      report["num_states"] = r.model.num_states();
      report["state_map"] = r.state_map;
      report["hamming_error"] = r.hamming_error;
      report["coverage"] = {{"min_total", r.transitions.coverage.min_total},
                            {"required_samples", r.required_samples},
                            {"meets_requirement", r.transitions.coverage.min_total >= r.required_samples},
                            {"empty_rows", r.transitions.coverage.empty_rows.size()}};
      report["transition_error"] = r.transition_error ? Json(*r.transition_error) : Json(nullptr);
      report["model_valid"] = validate_model(r.model).empty();
      report["evaluation"] = {{"exact_value", r.evaluation.value},
                              {"num_sequences", r.evaluation.num_sequences},
                              {"monte_carlo_mean", r.simulation.mean},
                              {"monte_carlo_std_err", r.simulation.std_err},
                              {"episodes", r.simulation.episodes}};
      write_json((dir / "report.json").string(), report);

      out << "states " << r.model.num_states() << ", hamming error " << fixed(r.hamming_error, 4) << ", min w(s,a) "
          << r.transitions.coverage.min_total << " (required " << r.required_samples << ")";
      if (r.transition_error) out << ", max transition error " << fixed(*r.transition_error, 4);
      out << "\npolicy value " << fixed(r.evaluation.value, 6) << " (Monte Carlo " << fixed(r.simulation.mean, 6)
          << " +- " << fixed(r.simulation.std_err, 6) << ")\nwrote " << out_path << "\n";
      return 0;
    }};
  }

  // show-scenario
  {
    auto* sub = app.add_subcommand("show-scenario", "print the bundled driver-like scenario as JSON");
    commands["show-scenario"] = {sub, [&] {
      out << scenario_to_json(driver_like_scenario()).dump(2) << "\n";
      return 0;
    }};
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  for (auto& [name, cmd] : commands) {
    if (!cmd.app->parsed()) continue;
    try {
      return cmd.body();
    } catch (const CheckFailed& e) {
      err << name << ": " << e.what() << "\n";
      return 2;
    } catch (const ValidationError& e) {
      err << name << ": " << e.what() << "\n";
      return 1;
    } catch (const ParseError& e) {
      err << name << ": parse error at " << e.what() << "\n";
      return 1;
    } catch (const CLI::Error& e) {
      err << name << ": " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      err << name << ": " << e.what() << "\n";
      return 1;
    }
  }
  return 1;
}

}  // namespace plearn::cli
