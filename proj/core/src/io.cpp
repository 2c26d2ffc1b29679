#include "plearn/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace plearn {

namespace {

const Json& field(const Json& j, const std::string& name, const std::string& path) {
  if (!j.is_object()) throw ParseError(path.empty() ? "<root>" : path, "expected an object");
  const auto it = j.find(name);
  if (it == j.end()) throw ParseError(path.empty() ? name : path + "." + name, "missing field");
  return *it;
}

std::string join(const std::string& path, const std::string& name) {
  return path.empty() ? name : path + "." + name;
}

std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "expected a number");
  return j.get<double>();
}

std::vector<std::string> strings(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string()) throw ParseError(at_index(path, i), "expected a string");
    out.push_back(j[i].get<std::string>());
  }
  return out;
}

void renormalize_rows(Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double s = m.row(r).sum();
    const double err = std::abs(s - 1.0);
    if (err > 1e-14 && err <= kProbTolerance && (m.row(r).array() >= 0.0).all()) m.row(r) /= s;
  }
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double x = 0.0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, x);
  if (res.ec != std::errc() || res.ptr != end) throw ParseError(where, "not a number: '" + s + "'");
  return x;
}

int parse_int(const std::string& s, const std::string& where) {
  int x = 0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, x);
  if (res.ec != std::errc() || res.ptr != end) throw ParseError(where, "not an integer: '" + s + "'");
  return x;
}

/// Lines of a CSV document with the header split off.
struct CsvDoc {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;
};

CsvDoc read_csv(const std::string& text) {
  CsvDoc doc;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (doc.header.empty()) {
      doc.header = std::move(cells);
      continue;
    }
    if (cells.size() != doc.header.size())
      throw ParseError("line " + std::to_string(line_no),
                       "expected " + std::to_string(doc.header.size()) + " columns, got " + std::to_string(cells.size()));
    doc.rows.push_back(std::move(cells));
    doc.line_numbers.push_back(line_no);
  }
  if (doc.header.empty()) throw ParseError("line 1", "missing header");
  return doc;
}

/// Groups rows by seq_id (first-appearance order) and checks t = 0, 1, 2, ...
template <class OnRow>
std::vector<std::string> group_rows(const CsvDoc& doc, OnRow&& on_row) {
  std::vector<std::string> ids;
  std::map<std::string, int> next_t;
  std::string current;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& cells = doc.rows[r];
    const std::string where = "line " + std::to_string(doc.line_numbers[r]);
    const std::string& id = cells[0];
    auto it = next_t.find(id);
    if (it == next_t.end()) {
      it = next_t.emplace(id, 0).first;
      ids.push_back(id);
      current = id;
    } else if (id != current) {
      throw ParseError(where, "rows of sequence '" + id + "' are not contiguous");
    }
    const int t = parse_int(cells[1], where);
    if (t != it->second) throw ParseError(where, "expected t = " + std::to_string(it->second));
    ++it->second;
    on_row(ids.size() - 1, cells, where);
  }
  return ids;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error([&] {
        std::string msg = "validation failed:";
        for (const auto& v : violations) msg += "\n  " + v.to_string();
        return msg;
      }()),
      violations_(std::move(violations)) {}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Matrix matrix_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array of rows");
  if (j.empty()) return Matrix(0, 0);
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto rp = at_index(path, r);
    if (!j[r].is_array()) throw ParseError(rp, "expected a row array");
    if (j[r].size() != cols) throw ParseError(rp, "row length differs from row 0");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], at_index(rp, c));
  }
  return m;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], at_index(path, i));
  return v;
}

Json model_to_json(const PomdpModel& m) {
  Json j;
  j["states"] = m.states;
  j["actions"] = m.actions;
  j["observations"] = m.observations;
  if (!m.factors.empty()) {
    Json f = Json::array();
    for (const auto& factor : m.factors) f.push_back({{"name", factor.name}, {"labels", factor.labels}});
    j["factors"] = f;
  }
  Json t = Json::array();
  for (const auto& ta : m.transition) t.push_back(matrix_to_json(ta));
  j["transition"] = t;
  j["observation_fn"] = matrix_to_json(m.observation_fn);
  j["reward"] = matrix_to_json(m.reward);
  j["r_max"] = m.r_max;
  j["initial_belief"] = vector_to_json(m.initial_belief);
  return j;
}

PomdpModel model_from_json(const Json& j) {
  PomdpModel m;
  m.states = strings(field(j, "states", ""), "states");
  m.actions = strings(field(j, "actions", ""), "actions");
  m.observations = strings(field(j, "observations", ""), "observations");
  if (j.contains("factors")) {
    const Json& f = j["factors"];
    if (!f.is_array()) throw ParseError("factors", "expected an array");
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto p = at_index("factors", i);
      const Json& name = field(f[i], "name", p);
      if (!name.is_string()) throw ParseError(join(p, "name"), "expected a string");
      m.factors.push_back({name.get<std::string>(), strings(field(f[i], "labels", p), join(p, "labels"))});
    }
  }
  const Json& t = field(j, "transition", "");
  if (!t.is_array()) throw ParseError("transition", "expected one matrix per action");
  for (std::size_t a = 0; a < t.size(); ++a) m.transition.push_back(matrix_from_json(t[a], at_index("transition", a)));
  m.observation_fn = matrix_from_json(field(j, "observation_fn", ""), "observation_fn");
  m.reward = matrix_from_json(field(j, "reward", ""), "reward");
  m.r_max = number(field(j, "r_max", ""), "r_max");
  m.initial_belief = vector_from_json(field(j, "initial_belief", ""), "initial_belief");

  for (auto& ta : m.transition) renormalize_rows(ta);
  renormalize_rows(m.observation_fn);
  Matrix b = m.initial_belief.transpose();
  renormalize_rows(b);
  m.initial_belief = b.transpose();
  auto bad = validate_model(m);
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return m;
}

std::string serialize_model(const PomdpModel& model) { return model_to_json(model).dump(2) + "\n"; }

PomdpModel deserialize_model(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), e.what());
  }
  return model_from_json(j);
}

Json emission_to_json(const GaussianEmission& e) {
  Json j;
  j["mean"] = vector_to_json(e.mean);
  j["covariance"] = matrix_to_json(e.covariance);
  Json ar = Json::array();
  for (const auto& a : e.ar_coeffs) ar.push_back(matrix_to_json(a));
  j["ar_coeffs"] = ar;
  return j;
}

GaussianEmission emission_from_json(const Json& j, const std::string& path) {
  GaussianEmission e;
  e.mean = vector_from_json(field(j, "mean", path), join(path, "mean"));
  e.covariance = matrix_from_json(field(j, "covariance", path), join(path, "covariance"));
  if (j.contains("ar_coeffs")) {
    const Json& ar = j["ar_coeffs"];
    if (!ar.is_array()) throw ParseError(join(path, "ar_coeffs"), "expected an array of matrices");
    for (std::size_t k = 0; k < ar.size(); ++k)
      e.ar_coeffs.push_back(matrix_from_json(ar[k], at_index(join(path, "ar_coeffs"), k)));
  }
  auto bad = validate_emission(e);
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return e;
}

std::string series_to_csv(const Dataset& data) {
  if (data.empty()) return "seq_id,t\n";
  const int n = data.front().dim();
  bool actions = false, latent = false;
  for (const auto& s : data) {
    actions = actions || s.has_actions();
    latent = latent || s.has_latent();
  }
  std::string out = "seq_id,t";
  for (int k = 1; k <= n; ++k) out += ",y" + std::to_string(k);
  if (actions) out += ",action";
  if (latent) out += ",latent";
  out += "\n";
  for (const auto& s : data) {
    for (int t = 0; t < s.length(); ++t) {
      out += s.id + "," + std::to_string(t);
      for (int k = 0; k < n; ++k) out += "," + format_double(s.values(t, k));
      if (actions) {
        out += ",";
        if (s.has_actions() && t + 1 < s.length()) out += std::to_string(s.actions[static_cast<std::size_t>(t)]);
      }
      if (latent) {
        out += ",";
        if (s.has_latent()) out += std::to_string(s.latent_states[static_cast<std::size_t>(t)]);
      }
      out += "\n";
    }
  }
  return out;
}

Dataset series_from_csv(const std::string& text) {
  const CsvDoc doc = read_csv(text);
  const auto& h = doc.header;
  if (h.size() < 2 || h[0] != "seq_id" || h[1] != "t")
    throw ParseError("line 1", "header must start with seq_id,t");
  int n = 0;
  while (2 + n < static_cast<int>(h.size()) && h[2 + n] == "y" + std::to_string(n + 1)) ++n;
  int col = 2 + n;
  const int action_col = col < static_cast<int>(h.size()) && h[col] == "action" ? col++ : -1;
  const int latent_col = col < static_cast<int>(h.size()) && h[col] == "latent" ? col++ : -1;
  if (col != static_cast<int>(h.size())) throw ParseError("line 1", "unexpected column '" + h[col] + "'");
  if (n == 0) throw ParseError("line 1", "no value columns y1..yn");

  std::vector<std::vector<std::vector<double>>> rows;
  std::vector<std::vector<std::string>> actions, latent;
  auto ids = group_rows(doc, [&](std::size_t seq, const std::vector<std::string>& cells, const std::string& where) {
    if (seq == rows.size()) {
      rows.emplace_back();
      actions.emplace_back();
      latent.emplace_back();
    }
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) y[k] = parse_double(cells[2 + k], where);
    rows[seq].push_back(std::move(y));
    if (action_col >= 0) actions[seq].push_back(cells[action_col]);
    if (latent_col >= 0) latent[seq].push_back(cells[latent_col]);
    (void)where;
  });
  Dataset out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    TimeSeries s;
    s.id = ids[i];
    const auto len = static_cast<Eigen::Index>(rows[i].size());
    s.values.resize(len, n);
    for (Eigen::Index t = 0; t < len; ++t)
      for (int k = 0; k < n; ++k) s.values(t, k) = rows[i][static_cast<std::size_t>(t)][k];
    const std::string where = "sequence " + s.id;
    if (action_col >= 0) {
      bool any = false;
      for (std::size_t t = 0; t < actions[i].size(); ++t) any = any || !actions[i][t].empty();
      if (any) {
        if (!actions[i].back().empty()) throw ParseError(where, "last row must not carry an action");
        for (std::size_t t = 0; t + 1 < actions[i].size(); ++t)
          s.actions.push_back(parse_int(actions[i][t], where + " action t=" + std::to_string(t)));
      }
    }
    if (latent_col >= 0 && !latent[i].front().empty())
      for (std::size_t t = 0; t < latent[i].size(); ++t)
        s.latent_states.push_back(parse_int(latent[i][t], where + " latent t=" + std::to_string(t)));
    auto bad = validate_series(s);
    if (!bad.empty()) throw ValidationError(std::move(bad));
    out.push_back(std::move(s));
  }
  return out;
}

std::string labels_to_csv(const LabelTable& table) {
  std::string out = table.has_actions ? "seq_id,t,label,action\n" : "seq_id,t,label\n";
  for (std::size_t i = 0; i < table.sequences.size(); ++i) {
    const auto& seq = table.sequences[i];
    for (std::size_t t = 0; t < seq.states.size(); ++t) {
      out += table.ids[i] + "," + std::to_string(t) + "," + std::to_string(seq.states[t]);
      if (table.has_actions) {
        out += ",";
        if (t < seq.actions.size()) out += std::to_string(seq.actions[t]);
      }
      out += "\n";
    }
  }
  return out;
}

LabelTable labels_from_csv(const std::string& text) {
  const CsvDoc doc = read_csv(text);
  const auto& h = doc.header;
  const bool with_actions = h.size() == 4 && h[3] == "action";
  if (h.size() < 3 || h[0] != "seq_id" || h[1] != "t" || h[2] != "label" || (h.size() == 4 && !with_actions) ||
      h.size() > 4)
    throw ParseError("line 1", "header must be seq_id,t,label[,action]");
  LabelTable table;
  table.has_actions = with_actions;
  std::vector<std::vector<std::string>> raw_actions;
  table.ids = group_rows(doc, [&](std::size_t seq, const std::vector<std::string>& cells, const std::string& where) {
    if (seq == table.sequences.size()) {
      table.sequences.emplace_back();
      raw_actions.emplace_back();
    }
    const int label = parse_int(cells[2], where);
    if (label < 0) throw ParseError(where, "labels must be nonnegative");
    table.sequences[seq].states.push_back(label);
    if (with_actions) raw_actions[seq].push_back(cells[3]);
  });
  if (with_actions) {
    for (std::size_t i = 0; i < table.sequences.size(); ++i) {
      const auto& a = raw_actions[i];
      for (std::size_t t = 0; t + 1 < a.size(); ++t) {
        const std::string where = "sequence " + table.ids[i] + " action t=" + std::to_string(t);
        const int action = parse_int(a[t], where);
        if (action < 0) throw ParseError(where, "actions must be nonnegative");
        table.sequences[i].actions.push_back(action);
      }
      if (!a.back().empty()) throw ParseError("sequence " + table.ids[i], "last row must not carry an action");
    }
  }
  return table;
}

Json policy_to_json(const PolicyTree& policy, const PomdpModel& model) {
  check_policy(model, policy, policy.horizon());
  std::function<Json(int, std::size_t)> node = [&](int depth, std::size_t h) {
    Json j;
    j["depth"] = depth;
    if (depth > 0) j["action"] = model.actions[static_cast<std::size_t>(policy.actions_at(depth - 1)[h])];
    if (depth < policy.horizon()) {
      Json children = Json::object();
      for (int o = 0; o < policy.num_observations(); ++o) {
        const std::size_t child = depth == 0 ? static_cast<std::size_t>(o) : policy.child_index(h, o);
        children[model.observations[static_cast<std::size_t>(o)]] = node(depth + 1, child);
      }
      j["children"] = children;
    }
    return j;
  };
  Json out;
  out["horizon"] = policy.horizon();
  out["observations"] = model.observations;
  out["actions"] = model.actions;
  out["root"] = node(0, 0);
  return out;
}

PolicyTree policy_from_json(const Json& j, const PomdpModel& model) {
  const Json& hj = field(j, "horizon", "");
  if (!hj.is_number_integer() || hj.get<int>() < 1) throw ParseError("horizon", "expected a positive integer");
  const int horizon = hj.get<int>();
  if (j.contains("observations") && strings(j["observations"], "observations") != model.observations)
    throw ParseError("observations", "do not match the model");
  if (j.contains("actions") && strings(j["actions"], "actions") != model.actions)
    throw ParseError("actions", "do not match the model");
  PolicyTree policy(horizon, static_cast<int>(model.num_observations()));
  std::function<void(const Json&, int, std::size_t, const std::string&)> node =
      [&](const Json& n, int depth, std::size_t h, const std::string& path) {
        if (depth > 0) {
          const Json& a = field(n, "action", path);
          if (!a.is_string()) throw ParseError(join(path, "action"), "expected an action id");
          const auto it = std::find(model.actions.begin(), model.actions.end(), a.get<std::string>());
          if (it == model.actions.end()) throw ParseError(join(path, "action"), "unknown action '" + a.get<std::string>() + "'");
          policy.actions_at(depth - 1)[h] = static_cast<int>(it - model.actions.begin());
        }
        if (depth == horizon) {
          if (n.contains("children") && !n["children"].empty()) throw ParseError(path, "leaf has children");
          return;
        }
        const Json& children = field(n, "children", path);
        if (!children.is_object() || children.size() != model.num_observations())
          throw ParseError(join(path, "children"), "expected one child per observation");
        for (int o = 0; o < static_cast<int>(model.num_observations()); ++o) {
          const auto& name = model.observations[static_cast<std::size_t>(o)];
          const std::string cp = join(join(path, "children"), name);
          if (!children.contains(name)) throw ParseError(cp, "missing child");
          node(children[name], depth + 1, depth == 0 ? static_cast<std::size_t>(o) : policy.child_index(h, o), cp);
        }
      };
  node(field(j, "root", ""), 0, 0, "root");
  return policy;
}

Json sample_to_json(const PosteriorSample& s, const Dataset& data) {
  Json j;
  j["num_states"] = s.num_states;
  j["sweep"] = s.sweep;
  j["log_joint"] = s.log_joint;
  Json em = Json::array();
  for (const auto& e : s.emissions) em.push_back(emission_to_json(e));
  j["emissions"] = em;
  Json feats = Json::object(), labels = Json::object(), rows = Json::object(), active = Json::object();
  for (std::size_t i = 0; i < s.labels.size(); ++i) {
    const auto& id = data[i].id;
    std::vector<int> f;
    for (int k = 0; k < s.num_states; ++k) f.push_back(s.features(static_cast<int>(i), k) ? 1 : 0);
    feats[id] = f;
    labels[id] = s.labels[i];
    active[id] = s.features.active(static_cast<int>(i));
    rows[id] = matrix_to_json(s.trans_rows[i]);
  }
  j["features"] = feats;
  j["active_states"] = active;
  j["trans_rows"] = rows;
  j["labels"] = labels;
  return j;
}

Json posterior_to_json(const FitResult& fit, const Dataset& data) {
  Json j;
  j["num_states_trace"] = fit.num_states_trace;
  j["log_joint_trace"] = fit.log_joint_trace;
  j["retained_samples"] = fit.samples.size();
  auto moves = [](const MoveStats& m) { return Json{{"proposed", m.proposed}, {"accepted", m.accepted}}; };
  j["moves"] = {{"births", moves(fit.births)}, {"deaths", moves(fit.deaths)}, {"flips", moves(fit.flips)}};
  j["map"] = sample_to_json(fit.map, data);
  return j;
}

Json observation_matrix_to_json(const ObservationMatrix& m) {
  return {{"probs", matrix_to_json(m.probs)},
          {"std_err", matrix_to_json(m.std_err)},
          {"n_mc", m.n_mc},
          {"seed", m.seed}};
}

ObservationMatrix observation_matrix_from_json(const Json& j) {
  ObservationMatrix m;
  m.probs = matrix_from_json(field(j, "probs", ""), "probs");
  m.std_err = matrix_from_json(field(j, "std_err", ""), "std_err");
  const Json& n = field(j, "n_mc", "");
  if (!n.is_number_integer()) throw ParseError("n_mc", "expected an integer");
  m.n_mc = n.get<long>();
  const Json& seed = field(j, "seed", "");
  if (!seed.is_number_integer()) throw ParseError("seed", "expected an integer");
  m.seed = seed.get<std::uint64_t>();
  return m;
}

Json scenario_to_json(const GroundTruthScenario& s) {
  Json j;
  j["model"] = model_to_json(s.pomdp);
  Json em = Json::array();
  for (const auto& e : s.emissions) em.push_back(emission_to_json(e));
  j["emissions"] = em;
  if (s.logging_policy.size() > 0) j["logging_policy"] = vector_to_json(s.logging_policy);
  return j;
}

GroundTruthScenario scenario_from_json(const Json& j) {
  GroundTruthScenario s;
  s.pomdp = model_from_json(field(j, "model", ""));
  const Json& em = field(j, "emissions", "");
  if (!em.is_array()) throw ParseError("emissions", "expected an array");
  for (std::size_t i = 0; i < em.size(); ++i) s.emissions.push_back(emission_from_json(em[i], at_index("emissions", i)));
  if (j.contains("logging_policy")) s.logging_policy = vector_from_json(j["logging_policy"], "logging_policy");
  auto bad = validate_scenario(s);
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return s;
}

Json bound_report_to_json(const BoundReport& r) {
  Json trials = Json::array();
  for (const auto& t : r.trials) {
    Json pol = Json::array();
    for (const auto& p : t.policies)
      pol.push_back({{"policy", p.policy}, {"value_true", p.value_true}, {"value_other", p.value_other}, {"gap", p.gap}});
    trials.push_back({{"trial", t.trial},
                      {"alpha_used", t.alpha_used},
                      {"alpha_measured", t.alpha_measured},
                      {"value_true_policy", t.value_true_policy},
                      {"value_learned_policy", t.value_learned_policy},
                      {"gap", t.gap},
                      {"sandwich_ok", t.sandwich_ok},
                      {"enum_checked", t.enum_checked},
                      {"policies", pol}});
  }
  Json j;
  j["theorem"] = r.theorem;
  j["epsilon"] = r.epsilon;
  j["alpha"] = r.alpha;
  j["max_gap"] = r.max_gap;
  j["slack"] = std::isfinite(r.slack) ? Json(r.slack) : Json(nullptr);
  j["sandwich_violations"] = r.sandwich_violations;
  j["pass"] = r.pass;
  j["trials"] = trials;
  return j;
}

Json hyperparams_to_json(const BpHmmHyperparams& h) {
  return {{"mass", h.mass},
          {"gamma", h.gamma},
          {"kappa", h.kappa},
          {"ar_order", h.ar_order},
          {"emission_prior",
           {{"mean", matrix_to_json(h.emission_prior.mean)},
            {"precision", matrix_to_json(h.emission_prior.precision)},
            {"dof", h.emission_prior.dof},
            {"scale", matrix_to_json(h.emission_prior.scale)}}}};
}

}  // namespace plearn
