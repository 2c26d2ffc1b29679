#include "plearn/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace plearn {

namespace {

bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

void check_stochastic_rows(const Matrix& m, const std::string& name,
                           std::vector<Violation>& out) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double p = m(r, c);
      if (!(p >= 0.0 && p <= 1.0)) {
        std::ostringstream os;
        os << "entry " << c << " = " << p << " outside [0,1]";
        out.push_back({name, static_cast<long>(r), os.str()});
      }
      sum += p;
    }
    if (!(std::abs(sum - 1.0) <= kProbTolerance)) {
      std::ostringstream os;
      os.precision(17);
      os << "row sums to " << sum;
      out.push_back({name, static_cast<long>(r), os.str()});
    }
  }
}

bool close(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return a.size() == 0 || (a - b).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

bool operator==(const PomdpModel& a, const PomdpModel& b) {
  if (a.states != b.states || a.actions != b.actions || a.observations != b.observations ||
      a.factors != b.factors || a.r_max != b.r_max)
    return false;
  if (a.transition.size() != b.transition.size()) return false;
  for (std::size_t i = 0; i < a.transition.size(); ++i)
    if (!same_matrix(a.transition[i], b.transition[i])) return false;
  return same_matrix(a.observation_fn, b.observation_fn) && same_matrix(a.reward, b.reward) &&
         same_matrix(a.initial_belief, b.initial_belief);
}

std::string Violation::to_string() const {
  std::ostringstream os;
  os << matrix;
  if (row >= 0) os << " row " << row;
  os << ": " << detail;
  return os.str();
}

std::vector<Violation> validate_model(const PomdpModel& model) {
  std::vector<Violation> out;
  const auto n = static_cast<Eigen::Index>(model.num_states());
  const auto na = static_cast<Eigen::Index>(model.num_actions());
  const auto no = static_cast<Eigen::Index>(model.num_observations());

  if (n == 0) out.push_back({"states", -1, "state space is empty"});
  if (na == 0) out.push_back({"actions", -1, "action space is empty"});
  if (no == 0) out.push_back({"observations", -1, "observation space is empty"});

  if (!model.factors.empty()) {
    const auto labels = product_state_labels(model.factors);
    if (labels.size() != model.num_states())
      out.push_back({"factors", -1, "product of factor sizes does not match state count"});
  }

  if (static_cast<Eigen::Index>(model.transition.size()) != na) {
    out.push_back({"transition", -1, "expected one matrix per action"});
  } else {
    for (std::size_t a = 0; a < model.transition.size(); ++a) {
      const Matrix& t = model.transition[a];
      const std::string name = "transition[" + model.actions[a] + "]";
      if (t.rows() != n || t.cols() != n) {
        out.push_back({name, -1, "shape is not N x N"});
        continue;
      }
      check_stochastic_rows(t, name, out);
    }
  }

  if (model.observation_fn.rows() != n || model.observation_fn.cols() != no)
    out.push_back({"observation_fn", -1, "shape is not N x |O|"});
  else
    check_stochastic_rows(model.observation_fn, "observation_fn", out);

  if (!(model.r_max > 0.0)) out.push_back({"r_max", -1, "must be positive"});
  if (model.reward.rows() != n || model.reward.cols() != na) {
    out.push_back({"reward", -1, "shape is not N x |A|"});
  } else {
    for (Eigen::Index s = 0; s < n; ++s)
      for (Eigen::Index a = 0; a < na; ++a)
        if (!(std::abs(model.reward(s, a)) <= model.r_max)) {
          std::ostringstream os;
          os << "|R(s," << a << ")| = " << std::abs(model.reward(s, a)) << " exceeds r_max "
             << model.r_max;
          out.push_back({"reward", static_cast<long>(s), os.str()});
        }
  }

  if (model.initial_belief.size() != n) {
    out.push_back({"initial_belief", -1, "length is not N"});
  } else {
    Matrix row = model.initial_belief.transpose();
    std::vector<Violation> tmp;
    check_stochastic_rows(row, "initial_belief", tmp);
    for (auto& v : tmp) {
      v.row = -1;
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::optional<double> alpha_distance(const PomdpModel& m1, const PomdpModel& m2) {
  constexpr double tol = 1e-12;
  if (m1.states != m2.states || m1.actions != m2.actions || m1.observations != m2.observations)
    return std::nullopt;
  if (!close(m1.observation_fn, m2.observation_fn, tol) || !close(m1.reward, m2.reward, tol) ||
      !close(m1.initial_belief, m2.initial_belief, tol))
    return std::nullopt;
  if (m1.transition.size() != m2.transition.size()) return std::nullopt;
  double d = 0.0;
  for (std::size_t a = 0; a < m1.transition.size(); ++a) {
    const Matrix& t1 = m1.transition[a];
    const Matrix& t2 = m2.transition[a];
    if (t1.rows() != t2.rows() || t1.cols() != t2.cols()) return std::nullopt;
    if (t1.size() > 0) d = std::max(d, (t1 - t2).cwiseAbs().maxCoeff());
  }
  return d;
}

std::vector<std::string> product_state_labels(std::span<const StateFactor> factors) {
  std::vector<std::string> out{""};
  for (std::size_t f = 0; f < factors.size(); ++f) {
    std::vector<std::string> next;
    next.reserve(out.size() * factors[f].labels.size());
    for (const auto& prefix : out)
      for (const auto& label : factors[f].labels)
        next.push_back(f == 0 ? label : prefix + "|" + label);
    out = std::move(next);
  }
  return out;
}

bool operator==(const GaussianEmission& a, const GaussianEmission& b) {
  if (!same_matrix(a.mean, b.mean) || !same_matrix(a.covariance, b.covariance)) return false;
  if (a.ar_coeffs.size() != b.ar_coeffs.size()) return false;
  for (std::size_t j = 0; j < a.ar_coeffs.size(); ++j)
    if (!same_matrix(a.ar_coeffs[j], b.ar_coeffs[j])) return false;
  return true;
}

std::vector<Violation> validate_emission(const GaussianEmission& e,
                                         std::optional<int> expected_ar_order) {
  std::vector<Violation> out;
  const auto n = e.mean.size();
  if (n == 0) out.push_back({"mean", -1, "empty mean vector"});
  if (e.covariance.rows() != n || e.covariance.cols() != n) {
    out.push_back({"covariance", -1, "shape does not match mean"});
    return out;
  }
  if (n > 0) {
    const double asym = (e.covariance - e.covariance.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9) out.push_back({"covariance", -1, "not symmetric"});
    Eigen::SelfAdjointEigenSolver<Matrix> eig(e.covariance, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0))
      out.push_back({"covariance", -1, "not positive definite"});
  }
  for (std::size_t j = 0; j < e.ar_coeffs.size(); ++j)
    if (e.ar_coeffs[j].rows() != n || e.ar_coeffs[j].cols() != n)
      out.push_back({"ar_coeffs", static_cast<long>(j), "lag matrix is not n x n"});
  if (expected_ar_order && e.ar_order() != *expected_ar_order)
    out.push_back({"ar_coeffs", -1, "AR order differs from the model's declared order"});
  return out;
}

bool operator==(const TimeSeries& a, const TimeSeries& b) {
  return a.id == b.id && same_matrix(a.values, b.values) && a.actions == b.actions &&
         a.latent_states == b.latent_states;
}

std::vector<Violation> validate_series(const TimeSeries& s) {
  std::vector<Violation> out;
  const std::string name = "series '" + s.id + "'";
  if (s.length() < 1) out.push_back({name, -1, "needs at least one sample"});
  if (s.has_actions() && static_cast<int>(s.actions.size()) != s.length() - 1)
    out.push_back({name, -1, "actions must have length T-1"});
  if (s.has_latent() && static_cast<int>(s.latent_states.size()) != s.length())
    out.push_back({name, -1, "latent_states must have length T"});
  if (!s.values.allFinite()) out.push_back({name, -1, "non-finite values"});
  return out;
}

int check_dataset(const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("dataset is empty");
  const int n = data.front().dim();
  for (const auto& s : data) {
    auto v = validate_series(s);
    if (!v.empty()) throw std::invalid_argument(v.front().to_string());
    if (s.dim() != n)
      throw std::invalid_argument("dimension mismatch: series '" + s.id + "' has n=" +
                                  std::to_string(s.dim()) + ", expected " + std::to_string(n));
  }
  return n;
}

Belief::Belief(Vector probs) : probs_(std::move(probs)) {
  if (probs_.size() == 0) throw std::invalid_argument("belief over an empty state set");
  if ((probs_.array() < 0.0).any() || (probs_.array() > 1.0).any())
    throw std::invalid_argument("belief entries must lie in [0,1]");
  if (std::abs(probs_.sum() - 1.0) > kProbTolerance)
    throw std::invalid_argument("belief must sum to 1");
}

Belief Belief::uniform(std::size_t n) {
  return Belief(Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
}

Belief Belief::point(std::size_t n, std::size_t s) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
  v(static_cast<Eigen::Index>(s)) = 1.0;
  return Belief(std::move(v));
}

PolicyTree::PolicyTree(int horizon, int num_observations, int default_action)
    : horizon_(horizon), num_obs_(num_observations) {
  if (horizon < 1) throw std::invalid_argument("policy horizon must be >= 1");
  if (num_observations < 1) throw std::invalid_argument("policy needs at least one observation");
  std::size_t width = 1;
  actions_.resize(static_cast<std::size_t>(horizon));
  for (auto& level : actions_) {
    width *= static_cast<std::size_t>(num_observations);
    level.assign(width, default_action);
  }
}

std::size_t PolicyTree::num_slots() const {
  std::size_t total = 0;
  for (const auto& level : actions_) total += level.size();
  return total;
}

std::size_t PolicyTree::history_index(std::span<const int> history) const {
  if (history.empty() || static_cast<int>(history.size()) > horizon_)
    throw std::out_of_range("history length must be in [1, H]");
  std::size_t idx = 0;
  for (int o : history) {
    if (o < 0 || o >= num_obs_) throw std::out_of_range("observation id out of range");
    idx = child_index(idx, o);
  }
  return idx;
}

int PolicyTree::action(std::span<const int> history) const {
  return actions_[history.size() - 1][history_index(history)];
}

int PolicyTree::slot(std::size_t k) const {
  for (const auto& level : actions_) {
    if (k < level.size()) return level[k];
    k -= level.size();
  }
  throw std::out_of_range("policy slot out of range");
}

void PolicyTree::set_slot(std::size_t k, int action) {
  for (auto& level : actions_) {
    if (k < level.size()) {
      level[k] = action;
      return;
    }
    k -= level.size();
  }
  throw std::out_of_range("policy slot out of range");
}

}  // namespace plearn
