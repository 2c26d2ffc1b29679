#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace plearn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tolerance used for every "sums to one" check on probability vectors.
inline constexpr double kProbTolerance = 1e-9;

/// One labeled component of a product state space (e.g. human, robot, environment).
struct StateFactor {
  std::string name;
  std::vector<std::string> labels;

  friend bool operator==(const StateFactor&, const StateFactor&) = default;
};

/// Finite POMDP (S, A, O, T, E, R) with a declared reward bound and an initial belief.
///
/// States are stored flat. When `factors` is non-empty the flat index is the
/// row-major product of the factor indices, first factor most significant.
struct PomdpModel {
  std::vector<std::string> states;
  std::vector<std::string> actions;
  std::vector<std::string> observations;
  std::vector<StateFactor> factors;

  /// transition[a](s, s') = T(s'|s,a)
  std::vector<Matrix> transition;
  /// observation_fn(s, o) = E(o|s)
  Matrix observation_fn;
  /// reward(s, a) = R(s,a)
  Matrix reward;
  double r_max = 1.0;
  Vector initial_belief;

  std::size_t num_states() const { return states.size(); }
  std::size_t num_actions() const { return actions.size(); }
  std::size_t num_observations() const { return observations.size(); }

  friend bool operator==(const PomdpModel& a, const PomdpModel& b);
};

/// A single failed invariant. `row` is -1 when the violation is not row specific.
struct Violation {
  std::string matrix;
  long row = -1;
  std::string detail;

  std::string to_string() const;
};

/// Returns every broken PomdpModel invariant; empty means the model is valid.
std::vector<Violation> validate_model(const PomdpModel& model);

/// Largest entrywise transition difference between two comparable models.
///
/// Returns nullopt (incomparable) unless both models share state, action and
/// observation spaces and have identical E, R and b0 (within 1e-12).
std::optional<double> alpha_distance(const PomdpModel& m1, const PomdpModel& m2);

/// Product of the state factors as flat labels, e.g. "phone|lane3|front".
std::vector<std::string> product_state_labels(std::span<const StateFactor> factors);

/// Gaussian (optionally vector-autoregressive) emission of one hidden state.
///
/// With ar_order r the emission is y_t = mean + sum_j ar_coeffs[j] * y_{t-1-j} + e,
/// e ~ N(0, covariance). r = 0 is the plain Gaussian HMM emission N(mean, covariance).
struct GaussianEmission {
  Vector mean;
  Matrix covariance;
  std::vector<Matrix> ar_coeffs;

  int dim() const { return static_cast<int>(mean.size()); }
  int ar_order() const { return static_cast<int>(ar_coeffs.size()); }

  friend bool operator==(const GaussianEmission& a, const GaussianEmission& b);
};

std::vector<Violation> validate_emission(const GaussianEmission& emission,
                                         std::optional<int> expected_ar_order = std::nullopt);

/// One multivariate time series Y^i. values is T x n.
struct TimeSeries {
  std::string id;
  Matrix values;
  /// Actions taken between consecutive samples; empty or length T-1.
  std::vector<int> actions;
  /// Ground-truth state labels (synthetic data only); empty or length T.
  std::vector<int> latent_states;

  int length() const { return static_cast<int>(values.rows()); }
  int dim() const { return static_cast<int>(values.cols()); }
  bool has_actions() const { return !actions.empty(); }
  bool has_latent() const { return !latent_states.empty(); }

  friend bool operator==(const TimeSeries&, const TimeSeries&);
};

using Dataset = std::vector<TimeSeries>;

std::vector<Violation> validate_series(const TimeSeries& series);

/// Throws std::invalid_argument if any series is malformed or dimensions disagree.
int check_dataset(const Dataset& data);

/// Probability vector over states.
class Belief {
 public:
  explicit Belief(Vector probs);
  static Belief uniform(std::size_t n);
  static Belief point(std::size_t n, std::size_t s);

  const Vector& probs() const { return probs_; }
  double operator[](std::size_t s) const { return probs_(static_cast<Eigen::Index>(s)); }
  std::size_t size() const { return static_cast<std::size_t>(probs_.size()); }

 private:
  Vector probs_;
};

/// Depth-H mapping from observation histories to actions.
///
/// actions_at(t) holds one action per observation history of length t+1,
/// indexed in base |O| with the oldest observation most significant. The
/// root is the dummy node carrying b0; it owns no action.
class PolicyTree {
 public:
  PolicyTree(int horizon, int num_observations, int default_action = 0);

  int horizon() const { return horizon_; }
  int num_observations() const { return num_obs_; }

  /// Number of (history, action) slots: sum over t=1..H of |O|^t.
  std::size_t num_slots() const;

  std::size_t num_histories(int depth) const { return actions_[static_cast<std::size_t>(depth)].size(); }
  std::span<int> actions_at(int depth) { return actions_[static_cast<std::size_t>(depth)]; }
  std::span<const int> actions_at(int depth) const { return actions_[static_cast<std::size_t>(depth)]; }

  /// Action after observing the history (length 1..H).
  int action(std::span<const int> history) const;

  /// Index of `history` at depth history.size()-1.
  std::size_t history_index(std::span<const int> history) const;

  /// Child index at depth t+1 of a history index at depth t.
  std::size_t child_index(std::size_t parent, int obs) const {
    return parent * static_cast<std::size_t>(num_obs_) + static_cast<std::size_t>(obs);
  }

  /// Flat slot order: depth-major, history index within depth.
  int slot(std::size_t k) const;
  void set_slot(std::size_t k, int action);

  friend bool operator==(const PolicyTree&, const PolicyTree&) = default;

 private:
  int horizon_;
  int num_obs_;
  std::vector<std::vector<int>> actions_;
};

}  // namespace plearn
