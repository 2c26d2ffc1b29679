#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "plearn/gaussian.hpp"
#include "plearn/model.hpp"

namespace plearn {

/// Maximum-likelihood classifier over a fixed set of static Gaussian emissions.
/// Each density keeps its Cholesky factor, so repeated decisions are cheap.
class MlDecisionRule {
 public:
  /// Throws std::invalid_argument on an empty set, mixed dimensions, AR
  /// emissions or a non-SPD covariance.
  explicit MlDecisionRule(std::span<const GaussianEmission> emissions);

  /// argmax_i log N(y; mu_i, Sigma_i); ties go to the lowest index.
  int operator()(const Eigen::Ref<const Vector>& y) const;

  int num_states() const { return static_cast<int>(densities_.size()); }
  int dim() const { return dim_; }

 private:
  std::vector<GaussianLogDensity> densities_;
  int dim_;
};

int ml_decide(const Vector& y, std::span<const GaussianEmission> emissions);

struct ObservationMatrix {
  /// probs(i, j) = P(o = j | s = i)
  Matrix probs;
  /// sqrt(p (1 - p) / n_mc), entrywise
  Matrix std_err;
  long n_mc = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo estimate of the probability that a draw from emission i is
/// classified as state j. Row i uses substream(seed, i), so the result does
/// not depend on `threads`.
ObservationMatrix estimate_observation_matrix(std::span<const GaussianEmission> emissions, long n_mc,
                                              std::uint64_t seed, int threads = 1);

/// ML decision for every row of the series.
std::vector<int> discretize_series(const TimeSeries& series, std::span<const GaussianEmission> emissions);

/// Kronecker lift of an observation matrix on the human factor to a product
/// space whose remaining factors (of total size `rest`) are observed exactly.
/// The human factor is the most significant index.
Matrix lift_observation(const Matrix& human_obs, int rest);

}  // namespace plearn
