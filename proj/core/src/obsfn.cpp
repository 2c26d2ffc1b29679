#include "plearn/obsfn.hpp"

#include <cmath>
#include <stdexcept>

#include "plearn/parallel.hpp"
#include "plearn/random.hpp"

namespace plearn {

MlDecisionRule::MlDecisionRule(std::span<const GaussianEmission> emissions) {
  if (emissions.empty()) throw std::invalid_argument("ML decision rule needs at least one emission");
  dim_ = emissions.front().dim();
  densities_.reserve(emissions.size());
  for (std::size_t i = 0; i < emissions.size(); ++i) {
    const auto& e = emissions[i];
    if (e.dim() != dim_) throw std::invalid_argument("emissions have different dimensions");
    if (e.ar_order() != 0)
      throw std::invalid_argument("ML decision rule is defined for static (AR order 0) emissions only");
    const auto bad = validate_emission(e, 0);
    if (!bad.empty()) throw std::invalid_argument("emission " + std::to_string(i) + ": " + bad.front().to_string());
    densities_.emplace_back(e.mean, e.covariance);
  }
}

int MlDecisionRule::operator()(const Eigen::Ref<const Vector>& y) const {
  if (y.size() != dim_) throw std::invalid_argument("observation dimension does not match the emissions");
  int best = 0;
  double best_ll = densities_[0](y);
  for (int i = 1; i < num_states(); ++i) {
    const double ll = densities_[static_cast<std::size_t>(i)](y);
    if (ll > best_ll) {
      best_ll = ll;
      best = i;
    }
  }
  return best;
}

int ml_decide(const Vector& y, std::span<const GaussianEmission> emissions) {
  return MlDecisionRule(emissions)(y);
}

ObservationMatrix estimate_observation_matrix(std::span<const GaussianEmission> emissions, long n_mc,
                                              std::uint64_t seed, int threads) {
  if (n_mc < 1) throw std::invalid_argument("n_mc must be >= 1");
  const MlDecisionRule rule(emissions);
  const int l = rule.num_states();
  const int n = rule.dim();
  ObservationMatrix out;
  out.n_mc = n_mc;
  out.seed = seed;
  out.probs = Matrix::Zero(l, l);
  out.std_err = Matrix::Zero(l, l);
  parallel_for(static_cast<std::size_t>(l), threads, [&](std::size_t row) {
    const auto& e = emissions[row];
    const Matrix chol = Eigen::LLT<Matrix>(e.covariance).matrixL();
    Rng rng = substream(seed, row);
    std::vector<long> hits(static_cast<std::size_t>(l), 0);
    Vector z(n), y(n);
    for (long k = 0; k < n_mc; ++k) {
      for (int j = 0; j < n; ++j) z(j) = standard_normal(rng);
      y.noalias() = e.mean + chol * z;
      ++hits[static_cast<std::size_t>(rule(y))];
    }
    const auto r = static_cast<Eigen::Index>(row);
    for (int j = 0; j < l; ++j) {
      const double p = static_cast<double>(hits[static_cast<std::size_t>(j)]) / static_cast<double>(n_mc);
      out.probs(r, j) = p;
      out.std_err(r, j) = std::sqrt(p * (1.0 - p) / static_cast<double>(n_mc));
    }
  });
  return out;
}

std::vector<int> discretize_series(const TimeSeries& series, std::span<const GaussianEmission> emissions) {
  const MlDecisionRule rule(emissions);
  if (series.length() > 0 && series.dim() != rule.dim())
    throw std::invalid_argument("series dimension does not match the emissions");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(series.length()));
  for (int t = 0; t < series.length(); ++t) out.push_back(rule(series.values.row(t).transpose()));
  return out;
}

Matrix lift_observation(const Matrix& human_obs, int rest) {
  if (rest < 1) throw std::invalid_argument("lift_observation: rest must be >= 1");
  const auto h = human_obs.rows();
  const auto o = human_obs.cols();
  Matrix out = Matrix::Zero(h * rest, o * rest);
  for (Eigen::Index a = 0; a < h; ++a)
    for (Eigen::Index b = 0; b < o; ++b)
      for (int k = 0; k < rest; ++k) out(a * rest + k, b * rest + k) = human_obs(a, b);
  return out;
}

}  // namespace plearn
