#pragma once

#include <span>
#include <vector>

#include "plearn/model.hpp"
#include "plearn/random.hpp"

namespace plearn {

/// Multivariate normal log-density with a cached Cholesky factor.
class GaussianLogDensity {
 public:
  GaussianLogDensity(const Vector& mean, const Matrix& covariance);

  double operator()(const Eigen::Ref<const Vector>& y) const;
  /// Same density at y for an arbitrary location (AR emissions shift the mean per sample).
  double at(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& mean) const;

  const Vector& mean() const { return mean_; }
  /// Lower Cholesky factor of the covariance.
  const Matrix& chol() const { return chol_; }

 private:
  Vector mean_;
  Matrix chol_;
  double log_norm_;
};

/// Regressor x_t = [1, y_{t-1}, ..., y_{t-r}] used by the (AR-)Gaussian emission.
Vector regressor(const Matrix& values, int t, int ar_order);

/// Emission coefficients as one n x (1 + n r) matrix [mean, A_1, ..., A_r].
Matrix coefficient_matrix(const GaussianEmission& e);
GaussianEmission emission_from_coefficients(const Matrix& coeffs, const Matrix& covariance);

/// Log-density of y_t under the emission, given the preceding samples in `values`.
/// Samples with t < r have no complete lag vector and contribute 0.
double emission_log_density(const GaussianEmission& e, const Matrix& values, int t);

/// Matrix-Normal-Inverse-Wishart prior over (B, Sigma):
///   Sigma ~ IW(dof, scale),  B | Sigma ~ MN(mean, Sigma, precision^{-1}).
/// With ar_order 0 the regressor is the constant 1 and this is the
/// Normal-Inverse-Wishart prior with mean m0 and scale k0 = precision(0,0).
struct MniwParams {
  Matrix mean;       // n x d
  Matrix precision;  // d x d, SPD
  double dof = 0.0;
  Matrix scale;      // n x n, SPD

  int dim() const { return static_cast<int>(mean.rows()); }
  int regressor_dim() const { return static_cast<int>(mean.cols()); }
  int ar_order() const { return (regressor_dim() - 1) / std::max(1, dim()); }
};

/// Sufficient statistics of (y, x) pairs for the conjugate update.
struct RegressionStats {
  Matrix syy;  // sum y y'
  Matrix syx;  // sum y x'
  Matrix sxx;  // sum x x'
  double count = 0.0;

  RegressionStats() = default;
  RegressionStats(int n, int d);
  void add(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& x);
  RegressionStats& operator+=(const RegressionStats& other);
  RegressionStats operator-(const RegressionStats& other) const;
};

/// Throws std::invalid_argument when dof <= n-1 or a matrix is not SPD.
void check_mniw(const MniwParams& p);

MniwParams mniw_posterior(const MniwParams& prior, const RegressionStats& stats);

/// Exact draw of (B, Sigma); Sigma is clamped to SPD with an eigenvalue floor
/// of 1e-10 * trace / n.
GaussianEmission draw_mniw(Rng& rng, const MniwParams& p);

/// Joint log-density of an emission under the MNIW distribution.
double mniw_log_density(const MniwParams& p, const GaussianEmission& e);

/// Log multivariate gamma function log Gamma_n(a).
double log_mvgamma(int n, double a);

/// Symmetrize and floor eigenvalues at 1e-10 * trace / n.
Matrix clamp_spd(const Matrix& m);

/// Pooled sample mean / covariance of every row in the dataset.
Vector pooled_mean(std::span<const TimeSeries> data);
Matrix pooled_covariance(std::span<const TimeSeries> data);

}  // namespace plearn
