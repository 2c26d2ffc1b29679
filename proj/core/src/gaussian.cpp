#include "plearn/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace plearn {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Matrix lower_cholesky(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw std::invalid_argument(std::string(what) + " is not SPD");
  return llt.matrixL();
}

double log_det_from_chol(const Matrix& l) { return 2.0 * l.diagonal().array().log().sum(); }

}  // namespace

GaussianLogDensity::GaussianLogDensity(const Vector& mean, const Matrix& covariance)
    : mean_(mean), chol_(lower_cholesky(covariance, "covariance")) {
  log_norm_ = -0.5 * (static_cast<double>(mean.size()) * kLog2Pi + log_det_from_chol(chol_));
}

double GaussianLogDensity::operator()(const Eigen::Ref<const Vector>& y) const {
  return at(y, mean_);
}

double GaussianLogDensity::at(const Eigen::Ref<const Vector>& y,
                              const Eigen::Ref<const Vector>& mean) const {
  const Vector z = chol_.triangularView<Eigen::Lower>().solve(y - mean);
  return log_norm_ - 0.5 * z.squaredNorm();
}

Vector regressor(const Matrix& values, int t, int ar_order) {
  const auto n = values.cols();
  Vector x(1 + n * ar_order);
  x(0) = 1.0;
  for (int j = 0; j < ar_order; ++j) x.segment(1 + j * n, n) = values.row(t - 1 - j).transpose();
  return x;
}

Matrix coefficient_matrix(const GaussianEmission& e) {
  const int n = e.dim();
  Matrix b(n, 1 + n * e.ar_order());
  b.col(0) = e.mean;
  for (int j = 0; j < e.ar_order(); ++j) b.block(0, 1 + j * n, n, n) = e.ar_coeffs[j];
  return b;
}

GaussianEmission emission_from_coefficients(const Matrix& coeffs, const Matrix& covariance) {
  const auto n = coeffs.rows();
  const auto r = (coeffs.cols() - 1) / n;
  GaussianEmission e;
  e.mean = coeffs.col(0);
  e.covariance = covariance;
  for (Eigen::Index j = 0; j < r; ++j) e.ar_coeffs.push_back(coeffs.block(0, 1 + j * n, n, n));
  return e;
}

double emission_log_density(const GaussianEmission& e, const Matrix& values, int t) {
  const int r = e.ar_order();
  if (t < r) return 0.0;
  const GaussianLogDensity g(e.mean, e.covariance);
  if (r == 0) return g(values.row(t).transpose());
  const Vector mu = coefficient_matrix(e) * regressor(values, t, r);
  return g.at(values.row(t).transpose(), mu);
}

RegressionStats::RegressionStats(int n, int d)
    : syy(Matrix::Zero(n, n)), syx(Matrix::Zero(n, d)), sxx(Matrix::Zero(d, d)) {}

void RegressionStats::add(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& x) {
  syy.noalias() += y * y.transpose();
  syx.noalias() += y * x.transpose();
  sxx.noalias() += x * x.transpose();
  count += 1.0;
}

RegressionStats& RegressionStats::operator+=(const RegressionStats& o) {
  syy += o.syy;
  syx += o.syx;
  sxx += o.sxx;
  count += o.count;
  return *this;
}

RegressionStats RegressionStats::operator-(const RegressionStats& o) const {
  RegressionStats out = *this;
  out.syy -= o.syy;
  out.syx -= o.syx;
  out.sxx -= o.sxx;
  out.count -= o.count;
  return out;
}

void check_mniw(const MniwParams& p) {
  const int n = p.dim();
  if (n < 1) throw std::invalid_argument("emission prior has dimension 0");
  if (p.scale.rows() != n || p.scale.cols() != n)
    throw std::invalid_argument("emission prior scale matrix has the wrong shape");
  if (p.precision.rows() != p.regressor_dim() || p.precision.cols() != p.regressor_dim())
    throw std::invalid_argument("emission prior precision has the wrong shape");
  if (!(p.dof > n - 1)) throw std::invalid_argument("emission prior needs dof > n - 1");
  lower_cholesky(p.scale, "emission prior scale");
  lower_cholesky(p.precision, "emission prior precision");
}

MniwParams mniw_posterior(const MniwParams& prior, const RegressionStats& s) {
  MniwParams post;
  post.precision = prior.precision + s.sxx;
  const Matrix m0k0 = prior.mean * prior.precision;
  const Eigen::LLT<Matrix> llt(post.precision);
  post.mean = llt.solve((m0k0 + s.syx).transpose()).transpose();
  post.dof = prior.dof + s.count;
  Matrix scale = prior.scale + s.syy + m0k0 * prior.mean.transpose() -
                 post.mean * post.precision * post.mean.transpose();
  post.scale = 0.5 * (scale + scale.transpose());
  return post;
}

Matrix clamp_spd(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  const auto n = sym.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const double floor = 1e-10 * std::max(sym.trace(), 0.0) / static_cast<double>(n);
  Vector ev = eig.eigenvalues();
  bool changed = false;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(ev(i) > floor)) {
      ev(i) = floor > 0.0 ? floor : std::numeric_limits<double>::min();
      changed = true;
    }
  if (!changed) return sym;
  Matrix out = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

GaussianEmission draw_mniw(Rng& rng, const MniwParams& p) {
  Matrix scale = p.scale;
  if (Eigen::LLT<Matrix>(scale).info() != Eigen::Success) scale = clamp_spd(scale);
  const Matrix sigma = clamp_spd(inverse_wishart(rng, p.dof, scale));
  const Matrix ls = lower_cholesky(sigma, "drawn covariance");
  const Matrix col_cov = p.precision.llt().solve(Matrix::Identity(p.regressor_dim(), p.regressor_dim()));
  const Matrix lv = lower_cholesky(0.5 * (col_cov + col_cov.transpose()), "column covariance");
  Matrix z(p.dim(), p.regressor_dim());
  for (Eigen::Index c = 0; c < z.cols(); ++c)
    for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, c) = standard_normal(rng);
  const Matrix b = p.mean + ls * z * lv.transpose();
  return emission_from_coefficients(b, sigma);
}

double log_mvgamma(int n, double a) {
  double out = 0.25 * n * (n - 1) * std::log(std::numbers::pi);
  for (int j = 0; j < n; ++j) out += std::lgamma(a - 0.5 * j);
  return out;
}

double mniw_log_density(const MniwParams& p, const GaussianEmission& e) {
  const int n = p.dim();
  const int d = p.regressor_dim();
  const Matrix ls = lower_cholesky(e.covariance, "covariance");
  const double logdet_sigma = log_det_from_chol(ls);
  const Matrix lpsi = lower_cholesky(p.scale, "posterior scale");
  const double logdet_psi = log_det_from_chol(lpsi);
  const Matrix lk = lower_cholesky(p.precision, "precision");
  const double logdet_k = log_det_from_chol(lk);

  // tr(Psi Sigma^{-1}) = ||L_s^{-1} L_psi||_F^2
  const Matrix a = ls.triangularView<Eigen::Lower>().solve(lpsi);
  const double tr_psi = a.squaredNorm();
  const double log_iw = 0.5 * p.dof * logdet_psi - 0.5 * p.dof * n * std::log(2.0) -
                        log_mvgamma(n, 0.5 * p.dof) - 0.5 * (p.dof + n + 1) * logdet_sigma -
                        0.5 * tr_psi;

  // tr(Sigma^{-1} D K D') = ||L_s^{-1} D L_k||_F^2
  const Matrix dev = coefficient_matrix(e) - p.mean;
  const Matrix q = ls.triangularView<Eigen::Lower>().solve(dev * lk);
  const double log_mn = -0.5 * n * d * kLog2Pi - 0.5 * d * logdet_sigma + 0.5 * n * logdet_k -
                        0.5 * q.squaredNorm();
  return log_iw + log_mn;
}

Vector pooled_mean(std::span<const TimeSeries> data) {
  if (data.empty()) throw std::invalid_argument("pooled mean of an empty dataset");
  Vector sum = Vector::Zero(data.front().dim());
  double count = 0.0;
  for (const auto& s : data) {
    sum += s.values.colwise().sum().transpose();
    count += s.length();
  }
  return sum / count;
}

Matrix pooled_covariance(std::span<const TimeSeries> data) {
  const Vector mu = pooled_mean(data);
  const auto n = mu.size();
  Matrix acc = Matrix::Zero(n, n);
  double count = 0.0;
  for (const auto& s : data) {
    const Matrix c = s.values.rowwise() - mu.transpose();
    acc.noalias() += c.transpose() * c;
    count += s.length();
  }
  return acc / std::max(1.0, count - 1.0);
}

}  // namespace plearn
