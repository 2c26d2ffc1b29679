#include "plearn/random.hpp"

#include <cmath>
#include <stdexcept>

namespace plearn {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng substream(std::uint64_t seed, std::uint64_t index) {
  return Rng(mix_seed(mix_seed(seed) ^ mix_seed(index + 0x632BE59BD9B4E019ULL)));
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

double gamma_draw(Rng& rng, double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
  return std::gamma_distribution<double>(shape, 1.0)(rng);
}

Vector standard_normal_vector(Rng& rng, int n) {
  Vector z(n);
  for (int i = 0; i < n; ++i) z(i) = standard_normal(rng);
  return z;
}

Vector dirichlet(Rng& rng, const Vector& alpha) {
  Vector g(alpha.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    g(i) = alpha(i) > 0.0 ? gamma_draw(rng, alpha(i)) : 0.0;
    sum += g(i);
  }
  if (!(sum > 0.0)) {
    // every gamma underflowed (tiny shapes); fall back to the largest-mass coordinate
    Eigen::Index best = 0;
    alpha.maxCoeff(&best);
    g.setZero();
    g(best) = 1.0;
    return g;
  }
  return g / sum;
}

Vector dirichlet_symmetric(Rng& rng, int n, double alpha) {
  return dirichlet(rng, Vector::Constant(n, alpha));
}

int categorical(Rng& rng, const Vector& weights) {
  const double total = weights.sum();
  if (!(total > 0.0)) throw std::invalid_argument("categorical weights sum to zero");
  double u = uniform01(rng) * total;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    u -= weights(i);
    if (u < 0.0) return static_cast<int>(i);
  }
  // rounding: last index with positive weight
  for (Eigen::Index i = weights.size() - 1; i >= 0; --i)
    if (weights(i) > 0.0) return static_cast<int>(i);
  return 0;
}

Matrix wishart(Rng& rng, double dof, const Matrix& scale) {
  const auto n = scale.rows();
  if (!(dof > static_cast<double>(n) - 1.0))
    throw std::invalid_argument("Wishart dof must exceed n-1");
  Eigen::LLT<Matrix> llt(scale);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("Wishart scale is not SPD");
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = std::sqrt(2.0 * gamma_draw(rng, 0.5 * (dof - static_cast<double>(i))));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = standard_normal(rng);
  }
  const Matrix la = llt.matrixL() * a;
  return la * la.transpose();
}

Matrix inverse_wishart(Rng& rng, double dof, const Matrix& scale) {
  const Matrix scale_inv = scale.llt().solve(Matrix::Identity(scale.rows(), scale.cols()));
  const Matrix w = wishart(rng, dof, 0.5 * (scale_inv + scale_inv.transpose()));
  Matrix out = w.llt().solve(Matrix::Identity(w.rows(), w.cols()));
  return 0.5 * (out + out.transpose());
}

}  // namespace plearn
