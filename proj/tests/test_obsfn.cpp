#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "plearn/obsfn.hpp"
#include "plearn/random.hpp"

using namespace plearn;

namespace {

GaussianEmission gauss(std::vector<double> mu, double var = 1.0) {
  GaussianEmission e;
  e.mean = Eigen::Map<Vector>(mu.data(), static_cast<Eigen::Index>(mu.size()));
  e.covariance = var * Matrix::Identity(e.mean.size(), e.mean.size());
  return e;
}

Vector v1(double x) { return Vector::Constant(1, x); }

}  // namespace

TEST_CASE("ml decision boundaries in 1-D") {
  const std::vector<GaussianEmission> e = {gauss({0.0}), gauss({2.0})};
  CHECK(ml_decide(v1(0.0), e) == 0);
  CHECK(ml_decide(v1(2.0), e) == 1);
  CHECK(ml_decide(v1(0.9), e) == 0);
  CHECK(ml_decide(v1(1.1), e) == 1);
  CHECK(ml_decide(v1(1.0), e) == 0);  // tie
}

TEST_CASE("decisions are invariant under common scaling and translation") {
  Rng rng(4);
  for (double scale : {0.25, 3.0, 100.0})
    for (double shift : {-7.0, 0.0, 12.5}) {
      const double s = std::sqrt(scale);
      const std::vector<GaussianEmission> e = {gauss({shift}, scale), gauss({shift + 2.0 * s}, scale)};
      const double mid = shift + s;
      CHECK(ml_decide(v1(mid - 1e-6 * s), e) == 0);
      CHECK(ml_decide(v1(mid + 1e-6 * s), e) == 1);
      for (int k = 0; k < 50; ++k) {
        const double y = 4.0 * standard_normal(rng);
        const std::vector<GaussianEmission> base = {gauss({0.0}), gauss({2.0})};
        if (std::abs(y - 1.0) < 1e-9) continue;
        CHECK(ml_decide(v1(shift + s * y), e) == ml_decide(v1(y), base));
      }
    }
}

TEST_CASE("unequal covariances pick the larger likelihood") {
  const std::vector<GaussianEmission> e = {gauss({0.0, 0.0}, 1.0), gauss({0.0, 0.0}, 9.0)};
  Vector y(2);
  y << 0.1, 0.0;
  CHECK(ml_decide(y, e) == 0);
  y << 5.0, 0.0;
  CHECK(ml_decide(y, e) == 1);
}

TEST_CASE("decision rule rejects bad emission sets") {
  CHECK_THROWS_AS(MlDecisionRule(std::span<const GaussianEmission>{}), std::invalid_argument);
  const std::vector<GaussianEmission> mixed = {gauss({0.0}), gauss({0.0, 1.0})};
  CHECK_THROWS_AS(MlDecisionRule{mixed}, std::invalid_argument);
  auto singular = gauss({0.0, 0.0});
  singular.covariance(1, 1) = 0.0;
  CHECK_THROWS_AS(MlDecisionRule(std::vector<GaussianEmission>{singular}), std::invalid_argument);
  auto ar = gauss({0.0});
  ar.ar_coeffs.push_back(Matrix::Constant(1, 1, 0.5));
  CHECK_THROWS_AS(MlDecisionRule(std::vector<GaussianEmission>{ar}), std::invalid_argument);
  const std::vector<GaussianEmission> e = {gauss({0.0}), gauss({2.0})};
  CHECK_THROWS_AS(estimate_observation_matrix(e, 0, 1), std::invalid_argument);
}

TEST_CASE("single state observation matrix") {
  const auto m = estimate_observation_matrix(std::vector<GaussianEmission>{gauss({3.0, 1.0})}, 1000, 1);
  CHECK(m.probs.rows() == 1);
  CHECK(m.probs(0, 0) == 1.0);
  CHECK(m.std_err(0, 0) == 0.0);
}

TEST_CASE("two unit Gaussians two apart match the normal CDF") {
  const std::vector<GaussianEmission> e = {gauss({0.0}), gauss({2.0})};
  const auto m = estimate_observation_matrix(e, 1000000, 42);
  const double phi = oracle::normal_cdf(1.0);
  CHECK(phi == doctest::Approx(0.84134).epsilon(1e-5));
  Matrix expected(2, 2);
  expected << phi, 1 - phi, 1 - phi, phi;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CHECK(m.std_err(i, j) == doctest::Approx(std::sqrt(m.probs(i, j) * (1 - m.probs(i, j)) / 1e6)));
      CHECK(std::abs(m.probs(i, j) - expected(i, j)) <= 3 * m.std_err(i, j));
    }
}

TEST_CASE("six emissions give a row-stochastic matrix") {
  Rng rng(6);
  std::vector<GaussianEmission> e;
  for (int k = 0; k < 6; ++k) {
    Matrix a = Matrix::Random(3, 3);
    GaussianEmission g;
    g.mean = 3.0 * standard_normal_vector(rng, 3);
    g.covariance = a * a.transpose() + 0.5 * Matrix::Identity(3, 3);
    e.push_back(g);
  }
  const auto m = estimate_observation_matrix(e, 1000000, 8, 2);
  REQUIRE(m.probs.rows() == 6);
  REQUIRE(m.probs.cols() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(m.probs.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.probs.row(i).minCoeff() >= 0.0);
    CHECK(m.probs(i, i) == m.probs.row(i).maxCoeff());
  }
}

TEST_CASE("Monte Carlo error shrinks like one over root n") {
  const std::vector<GaussianEmission> e = {gauss({0.0}), gauss({2.0})};
  const double phi = oracle::normal_cdf(1.0);
  const long n = 20000;
  double ss1 = 0.0, ss2 = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    ss1 += std::pow(estimate_observation_matrix(e, n, s).probs(0, 0) - phi, 2);
    ss2 += std::pow(estimate_observation_matrix(e, 2 * n, 1000 + s).probs(0, 0) - phi, 2);
  }
  const double ratio = std::sqrt(ss1 / ss2);
  MESSAGE("rms ratio " << ratio);
  CHECK(ratio >= 1.25);
  CHECK(ratio <= 1.6);
}

TEST_CASE("far-apart emissions are almost never confused") {
  // pairwise Mahalanobis distance 12
  const std::vector<GaussianEmission> e = {gauss({0.0, 0.0}), gauss({12.0, 0.0}), gauss({6.0, 10.3923048454})};
  const auto m = estimate_observation_matrix(e, 200000, 3);
  for (int i = 0; i < 3; ++i) CHECK(1.0 - m.probs(i, i) < 1e-6);
}

TEST_CASE("estimates do not depend on the thread count") {
  const std::vector<GaussianEmission> e = {gauss({0.0, 0.0}), gauss({1.0, 0.0}), gauss({0.0, 1.5}), gauss({2.0, 2.0})};
  const auto a = estimate_observation_matrix(e, 20000, 77, 1);
  const auto b = estimate_observation_matrix(e, 20000, 77, 3);
  CHECK(a.probs == b.probs);
  CHECK(estimate_observation_matrix(e, 20000, 78, 1).probs != a.probs);
}

TEST_CASE("discretize series") {
  const std::vector<GaussianEmission> e = {gauss({0.0, 0.0}), gauss({4.0, 0.0}), gauss({0.0, 4.0})};
  TimeSeries s;
  s.id = "s";
  s.values.resize(3, 2);
  for (int k = 0; k < 3; ++k) s.values.row(k) = e[k].mean.transpose();
  CHECK(discretize_series(s, e) == std::vector<int>{0, 1, 2});

  Rng rng(1);
  s.values = 3.0 * Matrix::Random(200, 2);
  const auto d = discretize_series(s, e);
  for (int t = 0; t < 200; ++t) CHECK(d[t] == ml_decide(s.values.row(t).transpose(), e));

  s.values.resize(0, 2);
  CHECK(discretize_series(s, e).empty());
  s.values = Matrix::Zero(2, 3);
  CHECK_THROWS_AS(discretize_series(s, e), std::invalid_argument);
}

TEST_CASE("lifting to a product space keeps the other factors exact") {
  Matrix h(2, 2);
  h << 0.9, 0.1, 0.2, 0.8;
  const Matrix l = lift_observation(h, 3);
  REQUIRE(l.rows() == 6);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int k = 0; k < 3; ++k)
        for (int m = 0; m < 3; ++m) CHECK(l(a * 3 + k, b * 3 + m) == (k == m ? h(a, b) : 0.0));
  for (int r = 0; r < 6; ++r) CHECK(l.row(r).sum() == doctest::Approx(1.0));
  CHECK(lift_observation(h, 1) == h);
  CHECK_THROWS(lift_observation(h, 0));
}
