#include <doctest.h>

#include <cmath>

#include "plearn/random.hpp"
#include "plearn/transest.hpp"

using namespace plearn;

TEST_CASE("counting transitions by hand") {
  CHECK(count_transitions({}, 2, 1) == TransitionCounts(2, 1));

  const std::vector<LabeledSequence> seqs = {{{0, 0, 1, 0}, {0, 0, 0}}};
  const auto c = count_transitions(seqs, 2, 1);
  CHECK(c.count(0, 0, 0) == 1);
  CHECK(c.count(0, 0, 1) == 1);
  CHECK(c.count(1, 0, 0) == 1);
  CHECK(c.count(1, 0, 1) == 0);
  CHECK(c.total(0, 0) == 2);
  CHECK(c.total(1, 0) == 1);
  CHECK(c.consistent());

  const std::vector<LabeledSequence> one = {{{0, 1}, {1}}};
  const auto d = count_transitions(one, 2, 2);
  CHECK(d.count(0, 1, 1) == 1);
  CHECK(d.total(0, 1) == 1);
  CHECK(d.total(0, 0) + d.total(1, 0) + d.total(1, 1) == 0);
}

TEST_CASE("counting rejects malformed sequences") {
  const std::vector<LabeledSequence> mismatch = {{{0, 1, 0}, {0}}};
  CHECK_THROWS_AS(count_transitions(mismatch, 2, 1), std::invalid_argument);
  const std::vector<LabeledSequence> bad_state = {{{0, 2}, {0}}};
  CHECK_THROWS_AS(count_transitions(bad_state, 2, 1), std::invalid_argument);
  const std::vector<LabeledSequence> bad_action = {{{0, 1}, {1}}};
  CHECK_THROWS_AS(count_transitions(bad_action, 2, 1), std::invalid_argument);
  TransitionCounts c(2, 1);
  CHECK_THROWS(c.add(0, 1, 0));
}

TEST_CASE("shards merge to the same counts") {
  Rng rng(3);
  std::vector<LabeledSequence> seqs;
  for (int i = 0; i < 6; ++i) {
    LabeledSequence s;
    for (int t = 0; t < 50; ++t) s.states.push_back(static_cast<int>(rng() % 3));
    for (int t = 0; t < 49; ++t) s.actions.push_back(static_cast<int>(rng() % 2));
    seqs.push_back(s);
  }
  const auto all = count_transitions(seqs, 3, 2);
  auto a = count_transitions(std::span(seqs).subspan(0, 2), 3, 2);
  const auto b = count_transitions(std::span(seqs).subspan(2), 3, 2);
  auto b2 = b;
  CHECK(a.merge(b) == all);
  CHECK(b2.merge(count_transitions(std::span(seqs).subspan(0, 2), 3, 2)) == all);
  CHECK(all.consistent());
}

TEST_CASE("sample-mean estimate and coverage") {
  TransitionCounts c(2, 2);
  c.add(0, 0, 0, 98);
  c.add(0, 0, 1, 2);
  c.add(1, 0, 1, 5);
  const auto est = estimate_transitions(c);
  CHECK(est.transition[0](0, 0) == doctest::Approx(0.98));
  CHECK(est.transition[0](0, 1) == doctest::Approx(0.02));
  CHECK(est.transition[0](1, 1) == 1.0);
  CHECK(est.transition[1](0, 0) == 0.5);
  CHECK(est.transition[1](1, 1) == 0.5);
  CHECK_FALSE(est.coverage.complete());
  REQUIRE(est.coverage.empty_rows.size() == 2);
  CHECK(est.coverage.empty_rows[0].state == 0);
  CHECK(est.coverage.empty_rows[0].action == 1);
  CHECK(est.coverage.min_total == 0);

  Rng rng(9);
  TransitionCounts r(5, 3);
  for (int k = 0; k < 997; ++k) r.add(int(rng() % 5), int(rng() % 3), int(rng() % 5), 1 + int(rng() % 7));
  for (const auto& t : estimate_transitions(r).transition)
    for (int s = 0; s < 5; ++s) CHECK(std::abs(t.row(s).sum() - 1.0) <= 1e-12);
}

TEST_CASE("required sample size") {
  CHECK(required_samples(0.01, 0.95) == 73778);
  CHECK(-20000.0 * std::log(0.025) == doctest::Approx(73777.6).epsilon(1e-6));
  CHECK(truncated_samples(0.01, 0.95) == 73777);
  CHECK(required_samples(0.1, 0.95) == 738);
  CHECK(required_samples(0.5, 0.5) == 12);
  CHECK(required_samples(0.05, 0.9) == 2397);
  for (double bad : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
    CHECK_THROWS_AS(required_samples(bad, 0.9), std::domain_error);
    CHECK_THROWS_AS(required_samples(0.1, bad), std::domain_error);
  }
}

TEST_CASE("confidence of a sample size") {
  CHECK(confidence_of(0.01, 73778) >= 0.95);
  CHECK(confidence_of(0.01, 73777) < 0.95);
  CHECK(confidence_of(0.3, 0) == 0.0);
  CHECK(confidence_of(0.1, 738) == doctest::Approx(0.95).epsilon(1e-3));
}

TEST_CASE("monotonicity and round trip over a grid") {
  const std::vector<double> alphas = {0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 0.9};
  const std::vector<double> deltas = {0.01, 0.1, 0.5, 0.8, 0.9, 0.95, 0.99, 0.999};
  for (std::size_t i = 0; i < alphas.size(); ++i)
    for (std::size_t j = 0; j < deltas.size(); ++j) {
      const auto w = required_samples(alphas[i], deltas[j]);
      CHECK(w >= 1);
      CHECK(confidence_of(alphas[i], w) >= deltas[j]);
      if (w > 1) CHECK(confidence_of(alphas[i], w - 1) < deltas[j]);
      if (i > 0) CHECK(w <= required_samples(alphas[i - 1], deltas[j]));
      if (j > 0) CHECK(w >= required_samples(alphas[i], deltas[j - 1]));
    }
  for (double a : alphas)
    for (std::int64_t w = 1; w < 5000; w = w * 3 + 1) {
      CHECK(confidence_of(a, w) <= confidence_of(a, w * 3 + 1));
      CHECK(confidence_of(a, w) <= confidence_of(std::min(0.99, a * 1.5), w));
    }
}

TEST_CASE("sample-size guarantee holds empirically") {
  const std::vector<double> p = {0.02, 0.03, 0.05, 0.08, 0.12, 0.7};
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) cdf[k] = (acc += p[k]);
  const double alpha = 0.05, delta = 0.9;
  const auto w = required_samples(alpha, delta);
  int ok = 0;
  for (int rep = 0; rep < 500; ++rep) {
    Rng rng = substream(2024, static_cast<std::uint64_t>(rep));
    std::vector<std::int64_t> n(p.size(), 0);
    for (std::int64_t k = 0; k < w; ++k) {
      const double u = uniform01(rng);
      std::size_t j = 0;
      while (j + 1 < cdf.size() && u >= cdf[j]) ++j;
      ++n[j];
    }
    double err = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
      err = std::max(err, std::abs(static_cast<double>(n[k]) / static_cast<double>(w) - p[k]));
    ok += err <= alpha ? 1 : 0;
  }
  CHECK(ok >= 0.9 * 500);
}
