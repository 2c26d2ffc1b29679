#include <doctest.h>

#include "plearn/io.hpp"
#include "plearn/model.hpp"
#include "plearn/simgen.hpp"

using namespace plearn;

namespace {

PomdpModel three_state() {
  PomdpModel m;
  m.states = {"a", "b", "c"};
  m.actions = {"go", "stay"};
  m.observations = {"x", "y"};
  Matrix t0(3, 3), t1 = Matrix::Identity(3, 3);
  t0 << 0.7, 0.2, 0.1, 0.0, 0.5, 0.5, 0.3, 0.3, 0.4;
  m.transition = {t0, t1};
  m.observation_fn.resize(3, 2);
  m.observation_fn << 0.9, 0.1, 0.5, 0.5, 0.2, 0.8;
  m.reward.resize(3, 2);
  m.reward << 1.0, 0.0, -0.5, 0.25, 0.0, 1.0;
  m.r_max = 1.0;
  m.initial_belief = Vector::Constant(3, 1.0 / 3.0);
  return m;
}

}  // namespace

TEST_CASE("well-formed model has no violations") { CHECK(validate_model(three_state()).empty()); }

TEST_CASE("short transition row is reported with its row") {
  auto m = three_state();
  m.transition[0](1, 1) = 0.4;  // row sums to 0.9
  const auto v = validate_model(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].matrix.find("transition") != std::string::npos);
  CHECK(v[0].row == 1);
}

TEST_CASE("reward above r_max is one violation") {
  auto m = three_state();
  m.reward(0, 0) = 2.0;
  const auto v = validate_model(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].matrix == "reward");
}

TEST_CASE("negative reward magnitude counts against r_max") {
  auto m = three_state();
  m.reward(1, 0) = -1.5;
  CHECK(validate_model(m).size() == 1);
}

TEST_CASE("alpha distance") {
  const auto m = three_state();
  CHECK(alpha_distance(m, m).value() == 0.0);

  auto shifted = m;
  shifted.transition[0](0, 0) += 0.05;
  shifted.transition[0](0, 1) -= 0.05;
  CHECK(alpha_distance(m, shifted).value() == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(alpha_distance(shifted, m).value() == alpha_distance(m, shifted).value());

  auto other_e = m;
  other_e.observation_fn(0, 0) = 0.8;
  other_e.observation_fn(0, 1) = 0.2;
  CHECK_FALSE(alpha_distance(m, other_e).has_value());

  auto other_b0 = m;
  other_b0.initial_belief << 0.5, 0.25, 0.25;
  CHECK_FALSE(alpha_distance(m, other_b0).has_value());

  auto other_r = m;
  other_r.reward(2, 1) = 0.5;
  CHECK_FALSE(alpha_distance(m, other_r).has_value());

  auto renamed = m;
  renamed.actions[1] = "wait";
  CHECK_FALSE(alpha_distance(m, renamed).has_value());
}

TEST_CASE("serialization round-trips random models exactly") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const int n = 1 + static_cast<int>(seed % 5);
    auto m = random_pomdp(n, 1 + static_cast<int>(seed % 3), 1 + static_cast<int>(seed % 4), 0.5 + seed * 0.01, seed);
    if (seed % 7 == 0 && n == 4) m.factors = {{"human", {"h0", "h1"}}, {"robot", {"r0", "r1"}}};
    const auto back = deserialize_model(serialize_model(m));
    CHECK(back == m);
  }
}

TEST_CASE("deserialization errors") {
  Json j = model_to_json(three_state());
  j.erase("transition");
  try {
    model_from_json(j);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.field() == "transition");
  }

  j = model_to_json(three_state());
  j["observation_fn"][1][0] = -0.5;
  j["observation_fn"][1][1] = 1.5;
  try {
    model_from_json(j);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK_FALSE(e.violations().empty());
  }

  j = model_to_json(three_state());
  j["reward"][0][1] = "high";
  CHECK_THROWS_AS(model_from_json(j), ParseError);
  CHECK_THROWS_AS(deserialize_model("{ not json"), ParseError);
}

TEST_CASE("rows within tolerance are renormalized, rows outside are rejected") {
  Json j = model_to_json(three_state());
  j["transition"][0][0][0] = 0.7 + 5e-10;
  const auto m = model_from_json(j);
  CHECK(std::abs(m.transition[0].row(0).sum() - 1.0) < 1e-15);

  j["transition"][0][0][0] = 0.7 + 5e-9;
  CHECK_THROWS_AS(model_from_json(j), ValidationError);
}

TEST_CASE("product state labels") {
  const std::vector<StateFactor> f = {{"h", {"a", "b"}}, {"r", {"x", "y", "z"}}};
  const auto labels = product_state_labels(f);
  REQUIRE(labels.size() == 6);
  CHECK(labels[0] == "a|x");
  CHECK(labels[5] == "b|z");
}

TEST_CASE("policy tree layout") {
  PolicyTree f(3, 2);
  CHECK(f.num_slots() == 2 + 4 + 8);
  CHECK(f.num_histories(0) == 2);
  CHECK(f.num_histories(2) == 8);
  const std::vector<int> h = {1, 0, 1};
  CHECK(f.history_index(h) == 5);
  f.actions_at(2)[5] = 1;
  CHECK(f.action(h) == 1);
  CHECK(f.slot(2 + 4 + 5) == 1);
  f.set_slot(0, 1);
  CHECK(f.action(std::vector<int>{0}) == 1);
  CHECK_THROWS(f.action(std::vector<int>{}));
  CHECK_THROWS(f.action(std::vector<int>{2}));

  PolicyTree single(4, 1);
  CHECK(single.num_slots() == 4);
}

TEST_CASE("belief invariants") {
  CHECK_NOTHROW(Belief::uniform(4));
  CHECK(Belief::point(3, 2)[2] == 1.0);
  CHECK_THROWS(Belief(Vector::Constant(2, 0.4)));
  CHECK_THROWS(Belief((Vector(2) << 1.5, -0.5).finished()));
}

TEST_CASE("time series invariants") {
  TimeSeries s;
  s.id = "x";
  s.values = Matrix::Zero(4, 2);
  CHECK(validate_series(s).empty());
  s.actions = {0, 1};
  CHECK_FALSE(validate_series(s).empty());
  s.actions = {0, 1, 0};
  s.latent_states = {0, 0, 1};
  CHECK_FALSE(validate_series(s).empty());
  s.latent_states.push_back(1);
  CHECK(validate_series(s).empty());

  Dataset d = {s, s};
  d[1].values = Matrix::Zero(3, 3);
  d[1].actions.clear();
  d[1].latent_states.clear();
  CHECK_THROWS_AS(check_dataset(d), std::invalid_argument);
}

TEST_CASE("emission invariants") {
  GaussianEmission e;
  e.mean = Vector::Zero(2);
  e.covariance = Matrix::Identity(2, 2);
  CHECK(validate_emission(e).empty());
  CHECK_FALSE(validate_emission(e, 1).empty());
  e.covariance(0, 1) = 0.5;
  CHECK_FALSE(validate_emission(e).empty());
  e.covariance(1, 0) = 0.5;
  CHECK(validate_emission(e).empty());
  e.covariance(0, 0) = -1.0;
  CHECK_FALSE(validate_emission(e).empty());
}
