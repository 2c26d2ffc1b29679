#include <doctest.h>

#include <cmath>

#include "plearn/io.hpp"

using namespace plearn;

namespace {

Dataset small_dataset(bool actions, bool latent) {
  Dataset d;
  for (int i = 0; i < 3; ++i) {
    TimeSeries s;
    s.id = "run-" + std::to_string(i);
    s.values = Matrix::Random(4 + i, 2) * 1e3;
    s.values(0, 0) = 1.0 / 3.0;
    s.values(1, 1) = -1e-300;
    if (actions)
      for (int t = 0; t + 1 < s.length(); ++t) s.actions.push_back((t + i) % 2);
    if (latent)
      for (int t = 0; t < s.length(); ++t) s.latent_states.push_back(t % 3);
    d.push_back(s);
  }
  return d;
}

}  // namespace

TEST_CASE("series CSV round trips exactly") {
  for (bool actions : {false, true})
    for (bool latent : {false, true}) {
      const auto d = small_dataset(actions, latent);
      CHECK(series_from_csv(series_to_csv(d)) == d);
    }
  const auto text = series_to_csv(small_dataset(true, false));
  CHECK(text.rfind("seq_id,t,y1,y2,action\n", 0) == 0);
}

TEST_CASE("series CSV errors name the line") {
  const std::string head = "seq_id,t,y1\n";
  try {
    series_from_csv(head + "a,0,1.0\na,1,abc\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.field() == "line 3");
  }
  CHECK_THROWS_AS(series_from_csv(head + "a,0,1.0\na,2,1.0\n"), ParseError);
  CHECK_THROWS_AS(series_from_csv(head + "a,0,1.0,7\n"), ParseError);
  CHECK_THROWS_AS(series_from_csv("id,t,y1\na,0,1\n"), ParseError);
  CHECK_THROWS_AS(series_from_csv(""), ParseError);
}

TEST_CASE("label CSV round trips") {
  LabelTable t;
  t.ids = {"x", "y"};
  t.sequences = {{{0, 1, 1, 2}, {1, 0, 1}}, {{2, 2}, {0}}};
  t.has_actions = true;
  const auto back = labels_from_csv(labels_to_csv(t));
  CHECK(back.ids == t.ids);
  CHECK(back.has_actions);
  REQUIRE(back.sequences.size() == 2);
  CHECK(back.sequences[0].states == t.sequences[0].states);
  CHECK(back.sequences[0].actions == t.sequences[0].actions);
  CHECK(back.sequences[1].actions == t.sequences[1].actions);
  CHECK_THROWS_AS(labels_from_csv("seq_id,t,label\nx,0,-1\n"), ParseError);
}

TEST_CASE("policy JSON round trips") {
  const auto m = random_pomdp(3, 3, 2, 1.0, 2);
  PolicyTree p(3, 2);
  for (std::size_t k = 0; k < p.num_slots(); ++k) p.set_slot(k, static_cast<int>((k * 7) % 3));
  const Json j = policy_to_json(p, m);
  CHECK(j.at("horizon") == 3);
  CHECK(policy_from_json(Json::parse(j.dump()), m) == p);
  Json bad = j;
  bad["horizon"] = "three";
  CHECK_THROWS_AS(policy_from_json(bad, m), ParseError);
}

TEST_CASE("observation matrix and scenario JSON round trip") {
  ObservationMatrix o;
  o.probs = (Matrix(2, 2) << 0.9, 0.1, 0.2, 0.8).finished();
  o.std_err = Matrix::Constant(2, 2, 1e-4);
  o.n_mc = 1000000;
  o.seed = 99;
  const auto ob = observation_matrix_from_json(Json::parse(observation_matrix_to_json(o).dump()));
  CHECK(ob.probs == o.probs);
  CHECK(ob.std_err == o.std_err);
  CHECK(ob.n_mc == o.n_mc);
  CHECK(ob.seed == o.seed);

  auto s = driver_like_scenario();
  s.logging_policy = (Vector(2) << 0.25, 0.75).finished();
  s.emissions[1].ar_coeffs = {0.3 * Matrix::Identity(2, 2)};
  const auto back = scenario_from_json(Json::parse(scenario_to_json(s).dump()));
  CHECK(back.pomdp == s.pomdp);
  CHECK(back.emissions == s.emissions);
  CHECK(back.logging_policy == s.logging_policy);
}

TEST_CASE("bundled scenario file matches the builtin") {
  const auto s = scenario_from_json(Json::parse(read_text_file(std::string(PLEARN_DATA_DIR) + "/driver_like.json")));
  const auto b = driver_like_scenario();
  CHECK(s.pomdp == b.pomdp);
  CHECK(s.emissions == b.emissions);
}

TEST_CASE("bound report JSON") {
  BoundReport r;
  r.theorem = 2;
  r.epsilon = 0.5;
  r.max_gap = 0.0;
  r.slack = std::numeric_limits<double>::infinity();
  r.pass = true;
  const Json j = bound_report_to_json(r);
  CHECK(j.at("slack").is_null());
  CHECK(j.at("pass") == true);
}

TEST_CASE("reading a missing file fails") {
  CHECK_THROWS(read_text_file("/nonexistent/definitely/missing.json"));
}
