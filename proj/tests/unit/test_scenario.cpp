#include <algorithm>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "mrta/scenario.hpp"

using namespace mrta;

namespace {

int count_weight(const std::vector<int>& w, int value) {
  return static_cast<int>(std::count(w.begin(), w.end(), value));
}

}  // namespace

TEST_CASE("training preset row") {
  const auto s = scenario_preset("training");
  CHECK(s.initial_robots == 3);
  CHECK(s.object_count() == 6);
  CHECK(s.steps == 300);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto w = draw_weights(s, rng);
    REQUIRE(w.size() == 6);
    CHECK(count_weight(w, 4) == 3);
    CHECK(count_weight(w, 1) + count_weight(w, 3) == 3);
  }
}

TEST_CASE("validation presets") {
  std::mt19937_64 rng(2);
  for (const char* name : {"validation1", "validation2"}) {
    const auto s = scenario_preset(name);
    CHECK(s.initial_robots == 6);
    CHECK(s.object_count() == 10);
    CHECK(s.steps == 1000);
    const auto w = draw_weights(s, rng);
    CHECK(count_weight(w, 7) == 2);
  }
  const auto p0 = draw_weights(scenario_preset("validation2-p0"), rng);
  const auto p100 = draw_weights(scenario_preset("validation2-p100"), rng);
  CHECK(count_weight(p0, 1) + count_weight(p0, 6) == 8);
  CHECK((count_weight(p0, 1) == 8 || count_weight(p0, 6) == 8));
  CHECK(count_weight(p100, 1) + count_weight(p100, 6) == 8);
  CHECK(count_weight(p0, 1) != count_weight(p100, 1));

  const auto v3 = scenario_preset("validation3");
  CHECK(v3.initial_robots == 3);
  CHECK(v3.max_robots() == 6);
  CHECK(v3.steps == 2000);
  REQUIRE(v3.additions.size() == 1);
  CHECK(v3.additions[0].time == 1000.0);
  CHECK(v3.additions[0].count == 3);
  const auto w3 = draw_weights(v3, rng);
  CHECK(count_weight(w3, 1) == 1);
  CHECK(count_weight(w3, 3) == 4);
  CHECK(count_weight(w3, 6) == 5);
}

TEST_CASE("every listed preset resolves and validates") {
  for (const auto& name : scenario_names()) {
    const auto s = scenario_preset(name);
    CHECK(s.name == name);
    CHECK_NOTHROW(s.validate());
  }
  CHECK_THROWS_AS(scenario_preset("nope"), std::invalid_argument);
}

TEST_CASE("json round trip and overrides") {
  const auto s = scenario_preset("validation3");
  const auto back = scenario_from_json(scenario_to_json(s));
  CHECK(scenario_to_json(back) == scenario_to_json(s));

  const auto o = scenario_from_json(R"({"preset": "training", "steps": 120, "ablation": "no_de",
                                        "weights": [{"count": 2, "weight": 2}]})");
  CHECK(o.steps == 120);
  CHECK(o.ablation == Ablation::no_de);
  CHECK(o.object_count() == 2);
}

TEST_CASE("inconsistent configs are rejected") {
  CHECK_THROWS_AS(scenario_from_json("{"), std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json(R"({"preset": "training", "steps": 0})"), std::invalid_argument);
  CHECK_THROWS_AS(
      scenario_from_json(R"({"preset": "training", "weights": [{"count": 2, "choices": [1, 3], "probabilities": [0.5, 0.6]}]})"),
      std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json(R"({"preset": "training", "additions": [{"time": 400, "count": 1}]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json(R"({"preset": "training", "additions": [{"time": 10, "count": 0}]})"),
                  std::invalid_argument);
}

TEST_CASE("policy and ablation parsing") {
  CHECK(PolicySource::parse("random").kind == PolicySource::Kind::random);
  const auto c = PolicySource::parse("checkpoint:/tmp/a.json");
  CHECK(c.kind == PolicySource::Kind::checkpoint);
  CHECK(c.checkpoint == "/tmp/a.json");
  CHECK(c.to_string() == "checkpoint:/tmp/a.json");
  CHECK_THROWS_AS(PolicySource::parse("greedy"), std::invalid_argument);
  CHECK(ablation_from_string("no-e") == Ablation::no_e);
  CHECK(to_string(Ablation::no_de) == "no-de");
  CHECK_THROWS_AS(ablation_from_string("none"), std::invalid_argument);
}

TEST_CASE("make_world is seeded and respects clearances") {
  const auto s = scenario_preset("validation1");
  const auto a = make_world(s, 77);
  const auto b = make_world(s, 77);
  const auto c = make_world(s, 78);
  REQUIRE(a.objects.size() == 10);
  CHECK(a.robots.size() == 6);
  bool differs = false;
  for (std::size_t l = 0; l < 10; ++l) {
    CHECK(a.objects[l].position == b.objects[l].position);
    CHECK(a.objects[l].goal == c.objects[l].goal);
    differs = differs || !(a.objects[l].position == c.objects[l].position);
    CHECK(distance(a.objects[l].position, a.objects[l].goal) >= 2 * s.kinematics.delta);
  }
  CHECK(differs);
  for (const auto& r : a.robots) {
    for (const auto& o : a.objects) CHECK(distance(r.position, o.position) >= 2 * s.kinematics.delta);
  }
}

TEST_CASE("episode seeds are distinct per index") {
  CHECK(episode_seed(1, 0) == episode_seed(1, 0));
  CHECK(episode_seed(1, 0) != episode_seed(1, 1));
  CHECK(episode_seed(1, 0) != episode_seed(2, 0));
}
