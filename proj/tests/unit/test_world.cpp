#include <random>
#include <stdexcept>

#include "doctest.h"
#include "fixtures.hpp"
#include "mrta/world.hpp"

using namespace mrta;
using mrta::testing::hand_world;

TEST_CASE("connection_set uses the delta threshold") {
  const double delta = KinematicsParams{}.delta;
  SUBCASE("below threshold") {
    auto w = hand_world({{0, 0}}, {{{0, delta / 2}, {0.8, 0.8}, 2}});
    CHECK(connection_set(w, 0) == std::vector<RobotId>{0});
  }
  SUBCASE("above threshold") {
    auto w = hand_world({{0, 0}}, {{{0, 2 * delta}, {0.8, 0.8}, 2}});
    CHECK(connection_set(w, 0).empty());
  }
  SUBCASE("three robots at the object") {
    auto w = hand_world({{0.3, 0.3}, {0.3, 0.3}, {0.3, 0.3}}, {{{0.3, 0.3}, {0.8, 0.8}, 4}});
    CHECK(connection_set(w, 0) == std::vector<RobotId>{0, 1, 2});
  }
  SUBCASE("inactive robots never connect") {
    auto w = hand_world({{0, 0}, {0, 0}}, {{{0, 0}, {0.8, 0.8}, 4}});
    w.robots[1].active = false;
    CHECK(connection_set(w, 0) == std::vector<RobotId>{0});
  }
  SUBCASE("unknown object") {
    auto w = hand_world({{0, 0}}, {{{0, 0}, {0.8, 0.8}, 1}});
    CHECK_THROWS_AS(connection_set(w, 3), std::invalid_argument);
  }
}

TEST_CASE("a robot docks to one object only") {
  // Both objects within delta; the robot's target wins, else the nearer one.
  auto w = hand_world({{0, 0}}, {{{0.05, 0}, {0.8, 0.8}, 3}, {{-0.03, 0}, {-0.8, 0.8}, 3}});
  CHECK(resolve_connection(w, 0, std::nullopt) == ObjectId{1});
  CHECK(resolve_connection(w, 0, ObjectId{0}) == ObjectId{0});
}

TEST_CASE("single robot delivers a weight-1 object one transport step from its goal") {
  const auto p = KinematicsParams{};
  auto w = hand_world({{0, 0}}, {{{0, 0}, {p.transport_speed * p.dt, 0}, 1}});
  auto next = step_world(w, {ObjectId{0}});
  CHECK(next.objects[0].delivered);
  CHECK(next.objects[0].position.x == doctest::Approx(p.transport_speed));
  CHECK(next.objects[0].velocity == Vec2{0, 0});
  CHECK_FALSE(next.robots[0].connected_to.has_value());
  CHECK(next.time == p.dt);
}

TEST_CASE("insufficient robots leave a heavy object in place") {
  auto w = hand_world({{0, 0}, {0, 0}}, {{{0, 0}, {0.5, 0.5}, 3}});
  auto next = step_world(w, {ObjectId{0}, ObjectId{0}});
  CHECK(next.objects[0].velocity == Vec2{0, 0});
  CHECK(next.objects[0].position == Vec2{0, 0});
  CHECK(next.robots[0].position == Vec2{0, 0});
  CHECK(next.robots[1].position == Vec2{0, 0});
}

TEST_CASE("straight-line approach reaches connection range by hand geometry") {
  const auto p = KinematicsParams{};
  // 0.3 away: after k steps the gap is 0.3 - 0.05k; within delta (0.1) from k = 4.
  auto w = hand_world({{0, 0}}, {{{0.3, 0}, {0.3, 0.8}, 2}});
  for (int k = 1; k <= 4; ++k) {
    w = step_world(w, {ObjectId{0}});
    CHECK(w.robots[0].position.x == doctest::Approx(p.robot_speed * k));
    CHECK(connection_set(w, 0).size() == (k >= 4 ? 1u : 0u));
  }
  // Two more steps land exactly on the object, never past it.
  w = step_world(w, {ObjectId{0}});
  w = step_world(w, {ObjectId{0}});
  w = step_world(w, {ObjectId{0}});
  CHECK(w.robots[0].position.x == doctest::Approx(0.3));
}

TEST_CASE("transport carries attached robots and keeps them connected") {
  auto w = hand_world({{0, 0}, {0.02, 0}}, {{{0, 0}, {0.6, 0}, 2}});
  for (int k = 0; k < 5; ++k) {
    w = step_world(w, {ObjectId{0}, ObjectId{0}});
    REQUIRE(w.objects[0].moving());
    for (const auto& r : w.robots) {
      CHECK(r.connected_to == ObjectId{0});
      CHECK(distance(r.position, w.objects[0].position) <= w.params.delta);
    }
  }
}

TEST_CASE("delivered objects never move again and hold-position targets are allowed") {
  auto w = hand_world({{0, 0}}, {{{0, 0}, {0.05, 0}, 1}});
  w = step_world(w, {ObjectId{0}});
  REQUIRE(w.objects[0].delivered);
  const auto before = w;
  w = step_world(w, {ObjectId{0}});
  CHECK(w.objects[0].delivered);
  CHECK(w.objects[0].position == before.objects[0].position);
  CHECK(w.robots[0].position == before.robots[0].position);
}

TEST_CASE("robots without a target head home") {
  auto w = hand_world({{0.5, 0.5}}, {{{-0.5, -0.5}, {0.8, -0.8}, 1}});
  w.robots[0].position = {0.2, 0.5};
  w = step_world(w, {std::nullopt});
  CHECK(w.robots[0].position.x == doctest::Approx(0.25));
}

TEST_CASE("malformed targets are rejected") {
  auto w = hand_world({{0, 0}}, {{{0.5, 0.5}, {0.8, 0.8}, 1}});
  CHECK_THROWS_AS(step_world(w, {ObjectId{7}}), std::invalid_argument);
  CHECK_THROWS_AS(step_world(w, {}), std::invalid_argument);
}

TEST_CASE("velocity is non-zero only with a full team") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int trial = 0; trial < 50; ++trial) {
    auto w = hand_world({{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}},
                        {{{u(rng), u(rng)}, {u(rng), u(rng)}, 1},
                         {{u(rng), u(rng)}, {u(rng), u(rng)}, 2},
                         {{u(rng), u(rng)}, {u(rng), u(rng)}, 4}});
    for (int s = 0; s < 80; ++s) {
      TargetList t;
      for (std::size_t i = 0; i < 3; ++i) t.push_back(ObjectId{(i + static_cast<std::size_t>(s / 20)) % 3});
      const auto prev = w;
      w = step_world(w, t);
      for (const auto& o : w.objects) {
        if (o.moving()) CHECK(connection_set(w, o.id).size() >= static_cast<std::size_t>(o.weight));
        if (prev.objects[o.id].delivered) CHECK(o.delivered);
      }
    }
  }
}

TEST_CASE("step_world is deterministic") {
  auto w = hand_world({{0, 0}, {0.4, 0.1}}, {{{0.3, 0.2}, {-0.6, 0.6}, 2}});
  const TargetList t{ObjectId{0}, ObjectId{0}};
  for (int s = 0; s < 30; ++s) {
    const auto a = step_world(w, t);
    const auto b = step_world(w, t);
    REQUIRE(a.robots[0].position == b.robots[0].position);
    REQUIRE(a.objects[0].position == b.objects[0].position);
    w = a;
  }
}

TEST_CASE("add_robots grows N deterministically") {
  auto w = hand_world({{0, 0}, {0.1, 0.5}, {-0.4, 0.2}}, {{{0.6, 0.6}, {-0.6, -0.6}, 4}});
  const auto a = add_robots(w, 3, 42);
  const auto b = add_robots(w, 3, 42);
  CHECK(a.active_count() == 6);
  for (std::size_t i = 3; i < 6; ++i) {
    CHECK(a.robots[i].position == b.robots[i].position);
    CHECK(std::abs(a.robots[i].position.x) <= w.params.arena_half_width);
    CHECK(std::abs(a.robots[i].position.y) <= w.params.arena_half_width);
  }
  CHECK_THROWS_AS(add_robots(w, 0, 42), std::invalid_argument);
}

TEST_CASE("feasible_remaining filters by weight and delivery") {
  auto w = hand_world({{0, 0}, {0.9, 0.9}, {-0.9, 0.9}},
                      {{{0.5, 0}, {0.5, 0.5}, 1}, {{-0.5, 0}, {-0.5, 0.5}, 3}, {{0, -0.5}, {0.5, -0.5}, 4}});
  CHECK(feasible_remaining(w) == std::vector<ObjectId>{0, 1});

  auto big = hand_world({{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}}, {{{0.5, 0}, {0.5, 0.5}, 7}});
  CHECK(feasible_remaining(big).empty());

  for (auto& o : w.objects) o.delivered = true;
  CHECK(feasible_remaining(w).empty());
}
