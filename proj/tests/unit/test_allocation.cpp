#include <random>
#include <stdexcept>

#include "doctest.h"
#include "fixtures.hpp"
#include "mrta/allocation.hpp"

using namespace mrta;
using mrta::testing::hand_world;

namespace {

PolicyCommand command(std::vector<std::optional<ObjectId>> ids, std::vector<double> phi, double alpha,
                      std::vector<double> zeta, double beta) {
  PolicyCommand c;
  c.neighbor_object_ids = std::move(ids);
  c.target_phi = std::move(phi);
  c.alpha = alpha;
  c.target_zeta = std::move(zeta);
  c.beta = beta;
  return c;
}

}  // namespace

TEST_CASE("build_targets maps neighbor slots and passes the rest through") {
  AllocationState s(1, 3);
  s.phi << 0.1, 0.2, 0.3;
  s.zeta << 0.4, 0.5, 0.6;
  const auto t = build_targets(s, 0, command({1, 2}, {0.9, 0.1}, 0, {0.7, 0.8}, 0));
  CHECK(t.priority == std::vector<double>{0.1, 0.9, 0.1});
  CHECK(t.exclusion == std::vector<double>{0.4, 0.7, 0.8});

  AllocationState two(1, 2);
  const auto all = build_targets(two, 0, command({1, 0}, {0.3, 0.6}, 0, {0.2, 0.1}, 0));
  CHECK(all.priority == std::vector<double>{0.6, 0.3});
}

TEST_CASE("PolicyCommand action round trip clamps and checks length") {
  const std::vector<double> a{1.5, 0.2, 0.7, -1.0, 0.4, 0.9};
  const auto c = PolicyCommand::from_action(a, {0, 1});
  CHECK(c.target_phi == std::vector<double>{1.0, 0.2});
  CHECK(c.alpha == 0.7);
  CHECK(c.target_zeta == std::vector<double>{0.0, 0.4});
  CHECK(c.beta == 0.9);
  CHECK(c.to_action() == std::vector<double>{1.0, 0.2, 0.7, 0.0, 0.4, 0.9});
  CHECK_THROWS_AS(PolicyCommand::from_action(std::vector<double>{0.1, 0.2}, {0, 1}), std::invalid_argument);
}

TEST_CASE("priority Euler step examples") {
  SUBCASE("pull toward target without sharing") {
    AllocationState s(1, 1);
    const std::vector<PolicyCommand> cmds{command({0}, {1.0}, 0.0, {0.0}, 0.0)};
    CHECK(update_priorities(s, cmds, 1.0).phi(0, 0) == doctest::Approx(0.2));
  }
  SUBCASE("two robots sharing with self targets") {
    AllocationState s(2, 1);
    s.phi << 1.0, 0.0;
    const std::vector<PolicyCommand> cmds{command({0}, {1.0}, 1.0, {0.0}, 0.0),
                                          command({0}, {0.0}, 1.0, {0.0}, 0.0)};
    const auto n = update_priorities(s, cmds, 1.0);
    CHECK(n.phi(0, 0) == doctest::Approx(0.8));
    CHECK(n.phi(1, 0) == doctest::Approx(0.2));
    CHECK(n.phi(0, 0) + n.phi(1, 0) == doctest::Approx(1.0));
  }
  SUBCASE("fixed point is bit-identical") {
    AllocationState s(2, 2);
    s.phi << 0.3, 0.7, 0.1, 0.9;
    s.zeta << 0.2, 0.4, 0.6, 0.8;
    const std::vector<PolicyCommand> cmds{command({0, 1}, {0.3, 0.7}, 0.0, {0.2, 0.4}, 0.0),
                                          command({0, 1}, {0.1, 0.9}, 0.0, {0.6, 0.8}, 0.0)};
    const auto p = update_priorities(s, cmds, 1.0);
    const auto z = update_exclusions(s, cmds, 1.0);
    CHECK(p.phi == s.phi);
    CHECK(z.zeta == s.zeta);
  }
  SUBCASE("frozen robots keep their row but still act as sources") {
    AllocationState s(2, 1);
    s.phi << 1.0, 0.0;
    s.frozen = {true, false};
    const std::vector<PolicyCommand> cmds{command({0}, {0.0}, 1.0, {0.0}, 0.0),
                                          command({0}, {0.0}, 1.0, {0.0}, 0.0)};
    const auto n = update_priorities(s, cmds, 1.0);
    CHECK(n.phi(0, 0) == 1.0);
    CHECK(n.phi(1, 0) == doctest::Approx(0.2));
  }
}

TEST_CASE("exclusion Euler step examples") {
  AllocationState s(3, 1);
  s.zeta << 0.2, 0.9, 0.5;
  const std::vector<PolicyCommand> cmds{command({0}, {0}, 0, {0.2}, 1.0), command({0}, {0}, 0, {0.9}, 1.0),
                                        command({0}, {0}, 0, {0.5}, 0.0)};
  const auto n = update_exclusions(s, cmds, 1.0);
  CHECK(n.zeta(0, 0) == doctest::Approx(0.62));
  // Holder of the maximum is only pulled toward its own target.
  CHECK(n.zeta(1, 0) == doctest::Approx(0.9));
  // No sharing and target equal to current value.
  CHECK(n.zeta(2, 0) == 0.5);
}

TEST_CASE("exclusion coupling never overshoots the maximum and stays in [0,1]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> wide(-2.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    AllocationState s(6, 2);
    for (Eigen::Index i = 0; i < 6; ++i) {
      for (Eigen::Index l = 0; l < 2; ++l) s.zeta(i, l) = u(rng);
    }
    std::vector<PolicyCommand> cmds;
    for (int i = 0; i < 6; ++i) {
      cmds.push_back(PolicyCommand::from_action(
          std::vector<double>{wide(rng), wide(rng), wide(rng), wide(rng), wide(rng), wide(rng)}, {0, 1}));
    }
    const auto n = update_exclusions(s, cmds, 1.0);
    CHECK((n.zeta.array() >= 0.0).all());
    CHECK((n.zeta.array() <= 1.0).all());
  }
}

TEST_CASE("gate examples") {
  CHECK(gate_closed(0.6, 1.2, 1.0));
  CHECK_FALSE(gate_closed(0.4, 5.0, 1.0));
  CHECK_FALSE(gate_closed(0.9, 0.99, 1.0));
  CHECK(gate_closed(0.5, 1.0, 1.0));

  AllocationState s(1, 3);
  s.phi << 0.8, 0.8, 0.8;
  s.zeta << 0.6, 0.4, 0.9;
  const std::vector<double> e{1.2, 5.0, 0.99};
  CHECK(gate(s, 0, e) == std::vector<double>{0.0, 0.8, 0.8});
}

TEST_CASE("select_task examples") {
  auto w = hand_world({{0.9, 0.9}}, {{{-0.5, 0}, {-0.5, 0.5}, 2},
                                     {{0, -0.5}, {0.5, -0.5}, 2},
                                     {{0.5, 0}, {0.5, 0.5}, 2}});
  AllocationState s(1, 3);
  const std::vector<double> e(3, 0.0);
  s.phi << 0.2, 0.9, 0.5;
  CHECK(select_task(s, 0, w, e) == ObjectId{1});

  s.phi << 0.0, 0.0, 0.0;
  CHECK_FALSE(select_task(s, 0, w, e).has_value());

  s.phi << 0.9, 0.9, 0.1;
  CHECK(select_task(s, 0, w, e) == ObjectId{0});

  s.phi << 0.2, 0.9, 0.5;
  w.objects[1].delivered = true;
  CHECK(select_task(s, 0, w, e) == ObjectId{2});
}

TEST_CASE("select_task masks objects carried by others and respects the gate switch") {
  auto w = hand_world({{0.9, 0.9}, {0.5, 0.0}}, {{{0.5, 0}, {0.5, 0.8}, 1}, {{-0.5, 0}, {-0.5, 0.5}, 1}});
  REQUIRE(w.objects[0].moving());
  AllocationState s(2, 2);
  s.phi << 0.9, 0.3, 0.9, 0.3;
  s.zeta << 0.0, 0.9, 0.0, 0.9;
  const std::vector<double> e{0.0, 2.0};
  CHECK_FALSE(select_task(s, 0, w, e).has_value());
  CHECK(select_task(s, 0, w, e, false) == ObjectId{1});
  CHECK(select_task(s, 1, w, e) == ObjectId{0});
}

TEST_CASE("resize grows with zeros and rejects shrinking") {
  AllocationState s(3, 2);
  s.phi.setConstant(0.5);
  s.zeta.setConstant(0.25);
  const auto g = resize(s, 6, 2, 0.0);
  CHECK(g.phi.rows() == 6);
  CHECK(g.phi.topRows(3) == s.phi);
  CHECK(g.phi.bottomRows(3).isZero());
  CHECK(g.zeta.bottomRows(3).isZero());
  CHECK(g.frozen.size() == 6);
  CHECK(g.phi.cols() == s.phi.cols());
  CHECK_THROWS_AS(resize(s, 2, 2), std::invalid_argument);
}

TEST_CASE("zero_delivered writes zero priorities") {
  auto w = hand_world({{0.9, 0.9}}, {{{0.5, 0}, {0.5, 0.5}, 2}, {{-0.5, 0}, {-0.5, 0.5}, 2}});
  w.objects[1].delivered = true;
  AllocationState s(1, 2);
  s.phi << 0.7, 0.6;
  zero_delivered(s, w);
  CHECK(s.phi(0, 0) == 0.7);
  CHECK(s.phi(0, 1) == 0.0);
}
