#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "mrta/learning.hpp"
#include "mrta/policy.hpp"

using namespace mrta;
using mrta::testing::hand_world;

namespace {

Transition constant_transition(std::size_t robots, std::size_t obs, std::size_t act, double r, bool done) {
  Transition t;
  for (std::size_t i = 0; i < robots; ++i) {
    t.observations.push_back(std::vector<double>(obs, 0.1 * static_cast<double>(i + 1)));
    t.actions.push_back(std::vector<double>(act, 0.5));
    t.rewards.push_back(r);
    t.next_observations.push_back(std::vector<double>(obs, 0.2));
  }
  t.done = done;
  return t;
}

}  // namespace

TEST_CASE("reward rule examples") {
  auto w = hand_world({{0, 0}}, {{{0.5, 0}, {0.5, 0.5}, 2}});
  SUBCASE("no movement, no delivery") {
    auto after = w;
    after.time += 1;
    CHECK(reward(w, after, 0) == doctest::Approx(-0.01));
  }
  SUBCASE("moving 0.05 closer to the selected object") {
    auto after = step_world(w, {ObjectId{0}});
    CHECK(reward(w, after, 0) == doctest::Approx(0.005 - 0.01));
  }
  SUBCASE("one delivery") {
    auto near = hand_world({{0, 0}}, {{{0, 0}, {0.05, 0}, 1}});
    auto after = step_world(near, {ObjectId{0}});
    REQUIRE(after.objects[0].delivered);
    // robot and object move together, so shaping is zero
    CHECK(reward(near, after, 0) == doctest::Approx(10.0 - 0.01));
  }
}

TEST_CASE("replay buffer is FIFO and samples without replacement") {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) buf.push(constant_transition(1, 2, 2, i, false));
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).rewards[0] == 2.0);
  CHECK(buf.at(2).rewards[0] == 4.0);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = buf.sample(3, rng);
    std::set<const Transition*> unique(s.begin(), s.end());
    CHECK(unique.size() == 3);
  }
  CHECK_THROWS_AS(buf.sample(4, rng), std::invalid_argument);
}

TEST_CASE("zero learning rates leave the networks unchanged") {
  std::mt19937_64 rng(3);
  auto model = MaddpgModel::create(2, 5, 3, 8, 2, rng);
  const auto before = model;
  TrainConfig cfg;
  cfg.actor_lr = 0.0;
  cfg.critic_lr = 0.0;
  cfg.tau = 0.5;
  ReplayBuffer buf(10);
  for (int i = 0; i < 4; ++i) buf.push(constant_transition(2, 5, 3, 1.0, false));
  std::vector<const Transition*> batch;
  for (std::size_t i = 0; i < 4; ++i) batch.push_back(&buf.at(i));
  const auto losses = maddpg_update(model, batch, cfg);
  CHECK(std::isfinite(losses.actor));
  CHECK(model.actor == before.actor);
  CHECK(model.critics[0] == before.critics[0]);
  CHECK(model.target_actor == before.target_actor);
}

TEST_CASE("tau one copies online nets into targets") {
  std::mt19937_64 rng(4);
  auto model = MaddpgModel::create(2, 5, 3, 8, 2, rng);
  TrainConfig cfg;
  cfg.tau = 1.0;
  const auto t = constant_transition(2, 5, 3, 1.0, false);
  maddpg_update(model, {&t}, cfg);
  CHECK(model.target_actor == model.actor);
  CHECK(model.target_critics[1] == model.critics[1]);
}

TEST_CASE("critic reaches the analytic fixed point Q = r when gamma is zero") {
  std::mt19937_64 rng(5);
  auto model = MaddpgModel::create(2, 4, 2, 16, 2, rng);
  TrainConfig cfg;
  cfg.gamma = 0.0;
  cfg.critic_lr = 1e-3;
  cfg.actor_lr = 0.0;
  cfg.tau = 0.0;
  const auto t = constant_transition(2, 4, 2, 0.7, false);
  UpdateLosses l;
  for (int i = 0; i < 3000; ++i) l = maddpg_update(model, {&t}, cfg);
  CHECK(std::sqrt(l.critic[0]) < 1e-3);
  CHECK(std::sqrt(l.critic[1]) < 1e-3);
}

TEST_CASE("non-finite rewards surface as divergence") {
  std::mt19937_64 rng(6);
  auto model = MaddpgModel::create(1, 3, 2, 4, 1, rng);
  TrainConfig cfg;
  const auto t = constant_transition(1, 3, 2, std::nan(""), false);
  CHECK_THROWS_AS(maddpg_update(model, {&t}, cfg), TrainingDivergence);
}

TEST_CASE("zero episodes give an empty curve and the initial checkpoint") {
  TrainConfig cfg;
  cfg.episodes = 0;
  cfg.batch_size = 8;
  cfg.hidden_width = 8;
  const auto dir = std::filesystem::temp_directory_path() / "mrta_train_zero";
  std::filesystem::remove_all(dir);
  const auto res = train(cfg, dir);
  CHECK(res.curve.empty());
  CHECK(load_checkpoint(dir / "actor.json") == res.model.actor);
  std::ifstream in(dir / "reward_curve.csv");
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "episode,cumulative_reward_mean,robot_0,robot_1");
  CHECK_FALSE(std::getline(in, row));
  std::filesystem::remove_all(dir);
}

TEST_CASE("training is reproducible for a fixed seed") {
  TrainConfig cfg;
  cfg.episodes = 4;
  cfg.steps_per_episode = 30;
  cfg.batch_size = 16;
  cfg.hidden_width = 8;
  cfg.update_every = 2;
  const auto a = train(cfg);
  const auto b = train(cfg);
  REQUIRE(a.curve.size() == 4);
  CHECK(a.updates > 0);
  std::ostringstream ca, cb;
  write_reward_curve(ca, a.curve, 2);
  write_reward_curve(cb, b.curve, 2);
  CHECK(ca.str() == cb.str());
  CHECK(a.model.actor == b.model.actor);
}

TEST_CASE("training config parsing") {
  const auto c = train_config_from_json(R"({"scenario": "smoke", "episodes": 3, "batch_size": 32, "seed": 9})");
  CHECK(c.episodes == 3);
  CHECK(c.batch_size == 32);
  CHECK(c.seed == 9);
  CHECK_THROWS_AS(train_config_from_json(R"({"episodes": 3, "learning_rate": 1})"), std::invalid_argument);
  CHECK_THROWS_AS(train_config_from_json(R"({"scenario": "validation3"})"), std::invalid_argument);

  const auto p = TrainConfig::full_preset();
  CHECK(p.horizon() == 300);
  CHECK(p.gamma == 0.99);
  CHECK(p.batch_size == 1024);
  CHECK(p.hidden_layers == 4);
}
