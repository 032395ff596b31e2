#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrta/nn.hpp"
#include "mrta/scenario.hpp"
#include "mrta/world.hpp"

namespace mrta {

struct TrainConfig {
  ScenarioConfig scenario = scenario_preset("smoke");
  int episodes = 500;
  int steps_per_episode = 0;  // 0: use the scenario's step budget
  std::size_t batch_size = 1024;
  double gamma = 0.99;
  std::size_t replay_capacity = 100000;
  double actor_lr = 1e-4;   // plain SGD
  double critic_lr = 1e-3;  // Adam
  double tau = 0.01;
  double noise_sigma = 0.1;  // pre-squash Gaussian, decays linearly
  double noise_final = 0.0;
  std::size_t hidden_width = 64;
  std::size_t hidden_layers = 4;
  int update_every = 1;        // environment steps between updates
  std::size_t warmup = 0;      // transitions before the first update (at least batch_size)
  double grad_clip = 0.0;      // global-norm clip, 0 disables
  std::uint64_t seed = 1;

  /// Full-scale defaults: 300-step episodes, discount 0.99, batch 1024,
  /// four hidden layers in both nets.
  static TrainConfig full_preset();
  int horizon() const { return steps_per_episode > 0 ? steps_per_episode : scenario.steps; }
  void validate() const;
};

TrainConfig train_config_from_json(std::string_view json_text, TrainConfig base = {});
TrainConfig load_train_config(const std::filesystem::path& path);

struct Transition {
  std::vector<std::vector<double>> observations;
  std::vector<std::vector<double>> actions;
  std::vector<double> rewards;
  std::vector<std::vector<double>> next_observations;
  bool done = false;
};

/// Fixed-capacity FIFO store.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// i-th oldest stored transition.
  const Transition& at(std::size_t i) const;
  /// `count` distinct transitions; throws when fewer are stored.
  std::vector<const Transition*> sample(std::size_t count, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest entry once full
  std::vector<Transition> data_;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  MlpGradients m;
  MlpGradients v;
};

void sgd_step(Mlp& net, const MlpGradients& grads, double lr);
void adam_step(Mlp& net, AdamState& state, const MlpGradients& grads, double lr);
/// Scales `grads` so its global norm is at most `max_norm` (no-op for 0).
void clip_gradients(MlpGradients& grads, double max_norm);

class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shared actor (parameter sharing across robots) and one centralised critic
/// per robot over joint observations and actions.
struct MaddpgModel {
  std::size_t robots = 0;
  std::size_t obs_dim = 0;
  std::size_t act_dim = 0;
  Mlp actor;
  Mlp target_actor;
  std::vector<Mlp> critics;
  std::vector<Mlp> target_critics;
  std::vector<AdamState> critic_opt;

  static MaddpgModel create(std::size_t robots, std::size_t obs_dim, std::size_t act_dim,
                            std::size_t hidden_width, std::size_t hidden_layers,
                            std::mt19937_64& rng);
  std::size_t critic_input() const { return robots * (obs_dim + act_dim); }
};

struct UpdateLosses {
  std::vector<double> critic;  // mean squared TD error per robot
  double actor = 0.0;          // mean of -Q over robots and batch
};

/// One centralised-critic update on `batch`, followed by soft target updates.
UpdateLosses maddpg_update(MaddpgModel& model, const std::vector<const Transition*>& batch,
                           const TrainConfig& config);

/// +10 for each newly delivered object, 0.1 times the distance the robot
/// closed on its selected object, and -0.01 per step.
double reward(const WorldState& before, const WorldState& after, RobotId robot);

struct EpisodeReward {
  int episode = 0;
  int steps = 0;
  double mean = 0.0;
  std::vector<double> per_robot;
};

struct TrainResult {
  std::vector<EpisodeReward> curve;
  MaddpgModel model;
  std::size_t updates = 0;
};

/// Runs the training loop. With `out_dir`, writes reward_curve.csv and
/// actor.json there (actor.json is also written when training diverges).
TrainResult train(const TrainConfig& config,
                  const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Cumulative rewards of the uniform random policy under the same reward.
std::vector<EpisodeReward> random_baseline(const TrainConfig& config, int episodes,
                                           std::uint64_t seed);

/// Cumulative rewards of a fixed actor without exploration noise.
std::vector<EpisodeReward> evaluate_actor(const TrainConfig& config, const Mlp& actor, int episodes,
                                          std::uint64_t seed);

void write_reward_curve(std::ostream& out, const std::vector<EpisodeReward>& curve,
                        std::size_t robots);

}  // namespace mrta
