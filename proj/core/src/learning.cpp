#include "mrta/learning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "mrta/episode.hpp"
#include "mrta/harness.hpp"
#include "mrta/policy.hpp"

namespace mrta {

TrainConfig TrainConfig::full_preset() {
  TrainConfig c;
  c.scenario = scenario_preset("training");
  c.steps_per_episode = 300;
  c.gamma = 0.99;
  c.batch_size = 1024;
  c.hidden_layers = 4;
  return c;
}

void TrainConfig::validate() const {
  scenario.validate();
  if (!scenario.additions.empty()) throw std::invalid_argument("training needs a fixed robot count");
  if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  if (steps_per_episode < 0) throw std::invalid_argument("steps_per_episode must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (replay_capacity < batch_size) throw std::invalid_argument("replay_capacity must hold one batch");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0,1]");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in [0,1]");
  if (!(actor_lr >= 0.0) || !(critic_lr >= 0.0)) throw std::invalid_argument("learning rates must be >= 0");
  if (!(noise_sigma >= 0.0) || !(noise_final >= 0.0)) throw std::invalid_argument("noise must be >= 0");
  if (hidden_width < 1 || hidden_layers < 1) throw std::invalid_argument("networks need hidden layers");
  if (update_every < 1) throw std::invalid_argument("update_every must be >= 1");
  if (!(grad_clip >= 0.0)) throw std::invalid_argument("grad_clip must be >= 0");
}

TrainConfig train_config_from_json(std::string_view json_text, TrainConfig base) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed training config: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("training config must be a JSON object");
  TrainConfig c = std::move(base);
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "scenario") {
        c.scenario = value.is_string() ? resolve_scenario(value.get<std::string>())
                                       : scenario_from_json(value.dump());
      } else if (key == "full_preset") {
        if (value.get<bool>()) {
          auto keep = c.scenario;
          c = TrainConfig::full_preset();
          if (doc.contains("scenario")) c.scenario = keep;
        }
      } else if (key == "episodes") {
        c.episodes = value.get<int>();
      } else if (key == "steps_per_episode") {
        c.steps_per_episode = value.get<int>();
      } else if (key == "batch_size") {
        c.batch_size = value.get<std::size_t>();
      } else if (key == "gamma") {
        c.gamma = value.get<double>();
      } else if (key == "replay_capacity") {
        c.replay_capacity = value.get<std::size_t>();
      } else if (key == "actor_lr") {
        c.actor_lr = value.get<double>();
      } else if (key == "critic_lr") {
        c.critic_lr = value.get<double>();
      } else if (key == "tau") {
        c.tau = value.get<double>();
      } else if (key == "noise_sigma") {
        c.noise_sigma = value.get<double>();
      } else if (key == "noise_final") {
        c.noise_final = value.get<double>();
      } else if (key == "hidden_width") {
        c.hidden_width = value.get<std::size_t>();
      } else if (key == "hidden_layers") {
        c.hidden_layers = value.get<std::size_t>();
      } else if (key == "update_every") {
        c.update_every = value.get<int>();
      } else if (key == "warmup") {
        c.warmup = value.get<std::size_t>();
      } else if (key == "grad_clip") {
        c.grad_clip = value.get<double>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else {
        throw std::invalid_argument("unknown training config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad training config value: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return train_config_from_json(ss.str());
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be >= 1");
  data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
    return;
  }
  data_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw std::out_of_range("replay index out of range");
  return data_[(head_ + i) % data_.size()];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t count, std::mt19937_64& rng) const {
  if (count > data_.size()) throw std::invalid_argument("not enough transitions to sample");
  // Partial Fisher-Yates over indices.
  std::vector<std::size_t> idx(data_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<const Transition*> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
    out.push_back(&data_[idx[i]]);
  }
  return out;
}

void sgd_step(Mlp& net, const MlpGradients& grads, double lr) {
  auto& layers = net.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    layers[k].weight -= lr * grads.layers[k].weight;
    layers[k].bias -= lr * grads.layers[k].bias;
  }
}

void adam_step(Mlp& net, AdamState& s, const MlpGradients& grads, double lr) {
  if (s.m.layers.empty()) {
    s.m = net.zero_gradients();
    s.v = net.zero_gradients();
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  auto& layers = net.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& g = grads.layers[k];
    auto& m = s.m.layers[k];
    auto& v = s.v.layers[k];
    m.weight = s.beta1 * m.weight + (1.0 - s.beta1) * g.weight;
    v.weight = s.beta2 * v.weight + (1.0 - s.beta2) * g.weight.cwiseProduct(g.weight);
    m.bias = s.beta1 * m.bias + (1.0 - s.beta1) * g.bias;
    v.bias = s.beta2 * v.bias + (1.0 - s.beta2) * g.bias.cwiseProduct(g.bias);
    layers[k].weight.array() -= lr * (m.weight.array() / c1) / ((v.weight.array() / c2).sqrt() + s.eps);
    layers[k].bias.array() -= lr * (m.bias.array() / c1) / ((v.bias.array() / c2).sqrt() + s.eps);
  }
}

void clip_gradients(MlpGradients& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = std::sqrt(grads.squared_norm());
  if (norm > max_norm) grads *= max_norm / norm;
}

MaddpgModel MaddpgModel::create(std::size_t robots, std::size_t obs_dim, std::size_t act_dim,
                                std::size_t hidden_width, std::size_t hidden_layers,
                                std::mt19937_64& rng) {
  MaddpgModel m;
  m.robots = robots;
  m.obs_dim = obs_dim;
  m.act_dim = act_dim;
  std::vector<std::size_t> actor_sizes{obs_dim};
  std::vector<std::size_t> critic_sizes{robots * (obs_dim + act_dim)};
  for (std::size_t h = 0; h < hidden_layers; ++h) {
    actor_sizes.push_back(hidden_width);
    critic_sizes.push_back(hidden_width);
  }
  actor_sizes.push_back(act_dim);
  critic_sizes.push_back(1);
  m.actor = Mlp::initialized(actor_sizes, Activation::relu, Activation::sigmoid, rng);
  m.target_actor = m.actor;
  for (std::size_t i = 0; i < robots; ++i) {
    m.critics.push_back(Mlp::initialized(critic_sizes, Activation::relu, Activation::identity, rng));
  }
  m.target_critics = m.critics;
  m.critic_opt.resize(robots);
  return m;
}

namespace {

Eigen::MatrixXd gather(const std::vector<const Transition*>& batch,
                       std::vector<std::vector<double>> Transition::*field, std::size_t robot,
                       std::size_t width) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& v = ((*batch[b]).*field).at(robot);
    if (v.size() != width) throw std::invalid_argument("transition width mismatch");
    for (std::size_t r = 0; r < width; ++r) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(b)) = v[r];
    }
  }
  return out;
}

Eigen::MatrixXd stack(const std::vector<Eigen::MatrixXd>& obs, const std::vector<Eigen::MatrixXd>& act) {
  Eigen::Index rows = 0;
  for (const auto& o : obs) rows += o.rows();
  for (const auto& a : act) rows += a.rows();
  Eigen::MatrixXd out(rows, obs.front().cols());
  Eigen::Index r = 0;
  for (const auto& o : obs) {
    out.middleRows(r, o.rows()) = o;
    r += o.rows();
  }
  for (const auto& a : act) {
    out.middleRows(r, a.rows()) = a;
    r += a.rows();
  }
  return out;
}

std::string describe_batch(const std::vector<const Transition*>& batch) {
  double max_abs = 0.0;
  bool finite = true;
  for (const auto* t : batch) {
    for (double r : t->rewards) {
      finite = finite && std::isfinite(r);
      max_abs = std::max(max_abs, std::abs(r));
    }
  }
  std::ostringstream os;
  os << "batch=" << batch.size() << " rewards_finite=" << (finite ? "yes" : "no")
     << " max_abs_reward=" << max_abs;
  return os.str();
}

}  // namespace

UpdateLosses maddpg_update(MaddpgModel& model, const std::vector<const Transition*>& batch,
                           const TrainConfig& config) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const std::size_t n = model.robots;
  const auto bsz = static_cast<Eigen::Index>(batch.size());
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  std::vector<Eigen::MatrixXd> obs, act, next_obs, next_act;
  for (std::size_t i = 0; i < n; ++i) {
    obs.push_back(gather(batch, &Transition::observations, i, model.obs_dim));
    act.push_back(gather(batch, &Transition::actions, i, model.act_dim));
    next_obs.push_back(gather(batch, &Transition::next_observations, i, model.obs_dim));
    next_act.push_back(model.target_actor.forward_batch(next_obs.back()));
  }
  Eigen::RowVectorXd not_done(bsz);
  for (Eigen::Index b = 0; b < bsz; ++b) not_done(b) = batch[static_cast<std::size_t>(b)]->done ? 0.0 : 1.0;

  const Eigen::MatrixXd joint = stack(obs, act);
  const Eigen::MatrixXd next_joint = stack(next_obs, next_act);

  UpdateLosses losses;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::RowVectorXd r(bsz);
    for (Eigen::Index b = 0; b < bsz; ++b) r(b) = batch[static_cast<std::size_t>(b)]->rewards.at(i);
    const Eigen::RowVectorXd y =
        r + config.gamma * not_done.cwiseProduct(model.target_critics[i].forward_batch(next_joint).row(0));
    ForwardCache cache;
    const Eigen::MatrixXd q = model.critics[i].forward_batch(joint, &cache);
    const Eigen::MatrixXd diff = q - y;
    const double loss = diff.squaredNorm() * inv_b;
    if (!std::isfinite(loss)) {
      throw TrainingDivergence("critic " + std::to_string(i) + " loss is not finite (" +
                               describe_batch(batch) + ")");
    }
    auto grads = model.critics[i].backward(cache, 2.0 * inv_b * diff);
    clip_gradients(grads, config.grad_clip);
    adam_step(model.critics[i], model.critic_opt[i], grads, config.critic_lr);
    losses.critic.push_back(loss);
  }

  auto actor_grads = model.actor.zero_gradients();
  const auto obs_rows = static_cast<Eigen::Index>(n * model.obs_dim);
  const auto act_rows = static_cast<Eigen::Index>(model.act_dim);
  double actor_loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ForwardCache actor_cache;
    const Eigen::MatrixXd mu = model.actor.forward_batch(obs[i], &actor_cache);
    Eigen::MatrixXd x = joint;
    const Eigen::Index offset = obs_rows + static_cast<Eigen::Index>(i) * act_rows;
    x.middleRows(offset, act_rows) = mu;
    ForwardCache critic_cache;
    const Eigen::MatrixXd q = model.critics[i].forward_batch(x, &critic_cache);
    actor_loss -= q.sum() * inv_b;
    Eigen::MatrixXd dx;
    model.critics[i].backward(critic_cache, Eigen::MatrixXd::Constant(1, bsz, -inv_b), &dx);
    actor_grads += model.actor.backward(actor_cache, dx.middleRows(offset, act_rows));
  }
  actor_loss /= static_cast<double>(n);
  if (!std::isfinite(actor_loss)) {
    throw TrainingDivergence("actor loss is not finite (" + describe_batch(batch) + ")");
  }
  actor_grads *= 1.0 / static_cast<double>(n);
  clip_gradients(actor_grads, config.grad_clip);
  sgd_step(model.actor, actor_grads, config.actor_lr);
  losses.actor = actor_loss;

  model.target_actor.soft_update_from(model.actor, config.tau);
  for (std::size_t i = 0; i < n; ++i) model.target_critics[i].soft_update_from(model.critics[i], config.tau);
  return losses;
}

double reward(const WorldState& before, const WorldState& after, RobotId robot) {
  if (before.objects.size() != after.objects.size()) {
    throw std::invalid_argument("reward needs consecutive states with the same objects");
  }
  if (robot >= after.robots.size()) throw std::invalid_argument("unknown robot");
  double r = -0.01;
  for (std::size_t l = 0; l < after.objects.size(); ++l) {
    if (after.objects[l].delivered && !before.objects[l].delivered) r += 10.0;
  }
  const auto& target = after.robots[robot].target;
  if (target && robot < before.robots.size()) {
    const double d0 = distance(before.robots[robot].position, before.objects[*target].position);
    const double d1 = distance(after.robots[robot].position, after.objects[*target].position);
    r += 0.1 * (d0 - d1);
  }
  return r;
}

namespace {

constexpr std::uint64_t kNoiseStream = 0xa0761d6478bd642fULL;
constexpr std::uint64_t kSampleStream = 0xe7037ed1a0b428dbULL;

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Plays one episode; `act` maps (episode, observations) to one action per
/// robot. `sink` receives each transition.
template <class Act, class Sink>
EpisodeReward play(const TrainConfig& config, int index, std::uint64_t seed, Act&& act, Sink&& sink) {
  ScenarioConfig sc = config.scenario;
  sc.steps = config.horizon();
  Episode ep(sc, seed);
  const std::size_t n = ep.world().robots.size();
  EpisodeReward out;
  out.episode = index;
  out.per_robot.assign(n, 0.0);
  auto obs = ep.observe();
  while (!ep.finished()) {
    const auto actions = act(ep, obs);
    std::vector<PolicyCommand> commands;
    commands.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      commands.push_back(PolicyCommand::from_action(actions[i], obs[i].neighbor_objects));
    }
    const WorldState before = ep.world();
    ep.advance(commands);
    auto next = ep.observe();
    Transition t;
    t.done = ep.all_feasible_delivered();
    for (std::size_t i = 0; i < n; ++i) {
      const double r = reward(before, ep.world(), i);
      out.per_robot[i] += r;
      t.rewards.push_back(r);
      t.observations.push_back(obs[i].values);
      t.actions.push_back(actions[i]);
      t.next_observations.push_back(next[i].values);
    }
    sink(std::move(t));
    ++out.steps;
    obs = std::move(next);
    if (ep.all_feasible_delivered()) break;
  }
  out.mean = std::accumulate(out.per_robot.begin(), out.per_robot.end(), 0.0) / static_cast<double>(n);
  return out;
}

std::size_t robots_of(const TrainConfig& config) {
  return static_cast<std::size_t>(config.scenario.initial_robots);
}

}  // namespace

void write_reward_curve(std::ostream& out, const std::vector<EpisodeReward>& curve, std::size_t robots) {
  out << "episode,cumulative_reward_mean";
  for (std::size_t i = 0; i < robots; ++i) out << ",robot_" << i;
  out << '\n';
  for (const auto& e : curve) {
    out << e.episode << ',' << format_double(e.mean);
    for (double r : e.per_robot) out << ',' << format_double(r);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing reward curve");
}

TrainResult train(const TrainConfig& config, const std::optional<std::filesystem::path>& out_dir) {
  config.validate();
  const std::size_t n = robots_of(config);
  const std::size_t k = config.scenario.neighbors;
  std::mt19937_64 init_rng(config.seed);
  std::mt19937_64 noise_rng(config.seed ^ kNoiseStream);
  std::mt19937_64 sample_rng(config.seed ^ kSampleStream);
  std::normal_distribution<double> gauss(0.0, 1.0);

  TrainResult result;
  result.model = MaddpgModel::create(n, observation_size(k), action_size(k), config.hidden_width,
                                     config.hidden_layers, init_rng);
  auto& model = result.model;
  ReplayBuffer buffer(config.replay_capacity);
  const std::size_t warmup = std::max(config.warmup, config.batch_size);
  long env_steps = 0;

  auto flush = [&] {
    if (!out_dir) return;
    std::filesystem::create_directories(*out_dir);
    save_checkpoint(model.actor, *out_dir / "actor.json");
    std::ofstream out(*out_dir / "reward_curve.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + (*out_dir / "reward_curve.csv").string());
    write_reward_curve(out, result.curve, n);
  };

  try {
    for (int e = 0; e < config.episodes; ++e) {
      const double frac = config.episodes > 1 ? static_cast<double>(e) / (config.episodes - 1) : 0.0;
      const double sigma = config.noise_sigma + (config.noise_final - config.noise_sigma) * frac;
      auto act = [&](const Episode&, const std::vector<Observation>& obs) {
        std::vector<std::vector<double>> actions;
        actions.reserve(obs.size());
        for (const auto& o : obs) {
          const Eigen::Map<const Eigen::VectorXd> x(o.values.data(), static_cast<Eigen::Index>(o.values.size()));
          ForwardCache cache;
          model.actor.forward_batch(x, &cache);
          Eigen::VectorXd pre = cache.pre.back().col(0);
          for (Eigen::Index j = 0; j < pre.size(); ++j) pre(j) = logistic(pre(j) + sigma * gauss(noise_rng));
          actions.push_back(to_std(pre));
        }
        return actions;
      };
      auto sink = [&](Transition t) {
        buffer.push(std::move(t));
        ++env_steps;
        if (buffer.size() >= warmup && env_steps % config.update_every == 0) {
          maddpg_update(model, buffer.sample(config.batch_size, sample_rng), config);
          ++result.updates;
        }
      };
      result.curve.push_back(play(config, e, episode_seed(config.seed, static_cast<std::size_t>(e)), act, sink));
    }
  } catch (const TrainingDivergence&) {
    flush();
    throw;
  }
  flush();
  return result;
}

std::vector<EpisodeReward> random_baseline(const TrainConfig& config, int episodes, std::uint64_t seed) {
  config.validate();
  const std::size_t k = config.scenario.neighbors;
  std::vector<EpisodeReward> out;
  for (int e = 0; e < episodes; ++e) {
    const auto s = episode_seed(seed, static_cast<std::size_t>(e));
    auto act = [&](const Episode& ep, const std::vector<Observation>& obs) {
      std::vector<std::vector<double>> actions;
      for (std::size_t i = 0; i < obs.size(); ++i) {
        actions.push_back(random_policy(s, i, static_cast<std::uint64_t>(ep.step_index()), k).to_action());
      }
      return actions;
    };
    out.push_back(play(config, e, s, act, [](Transition) {}));
  }
  return out;
}

std::vector<EpisodeReward> evaluate_actor(const TrainConfig& config, const Mlp& actor, int episodes,
                                          std::uint64_t seed) {
  config.validate();
  std::vector<EpisodeReward> out;
  for (int e = 0; e < episodes; ++e) {
    const auto s = episode_seed(seed, static_cast<std::size_t>(e));
    auto act = [&](const Episode&, const std::vector<Observation>& obs) {
      std::vector<std::vector<double>> actions;
      for (const auto& o : obs) actions.push_back(policy_forward(actor, o).to_action());
      return actions;
    };
    out.push_back(play(config, e, s, act, [](Transition) {}));
  }
  return out;
}

}  // namespace mrta
