#include "mrta/episode.hpp"

#include <cmath>
#include <stdexcept>

namespace mrta {

Episode::Episode(const ScenarioConfig& scenario, std::uint64_t seed)
    : scenario_(scenario),
      seed_(seed),
      world_(make_world(scenario, seed)),
      state_(world_.robots.size(), world_.objects.size(), scenario.allocation),
      ledger_(world_.objects.size(), scenario.kappa, scenario.initial_robots) {
  const int max_n = scenario_.max_robots();
  for (const auto& obj : world_.objects) {
    if (obj.weight <= max_n) feasible_.push_back(obj.id);
  }
  if (feasible_.empty()) completion_ = 0;
}

std::optional<AdditionEvent> Episode::apply_schedule() {
  if (next_addition_ >= scenario_.additions.size()) return std::nullopt;
  const auto& add = scenario_.additions[next_addition_];
  const int due = static_cast<int>(std::lround(add.time / world_.params.dt));
  if (step_ < due) return std::nullopt;
  ++next_addition_;

  AdditionEvent ev;
  ev.step = step_;
  ev.time = world_.time;
  ev.added = add.count;
  ev.robots_before = static_cast<int>(world_.active_count());
  ev.experience_before = ledger_.query_all();

  world_ = add_robots(world_, add.count, seed_ ^ (0x9e3779b97f4a7c15ULL * (next_addition_ + 1)));
  state_ = resize(state_, world_.robots.size(), world_.objects.size(), 0.0);
  ledger_.set_robot_count(static_cast<int>(world_.active_count()));

  ev.robots_after = static_cast<int>(world_.active_count());
  ev.experience_after = ledger_.query_all();
  return ev;
}

std::vector<double> Episode::visible_experiences() const {
  auto e = ledger_.query_all();
  if (scenario_.ablation == Ablation::no_e) std::fill(e.begin(), e.end(), 0.0);
  return e;
}

std::vector<Observation> Episode::observe() const {
  const auto e = visible_experiences();
  std::vector<Observation> out;
  out.reserve(world_.robots.size());
  for (const auto& r : world_.robots) {
    out.push_back(build_observation(world_, state_, e, r.id, scenario_.neighbors));
  }
  return out;
}

StepRecord Episode::advance(const std::vector<PolicyCommand>& commands) {
  if (finished()) throw std::logic_error("episode already finished");
  if (commands.size() != world_.robots.size()) {
    throw std::invalid_argument("expected one command per robot");
  }
  const double dt = world_.params.dt;
  const std::size_t n = world_.robots.size();
  const std::size_t m = world_.objects.size();
  const bool gate_enabled = scenario_.ablation != Ablation::no_de;

  std::vector<int> attached(m, 0);
  for (const auto& r : world_.robots) {
    if (r.connected_to) ++attached[*r.connected_to];
  }
  for (const auto& r : world_.robots) {
    state_.frozen[r.id] = r.connected_to && attached[*r.connected_to] >= world_.objects[*r.connected_to].weight;
  }

  if (gate_enabled) state_ = update_exclusions(state_, commands, dt);
  state_ = update_priorities(state_, commands, dt);
  zero_delivered(state_, world_);

  ledger_.accumulate(world_, dt);
  const auto experience = ledger_.query_all();

  StepRecord rec;
  rec.connected = attached;
  rec.experience = experience;
  rec.gate = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  rec.phi_hat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < n; ++i) {
    const auto hat = gate(state_, i, experience);
    for (std::size_t l = 0; l < m; ++l) {
      const auto r = static_cast<Eigen::Index>(i);
      const auto c = static_cast<Eigen::Index>(l);
      rec.gate(r, c) = gate_closed(state_.zeta(r, c), experience[l], state_.params.epsilon) ? 1 : 0;
      rec.phi_hat(r, c) = gate_enabled ? hat[l] : state_.phi(r, c);
    }
  }

  TargetList targets(n);
  for (const auto& r : world_.robots) {
    if (state_.frozen[r.id]) {
      targets[r.id] = r.connected_to;
    } else {
      targets[r.id] = select_task(state_, r.id, world_, experience, gate_enabled);
    }
  }
  state_.target = targets;
  world_ = step_world(world_, targets);
  ++step_;

  if (!completion_ && all_feasible_delivered()) completion_ = step_;

  rec.step = step_;
  rec.world = world_;
  rec.phi = state_.phi;
  rec.zeta = state_.zeta;
  rec.targets = std::move(targets);
  return rec;
}

bool Episode::all_feasible_delivered() const {
  for (auto l : feasible_) {
    if (!world_.objects[l].delivered) return false;
  }
  return true;
}

PolicyDriver::PolicyDriver(const ScenarioConfig& scenario) : kind_(scenario.policy.kind) {
  scripted_.k = scenario.neighbors;
  scripted_.epsilon = scenario.allocation.epsilon;
  scripted_.coop_steps = scenario.coop_steps;
  scripted_.gate_enabled = scenario.ablation != Ablation::no_de;
  if (kind_ == PolicySource::Kind::checkpoint) actor_ = load_checkpoint(scenario.policy.checkpoint);
}

PolicyDriver::PolicyDriver(const ScenarioConfig& scenario, Mlp actor) : PolicyDriver([&] {
      ScenarioConfig s = scenario;
      s.policy.kind = PolicySource::Kind::scripted;
      return s;
    }()) {
  kind_ = PolicySource::Kind::checkpoint;
  actor_ = std::move(actor);
}

std::vector<PolicyCommand> PolicyDriver::decide(const Episode& episode) const {
  const auto& world = episode.world();
  std::vector<PolicyCommand> out;
  out.reserve(world.robots.size());
  switch (kind_) {
    case PolicySource::Kind::scripted: {
      const auto e = episode.visible_experiences();
      for (const auto& r : world.robots) {
        out.push_back(scripted_policy(world, episode.allocation(), e, r.id, scripted_));
      }
      break;
    }
    case PolicySource::Kind::random: {
      const auto obs = episode.observe();
      for (const auto& r : world.robots) {
        auto cmd = random_policy(episode.seed(), r.id, static_cast<std::uint64_t>(episode.step_index()),
                                 episode.scenario().neighbors);
        cmd.neighbor_object_ids = obs[r.id].neighbor_objects;
        out.push_back(std::move(cmd));
      }
      break;
    }
    case PolicySource::Kind::checkpoint: {
      const auto obs = episode.observe();
      for (const auto& o : obs) out.push_back(policy_forward(*actor_, o));
      break;
    }
  }
  return out;
}

}  // namespace mrta
