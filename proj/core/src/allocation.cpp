#include "mrta/allocation.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mrta {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

void check_commands(const AllocationState& state, std::span<const PolicyCommand> commands,
                    double dt) {
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  if (commands.size() != state.robots()) {
    throw std::invalid_argument("expected one command per robot");
  }
}

}  // namespace

PolicyCommand PolicyCommand::from_action(std::span<const double> action,
                                         std::vector<std::optional<ObjectId>> neighbors) {
  const std::size_t k = neighbors.size();
  if (action.size() != 2 * k + 2) {
    throw std::invalid_argument("action length " + std::to_string(action.size()) +
                                " does not match 2K+2 for K=" + std::to_string(k));
  }
  PolicyCommand cmd;
  cmd.neighbor_object_ids = std::move(neighbors);
  cmd.target_phi.resize(k);
  cmd.target_zeta.resize(k);
  for (std::size_t s = 0; s < k; ++s) {
    cmd.target_phi[s] = clamp01(action[s]);
    cmd.target_zeta[s] = clamp01(action[k + 1 + s]);
  }
  cmd.alpha = clamp01(action[k]);
  cmd.beta = clamp01(action[2 * k + 1]);
  return cmd;
}

std::vector<double> PolicyCommand::to_action() const {
  std::vector<double> out;
  out.reserve(2 * slots() + 2);
  out.insert(out.end(), target_phi.begin(), target_phi.end());
  out.push_back(alpha);
  out.insert(out.end(), target_zeta.begin(), target_zeta.end());
  out.push_back(beta);
  return out;
}

AllocationState::AllocationState(std::size_t robots, std::size_t objects, AllocationParams p)
    : phi(Eigen::MatrixXd::Zero(robots, objects)),
      zeta(Eigen::MatrixXd::Zero(robots, objects)),
      frozen(robots, false),
      target(robots),
      params(p) {}

TargetVectors build_targets(const AllocationState& state, RobotId robot, const PolicyCommand& cmd) {
  if (robot >= state.robots()) throw std::invalid_argument("unknown robot id");
  if (cmd.target_phi.size() != cmd.slots() || cmd.target_zeta.size() != cmd.slots()) {
    throw std::invalid_argument("command slot counts disagree");
  }
  TargetVectors t;
  const auto m = state.objects();
  t.priority.resize(m);
  t.exclusion.resize(m);
  for (std::size_t l = 0; l < m; ++l) {
    t.priority[l] = state.phi(robot, l);
    t.exclusion[l] = state.zeta(robot, l);
  }
  for (std::size_t s = 0; s < cmd.slots(); ++s) {
    const auto& id = cmd.neighbor_object_ids[s];
    if (!id) continue;
    if (*id >= m) throw std::invalid_argument("neighbor object id out of range");
    t.priority[*id] = cmd.target_phi[s];
    t.exclusion[*id] = cmd.target_zeta[s];
  }
  return t;
}

AllocationState update_priorities(const AllocationState& state,
                                  std::span<const PolicyCommand> commands, double dt) {
  check_commands(state, commands, dt);
  AllocationState next = state;
  const auto n = state.robots();
  const auto m = state.objects();
  const double k = state.params.k_phi;
  for (std::size_t i = 0; i < n; ++i) {
    if (state.frozen[i]) continue;
    const auto c = build_targets(state, i, commands[i]).priority;
    const bool share = step_half(commands[i].alpha);
    for (std::size_t l = 0; l < m; ++l) {
      const double own = state.phi(i, l);
      double rate = k * (c[l] - own);
      if (share) {
        double disagreement = 0.0;
        for (std::size_t j = 0; j < n; ++j) disagreement += state.phi(j, l) - own;
        rate += k * disagreement;
      }
      next.phi(i, l) = own + dt * rate;
    }
  }
  return next;
}

AllocationState update_exclusions(const AllocationState& state,
                                  std::span<const PolicyCommand> commands, double dt) {
  check_commands(state, commands, dt);
  AllocationState next = state;
  const auto n = state.robots();
  const auto m = state.objects();
  const double k = state.params.k_zeta;
  Eigen::VectorXd column_max = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  if (n > 0) column_max = state.zeta.colwise().maxCoeff().transpose();

  for (std::size_t i = 0; i < n; ++i) {
    const auto d = build_targets(state, i, commands[i]).exclusion;
    const bool share = step_half(commands[i].beta);
    for (std::size_t l = 0; l < m; ++l) {
      const double own = state.zeta(i, l);
      double value = own + dt * k * (d[l] - own);
      if (share) {
        const double gap = column_max(static_cast<Eigen::Index>(l)) - own;
        value += std::min(dt * k * static_cast<double>(n) * gap, gap);
      }
      next.zeta(i, l) = clamp01(value);
    }
  }
  return next;
}

bool gate_closed(double zeta, double experience, double epsilon) {
  return step_half(zeta) && experience >= epsilon;
}

std::vector<double> gate(const AllocationState& state, RobotId robot,
                         std::span<const double> experiences) {
  if (robot >= state.robots()) throw std::invalid_argument("unknown robot id");
  if (experiences.size() != state.objects()) {
    throw std::invalid_argument("experience vector does not match object count");
  }
  std::vector<double> out(state.objects());
  for (std::size_t l = 0; l < out.size(); ++l) {
    const bool closed = gate_closed(state.zeta(robot, l), experiences[l], state.params.epsilon);
    out[l] = closed ? 0.0 : state.phi(robot, l);
  }
  return out;
}

std::optional<ObjectId> select_task(const AllocationState& state, RobotId robot,
                                    const WorldState& world,
                                    std::span<const double> experiences, bool gate_enabled) {
  if (robot >= state.robots()) throw std::invalid_argument("unknown robot id");
  if (world.objects.size() != state.objects()) {
    throw std::invalid_argument("world and allocation disagree on object count");
  }
  std::vector<double> priorities;
  if (gate_enabled) {
    priorities = gate(state, robot, experiences);
  } else {
    priorities.assign(state.phi.row(robot).begin(), state.phi.row(robot).end());
  }

  std::vector<int> attached(world.objects.size(), 0);
  std::optional<ObjectId> own;
  for (const auto& r : world.robots) {
    const auto c = resolve_connection(world, r.id, r.target);
    if (!c) continue;
    ++attached[*c];
    if (r.id == robot) own = c;
  }

  std::optional<ObjectId> best;
  double best_value = 0.0;
  for (const auto& obj : world.objects) {
    if (obj.delivered) continue;
    const bool carried_by_others = own != obj.id && attached[obj.id] >= obj.weight;
    if (carried_by_others) continue;
    const double v = priorities[obj.id];
    if (v > best_value) {
      best_value = v;
      best = obj.id;
    }
  }
  return best;
}

AllocationState resize(const AllocationState& state, std::size_t robots, std::size_t objects,
                       double init_value) {
  if (robots < state.robots() || objects < state.objects()) {
    throw std::invalid_argument("allocation state cannot shrink");
  }
  AllocationState next = state;
  const auto old_n = static_cast<Eigen::Index>(state.robots());
  const auto old_m = static_cast<Eigen::Index>(state.objects());
  const auto n = static_cast<Eigen::Index>(robots);
  const auto m = static_cast<Eigen::Index>(objects);
  for (Eigen::MatrixXd* mat : {&next.phi, &next.zeta}) {
    mat->conservativeResize(n, m);
    mat->bottomRows(n - old_n).setConstant(init_value);
    mat->rightCols(m - old_m).setConstant(init_value);
  }
  next.frozen.resize(robots, false);
  next.target.resize(robots);
  return next;
}

void zero_delivered(AllocationState& state, const WorldState& world) {
  for (const auto& obj : world.objects) {
    if (obj.delivered && obj.id < state.objects()) {
      state.phi.col(static_cast<Eigen::Index>(obj.id)).setZero();
    }
  }
}

}  // namespace mrta
