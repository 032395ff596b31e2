#include "mrta/policy.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

namespace mrta {

namespace {

template <typename Id>
std::vector<std::optional<Id>> take_nearest(std::vector<std::pair<double, Id>> ranked,
                                            std::size_t k) {
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::optional<Id>> out(k);
  for (std::size_t s = 0; s < k && s < ranked.size(); ++s) out[s] = ranked[s].second;
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::vector<std::optional<ObjectId>> nearest_objects(const WorldState& world, RobotId robot,
                                                     std::size_t k) {
  const Vec2 at = world.robots.at(robot).position;
  std::vector<std::pair<double, ObjectId>> ranked;
  for (const auto& obj : world.objects) {
    if (!obj.delivered) ranked.emplace_back(distance(at, obj.position), obj.id);
  }
  return take_nearest(std::move(ranked), k);
}

std::vector<std::optional<RobotId>> nearest_robots(const WorldState& world, RobotId robot,
                                                   std::size_t k) {
  const Vec2 at = world.robots.at(robot).position;
  std::vector<std::pair<double, RobotId>> ranked;
  for (const auto& r : world.robots) {
    if (r.id != robot && r.active) ranked.emplace_back(distance(at, r.position), r.id);
  }
  return take_nearest(std::move(ranked), k);
}

Observation build_observation(const WorldState& world, const AllocationState& state,
                              std::span<const double> experiences, RobotId robot, std::size_t k) {
  if (experiences.size() != world.objects.size()) {
    throw std::invalid_argument("experience vector does not match object count");
  }
  Observation obs;
  obs.neighbor_objects = nearest_objects(world, robot, k);
  obs.neighbor_robots = nearest_robots(world, robot, k);
  obs.values.reserve(observation_size(k));
  auto& v = obs.values;

  auto push_priorities = [&](RobotId who) {
    for (const auto& l : obs.neighbor_objects) v.push_back(l ? state.phi(who, *l) : 0.0);
  };

  const auto& self = world.robots.at(robot);
  v.push_back(self.position.x);
  v.push_back(self.position.y);
  push_priorities(robot);

  for (const auto& j : obs.neighbor_robots) {
    if (j) {
      v.push_back(world.robots[*j].position.x);
      v.push_back(world.robots[*j].position.y);
      push_priorities(*j);
    } else {
      v.insert(v.end(), 2 + k, 0.0);
    }
  }

  for (const auto& l : obs.neighbor_objects) {
    if (l) {
      const auto& o = world.objects[*l];
      v.insert(v.end(), {o.position.x, o.position.y, o.goal.x, o.goal.y, o.velocity.x, o.velocity.y});
    } else {
      v.insert(v.end(), 6, 0.0);
    }
  }

  for (const auto& l : obs.neighbor_objects) v.push_back(l ? experiences[*l] : 0.0);
  return obs;
}

PolicyCommand policy_forward(const Mlp& actor, const Observation& obs) {
  const std::size_t k = obs.neighbor_objects.size();
  if (actor.input_size() != obs.values.size() || actor.output_size() != action_size(k)) {
    throw std::invalid_argument("actor shape " + std::to_string(actor.input_size()) + "->" +
                                std::to_string(actor.output_size()) +
                                " does not match observation of length " +
                                std::to_string(obs.values.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> x(obs.values.data(),
                                            static_cast<Eigen::Index>(obs.values.size()));
  const Eigen::VectorXd y = actor.forward(x);
  return PolicyCommand::from_action(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                                    obs.neighbor_objects);
}

PolicyCommand scripted_policy(const WorldState& world, const AllocationState& state,
                              std::span<const double> experiences, RobotId robot,
                              const ScriptedParams& params) {
  if (experiences.size() != world.objects.size()) {
    throw std::invalid_argument("experience vector does not match object count");
  }
  const std::size_t m = world.objects.size();
  const auto n = static_cast<int>(world.active_count());

  std::vector<int> attached(m, 0);
  std::vector<int> committed(m, 0);
  std::vector<bool> requested(m, false);
  for (const auto& r : world.robots) {
    if (!r.active || !r.connected_to) continue;
    const ObjectId l = *r.connected_to;
    ++attached[l];
    if (r.target != l) continue;
    ++committed[l];
    if (!world.objects[l].moving() && r.attached_steps >= params.coop_steps) requested[l] = true;
  }

  std::optional<ObjectId> rally;
  for (const auto& obj : world.objects) {
    if (obj.delivered || obj.moving() || !requested[obj.id]) continue;
    if (!rally || committed[obj.id] > committed[*rally]) rally = obj.id;
  }

  const auto& self = world.robots.at(robot);
  const auto own = self.connected_to;
  auto carried_by_others = [&](ObjectId l) {
    return own != l && attached[l] >= world.objects[l].weight;
  };
  auto open_for_me = [&](ObjectId l) {
    const auto& obj = world.objects[l];
    if (obj.delivered || carried_by_others(l)) return false;
    return !params.gate_enabled ||
           !gate_closed(state.zeta(robot, l), experiences[l], params.epsilon);
  };

  PolicyCommand cmd;
  const bool transporting = own && attached[*own] >= world.objects[*own].weight;

  std::optional<ObjectId> focus;
  if (!transporting) {
    if (rally) {
      focus = rally;
    } else {
      double best = 0.0;
      for (const auto& obj : world.objects) {
        if (!open_for_me(obj.id)) continue;
        const double d = distance(self.position, obj.position);
        if (!focus || d < best) {
          focus = obj.id;
          best = d;
        }
      }
    }
  }

  // Slots: focus first, then whatever currently leads this robot's
  // priorities (so it can be driven down), then nearest undelivered objects.
  std::vector<ObjectId> slots;
  auto add_slot = [&](std::optional<ObjectId> l) {
    if (!l || slots.size() >= params.k) return;
    if (std::find(slots.begin(), slots.end(), *l) == slots.end()) slots.push_back(*l);
  };
  if (transporting) add_slot(own);
  add_slot(focus);
  {
    std::optional<ObjectId> leader;
    double lead = 0.0;
    for (const auto& obj : world.objects) {
      if (obj.delivered) continue;
      const double p = state.phi(robot, obj.id);
      if (p > lead) {
        lead = p;
        leader = obj.id;
      }
    }
    add_slot(leader);
  }
  for (const auto& l : nearest_objects(world, robot, params.k)) add_slot(l);

  cmd.neighbor_object_ids.assign(params.k, std::nullopt);
  cmd.target_phi.assign(params.k, 0.0);
  cmd.target_zeta.assign(params.k, 0.0);
  bool any_exclusion = false;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const ObjectId l = slots[s];
    cmd.neighbor_object_ids[s] = l;
    if (transporting) {
      cmd.target_phi[s] = state.phi(robot, l);
      cmd.target_zeta[s] = state.zeta(robot, l);
      continue;
    }
    cmd.target_phi[s] = (focus == l) ? 1.0 : 0.0;
    const bool partial_rally = rally == l && attached[l] < n;
    const bool exclude = experiences[l] >= params.epsilon && !partial_rally;
    cmd.target_zeta[s] = exclude ? 1.0 : 0.0;
    any_exclusion = any_exclusion || exclude;
  }
  cmd.alpha = (!transporting && rally && focus == rally) ? 1.0 : 0.0;
  cmd.beta = any_exclusion ? 1.0 : 0.0;
  return cmd;
}

double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

PolicyCommand random_policy(std::uint64_t seed, RobotId robot, std::uint64_t step, std::size_t k) {
  std::vector<double> action(action_size(k));
  for (std::size_t s = 0; s < action.size(); ++s) action[s] = keyed_uniform(seed, robot, step, s);
  return PolicyCommand::from_action(action, std::vector<std::optional<ObjectId>>(k));
}

}  // namespace mrta
