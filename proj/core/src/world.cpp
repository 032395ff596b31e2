#include "mrta/world.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace mrta {

namespace {

void require_object(const WorldState& world, ObjectId object) {
  if (object >= world.objects.size()) {
    throw std::invalid_argument("unknown object id " + std::to_string(object));
  }
}

std::vector<int> connection_counts(const WorldState& world,
                                   const std::vector<std::optional<ObjectId>>& conn) {
  std::vector<int> counts(world.objects.size(), 0);
  for (const auto& c : conn) {
    if (c) ++counts[*c];
  }
  return counts;
}

}  // namespace

void KinematicsParams::validate() const {
  if (!(delta > 0 && robot_speed > 0 && transport_speed > 0 && goal_tolerance > 0 &&
        arena_half_width > 0 && dt > 0)) {
    throw std::invalid_argument("kinematics parameters must be strictly positive");
  }
}

std::size_t WorldState::active_count() const {
  std::size_t n = 0;
  for (const auto& r : robots) n += r.active ? 1 : 0;
  return n;
}

std::optional<ObjectId> resolve_connection(const WorldState& world, RobotId robot,
                                           std::optional<ObjectId> preferred) {
  const RobotBody& body = world.robots.at(robot);
  if (!body.active) return std::nullopt;
  const double delta = world.params.delta;

  std::optional<ObjectId> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& obj : world.objects) {
    if (obj.delivered) continue;
    const double d = distance(body.position, obj.position);
    if (d > delta) continue;
    if (preferred && *preferred == obj.id) return obj.id;
    if (d < best_dist) {
      best_dist = d;
      best = obj.id;
    }
  }
  return best;
}

std::vector<RobotId> connection_set(const WorldState& world, ObjectId object) {
  require_object(world, object);
  std::vector<RobotId> members;
  for (const auto& r : world.robots) {
    if (resolve_connection(world, r.id, r.target) == object) members.push_back(r.id);
  }
  return members;
}

void refresh_connections(WorldState& world) {
  std::vector<std::optional<ObjectId>> conn(world.robots.size());
  for (auto& r : world.robots) {
    conn[r.id] = resolve_connection(world, r.id, r.target);
    if (conn[r.id] && conn[r.id] == r.connected_to) {
      ++r.attached_steps;
    } else {
      r.attached_steps = conn[r.id] ? 1 : 0;
    }
    r.connected_to = conn[r.id];
  }

  const auto counts = connection_counts(world, conn);
  const auto& p = world.params;
  for (auto& obj : world.objects) {
    obj.velocity = {};
    if (obj.delivered || counts[obj.id] < obj.weight) continue;
    const Vec2 disp = step_toward(obj.position, obj.goal, p.transport_speed * p.dt);
    obj.velocity = disp * (1.0 / p.dt);
  }
}

WorldState step_world(const WorldState& world, const TargetList& targets) {
  world.params.validate();
  if (targets.size() != world.robots.size()) {
    throw std::invalid_argument("target list size does not match robot count");
  }
  for (const auto& t : targets) {
    if (t) require_object(world, *t);
  }

  WorldState next = world;
  const auto& p = world.params;

  std::vector<std::optional<ObjectId>> conn(world.robots.size());
  for (const auto& r : world.robots) conn[r.id] = resolve_connection(world, r.id, targets[r.id]);
  const auto counts = connection_counts(world, conn);

  std::vector<bool> carried(world.robots.size(), false);
  for (const auto& obj : world.objects) {
    if (obj.delivered || counts[obj.id] < obj.weight) continue;
    const Vec2 disp = step_toward(obj.position, obj.goal, p.transport_speed * p.dt);
    next.objects[obj.id].position += disp;
    for (const auto& r : world.robots) {
      if (conn[r.id] == obj.id) {
        next.robots[r.id].position += disp;
        carried[r.id] = true;
      }
    }
  }

  for (const auto& r : world.robots) {
    if (!r.active || carried[r.id]) continue;
    const auto& target = targets[r.id];
    Vec2 destination = r.home;
    if (target) {
      const auto& obj = world.objects[*target];
      if (obj.delivered) continue;  // hold position
      destination = obj.position;
    }
    next.robots[r.id].position += step_toward(r.position, destination, p.robot_speed * p.dt);
  }

  for (auto& obj : next.objects) {
    const bool moved = !world.objects[obj.id].delivered && counts[obj.id] >= obj.weight;
    if (moved && distance(obj.position, obj.goal) <= p.goal_tolerance) {
      obj.delivered = true;
    }
  }

  for (auto& r : next.robots) r.target = targets[r.id];
  next.time = world.time + p.dt;
  refresh_connections(next);
  return next;
}

WorldState add_robots(const WorldState& world, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("add_robots requires count >= 1");
  WorldState next = world;
  std::mt19937_64 rng(seed);
  for (int k = 0; k < count; ++k) {
    RobotBody body;
    body.id = next.robots.size();
    body.position = sample_spawn(next, rng, 2.0 * world.params.delta);
    body.home = body.position;
    next.robots.push_back(body);
  }
  refresh_connections(next);
  // Refresh bumps counters for robots that were already docked; undo that so
  // adding robots is not observable as an extra step of attachment.
  for (std::size_t i = 0; i < world.robots.size(); ++i) {
    next.robots[i].attached_steps = world.robots[i].attached_steps;
  }
  return next;
}

std::vector<ObjectId> feasible_remaining(const WorldState& world) {
  const auto n = static_cast<int>(world.active_count());
  std::vector<ObjectId> out;
  for (const auto& obj : world.objects) {
    if (!obj.delivered && obj.weight <= n) out.push_back(obj.id);
  }
  return out;
}

Vec2 sample_spawn(const WorldState& world, std::mt19937_64& rng, double clearance) {
  const double h = world.params.arena_half_width;
  std::uniform_real_distribution<double> coord(-h, h);
  Vec2 candidate;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    candidate = {coord(rng), coord(rng)};
    bool clear = true;
    for (const auto& obj : world.objects) {
      if (!obj.delivered && distance(candidate, obj.position) < clearance) {
        clear = false;
        break;
      }
    }
    if (clear) break;
  }
  return candidate;
}

}  // namespace mrta
