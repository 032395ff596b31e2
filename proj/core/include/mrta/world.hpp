#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "mrta/geometry.hpp"

namespace mrta {

using RobotId = std::size_t;
using ObjectId = std::size_t;

/// Per-robot target chosen by the allocator; nullopt sends the robot home.
using TargetList = std::vector<std::optional<ObjectId>>;

struct KinematicsParams {
  double delta = 0.1;             // connection threshold
  double robot_speed = 0.05;      // units per second
  double transport_speed = 0.05;  // units per second
  double goal_tolerance = 0.05;
  double arena_half_width = 1.0;
  double dt = 1.0;                // sampling period, seconds

  /// Throws std::invalid_argument unless every field is strictly positive.
  void validate() const;
};

struct RobotBody {
  RobotId id = 0;
  Vec2 position;
  Vec2 home;  // spawn point; idle robots return here
  std::optional<ObjectId> connected_to;
  std::optional<ObjectId> target;  // target used during the last step
  int attached_steps = 0;          // consecutive steps connected to `connected_to`
  bool active = true;
};

struct TransportObject {
  ObjectId id = 0;
  Vec2 position;
  Vec2 goal;
  Vec2 velocity;  // velocity the object carries into the next step
  int weight = 1;  // robots required
  bool delivered = false;

  bool moving(double threshold = 1e-9) const { return velocity.norm() > threshold; }
};

struct WorldState {
  double time = 0.0;
  std::vector<RobotBody> robots;
  std::vector<TransportObject> objects;
  KinematicsParams params;

  std::size_t active_count() const;
};

/// Object a robot is docked to, if any. A robot within delta of several
/// undelivered objects docks to its preferred target when that is among them,
/// otherwise to the nearest (lowest id on ties). Inactive robots never dock.
std::optional<ObjectId> resolve_connection(const WorldState& world, RobotId robot,
                                           std::optional<ObjectId> preferred);

/// C_l: active robots docked to `object`, ascending by id.
std::vector<RobotId> connection_set(const WorldState& world, ObjectId object);

/// Recomputes docking, attachment counters and object velocities from the
/// current positions. Velocity is non-zero exactly for undelivered objects
/// with |C_l| >= w_l.
void refresh_connections(WorldState& world);

/// Advances the world by one sampling period.
WorldState step_world(const WorldState& world, const TargetList& targets);

/// Appends `count` active robots at seeded spawn positions.
WorldState add_robots(const WorldState& world, int count, std::uint64_t seed);

/// Undelivered objects whose weight does not exceed the active robot count.
std::vector<ObjectId> feasible_remaining(const WorldState& world);

/// Uniform position inside the arena at least `clearance` away from every
/// undelivered object. Falls back to the last draw after a bounded number of
/// rejections.
Vec2 sample_spawn(const WorldState& world, std::mt19937_64& rng, double clearance);

}  // namespace mrta
