#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mrta/allocation.hpp"
#include "mrta/nn.hpp"
#include "mrta/world.hpp"

namespace mrta {

/// Egocentric input of a robot's policy.
///
/// Layout for K neighbors:
///   own position                                   2
///   own priorities over the K nearest objects      K
///   per nearest robot: position, its priorities
///     over *my* K nearest objects                  K * (2 + K)
///   per nearest object: position, goal, velocity   6K
///   experience of the K nearest objects            K
///
/// Neighbor lists are ordered by distance, ties by id. Missing neighbors are
/// zero-padded and carry no id.
struct Observation {
  std::vector<double> values;
  std::vector<std::optional<ObjectId>> neighbor_objects;
  std::vector<std::optional<RobotId>> neighbor_robots;
};

constexpr std::size_t observation_size(std::size_t k) { return 2 + k + k * (2 + k) + 6 * k + k; }
constexpr std::size_t action_size(std::size_t k) { return 2 * k + 2; }

/// The K undelivered objects closest to `robot` (distance, then id).
std::vector<std::optional<ObjectId>> nearest_objects(const WorldState& world, RobotId robot,
                                                     std::size_t k);
/// The K other active robots closest to `robot` (distance, then id).
std::vector<std::optional<RobotId>> nearest_robots(const WorldState& world, RobotId robot,
                                                   std::size_t k);

Observation build_observation(const WorldState& world, const AllocationState& state,
                              std::span<const double> experiences, RobotId robot, std::size_t k);

/// Runs the actor network and maps its 2K+2 outputs onto the observation's
/// neighbor objects.
PolicyCommand policy_forward(const Mlp& actor, const Observation& obs);

struct ScriptedParams {
  std::size_t k = 2;
  double epsilon = 1.0;
  int coop_steps = 5;  // stall length before a robot asks for help
  bool gate_enabled = true;
};

/// Learning-free reference policy driving the allocation stack.
///
/// Each robot pursues its nearest open object (undelivered, not carried by
/// others, gate open). A robot docked to its stalled target for
/// `coop_steps` steps raises a cooperation request; the cloud resolves all
/// requests to one rally object (most committed robots, then lowest id) and
/// every free robot targets it with sharing switched on. Exclusion targets go
/// to 1 for objects whose experience reached epsilon, except for a rally
/// object that still lacks part of the team.
PolicyCommand scripted_policy(const WorldState& world, const AllocationState& state,
                              std::span<const double> experiences, RobotId robot,
                              const ScriptedParams& params = {});

/// Uniform [0,1] command keyed on (seed, robot, step). Neighbor ids are left
/// empty; callers attach them.
PolicyCommand random_policy(std::uint64_t seed, RobotId robot, std::uint64_t step, std::size_t k);

/// Counter-based uniform draw in [0,1).
double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);

}  // namespace mrta
