#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mrta/world.hpp"

namespace mrta {

struct AllocationParams {
  double k_phi = 0.2;    // priority gain, 1/s
  double k_zeta = 0.2;   // exclusion gain, 1/s
  double epsilon = 1.0;  // experience threshold of the output gate
};

/// 0.5-threshold step used for alpha, beta and the exclusion level.
constexpr bool step_half(double x) { return x >= 0.5; }

/// What one robot's policy asks for this step.
///
/// Entries refer to `neighbor_object_ids` slot by slot. A slot with no id
/// (padding in sparse worlds) is ignored.
struct PolicyCommand {
  std::vector<double> target_phi;
  double alpha = 0.0;
  std::vector<double> target_zeta;
  double beta = 0.0;
  std::vector<std::optional<ObjectId>> neighbor_object_ids;

  /// Unpacks an action vector laid out as
  /// [phi*_1..phi*_K, alpha, zeta*_1..zeta*_K, beta], clamping to [0,1].
  static PolicyCommand from_action(std::span<const double> action,
                                   std::vector<std::optional<ObjectId>> neighbors);
  std::vector<double> to_action() const;

  std::size_t slots() const { return neighbor_object_ids.size(); }
};

/// Per-robot priorities (phi) and exclusion levels (zeta), rows = robots,
/// columns = objects.
struct AllocationState {
  Eigen::MatrixXd phi;
  Eigen::MatrixXd zeta;
  std::vector<bool> frozen;  // transporting robots skip priority updates
  std::vector<std::optional<ObjectId>> target;
  AllocationParams params;

  AllocationState() = default;
  AllocationState(std::size_t robots, std::size_t objects, AllocationParams p = {});

  std::size_t robots() const { return static_cast<std::size_t>(phi.rows()); }
  std::size_t objects() const { return static_cast<std::size_t>(phi.cols()); }
};

struct TargetVectors {
  std::vector<double> priority;   // c_i
  std::vector<double> exclusion;  // d_i
};

/// Neighbor slots take the commanded targets; every other object keeps its
/// current value.
TargetVectors build_targets(const AllocationState& state, RobotId robot, const PolicyCommand& cmd);

/// One forward-Euler step of the priority consensus, synchronous over a
/// snapshot of the previous state. Frozen robots keep their row.
AllocationState update_priorities(const AllocationState& state,
                                  std::span<const PolicyCommand> commands, double dt);

/// One forward-Euler step of the exclusion max-consensus. The coupling term
/// never carries a robot past the current maximum, and results are clamped
/// to [0,1].
AllocationState update_exclusions(const AllocationState& state,
                                  std::span<const PolicyCommand> commands, double dt);

/// True when the output gate zeroes robot i's priority for the object.
bool gate_closed(double zeta, double experience, double epsilon);

/// Gated priorities phi-hat for one robot.
std::vector<double> gate(const AllocationState& state, RobotId robot,
                         std::span<const double> experiences);

/// argmax over gated priorities after masking delivered objects and objects
/// carried by robots other than `robot`. Lowest object id wins ties; nullopt
/// when nothing positive remains. With `gate_enabled == false` the raw
/// priorities are used.
std::optional<ObjectId> select_task(const AllocationState& state, RobotId robot,
                                    const WorldState& world,
                                    std::span<const double> experiences,
                                    bool gate_enabled = true);

/// Grows the state; new rows and columns are filled with `init_value`.
AllocationState resize(const AllocationState& state, std::size_t robots, std::size_t objects,
                       double init_value = 0.0);

/// Writes zero priorities for every delivered object.
void zero_delivered(AllocationState& state, const WorldState& world);

}  // namespace mrta
