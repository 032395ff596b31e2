#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mrta/allocation.hpp"
#include "mrta/experience.hpp"
#include "mrta/nn.hpp"
#include "mrta/policy.hpp"
#include "mrta/scenario.hpp"
#include "mrta/world.hpp"

namespace mrta {

/// Robots joining mid-episode, with experience just before and after the
/// ledger is renormalised.
struct AdditionEvent {
  int step = 0;
  double time = 0.0;
  int added = 0;
  int robots_before = 0;
  int robots_after = 0;
  std::vector<double> experience_before;
  std::vector<double> experience_after;
};

/// Snapshot taken after one step of the loop.
struct StepRecord {
  int step = 0;  // 1-based count of completed steps
  WorldState world;  // state after the move
  std::vector<int> connected;            // |C_l| seen by the experience update
  std::vector<double> experience;        // E_l used by the gate
  Eigen::MatrixXd phi;
  Eigen::MatrixXd phi_hat;
  Eigen::MatrixXd zeta;
  Eigen::MatrixXi gate;                  // sigma(zeta) * sigma_eps(E)
  std::vector<std::optional<ObjectId>> targets;
};

/// One episode of the closed loop
///   observe -> command -> consensus updates -> experience -> gate -> select -> move.
class Episode {
 public:
  Episode(const ScenarioConfig& scenario, std::uint64_t seed);

  const ScenarioConfig& scenario() const { return scenario_; }
  std::uint64_t seed() const { return seed_; }
  const WorldState& world() const { return world_; }
  const AllocationState& allocation() const { return state_; }
  const ExperienceLedger& ledger() const { return ledger_; }
  int step_index() const { return step_; }
  bool finished() const { return step_ >= scenario_.steps; }

  /// Adds robots scheduled for the current time. Call once before observing.
  std::optional<AdditionEvent> apply_schedule();

  /// Experience as shown to policies (zero under the no-E ablation).
  std::vector<double> visible_experiences() const;
  std::vector<Observation> observe() const;

  /// Runs the allocation stack on `commands` (one per robot) and moves the
  /// world by one sampling period.
  StepRecord advance(const std::vector<PolicyCommand>& commands);

  /// Objects counted for success: weight <= the largest robot count the
  /// episode will reach.
  const std::vector<ObjectId>& feasible_objects() const { return feasible_; }
  bool all_feasible_delivered() const;
  /// Step at which the last feasible object was delivered.
  std::optional<int> completion_step() const { return completion_; }

 private:
  ScenarioConfig scenario_;
  std::uint64_t seed_;
  WorldState world_;
  AllocationState state_;
  ExperienceLedger ledger_;
  std::vector<ObjectId> feasible_;
  std::size_t next_addition_ = 0;
  int step_ = 0;
  std::optional<int> completion_;
};

/// Maps a scenario's policy source onto per-robot commands.
class PolicyDriver {
 public:
  explicit PolicyDriver(const ScenarioConfig& scenario);
  PolicyDriver(const ScenarioConfig& scenario, Mlp actor);

  std::vector<PolicyCommand> decide(const Episode& episode) const;

 private:
  PolicySource::Kind kind_;
  ScriptedParams scripted_;
  std::optional<Mlp> actor_;
};

}  // namespace mrta
