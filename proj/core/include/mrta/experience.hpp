#pragma once

#include <cstddef>
#include <vector>

#include "mrta/world.hpp"

namespace mrta {

/// Cloud-side task experience.
///
/// Stores, per object, the N-free integral of (stalled * |C_l|)^kappa and
/// normalises by the current robot count only when queried:
///
///     E_l = raw_l / N^kappa
///
/// so changing the robot count rescales every accumulated experience by
/// (old_N / new_N)^kappa retroactively. Adding robots therefore shrinks
/// experience and can reopen output gates that were closed.
class ExperienceLedger {
 public:
  /// Speeds at or below this are treated as stationary.
  static constexpr double kMovingThreshold = 1e-9;

  ExperienceLedger(std::size_t objects, double kappa, int robot_count);

  /// Left-endpoint rectangle rule over one sampling period. Delivered and
  /// moving objects contribute nothing.
  void accumulate(const WorldState& world, double dt);

  double query(ObjectId object) const;
  std::vector<double> query_all() const;

  void set_robot_count(int robot_count);

  int robot_count() const { return robot_count_; }
  double kappa() const { return kappa_; }
  std::size_t size() const { return raw_.size(); }
  double raw(ObjectId object) const { return raw_.at(object); }
  void set_raw(ObjectId object, double value);

 private:
  std::vector<double> raw_;
  double kappa_;
  int robot_count_;
};

}  // namespace mrta
