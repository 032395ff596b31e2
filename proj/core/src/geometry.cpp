#include "mrta/geometry.hpp"

namespace mrta {

Vec2 step_toward(Vec2 from, Vec2 to, double max_step) {
  const Vec2 delta = to - from;
  const double dist = delta.norm();
  if (dist <= max_step || dist == 0.0) {
    return delta;
  }
  return delta * (max_step / dist);
}

}  // namespace mrta
