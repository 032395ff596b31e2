#pragma once

#include <cmath>

namespace mrta {

/// Planar position or velocity in arena units.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

/// Displacement that moves `from` toward `to` by at most `max_step`.
/// Never overshoots: if the destination is closer than `max_step`,
/// the displacement lands exactly on it.
Vec2 step_toward(Vec2 from, Vec2 to, double max_step);

}  // namespace mrta
