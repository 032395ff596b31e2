#pragma once

#include <initializer_list>
#include <optional>
#include <vector>

#include "mrta/world.hpp"

namespace mrta::testing {

struct ObjectSpec {
  Vec2 position;
  Vec2 goal;
  int weight = 1;
};

/// Hand-built world: robots at `robots`, objects per `objects`, default
/// kinematics. Connections are refreshed before returning.
inline WorldState hand_world(std::initializer_list<Vec2> robots, std::initializer_list<ObjectSpec> objects,
                             KinematicsParams params = {}) {
  WorldState w;
  w.params = params;
  for (const auto& p : robots) {
    RobotBody r;
    r.id = w.robots.size();
    r.position = p;
    r.home = p;
    w.robots.push_back(r);
  }
  for (const auto& o : objects) {
    TransportObject obj;
    obj.id = w.objects.size();
    obj.position = o.position;
    obj.goal = o.goal;
    obj.weight = o.weight;
    w.objects.push_back(obj);
  }
  refresh_connections(w);
  return w;
}

inline TargetList all_target(std::size_t robots, std::optional<ObjectId> target) {
  return TargetList(robots, target);
}

}  // namespace mrta::testing
