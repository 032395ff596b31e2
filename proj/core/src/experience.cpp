#include "mrta/experience.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mrta {

ExperienceLedger::ExperienceLedger(std::size_t objects, double kappa, int robot_count)
    : raw_(objects, 0.0), kappa_(kappa), robot_count_(robot_count) {
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
  if (robot_count < 1) throw std::invalid_argument("robot count must be >= 1");
}

void ExperienceLedger::accumulate(const WorldState& world, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  if (world.objects.size() != raw_.size()) {
    throw std::invalid_argument("ledger size does not match object count");
  }
  std::vector<int> attached(raw_.size(), 0);
  for (const auto& r : world.robots) {
    if (const auto c = resolve_connection(world, r.id, r.target)) ++attached[*c];
  }
  for (const auto& obj : world.objects) {
    if (obj.delivered || obj.moving(kMovingThreshold)) continue;
    const int c = attached[obj.id];
    if (c == 0) continue;
    raw_[obj.id] += std::pow(static_cast<double>(c), kappa_) * dt;
  }
}

double ExperienceLedger::query(ObjectId object) const {
  if (object >= raw_.size()) {
    throw std::invalid_argument("unknown object id " + std::to_string(object));
  }
  return raw_[object] / std::pow(static_cast<double>(robot_count_), kappa_);
}

std::vector<double> ExperienceLedger::query_all() const {
  std::vector<double> out(raw_.size());
  for (std::size_t l = 0; l < raw_.size(); ++l) out[l] = query(l);
  return out;
}

void ExperienceLedger::set_robot_count(int robot_count) {
  if (robot_count < 1) throw std::invalid_argument("robot count must be >= 1");
  robot_count_ = robot_count;
}

void ExperienceLedger::set_raw(ObjectId object, double value) {
  if (object >= raw_.size() || !(value >= 0)) {
    throw std::invalid_argument("invalid raw experience assignment");
  }
  raw_[object] = value;
}

}  // namespace mrta
