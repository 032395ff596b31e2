#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mrta/allocation.hpp"
#include "mrta/world.hpp"

namespace mrta {

enum class Ablation { full, no_de, no_e };

std::string_view to_string(Ablation a);
Ablation ablation_from_string(std::string_view name);

/// `count` objects whose weight is drawn from `weights` with `probabilities`
/// (a single entry means a fixed weight).
struct WeightGroup {
  int count = 0;
  std::vector<int> weights;
  std::vector<double> probabilities;
};

struct RobotAddition {
  double time = 0.0;  // seconds from episode start
  int count = 0;
};

struct PolicySource {
  enum class Kind { scripted, random, checkpoint };
  Kind kind = Kind::scripted;
  std::filesystem::path checkpoint;

  /// "scripted" | "random" | "checkpoint:PATH"
  static PolicySource parse(std::string_view text);
  std::string to_string() const;
};

struct ScenarioConfig {
  std::string name;
  int initial_robots = 3;
  std::vector<WeightGroup> weights;
  std::vector<RobotAddition> additions;
  int steps = 300;
  int episodes = 100;
  std::uint64_t seed = 1;
  PolicySource policy;
  Ablation ablation = Ablation::full;

  KinematicsParams kinematics;
  AllocationParams allocation;
  double kappa = 10.0;
  std::size_t neighbors = 2;  // K
  int coop_steps = 5;

  int object_count() const;
  /// Robot count after every scheduled addition.
  int max_robots() const;
  /// Throws std::invalid_argument describing the first inconsistency.
  void validate() const;
};

std::vector<std::string> scenario_names();
ScenarioConfig scenario_preset(std::string_view name);
ScenarioConfig load_scenario(const std::filesystem::path& path);
/// Preset name, or path to a JSON scenario file.
ScenarioConfig resolve_scenario(std::string_view name_or_path);
/// Applies the keys present in a JSON document on top of `base`.
ScenarioConfig scenario_from_json(std::string_view json_text, ScenarioConfig base = {});
std::string scenario_to_json(const ScenarioConfig& scenario);

/// Per-episode seed derived from the batch seed and episode index.
std::uint64_t episode_seed(std::uint64_t base, std::size_t index);

std::vector<int> draw_weights(const ScenarioConfig& scenario, std::mt19937_64& rng);

/// Initial world of one episode. Goals depend only on the scenario seed;
/// start positions and drawn weights depend on the episode seed.
WorldState make_world(const ScenarioConfig& scenario, std::uint64_t seed);

}  // namespace mrta
