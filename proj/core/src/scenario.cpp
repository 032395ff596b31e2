#include "mrta/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mrta {

using nlohmann::json;

std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::full: return "full";
    case Ablation::no_de: return "no-de";
    case Ablation::no_e: return "no-e";
  }
  return "full";
}

Ablation ablation_from_string(std::string_view name) {
  if (name == "full") return Ablation::full;
  if (name == "no-de" || name == "no_de" || name == "no_DE") return Ablation::no_de;
  if (name == "no-e" || name == "no_e" || name == "no_E") return Ablation::no_e;
  throw std::invalid_argument("unknown ablation '" + std::string(name) + "'");
}

PolicySource PolicySource::parse(std::string_view text) {
  PolicySource p;
  constexpr std::string_view prefix = "checkpoint:";
  if (text == "scripted") {
    p.kind = Kind::scripted;
  } else if (text == "random") {
    p.kind = Kind::random;
  } else if (text.starts_with(prefix) && text.size() > prefix.size()) {
    p.kind = Kind::checkpoint;
    p.checkpoint = std::string(text.substr(prefix.size()));
  } else {
    throw std::invalid_argument("unknown policy source '" + std::string(text) + "'");
  }
  return p;
}

std::string PolicySource::to_string() const {
  switch (kind) {
    case Kind::scripted: return "scripted";
    case Kind::random: return "random";
    case Kind::checkpoint: return "checkpoint:" + checkpoint.string();
  }
  return "scripted";
}

int ScenarioConfig::object_count() const {
  int m = 0;
  for (const auto& g : weights) m += g.count;
  return m;
}

int ScenarioConfig::max_robots() const {
  int n = initial_robots;
  for (const auto& a : additions) n += a.count;
  return n;
}

void ScenarioConfig::validate() const {
  auto fail = [this](const std::string& what) {
    throw std::invalid_argument("scenario '" + name + "': " + what);
  };
  kinematics.validate();
  if (initial_robots < 1) fail("initial robot count must be >= 1");
  if (steps < 1) fail("steps must be >= 1");
  if (episodes < 1) fail("episodes must be >= 1");
  if (object_count() < 1) fail("at least one object is required");
  if (neighbors < 1) fail("neighbor count K must be >= 1");
  if (!(kappa > 0)) fail("kappa must be positive");
  if (!(allocation.k_phi > 0 && allocation.k_zeta > 0 && allocation.epsilon > 0)) {
    fail("allocation gains and epsilon must be positive");
  }
  for (const auto& g : weights) {
    if (g.count < 0) fail("weight group count must be >= 0");
    if (g.weights.empty()) fail("weight group has no weights");
    for (int w : g.weights) {
      if (w < 1) fail("object weights must be >= 1");
    }
    if (g.weights.size() > 1) {
      if (g.probabilities.size() != g.weights.size()) fail("weight probabilities do not match weights");
      const double total = std::accumulate(g.probabilities.begin(), g.probabilities.end(), 0.0);
      if (std::abs(total - 1.0) > 1e-9) fail("weight probabilities must sum to 1");
      for (double p : g.probabilities) {
        if (p < 0) fail("weight probabilities must be non-negative");
      }
    }
  }
  const double horizon = steps * kinematics.dt;
  for (std::size_t i = 0; i < additions.size(); ++i) {
    const auto& a = additions[i];
    if (a.count < 1) fail("robot additions must add at least one robot");
    if (a.time < 0 || a.time >= horizon) fail("robot addition scheduled outside the episode");
    if (i > 0 && !(a.time > additions[i - 1].time)) fail("robot additions must have increasing times");
  }
}

namespace {

WeightGroup fixed(int count, int weight) { return {count, {weight}, {1.0}}; }

WeightGroup mixed(int count, int light, int heavy, double heavy_share) {
  return {count, {light, heavy}, {1.0 - heavy_share, heavy_share}};
}

ScenarioConfig base(std::string name, int robots, int steps) {
  ScenarioConfig s;
  s.name = std::move(name);
  s.initial_robots = robots;
  s.steps = steps;
  return s;
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"training",        "validation1",      "validation1-p0", "validation1-p50",
          "validation1-p100", "validation2",      "validation2-p0", "validation2-p50",
          "validation2-p100", "validation3",      "deadlock",       "smoke"};
}

ScenarioConfig scenario_preset(std::string_view name) {
  auto validation = [](std::string n, int heavy, double share) {
    ScenarioConfig s = base(std::move(n), 6, 1000);
    s.weights = {fixed(2, 7), mixed(8, 1, heavy, share)};
    return s;
  };
  ScenarioConfig s;
  if (name == "training") {
    s = base("training", 3, 300);
    s.weights = {fixed(3, 4), mixed(3, 1, 3, 0.5)};
  } else if (name == "validation1" || name == "validation1-p50") {
    s = validation(std::string(name), 3, 0.5);
  } else if (name == "validation1-p0") {
    s = validation("validation1-p0", 3, 0.0);
  } else if (name == "validation1-p100") {
    s = validation("validation1-p100", 3, 1.0);
  } else if (name == "validation2" || name == "validation2-p50") {
    s = validation(std::string(name), 6, 0.5);
  } else if (name == "validation2-p0") {
    s = validation("validation2-p0", 6, 0.0);
  } else if (name == "validation2-p100") {
    s = validation("validation2-p100", 6, 1.0);
  } else if (name == "validation3") {
    s = base("validation3", 3, 2000);
    s.weights = {fixed(1, 1), fixed(4, 3), fixed(5, 6)};
    s.additions = {{1000.0, 3}};
  } else if (name == "deadlock") {
    s = base("deadlock", 3, 300);
    s.weights = {fixed(1, 4), mixed(3, 1, 3, 0.5)};
  } else if (name == "smoke") {
    s = base("smoke", 2, 100);
    s.weights = {fixed(2, 1)};
  } else {
    throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
  }
  return s;
}

ScenarioConfig scenario_from_json(std::string_view json_text, ScenarioConfig s) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed scenario document: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("scenario document must be an object");
  try {
    if (doc.contains("preset")) s = scenario_preset(doc["preset"].get<std::string>());
    s.name = doc.value("name", s.name);
    s.initial_robots = doc.value("initial_robots", s.initial_robots);
    s.steps = doc.value("steps", s.steps);
    s.episodes = doc.value("episodes", s.episodes);
    s.seed = doc.value("seed", s.seed);
    if (doc.contains("policy")) s.policy = PolicySource::parse(doc["policy"].get<std::string>());
    if (doc.contains("ablation")) s.ablation = ablation_from_string(doc["ablation"].get<std::string>());
    s.kappa = doc.value("kappa", s.kappa);
    s.neighbors = doc.value("neighbors", s.neighbors);
    s.coop_steps = doc.value("coop_steps", s.coop_steps);
    if (doc.contains("weights")) {
      s.weights.clear();
      for (const auto& g : doc["weights"]) {
        WeightGroup group;
        group.count = g.at("count").get<int>();
        if (g.contains("weight")) {
          group.weights = {g["weight"].get<int>()};
          group.probabilities = {1.0};
        } else {
          group.weights = g.at("choices").get<std::vector<int>>();
          group.probabilities = g.at("probabilities").get<std::vector<double>>();
        }
        s.weights.push_back(std::move(group));
      }
    }
    if (doc.contains("additions")) {
      s.additions.clear();
      for (const auto& a : doc["additions"]) {
        s.additions.push_back({a.at("time").get<double>(), a.at("count").get<int>()});
      }
    }
    if (doc.contains("kinematics")) {
      const auto& k = doc["kinematics"];
      auto& p = s.kinematics;
      p.delta = k.value("delta", p.delta);
      p.robot_speed = k.value("robot_speed", p.robot_speed);
      p.transport_speed = k.value("transport_speed", p.transport_speed);
      p.goal_tolerance = k.value("goal_tolerance", p.goal_tolerance);
      p.arena_half_width = k.value("arena_half_width", p.arena_half_width);
      p.dt = k.value("dt", p.dt);
    }
    if (doc.contains("allocation")) {
      const auto& a = doc["allocation"];
      s.allocation.k_phi = a.value("k_phi", s.allocation.k_phi);
      s.allocation.k_zeta = a.value("k_zeta", s.allocation.k_zeta);
      s.allocation.epsilon = a.value("epsilon", s.allocation.epsilon);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid scenario field: ") + e.what());
  }
  s.validate();
  return s;
}

std::string scenario_to_json(const ScenarioConfig& s) {
  json doc;
  doc["name"] = s.name;
  doc["initial_robots"] = s.initial_robots;
  doc["steps"] = s.steps;
  doc["episodes"] = s.episodes;
  doc["seed"] = s.seed;
  doc["policy"] = s.policy.to_string();
  doc["ablation"] = std::string(to_string(s.ablation));
  doc["kappa"] = s.kappa;
  doc["neighbors"] = s.neighbors;
  doc["coop_steps"] = s.coop_steps;
  auto& groups = doc["weights"] = json::array();
  for (const auto& g : s.weights) {
    if (g.weights.size() == 1) {
      groups.push_back({{"count", g.count}, {"weight", g.weights[0]}});
    } else {
      groups.push_back({{"count", g.count}, {"choices", g.weights}, {"probabilities", g.probabilities}});
    }
  }
  auto& adds = doc["additions"] = json::array();
  for (const auto& a : s.additions) adds.push_back({{"time", a.time}, {"count", a.count}});
  const auto& p = s.kinematics;
  doc["kinematics"] = {{"delta", p.delta},
                       {"robot_speed", p.robot_speed},
                       {"transport_speed", p.transport_speed},
                       {"goal_tolerance", p.goal_tolerance},
                       {"arena_half_width", p.arena_half_width},
                       {"dt", p.dt}};
  doc["allocation"] = {{"k_phi", s.allocation.k_phi},
                       {"k_zeta", s.allocation.k_zeta},
                       {"epsilon", s.allocation.epsilon}};
  return doc.dump(2);
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  ScenarioConfig base;
  base.name = path.stem().string();
  return scenario_from_json(buffer.str(), base);
}

ScenarioConfig resolve_scenario(std::string_view name_or_path) {
  const auto names = scenario_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return scenario_preset(name_or_path);
  }
  return load_scenario(std::filesystem::path(std::string(name_or_path)));
}

std::uint64_t episode_seed(std::uint64_t base, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<int> draw_weights(const ScenarioConfig& scenario, std::mt19937_64& rng) {
  std::vector<int> out;
  for (const auto& g : scenario.weights) {
    for (int c = 0; c < g.count; ++c) {
      if (g.weights.size() == 1) {
        out.push_back(g.weights[0]);
        continue;
      }
      std::discrete_distribution<std::size_t> pick(g.probabilities.begin(), g.probabilities.end());
      out.push_back(g.weights[pick(rng)]);
    }
  }
  return out;
}

namespace {

Vec2 sample_separated(std::mt19937_64& rng, double half_width, const std::vector<Vec2>& taken,
                      double separation) {
  std::uniform_real_distribution<double> coord(-half_width, half_width);
  Vec2 candidate;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    candidate = {coord(rng), coord(rng)};
    const bool clear = std::all_of(taken.begin(), taken.end(), [&](Vec2 t) {
      return distance(t, candidate) >= separation;
    });
    if (clear) break;
  }
  return candidate;
}

}  // namespace

WorldState make_world(const ScenarioConfig& scenario, std::uint64_t seed) {
  scenario.validate();
  WorldState world;
  world.params = scenario.kinematics;
  const double h = world.params.arena_half_width;
  const double delta = world.params.delta;
  const int m = scenario.object_count();

  // Goals are a property of the scenario, shared by all its episodes.
  std::mt19937_64 goal_rng(scenario.seed ^ 0x5bd1e995ULL);
  std::vector<Vec2> goals;
  for (int l = 0; l < m; ++l) goals.push_back(sample_separated(goal_rng, h, goals, 2.0 * delta));

  std::mt19937_64 rng(seed);
  const auto weights = draw_weights(scenario, rng);

  std::vector<Vec2> taken = goals;
  for (int l = 0; l < m; ++l) {
    TransportObject obj;
    obj.id = static_cast<ObjectId>(l);
    obj.goal = goals[static_cast<std::size_t>(l)];
    obj.weight = weights[static_cast<std::size_t>(l)];
    obj.position = sample_separated(rng, h, taken, 2.0 * delta);
    taken.push_back(obj.position);
    world.objects.push_back(obj);
  }

  for (int i = 0; i < scenario.initial_robots; ++i) {
    RobotBody body;
    body.id = static_cast<RobotId>(i);
    body.position = sample_spawn(world, rng, 2.0 * delta);
    body.home = body.position;
    world.robots.push_back(body);
  }
  refresh_connections(world);
  return world;
}

}  // namespace mrta
