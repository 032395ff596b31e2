#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mrta/harness.hpp"
#include "mrta/learning.hpp"
#include "mrta/scenario.hpp"

namespace {

int run_command(const std::string& scenario_name, std::optional<int> episodes,
                std::optional<std::uint64_t> seed, const std::optional<std::string>& policy,
                const std::optional<std::string>& ablation, const std::filesystem::path& out, bool traces) {
  auto sc = mrta::resolve_scenario(scenario_name);
  if (episodes) sc.episodes = *episodes;
  if (seed) sc.seed = *seed;
  if (policy) sc.policy = mrta::PolicySource::parse(*policy);
  if (ablation) sc.ablation = mrta::ablation_from_string(*ablation);
  sc.validate();

  std::optional<std::filesystem::path> trace_dir;
  if (traces) trace_dir = out / "traces";
  const auto report = mrta::run_batch(sc, trace_dir);
  mrta::write_report(out, report);

  std::cout << "scenario " << report.scenario << ", policy " << report.policy << ", ablation "
            << report.ablation << ": success_rate " << mrta::format_double(report.success_rate)
            << ", transportation_time "
            << (report.transportation_time ? mrta::format_double(*report.transportation_time) : "n/a")
            << " over " << report.outcomes.size() << " episodes\n";
  return 0;
}

int train_command(const std::filesystem::path& config, const std::filesystem::path& out, int baseline) {
  const auto cfg = mrta::load_train_config(config);
  const auto result = mrta::train(cfg, out);
  std::cout << "trained " << result.curve.size() << " episodes, " << result.updates << " updates\n";
  if (baseline > 0) {
    const auto base = mrta::random_baseline(cfg, baseline, cfg.seed + 1);
    std::ofstream f(out / "random_baseline.csv", std::ios::binary);
    mrta::write_reward_curve(f, base, static_cast<std::size_t>(cfg.scenario.initial_robots));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot transport with dynamic task allocation"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a batch of episodes and write metrics");
  std::string scenario;
  std::optional<int> episodes;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::optional<std::string> ablation;
  std::string run_out;
  bool traces = false;
  run->add_option("--scenario", scenario, "Preset name or JSON file")->required();
  run->add_option("--episodes", episodes, "Episode count");
  run->add_option("--seed", seed, "Base seed");
  run->add_option("--policy", policy, "scripted | random | checkpoint:PATH");
  run->add_option("--ablation", ablation, "full | no-de | no-e");
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_flag("--traces", traces, "Write one JSONL trace per episode");

  auto* train = app.add_subcommand("train", "Train policy networks");
  std::string config;
  std::string train_out;
  int baseline = 0;
  train->add_option("--config", config, "Training config JSON")->required()->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "Output directory")->required();
  train->add_option("--baseline", baseline, "Also write a random-policy curve with this many episodes");

  auto* scenarios = app.add_subcommand("scenarios", "Scenario presets");
  auto* list = scenarios->add_subcommand("list", "List preset names");
  scenarios->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(scenario, episodes, seed, policy, ablation, run_out, traces);
    if (*train) return train_command(config, train_out, baseline);
    if (*list) {
      for (const auto& name : mrta::scenario_names()) {
        const auto sc = mrta::scenario_preset(name);
        std::cout << name << "\tN=" << sc.initial_robots << " M=" << sc.object_count() << " steps=" << sc.steps
                  << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
