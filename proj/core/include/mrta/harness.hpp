#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mrta/episode.hpp"
#include "mrta/scenario.hpp"

namespace mrta {

struct EpisodeOutcome {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool success = false;
  std::optional<int> transport_steps;  // set on success
  int steps = 0;
  int delivered = 0;
  int feasible = 0;
  int objects = 0;
};

struct EpisodeTrace {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  std::vector<AdditionEvent> additions;
};

struct EpisodeResult {
  EpisodeOutcome outcome;
  std::optional<EpisodeTrace> trace;
};

struct MetricsReport {
  std::string scenario;
  std::string policy;
  std::string ablation;
  double success_rate = 0.0;
  std::optional<double> transportation_time;
  std::vector<EpisodeOutcome> outcomes;
};

/// Step observer, called after each step before the record is stored.
using StepHook = std::function<void(const Episode&, const StepRecord&)>;

EpisodeResult run_episode(const ScenarioConfig& scenario, std::uint64_t seed,
                          bool keep_trace = false, const StepHook& hook = {});

/// Same loop with an explicit policy driver.
EpisodeResult run_episode(const ScenarioConfig& scenario, std::uint64_t seed,
                          const PolicyDriver& driver, bool keep_trace = false,
                          const StepHook& hook = {});

/// Aggregates outcomes in index order.
MetricsReport summarize(const ScenarioConfig& scenario, std::vector<EpisodeOutcome> outcomes);

/// Worker count for batches: MRTA_MAX_THREADS when set, else hardware
/// concurrency, never more than `jobs`.
unsigned worker_count(std::size_t jobs);

/// Runs `scenario.episodes` episodes seeded by episode_seed(scenario.seed, i).
/// When `trace_dir` is set, writes one JSONL trace per episode there.
MetricsReport run_batch(const ScenarioConfig& scenario,
                        const std::optional<std::filesystem::path>& trace_dir = std::nullopt);

void write_trace(std::ostream& out, const EpisodeTrace& trace);
void write_trace(const std::filesystem::path& path, const EpisodeTrace& trace);
std::string trace_file_name(std::size_t index);

/// One row per episode.
void write_metrics_csv(std::ostream& out, const MetricsReport& report);
/// Single aggregate row.
void write_summary_csv(std::ostream& out, const MetricsReport& report);
/// Writes metrics.csv and summary.csv into `dir`.
void write_report(const std::filesystem::path& dir, const MetricsReport& report);

/// Shortest round-trip decimal form, used for every float in emitted files.
std::string format_double(double v);

}  // namespace mrta
