#include "mrta/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace mrta {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json optional_id(const std::optional<std::size_t>& id) {
  return id ? ordered_json(*id) : ordered_json(nullptr);
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json matrix_json(const Eigen::MatrixXi& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json step_json(const StepRecord& rec) {
  ordered_json j;
  j["type"] = "step";
  j["step"] = rec.step;
  j["time"] = rec.world.time;
  ordered_json robots = ordered_json::array();
  for (const auto& r : rec.world.robots) {
    robots.push_back({{"id", r.id},
                      {"x", r.position.x},
                      {"y", r.position.y},
                      {"target", optional_id(rec.targets.at(r.id))},
                      {"connected_to", optional_id(r.connected_to)},
                      {"active", r.active}});
  }
  j["robots"] = std::move(robots);
  ordered_json objects = ordered_json::array();
  for (const auto& o : rec.world.objects) {
    objects.push_back({{"id", o.id},
                       {"x", o.position.x},
                       {"y", o.position.y},
                       {"vx", o.velocity.x},
                       {"vy", o.velocity.y},
                       {"delivered", o.delivered},
                       {"connected", rec.connected.at(o.id)},
                       {"experience", rec.experience.at(o.id)}});
  }
  j["objects"] = std::move(objects);
  j["gate"] = matrix_json(rec.gate);
  j["phi"] = matrix_json(rec.phi);
  j["phi_hat"] = matrix_json(rec.phi_hat);
  j["zeta"] = matrix_json(rec.zeta);
  return j;
}

ordered_json addition_json(const AdditionEvent& ev) {
  return {{"type", "addition"},
          {"step", ev.step},
          {"time", ev.time},
          {"added", ev.added},
          {"robots_before", ev.robots_before},
          {"robots_after", ev.robots_after},
          {"experience_before", ev.experience_before},
          {"experience_after", ev.experience_after}};
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

EpisodeResult run_episode(const ScenarioConfig& scenario, std::uint64_t seed, bool keep_trace,
                          const StepHook& hook) {
  return run_episode(scenario, seed, PolicyDriver(scenario), keep_trace, hook);
}

EpisodeResult run_episode(const ScenarioConfig& scenario, std::uint64_t seed,
                          const PolicyDriver& driver, bool keep_trace, const StepHook& hook) {
  scenario.validate();
  Episode ep(scenario, seed);
  EpisodeResult result;
  if (keep_trace) {
    result.trace.emplace();
    result.trace->scenario = scenario.name;
    result.trace->seed = seed;
    result.trace->steps.reserve(static_cast<std::size_t>(scenario.steps));
  }
  while (!ep.finished()) {
    if (auto ev = ep.apply_schedule(); ev && keep_trace) result.trace->additions.push_back(*ev);
    auto rec = ep.advance(driver.decide(ep));
    if (hook) hook(ep, rec);
    if (keep_trace) result.trace->steps.push_back(std::move(rec));
  }

  auto& out = result.outcome;
  out.seed = seed;
  out.steps = ep.step_index();
  out.objects = static_cast<int>(ep.world().objects.size());
  out.feasible = static_cast<int>(ep.feasible_objects().size());
  for (const auto& o : ep.world().objects) out.delivered += o.delivered ? 1 : 0;
  out.success = ep.all_feasible_delivered();
  if (out.success) out.transport_steps = ep.completion_step();
  return result;
}

MetricsReport summarize(const ScenarioConfig& scenario, std::vector<EpisodeOutcome> outcomes) {
  MetricsReport rep;
  rep.scenario = scenario.name;
  rep.policy = scenario.policy.to_string();
  rep.ablation = std::string(to_string(scenario.ablation));
  std::sort(outcomes.begin(), outcomes.end(),
            [](const EpisodeOutcome& a, const EpisodeOutcome& b) { return a.index < b.index; });
  std::size_t successes = 0;
  double steps = 0.0;
  for (const auto& o : outcomes) {
    if (o.success) {
      ++successes;
      steps += static_cast<double>(*o.transport_steps);
    }
  }
  if (!outcomes.empty()) {
    rep.success_rate = static_cast<double>(successes) / static_cast<double>(outcomes.size());
  }
  if (successes > 0) rep.transportation_time = steps / static_cast<double>(successes);
  rep.outcomes = std::move(outcomes);
  return rep;
}

unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MRTA_MAX_THREADS")) {
    unsigned cap = 0;
    const std::string_view s(env);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (ec == std::errc() && p == s.data() + s.size() && cap > 0) n = std::min(n, cap);
  }
  if (jobs < n) n = static_cast<unsigned>(std::max<std::size_t>(1, jobs));
  return n;
}

std::string trace_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trace_%04zu.jsonl", index);
  return buf;
}

MetricsReport run_batch(const ScenarioConfig& scenario,
                        const std::optional<std::filesystem::path>& trace_dir) {
  scenario.validate();
  const auto jobs = static_cast<std::size_t>(scenario.episodes);
  if (trace_dir) std::filesystem::create_directories(*trace_dir);
  const PolicyDriver driver(scenario);

  std::vector<EpisodeOutcome> outcomes(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs) return;
      try {
        const auto seed = episode_seed(scenario.seed, i);
        auto res = run_episode(scenario, seed, driver, trace_dir.has_value());
        res.outcome.index = i;
        if (trace_dir) write_trace(*trace_dir / trace_file_name(i), *res.trace);
        outcomes[i] = res.outcome;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs);
        return;
      }
    }
  };

  const unsigned workers = worker_count(jobs);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return summarize(scenario, std::move(outcomes));
}

void write_trace(std::ostream& out, const EpisodeTrace& trace) {
  ordered_json header;
  header["type"] = "header";
  header["scenario"] = trace.scenario;
  header["seed"] = trace.seed;
  header["steps"] = trace.steps.size();
  out << header.dump() << '\n';
  std::size_t next_add = 0;
  for (const auto& rec : trace.steps) {
    // An addition applied before step k+1 is emitted ahead of that step.
    while (next_add < trace.additions.size() && trace.additions[next_add].step < rec.step) {
      out << addition_json(trace.additions[next_add++]).dump() << '\n';
    }
    out << step_json(rec).dump() << '\n';
  }
  while (next_add < trace.additions.size()) out << addition_json(trace.additions[next_add++]).dump() << '\n';
  if (!out) throw std::runtime_error("failed writing trace");
}

void write_trace(const std::filesystem::path& path, const EpisodeTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  write_trace(out, trace);
}

void write_metrics_csv(std::ostream& out, const MetricsReport& report) {
  out << "episode,seed,success,transport_steps,steps,delivered,feasible,objects\n";
  for (const auto& o : report.outcomes) {
    out << o.index << ',' << o.seed << ',' << (o.success ? 1 : 0) << ','
        << (o.transport_steps ? std::to_string(*o.transport_steps) : std::string()) << ',' << o.steps << ','
        << o.delivered << ',' << o.feasible << ',' << o.objects << '\n';
  }
  if (!out) throw std::runtime_error("failed writing metrics");
}

void write_summary_csv(std::ostream& out, const MetricsReport& report) {
  out << "scenario,policy,ablation,episodes,success_rate,transportation_time\n";
  out << report.scenario << ',' << report.policy << ',' << report.ablation << ',' << report.outcomes.size()
      << ',' << format_double(report.success_rate) << ','
      << (report.transportation_time ? format_double(*report.transportation_time) : std::string()) << '\n';
  if (!out) throw std::runtime_error("failed writing summary");
}

void write_report(const std::filesystem::path& dir, const MetricsReport& report) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "metrics.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + (dir / "metrics.csv").string());
    write_metrics_csv(out, report);
  }
  std::ofstream out(dir / "summary.csv", std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + (dir / "summary.csv").string());
  write_summary_csv(out, report);
}

}  // namespace mrta
