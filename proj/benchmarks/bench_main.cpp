#include <random>

#include <benchmark/benchmark.h>

#include "mrta/episode.hpp"
#include "mrta/learning.hpp"
#include "mrta/policy.hpp"
#include "mrta/world.hpp"

namespace {

void BM_StepWorld(benchmark::State& state) {
  const auto sc = mrta::scenario_preset("validation1");
  const auto world = mrta::make_world(sc, 1);
  mrta::TargetList targets(world.robots.size());
  for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = i % world.objects.size();
  for (auto _ : state) {
    auto next = mrta::step_world(world, targets);
    benchmark::DoNotOptimize(next);
  }
}
BENCHMARK(BM_StepWorld);

void BM_EpisodeStep(benchmark::State& state) {
  const auto sc = mrta::scenario_preset("validation1");
  const mrta::PolicyDriver driver(sc);
  mrta::Episode ep(sc, 1);
  for (auto _ : state) {
    if (ep.finished()) {
      state.PauseTiming();
      ep = mrta::Episode(sc, 1);
      state.ResumeTiming();
    }
    auto rec = ep.advance(driver.decide(ep));
    benchmark::DoNotOptimize(rec);
  }
}
BENCHMARK(BM_EpisodeStep);

void BM_ActorForward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto width = static_cast<std::size_t>(state.range(0));
  const std::size_t obs = mrta::observation_size(2);
  const auto actor = mrta::Mlp::initialized({obs, width, width, width, width, 6}, mrta::Activation::relu,
                                            mrta::Activation::sigmoid, rng);
  const Eigen::VectorXd x = Eigen::VectorXd::Random(static_cast<Eigen::Index>(obs));
  for (auto _ : state) benchmark::DoNotOptimize(actor.forward(x));
}
BENCHMARK(BM_ActorForward)->Arg(32)->Arg(64);

void BM_MaddpgUpdate(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto batch_size = static_cast<std::size_t>(state.range(0));
  const std::size_t obs = mrta::observation_size(2);
  auto model = mrta::MaddpgModel::create(2, obs, 6, 64, 4, rng);
  mrta::TrainConfig cfg;
  cfg.batch_size = batch_size;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<mrta::Transition> data(batch_size);
  for (auto& t : data) {
    for (int i = 0; i < 2; ++i) {
      std::vector<double> o(obs), a(6), n(obs);
      for (auto& v : o) v = u(rng);
      for (auto& v : a) v = u(rng);
      for (auto& v : n) v = u(rng);
      t.observations.push_back(o);
      t.actions.push_back(a);
      t.next_observations.push_back(n);
      t.rewards.push_back(u(rng));
    }
  }
  std::vector<const mrta::Transition*> batch;
  for (const auto& t : data) batch.push_back(&t);
  for (auto _ : state) benchmark::DoNotOptimize(mrta::maddpg_update(model, batch, cfg));
}
BENCHMARK(BM_MaddpgUpdate)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
