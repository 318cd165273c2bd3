#include <benchmark/benchmark.h>

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include <rca/config.hpp>
#include <rca/diagnostics.hpp>
#include <rca/fixtures.hpp>
#include <rca/metrics_rca.hpp>
#include <rca/model.hpp>
#include <rca/twist.hpp>

namespace {

rca::fixtures::GenOptions small_options() {
  rca::fixtures::GenOptions options;
  options.baseline_s = 60.0;
  options.incident_s = 30.0;
  options.trace_rate_hz = 4.0;
  return options;
}

const rca::IncidentCase& shared_case() {
  static const rca::IncidentCase incident = rca::fixtures::generate_case(
      rca::FaultType::kDelay, "checkout", 11, small_options());
  return incident;
}

void BM_TwistRank(benchmark::State& state) {
  const rca::IncidentCase& incident = shared_case();
  rca::TwistConfig config;
  for (auto _ : state) {
    rca::Ranking ranking = rca::twist::twist_rank(incident, config);
    benchmark::DoNotOptimize(ranking);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(incident.spans.size()));
}
BENCHMARK(BM_TwistRank);

void BM_MetricsRank(benchmark::State& state) {
  const rca::IncidentCase& incident = shared_case();
  rca::MetricsConfig config;
  for (auto _ : state) {
    rca::Ranking ranking = rca::metrics::metrics_rank(incident, config);
    benchmark::DoNotOptimize(ranking);
  }
}
BENCHMARK(BM_MetricsRank);

void BM_StationaryScores(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  for (std::size_t u = 0; u < n; ++u) {
    edges.emplace_back(u, (u + 1) % n, 1.0);
    edges.emplace_back(u, (u + 3) % n, 0.5);
  }
  std::vector<double> personalization(n, 1.0 / static_cast<double>(n));
  for (auto _ : state) {
    std::vector<double> scores =
        rca::metrics::stationary_scores(n, edges, personalization, 0.85);
    benchmark::DoNotOptimize(scores);
  }
}
BENCHMARK(BM_StationaryScores)->Arg(8)->Arg(64)->Arg(256);

void BM_GrangerPair(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<double> x(n), y(n, 0.0);
  std::uint64_t s = 99;
  for (std::size_t t = 0; t < n; ++t) {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    x[t] = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
    if (t > 0) y[t] = 0.7 * x[t - 1] + 0.1 * x[t];
  }
  for (auto _ : state) {
    auto forward = rca::metrics::granger_f_test(x, y, 2);
    auto reverse = rca::metrics::granger_f_test(y, x, 2);
    benchmark::DoNotOptimize(forward);
    benchmark::DoNotOptimize(reverse);
  }
}
BENCHMARK(BM_GrangerPair)->Arg(120)->Arg(600);

void BM_AbstractLogs(benchmark::State& state) {
  const rca::IncidentCase& incident = shared_case();
  for (auto _ : state) {
    rca::diag::RefinedLogCorpus corpus = rca::diag::abstract_logs(incident.logs, 200, 7);
    benchmark::DoNotOptimize(corpus);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(incident.logs.size()));
}
BENCHMARK(BM_AbstractLogs);

void BM_GenerateCase(benchmark::State& state) {
  rca::fixtures::GenOptions options = small_options();
  for (auto _ : state) {
    rca::IncidentCase incident =
        rca::fixtures::generate_case(rca::FaultType::kCpu, "payment", 3, options);
    benchmark::DoNotOptimize(incident);
  }
}
BENCHMARK(BM_GenerateCase);

}  // namespace

BENCHMARK_MAIN();
