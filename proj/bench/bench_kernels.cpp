// Serial reference vs OpenMP kernels. Thread count follows FREEREP_THREADS.

#include <benchmark/benchmark.h>

#include "freerep/coefficients.hpp"
#include "freerep/instances.hpp"
#include "freerep/intertwiner.hpp"
#include "freerep/parallel.hpp"
#include "freerep/report.hpp"
#include "freerep/series.hpp"
#include "freerep/spectral.hpp"
#include "freerep/twin.hpp"

using namespace freerep;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

const NormalizedSystem& s0() {
  static const NormalizedSystem ns = normalize(endpoint_system(2));
  return ns;
}

const GeneratedInstance& bi() {
  static const GeneratedInstance g = *generate_class_one(ClassLabel::BI, 2, {2, 2, 2, 2}, 100);
  return g;
}

void BM_SphereSums(benchmark::State& st) {
  const auto& ns = s0();
  EdgeTerm t = parse_edge(ns.system, "e|a");
  auto v = canonicalize(ns.system, std::vector<EdgeTerm>{t}, native_depth(t));
  SeriesOptions so;
  so.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(sphere_sums(ns, v, v, static_cast<int>(st.range(1)), so));
}
BENCHMARK(BM_SphereSums)->ArgsProduct({{0, 1}, {8, 10}})->Unit(benchmark::kMillisecond);

void BM_BuildD(benchmark::State& st) {
  const auto& pkg = bi().report.pkg;
  for (auto _ : st) benchmark::DoNotOptimize(build_D(pkg, exec_of(st)));
}
BENCHMARK(BM_BuildD)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_IsometryIntertwining(benchmark::State& st) {
  static const Intertwiner J = build_J(bi().report);
  for (auto _ : st) benchmark::DoNotOptimize(verify_isometry_and_intertwining(J, static_cast<int>(st.range(1)), exec_of(st)));
}
BENCHMARK(BM_IsometryIntertwining)->ArgsProduct({{0, 1}, {2, 3}})->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  configure_threads_from_env();
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
}
