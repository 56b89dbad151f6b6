#include <benchmark/benchmark.h>

#include "psi/corpus.hpp"
#include "psi/encodings.hpp"
#include "psi/equivalence.hpp"
#include "psi/reduction.hpp"
#include "psi/syntax.hpp"

using namespace psi;

namespace {

std::vector<Proc> sample(const Instance& inst, std::size_t size, bool sums = false) {
  CorpusBounds b;
  b.max_size = size;
  b.count = 64;
  b.sums_only = sums;
  return corpus_generate(7, b, inst);
}

// Ether channels connect nothing under the unit.
Assertion all_channels(const Instance& inst) {
  Assertion a = inst.unit();
  for (Name x : corpus_names(3)) a = inst.compose(a, inst.enable_channel(x));
  return a;
}

void BM_Transitions(benchmark::State& st) {
  auto inst = make_instance(st.range(0) ? "ether" : "pi");
  auto ps = sample(*inst, static_cast<std::size_t>(st.range(1)));
  Assertion env = all_channels(*inst);
  std::size_t i = 0, n = 0;
  for (auto _ : st) {
    auto ts = transitions(*inst, env, ps[i++ % ps.size()]);
    n += ts.size();
    benchmark::DoNotOptimize(ts);
  }
  st.counters["transitions"] = benchmark::Counter(double(n), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Transitions)->ArgsProduct({{0, 1}, {4, 6, 8}});

void BM_Conservativity(benchmark::State& st) {
  PiInstance pi;
  auto ps = sample(pi, 7);
  std::size_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(conservativity_check(pi, pi.unit(), ps[i++ % ps.size()]));
}
BENCHMARK(BM_Conservativity);

void BM_Harmony(benchmark::State& st) {
  PiInstance pi;
  auto ps = sample(pi, 6);
  std::size_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(harmony_check(pi, ps[i++ % ps.size()]));
}
BENCHMARK(BM_Harmony);

void BM_StrongBisimParNil(benchmark::State& st) {
  PiInstance pi;
  auto ps = sample(pi, static_cast<std::size_t>(st.range(0)));
  std::size_t i = 0;
  for (auto _ : st) {
    const Proc& p = ps[i++ % ps.size()];
    benchmark::DoNotOptimize(strong_bisim(pi, pi.unit(), par(p, nil()), p));
  }
}
BENCHMARK(BM_StrongBisimParNil)->Arg(3)->Arg(5);

void BM_ChoiceCorrespondence(benchmark::State& st) {
  PiInstance pi;
  auto tagged = make_instance("tagged:pi");
  auto ps = sample(pi, 6, true);
  std::size_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(choice_correspondence(pi, *tagged, pi.unit(), ps[i++ % ps.size()]));
}
BENCHMARK(BM_ChoiceCorrespondence);

}  // namespace
BENCHMARK_MAIN();
