#include <benchmark/benchmark.h>

#include "abd/generator.hpp"

using namespace abd;

namespace {

void BM_GenerateInstance(benchmark::State& st) {
  const Regime r = static_cast<Regime>(st.range(0));
  const TheoryId t = r == Regime::Skeptical ? TheoryId::T6 : TheoryId::T1;
  GenParams p = GenParams::defaults(r, t);
  p.holdout_count = 0;
  const auto templates = usable_templates(builtin_theory(t));
  std::uint64_t seed = 0;
  for (auto _ : st) {
    // Rejections are part of the cost being measured.
    try {
      benchmark::DoNotOptimize(generate_instance(p, templates[seed % templates.size()], seed));
    } catch (const GenerationError&) {
    }
    ++seed;
  }
}
BENCHMARK(BM_GenerateInstance)
    ->Arg(int(Regime::Full))
    ->Arg(int(Regime::Partial))
    ->Arg(int(Regime::Skeptical))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
