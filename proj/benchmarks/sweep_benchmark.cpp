#include <benchmark/benchmark.h>

#include "itm/hdpitm.hpp"
#include "itm/itm.hpp"
#include "itm/lda.hpp"
#include "itm/synth.hpp"

namespace {

// One default synthetic cell, shared by every benchmark.
const itm::Corpus& cell_corpus() {
  static const itm::Corpus corpus = [] {
    itm::SynthConfig c;
    c.seed = 1;
    c.ambiguity = 0.1;
    c.variation = 0.1;
    return itm::generate_corpus(itm::generate_ground_truth(c), c).corpus;
  }();
  return corpus;
}

void BM_LdaSweep(benchmark::State& st) {
  itm::LdaConfig c;
  c.n_topics = static_cast<std::size_t>(st.range(0));
  itm::LdaState s(cell_corpus(), c);
  for (auto _ : st) itm::lda_sweep(s);
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.n_tuples()));
}
BENCHMARK(BM_LdaSweep)->Arg(10)->Arg(30)->Arg(80);

void BM_ItmSweep(benchmark::State& st) {
  itm::ItmConfig c;
  c.n_topics = static_cast<std::size_t>(st.range(0));
  c.n_interests = static_cast<std::size_t>(st.range(1));
  itm::ItmState s(cell_corpus(), c);
  for (auto _ : st) itm::gibbs_sweep(s);
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.n_tuples()));
}
BENCHMARK(BM_ItmSweep)->Args({10, 3})->Args({30, 10})->Args({80, 40});

void BM_HdpSweep(benchmark::State& st) {
  itm::Rng rng(3);
  const auto k = static_cast<std::size_t>(st.range(0));
  itm::HdpState s(cell_corpus(), 1.0, k, k / 4 + 1, rng);
  itm::HdpGlobals g = itm::HdpGlobals::uniform(k, k / 4 + 1, 0.5);
  itm::SweepControl control;
  control.allow_new = false;
  for (auto _ : st) itm::hdp_sweep(s, g, rng, control);
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.n_tuples()));
}
BENCHMARK(BM_HdpSweep)->Arg(10)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
