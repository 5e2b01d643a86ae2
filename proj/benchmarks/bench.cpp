#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "kbdepth/alloc.hpp"
#include "kbdepth/census.hpp"
#include "kbdepth/closure.hpp"
#include "kbdepth/cluster.hpp"
#include "kbdepth/depth.hpp"
#include "kbdepth/parser.hpp"
#include "kbdepth/search.hpp"
#include "kbdepth/selfcheck.hpp"
#include "kbdepth/trace.hpp"

namespace {

using namespace kbdepth;

std::string chain_text(int n) {
  std::string text = "a0.\n";
  for (int i = 0; i < n; ++i)
    text += "a" + std::to_string(i + 1) + " :- a" + std::to_string(i) + ".\n";
  return text;
}

std::string subset_query(int width) {
  std::string q;
  for (int i = 0; i < width; ++i) q += (i ? " & e" : "e") + std::to_string(i);
  return q;
}

void BM_ParseChain(benchmark::State& state) {
  std::string text = chain_text(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(parse_kb(text));
}
BENCHMARK(BM_ParseChain)->Arg(64)->Arg(512);

void BM_ClosureChain(benchmark::State& state) {
  KnowledgeBase kb = parse_kb(chain_text(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    AtomClosure closure(kb.operational_base(), kb.system(), kb.constants());
    benchmark::DoNotOptimize(closure.atoms().size());
  }
}
BENCHMARK(BM_ClosureChain)->Arg(64)->Arg(512);

void BM_DepthChain(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  KnowledgeBase kb = parse_kb(chain_text(n));
  Formula q = parse_formula("a" + std::to_string(n));
  for (auto _ : state) {
    DepthResult r = derivation_depth(q, kb.operational_base(), kb.system());
    benchmark::DoNotOptimize(r.depth);
  }
}
BENCHMARK(BM_DepthChain)->Arg(64)->Arg(512);

void BM_ShortestTrace(benchmark::State& state) {
  uint64_t m = static_cast<uint64_t>(state.range(0));
  KnowledgeBase kb = independent_base(m);
  int width = 1;
  while (static_cast<uint64_t>(width + 1) * (width + 1) <= m) ++width;
  Formula q = parse_formula(subset_query(width + 1));
  for (auto _ : state) {
    auto r = min_trace_length(q, kb.operational_base(), kb.system());
    benchmark::DoNotOptimize(r.length);
  }
}
BENCHMARK(BM_ShortestTrace)->Arg(16)->Arg(64)->Arg(256);

void BM_TraceCodec(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  KnowledgeBase kb = parse_kb(chain_text(n));
  Formula q = parse_formula("a" + std::to_string(n));
  DepthResult r = derivation_depth(q, kb.operational_base(), kb.system());
  DerivationTrace trace = witness_to_trace(q, r, kb.operational_base());
  for (auto _ : state) {
    TraceEncoding enc = encode_trace(trace, kb.system());
    DerivationTrace back = decode_trace(enc.bits, kb.system());
    benchmark::DoNotOptimize(back.steps.size());
  }
}
BENCHMARK(BM_TraceCodec)->Arg(64)->Arg(512);

void BM_MinHash(benchmark::State& state) {
  KnowledgeBase kb = independent_base(256);
  std::vector<Formula> set;
  for (int i = 0; i < 64; ++i)
    set.push_back(parse_formula("e" + std::to_string(i * 3)));
  for (auto _ : state) {
    auto sig = minhash_signature(set, kb.symbols());
    benchmark::DoNotOptimize(sig[0]);
  }
}
BENCHMARK(BM_MinHash);

void BM_GreedyAllocate(benchmark::State& state) {
  Rng rng(2026);
  TreeInstance inst = random_tree_instance(rng);
  std::vector<WorkloadEntry> entries;
  for (size_t i = 0; i < inst.queries.size(); ++i)
    entries.push_back(
        {parse_formula(inst.queries[i]), inst.queries[i], inst.probs[i]});
  std::vector<Formula> items;
  std::vector<double> costs;
  for (const std::string& c : inst.candidates) {
    items.push_back(parse_formula(c));
    costs.push_back(8.0);
  }
  double budget = 8.0 * (costs.size() / 2 + 1);
  for (auto _ : state) {
    DepthObjective objective(inst.kb.system(), inst.kb.symbols(),
                             inst.kb.operational_base(), entries, items);
    Allocation a = greedy_knapsack(objective, costs, budget, 2);
    benchmark::DoNotOptimize(a.delta);
  }
}
BENCHMARK(BM_GreedyAllocate);

}  // namespace

BENCHMARK_MAIN();
