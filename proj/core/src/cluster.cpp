#include "kbdepth/cluster.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "kbdepth/closure.hpp"
#include "kbdepth/encode.hpp"
#include "kbdepth/errors.hpp"

namespace kbdepth {
namespace {

uint64_t fnv1a(const void* data, size_t len, uint64_t h = 1469598103934665603ull) {
  const uint8_t* p = static_cast<const uint8_t*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

uint64_t element_hash(const Formula& f, const SymbolTable& table) {
  BitString enc = canonical_encode(f, table);
  uint64_t size_tag = enc.size();
  uint64_t h = fnv1a(&size_tag, sizeof(size_tag));
  return fnv1a(enc.bytes().data(), enc.bytes().size(), h);
}

struct UnionFind {
  std::vector<size_t> parent;
  explicit UnionFind(size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  size_t find(size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(size_t a, size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

double jaccard_distance(const std::vector<Formula>& a,
                        const std::vector<Formula>& b) {
  std::unordered_set<Formula, FormulaHash> sa(a.begin(), a.end());
  std::unordered_set<Formula, FormulaHash> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 0.0;
  if (sa.empty() || sb.empty()) return 1.0;
  size_t inter = 0;
  for (const Formula& f : sa) inter += sb.count(f);
  size_t uni = sa.size() + sb.size() - inter;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<uint64_t> minhash_signature(const std::vector<Formula>& set,
                                        const SymbolTable& table,
                                        const MinHashParams& params) {
  if (params.bands * params.rows != params.functions)
    throw Error(Errc::kInvalidArgument, "bands * rows must equal functions");
  std::vector<uint64_t> sig(params.functions, ~0ull);
  for (const Formula& f : set) {
    uint64_t h = element_hash(f, table);
    for (size_t i = 0; i < params.functions; ++i) {
      uint64_t v = mix64(h ^ (0x9E3779B97F4A7C15ull * (i + 1)));
      sig[i] = std::min(sig[i], v);
    }
  }
  return sig;
}

double signature_distance(const std::vector<uint64_t>& a,
                          const std::vector<uint64_t>& b) {
  if (a.size() != b.size() || a.empty())
    throw Error(Errc::kInvalidArgument, "signature size mismatch");
  size_t differ = 0;
  for (size_t i = 0; i < a.size(); ++i) differ += a[i] != b[i];
  return static_cast<double>(differ) / static_cast<double>(a.size());
}

namespace {

// First-fit split of one candidate group into pairwise-cohesive subclusters,
// deterministic in member order.
std::vector<std::vector<size_t>> cohesive_split(
    const std::vector<size_t>& group,
    const std::vector<std::vector<Formula>>& support, double delta_clust,
    uint64_t* exact_pairs) {
  std::vector<std::vector<size_t>> subs;
  for (size_t idx : group) {
    bool placed = false;
    for (std::vector<size_t>& sub : subs) {
      bool fits = true;
      for (size_t other : sub) {
        ++*exact_pairs;
        if (jaccard_distance(support[idx], support[other]) > delta_clust) {
          fits = false;
          break;
        }
      }
      if (fits) {
        sub.push_back(idx);
        placed = true;
        break;
      }
    }
    if (!placed) subs.push_back({idx});
  }
  return subs;
}

QueryCluster summarize_cluster(const std::vector<size_t>& members,
                               const std::vector<std::vector<Formula>>& support,
                               const Workload& workload,
                               const std::vector<Depth>& depths,
                               const SymbolTable& table) {
  QueryCluster c;
  c.members = members;
  std::sort(c.members.begin(), c.members.end());

  std::unordered_map<Formula, size_t, FormulaHash> counts;
  size_t min_support = SIZE_MAX;
  for (size_t idx : c.members) {
    std::unordered_set<Formula, FormulaHash> uniq(support[idx].begin(),
                                                  support[idx].end());
    min_support = std::min(min_support, uniq.size());
    for (const Formula& f : uniq) counts[f]++;
  }
  for (const auto& [f, k] : counts) {
    c.ext.push_back(f);
    if (k == c.members.size()) c.core.push_back(f);
  }
  auto canon = [&](const Formula& x, const Formula& y) {
    return canonical_less(x, y, table);
  };
  std::sort(c.ext.begin(), c.ext.end(), canon);
  std::sort(c.core.begin(), c.core.end(), canon);
  std::unordered_set<Formula, FormulaHash> core_set(c.core.begin(),
                                                    c.core.end());
  for (const Formula& f : c.ext)
    if (!core_set.count(f)) c.supplement.push_back(f);

  c.kappa = static_cast<double>(c.core.size()) /
            static_cast<double>(std::max<size_t>(1, min_support));
  double depth_sum = 0.0;
  for (size_t idx : c.members) {
    c.weight += workload.entries[idx].prob;
    depth_sum += workload.entries[idx].prob *
                 static_cast<double>(depths[idx].value());
  }
  if (c.weight > 0.0) c.mean_depth = depth_sum / c.weight;
  return c;
}

}  // namespace

ClusterModel cluster_queries(const KnowledgeBase& kb, const Workload& workload,
                             double delta_clust, const MinHashParams& params,
                             const SearchLimits& limits) {
  if (!(delta_clust >= 0.0 && delta_clust <= 1.0))
    throw Error(Errc::kInvalidArgument, "delta_clust must lie in [0, 1]");

  ClusterModel model;
  const size_t n = workload.entries.size();
  model.support.resize(n);
  model.support_exact.assign(n, true);

  CoreResult core = atom_core(kb);
  std::vector<Depth> depths(n, Depth::unreachable());
  std::vector<size_t> live;
  for (size_t i = 0; i < n; ++i) {
    const Formula& q = workload.entries[i].query;
    if (!kb.symbols().covers(q) ||
        !entails(kb.operational_base(), kb.system(), q)) {
      model.excluded.push_back(i);
      continue;
    }
    DepthResult d = derivation_depth(q, kb.operational_base(), kb.system());
    depths[i] = d.depth;
    EssResult ess = ess_plus(q, core.core, kb.system(), EssMode::kExact, limits);
    model.support[i] = ess.atoms;
    model.support_exact[i] = ess.exact;
    live.push_back(i);
  }

  // LSH banding over minhash signatures proposes candidate groups.
  std::vector<std::vector<uint64_t>> sigs(n);
  for (size_t i : live)
    sigs[i] = minhash_signature(model.support[i], kb.symbols(), params);
  UnionFind uf(n);
  for (size_t band = 0; band < params.bands; ++band) {
    std::unordered_map<uint64_t, std::vector<size_t>> buckets;
    for (size_t i : live) {
      uint64_t h = fnv1a(sigs[i].data() + band * params.rows,
                         params.rows * sizeof(uint64_t),
                         1469598103934665603ull ^ (band + 1));
      buckets[h].push_back(i);
    }
    for (const auto& [h, members] : buckets)
      for (size_t k = 1; k < members.size(); ++k)
        uf.unite(members[0], members[k]);
  }

  std::map<size_t, std::vector<size_t>> groups;  // root -> members, ordered
  for (size_t i : live) groups[uf.find(i)].push_back(i);
  for (const auto& [root, members] : groups)
    model.bucket_pairs += members.size() * (members.size() - 1) / 2;

  for (const auto& [root, members] : groups) {
    std::vector<std::vector<size_t>> subs = cohesive_split(
        members, model.support, delta_clust, &model.exact_pairs);
    for (const std::vector<size_t>& sub : subs)
      model.clusters.push_back(summarize_cluster(sub, model.support, workload,
                                                 depths, kb.symbols()));
  }
  std::sort(model.clusters.begin(), model.clusters.end(),
            [](const QueryCluster& a, const QueryCluster& b) {
              return a.members.front() < b.members.front();
            });
  return model;
}

ClusterAllocation cluster_aware_allocate(
    const KnowledgeBase& kb, const Workload& workload,
    const CandidateSet& candidates, double budget, double delta_clust,
    double kappa_threshold, size_t seed_size, const MinHashParams& params,
    const SearchLimits& limits) {
  ClusterAllocation out;
  out.model = cluster_queries(kb, workload, delta_clust, params, limits);
  out.full_size = candidates.items.size();

  CoreResult core = atom_core(kb);
  std::vector<Depth> depths(workload.entries.size(), Depth::unreachable());
  for (size_t i = 0; i < workload.entries.size(); ++i) {
    bool excluded = std::find(out.model.excluded.begin(),
                              out.model.excluded.end(),
                              i) != out.model.excluded.end();
    if (!excluded)
      depths[i] =
          derivation_depth(workload.entries[i].query, kb.operational_base(),
                           kb.system())
              .depth;
  }

  // Weak clusters get split into pairs (ascending exact distance) before
  // their cores gate candidates; anything still coreless is dropped.
  for (size_t k = 0; k < out.model.clusters.size(); ++k) {
    const QueryCluster& c = out.model.clusters[k];
    std::string tag = "cluster " + std::to_string(k);
    bool weak = c.core.empty() ||
                (c.members.size() > 2 && c.kappa < kappa_threshold);
    if (!weak) {
      out.effective.push_back(c);
      out.audit.push_back(tag + ": kept");
      continue;
    }
    if (c.members.size() <= 2) {
      out.audit.push_back(tag + ": dropped (no shared support)");
      continue;
    }
    out.audit.push_back(tag + ": split into pairs");
    struct Edge {
      double dist;
      size_t a, b;
    };
    std::vector<Edge> edges;
    for (size_t i = 0; i < c.members.size(); ++i)
      for (size_t j = i + 1; j < c.members.size(); ++j)
        edges.push_back({jaccard_distance(out.model.support[c.members[i]],
                                          out.model.support[c.members[j]]),
                         c.members[i], c.members[j]});
    std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
      if (x.dist != y.dist) return x.dist < y.dist;
      if (x.a != y.a) return x.a < y.a;
      return x.b < y.b;
    });
    std::unordered_set<size_t> matched;
    std::vector<std::vector<size_t>> parts;
    for (const Edge& e : edges) {
      if (matched.count(e.a) || matched.count(e.b)) continue;
      matched.insert(e.a);
      matched.insert(e.b);
      parts.push_back({e.a, e.b});
    }
    for (size_t m : c.members)
      if (!matched.count(m)) parts.push_back({m});
    for (const std::vector<size_t>& p : parts) {
      QueryCluster sub = summarize_cluster(p, out.model.support, workload,
                                           depths, kb.symbols());
      std::string sub_tag = tag + " pair {";
      for (size_t i = 0; i < sub.members.size(); ++i)
        sub_tag += (i ? "," : "") + std::to_string(sub.members[i]);
      sub_tag += "}";
      if (sub.core.empty()) {
        out.audit.push_back(sub_tag + ": dropped (no shared support)");
      } else {
        out.effective.push_back(sub);
        out.audit.push_back(sub_tag + ": kept");
      }
    }
  }

  // A candidate stays when its own support fits inside some retained core.
  std::vector<Formula> reduced;
  for (uint32_t ci = 0; ci < candidates.items.size(); ++ci) {
    EssResult ess = ess_plus(candidates.items[ci].formula, core.core,
                             kb.system(), EssMode::kExact, limits);
    bool keep = false;
    for (const QueryCluster& c : out.effective) {
      std::unordered_set<Formula, FormulaHash> core_set(c.core.begin(),
                                                        c.core.end());
      bool inside = !ess.atoms.empty();
      for (const Formula& f : ess.atoms)
        if (!core_set.count(f)) {
          inside = false;
          break;
        }
      if (inside) {
        keep = true;
        break;
      }
    }
    if (keep) {
      out.reduced_items.push_back(ci);
      reduced.push_back(candidates.items[ci].formula);
    }
  }
  out.reduced_size = reduced.size();

  DepthObjective objective(kb.system(), kb.symbols(), kb.operational_base(),
                           workload.entries, reduced);
  std::vector<double> costs;
  for (uint32_t ci : out.reduced_items)
    costs.push_back(candidates.items[ci].cost);
  out.allocation = greedy_knapsack(objective, costs, budget, seed_size);
  return out;
}

}  // namespace kbdepth
