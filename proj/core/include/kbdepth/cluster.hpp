#ifndef KBDEPTH_CLUSTER_HPP_
#define KBDEPTH_CLUSTER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "kbdepth/alloc.hpp"
#include "kbdepth/kb.hpp"
#include "kbdepth/search.hpp"
#include "kbdepth/tradeoff.hpp"

namespace kbdepth {

// Jaccard distance between premise sets: 1 - |intersection| / |union|.
// Two empty sets are identical (0); one empty set is maximally far (1).
double jaccard_distance(const std::vector<Formula>& a,
                        const std::vector<Formula>& b);

struct MinHashParams {
  size_t functions = 64;  // one mixer per seed 0..functions-1
  size_t bands = 16;
  size_t rows = 4;  // bands * rows must equal functions
};

// Per-seed minimum of a 64-bit mix of each element's canonical-encoding hash.
std::vector<uint64_t> minhash_signature(const std::vector<Formula>& set,
                                        const SymbolTable& table,
                                        const MinHashParams& params = {});

// Estimated Jaccard distance: fraction of disagreeing signature slots.
double signature_distance(const std::vector<uint64_t>& a,
                          const std::vector<uint64_t>& b);

struct QueryCluster {
  std::vector<size_t> members;      // workload indices, ascending
  std::vector<Formula> core;        // intersection of member support sets
  std::vector<Formula> ext;         // union of member support sets
  std::vector<Formula> supplement;  // ext minus core
  double kappa = 0.0;               // |core| / max(1, smallest member support)
  double weight = 0.0;              // summed probability
  double mean_depth = 0.0;          // probability-weighted depth over the base
};

struct ClusterModel {
  std::vector<QueryCluster> clusters;
  std::vector<size_t> excluded;  // workload indices outside the closure
  std::vector<std::vector<Formula>> support;  // per workload index (Ess+)
  std::vector<bool> support_exact;
  uint64_t bucket_pairs = 0;  // pairs sharing at least one LSH bucket
  uint64_t exact_pairs = 0;   // pairs re-checked with exact distances
};

// Groups workload queries whose eventual essential supports overlap: LSH
// banding proposes groups, then a first-fit pass splits each group until
// every retained cluster is pairwise cohesive at distance <= delta_clust
// under the exact Jaccard distance.  Supports are computed against the
// irredundant core of the base.
ClusterModel cluster_queries(const KnowledgeBase& kb, const Workload& workload,
                             double delta_clust,
                             const MinHashParams& params = {},
                             const SearchLimits& limits = {});

struct ClusterAllocation {
  ClusterModel model;
  std::vector<std::string> audit;       // kept / split / skipped, in order
  std::vector<QueryCluster> effective;  // clusters given to the allocator
  size_t full_size = 0;                 // candidate count before restriction
  size_t reduced_size = 0;
  std::vector<uint32_t> reduced_items;  // indices into the input candidates
  Allocation allocation;                // selection indexes reduced_items
};

// Cluster-primed allocation: weak clusters (empty core, or large with low
// cohesion kappa) are split into pairs by ascending exact distance before
// their cores gate the candidate pool; candidates whose support leaves every
// retained core are dropped; the dense greedy then runs on what remains.
ClusterAllocation cluster_aware_allocate(
    const KnowledgeBase& kb, const Workload& workload,
    const CandidateSet& candidates, double budget, double delta_clust,
    double kappa_threshold, size_t seed_size = 3,
    const MinHashParams& params = {}, const SearchLimits& limits = {});

}  // namespace kbdepth

#endif  // KBDEPTH_CLUSTER_HPP_
