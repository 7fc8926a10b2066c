#pragma once

#include <optional>

#include "mtindex/cluster.hpp"

namespace mtindex {

struct PlanEntry {
  TagKey key;
  bool use_cache = false;
  std::size_t probed_size = 0;
};

struct KeyAccessPlan {
  std::vector<PlanEntry> entries;

  bool covers(const Query& q) const;
};

/// A probed key offered to the planner. `cached` means a copy is usable
/// from the cache of the gateway handling the query.
struct AvailableKey {
  TagKey key;
  std::size_t live_size = 0;
  bool cached = false;
};

/// All non-empty subsets of the query's terms up to size s_max, canonical.
std::vector<TagKey> compute_subset_keys(const Query& q, int s_max);

/// Greedy access-order heuristic: drop subset-redundant keys, start from
/// the smallest list, extend by maximal new-term coverage (ties: smaller
/// list, then cached, then seeded-random), then clear the cache flag of
/// interior plan entries whose both neighbors are uncached.
KeyAccessPlan compute_key_access_list(const Query& q, std::vector<AvailableKey> avail,
                                      DetRng& rng);

/// One chain step: seed with the first key's list, intersect afterwards.
/// `terminated` signals that remaining keys can be skipped.
struct ChainStep {
  std::vector<ResourceId> result;
  bool terminated = false;
};
ChainStep handle_key_list(const std::optional<std::vector<ResourceId>>& result_so_far,
                          const std::vector<ResourceId>& key_list);

struct QueryOutcome {
  std::vector<ResourceId> result;  // sorted
  std::size_t size_probes = 0;
  bool direct_hit = false;
  bool cache_hit = false;
  bool early_exit = false;  // a probed available key had live size 0
  // query-cause counter deltas attributable to this query
  std::uint64_t tr = 0;
  std::uint64_t ck = 0;
  std::uint64_t ik = 0;
};

/// Full retrieval: route to the responsible gateway, try the direct
/// cache/index hit for small queries, probe subset keys, early-exit on a
/// zero-size list, otherwise plan and run the intersection chain.
QueryOutcome handle_query_request(Cluster& cluster, const Query& q);

}  // namespace mtindex
