#pragma once

#include "mtindex/cluster.hpp"

namespace mtindex {

/// Gateways that hold (or would hold) a cached copy of `key` under the
/// cluster's scheme: all of them for uniform, the responsible one for
/// dedicated, none when caching is off.
std::vector<int> cache_holders(const Cluster& cluster, const TagKey& key);

/// A cached copy usable by gateway `gateway_id`. Under dedicated caching a
/// gateway only ever consults its own cache.
const std::vector<ResourceId>* cache_lookup(const Cluster& cluster, int gateway_id,
                                            const TagKey& key);

/// Copies the key's current live list from the back end onto the holder
/// gateway(s). The key must be available in the index.
void cache_insert(Cluster& cluster, const TagKey& key);

/// Removes the key from every holding gateway; no-op when uncached.
void cache_evict(Cluster& cluster, const TagKey& key);

/// Forwards one added or deleted resource of a cached single-term key so
/// cached copies stay exact.
void propagate_single_term_update(Cluster& cluster, const TagKey& key, const ResourceId& resource,
                                  bool deleted);

/// Patches cached copies of a multi-term key with an incremental-update
/// result. Empty deltas send nothing.
void propagate_incremental_result(Cluster& cluster, const TagKey& key, const DeltaSet& delta);

/// Same shape as the index snapshot minus tombstone fields, one line per
/// cached entry: `gateway<TAB>terms<TAB>resource,...`.
std::string cache_snapshot(const Cluster& cluster);

}  // namespace mtindex
