#pragma once

#include <optional>
#include <vector>

#include "mtindex/core.hpp"
#include "mtindex/metrics.hpp"
#include "mtindex/popularity.hpp"

namespace mtindex {

enum class TagAction { add, del };

/// Outcome of a single-term update, used by the engine to decide cache
/// propagation and anomaly accounting.
struct ApplyResult {
  bool absent_delete = false;  // delete of a resource not in the list
  bool changed = false;        // live view changed (insert, unmark, or mark)
};

struct DeltaSet {
  std::vector<ResourceId> adds;  // sorted
  std::vector<ResourceId> dels;  // sorted
  Tick reference_ts = 0;

  bool empty() const { return adds.empty() && dels.empty(); }
  std::size_t size() const { return adds.size() + dels.size(); }
};

struct KeyRecord {
  KeyState state = KeyState::suspended;
  PopularityVector pop;
  std::optional<PostingList> list;  // present iff available
  bool cached = false;

  bool available() const { return state == KeyState::available; }
};

/// The distributed inverted index under worst-case placement: every
/// distinct key lives on its own virtual back-end node. Single-term keys
/// are always available; multi-term keys start suspended until resumed.
class BackendIndex {
 public:
  explicit BackendIndex(int ell) : ell_(ell) {}

  /// Creates the tracking entry on first sight. Single-term keys come up
  /// available with an empty list, multi-term keys suspended.
  KeyRecord& touch(const TagKey& key);
  const KeyRecord* find(const TagKey& key) const;
  KeyRecord* find(const TagKey& key);

  void record_request(const TagKey& key);

  ApplyResult apply_tag_action(const std::string& term, const ResourceId& resource,
                               TagAction action, Tick now);

  /// Live entry count, or nullopt when the key is suspended or untracked.
  std::optional<std::size_t> result_size(const TagKey& key) const;

  /// Live entries only; throws KeyUnavailable for suspended/untracked keys.
  std::vector<ResourceId> inverted_list(const TagKey& key) const;

  /// Discards the list and marks the key suspended; popularity survives.
  /// Throws Forbidden for single-term keys.
  void suspend_key(const TagKey& key);

  /// Installs a freshly computed live list and marks the key available.
  void install_list(const TagKey& key, std::vector<ResourceId> live, Tick now);

  /// Removes tombstones aged at least delta_update; returns removal count.
  std::size_t gc_tombstones(Tick now, Tick delta_update);

  /// Entries of a single-term key changed after reference_ts, split into
  /// current adds (live) and deletes (tombstoned).
  DeltaSet compute_delta(const TagKey& single_key, Tick reference_ts) const;

  const std::map<TagKey, KeyRecord>& keys() const { return keys_; }
  std::map<TagKey, KeyRecord>& keys_mut() { return keys_; }
  int ell() const { return ell_; }

  /// One line per key: `terms<TAB>state<TAB>last_update_ts<TAB>entry,...`
  /// with entry = `resource:ts[:D]`.
  std::string snapshot() const;

 private:
  int ell_;
  std::map<TagKey, KeyRecord> keys_;
};

/// Rebuilds a multi-term key from scratch: the chain intersection of its
/// constituent single-term lists, accounted against `ledger` as resume
/// traffic. Requires size(key) >= 2.
void resume_key(BackendIndex& index, MetricsLedger& ledger, const TagKey& key, Tick now);

/// Delta-only refresh of an available multi-term key. Forward pass
/// accumulates and filters origin-tagged candidates along the constituent
/// chain; the backward pass finishes membership checks for candidates
/// that originated past the first position. Returns the net change applied.
DeltaSet incremental_update(BackendIndex& index, MetricsLedger& ledger, const TagKey& key,
                            Tick now);

std::vector<ResourceId> intersect_sorted(const std::vector<ResourceId>& a,
                                         const std::vector<ResourceId>& b);

}  // namespace mtindex
