#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtindex/util.hpp"

namespace mtindex {

using Tick = std::int64_t;
using ResourceId = std::string;

struct InvalidKey : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct KeyTooLarge : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct KeyUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Forbidden : std::logic_error {
  using std::logic_error::logic_error;
};

/// Canonical sorted term set, the unit of indexing, caching and routing.
/// Always constructed through canonicalize_key so the sorted/unique
/// invariant cannot be broken.
class TagKey {
 public:
  TagKey() = default;

  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool single() const { return terms_.size() == 1; }

  bool subset_of(const TagKey& other) const;
  bool contains_term(const std::string& term) const;

  /// Terms joined with '+', e.g. "jazz+music". Display form for snapshots
  /// and node ids; hashing uses the collision-free term stream instead.
  std::string label() const { return join(terms_, "+"); }
  std::uint64_t hash() const { return hash_terms(terms_); }

  /// Length-prefixed FNV over a sorted term sequence, so that {"a","b"}
  /// and {"a+b"} cannot collide. Queries route through the same stream.
  static std::uint64_t hash_terms(const std::vector<std::string>& sorted_terms);

  auto operator<=>(const TagKey&) const = default;

 private:
  friend TagKey canonicalize_key(const std::vector<std::string>& terms, int s_max);
  explicit TagKey(std::vector<std::string> sorted_terms) : terms_(std::move(sorted_terms)) {}

  std::vector<std::string> terms_;
};

/// Sorts and deduplicates; throws InvalidKey on an empty set and
/// KeyTooLarge when more than s_max distinct terms remain.
TagKey canonicalize_key(const std::vector<std::string>& terms, int s_max);

/// Single-term key shorthand.
TagKey term_key(const std::string& term);

struct Query {
  std::vector<std::string> terms;  // sorted, unique, non-empty
  Tick arrival_time = 0;
};

/// Builds a Query from raw terms (deduplicates; throws InvalidKey if empty).
Query make_query(std::vector<std::string> terms, Tick arrival_time);

struct PostingEntry {
  Tick ts = 0;
  bool deleted = false;
};

/// Timestamped, tombstoned resource list for one key. Multi-term lists
/// never hold tombstones; single-term lists keep them until GC.
struct PostingList {
  std::map<ResourceId, PostingEntry> entries;
  Tick last_update_ts = 0;  // meaningful for multi-term keys only

  std::size_t live_size() const;
  std::vector<ResourceId> live() const;  // sorted
};

enum class CacheScheme { none, uniform, dedicated };

CacheScheme parse_cache_scheme(const std::string& name);  // throws ConfigError
std::string to_string(CacheScheme scheme);

struct SystemConfig {
  int s_max = 3;
  int t_max = 20;
  int ell = 24;
  Tick delta_decay = 60;
  Tick delta_update = 180;
  int b_res = 4;
  int b_susp = 0;
  int c_ins = 12;
  int c_del = 0;
  int n_gateways = 5;
  CacheScheme cache_scheme = CacheScheme::none;
  std::uint64_t rng_seed = 1;

  /// Throws ConfigError naming the violated constraint.
  void validate() const;
};

/// Flat `key = value` config; unknown keys are rejected. Does not validate.
SystemConfig parse_system_config(const std::string& text);

struct Resource {
  ResourceId id;
  std::set<std::string> tags;
  std::set<std::string> considered_tags;  // subset used for key derivation
};

/// Deterministic considered-tag selection: the t_max lexicographically
/// smallest tags (all of them when |tags| <= t_max).
std::set<std::string> derive_considered_tags(const std::set<std::string>& tags, int t_max);

}  // namespace mtindex
