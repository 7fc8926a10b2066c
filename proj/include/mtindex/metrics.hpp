#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "mtindex/core.hpp"

namespace mtindex {

/// Traffic causes tracked separately in every counter family.
enum class Cause { query, resume, incremental_update, single_term_update, cache_maintenance };
constexpr std::array<Cause, 5> kAllCauses = {Cause::query, Cause::resume,
                                             Cause::incremental_update, Cause::single_term_update,
                                             Cause::cache_maintenance};
std::string to_string(Cause cause);

enum class AccessKind { probe, read, write };

// Node ids carry their tier as a prefix so per-node load can be split
// into gateway and back-end totals.
std::string gateway_node_id(int id);
std::string key_node_id(const TagKey& key);
std::string resource_node_id(const ResourceId& id);
bool is_gateway_node(const std::string& node_id);

struct CauseCounters {
  std::uint64_t ck = 0;        // key accesses (read and write)
  std::uint64_t ik = 0;        // key accesses that read the inverted list
  std::uint64_t tr = 0;        // resources transferred between nodes
  std::uint64_t messages = 0;  // inter-node messages
  std::uint64_t hr_gateway = 0;
  std::uint64_t hr_backend = 0;

  void add(const CauseCounters& other);
  bool operator==(const CauseCounters&) const = default;
};

/// Per-run counters: CK, IK, TR and per-node HR, broken down by cause.
/// All counters are monotone within a run.
class MetricsLedger {
 public:
  /// Inter-node transfer of `resources` resources. Both endpoints handle
  /// the payload. A message between a node and itself is local and is
  /// ignored entirely.
  void account_message(const std::string& from, const std::string& to, std::uint64_t resources,
                       Cause cause);

  /// One access to a key on a back-end node. Probes and writes count CK;
  /// list reads count CK and IK.
  void record_key_access(Cause cause, AccessKind kind);

  /// Local secondary-storage traffic (list read or write) on one node.
  void record_local_io(const std::string& node, std::uint64_t resources, Cause cause);

  void record_gw_lookup(bool hit);
  void record_anomaly() { ++anomalies_; }

  const CauseCounters& by_cause(Cause cause) const {
    return by_cause_[static_cast<std::size_t>(cause)];
  }
  CauseCounters totals() const;

  std::uint64_t ck() const { return totals().ck; }
  std::uint64_t ik() const { return totals().ik; }
  std::uint64_t tr() const { return totals().tr; }

  std::uint64_t gw_lookups() const { return gw_lookups_; }
  std::uint64_t gw_cache_hits() const { return gw_cache_hits_; }
  std::uint64_t gw_cache_misses() const { return gw_cache_misses_; }
  std::uint64_t anomalies() const { return anomalies_; }

  const std::map<std::string, std::uint64_t>& hr_by_node() const { return hr_by_node_; }
  std::uint64_t hr_gateway_total() const;
  std::uint64_t hr_backend_total() const;

  bool operator==(const MetricsLedger&) const = default;

 private:
  CauseCounters& mut(Cause cause) { return by_cause_[static_cast<std::size_t>(cause)]; }
  void add_hr(const std::string& node, std::uint64_t amount, Cause cause);

  std::array<CauseCounters, 5> by_cause_{};
  std::map<std::string, std::uint64_t> hr_by_node_;
  std::uint64_t gw_lookups_ = 0;
  std::uint64_t gw_cache_hits_ = 0;
  std::uint64_t gw_cache_misses_ = 0;
  std::uint64_t anomalies_ = 0;
};

}  // namespace mtindex
