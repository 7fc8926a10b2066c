#include "mtindex/metrics.hpp"

namespace mtindex {

std::string to_string(Cause cause) {
  switch (cause) {
    case Cause::query: return "query";
    case Cause::resume: return "resume";
    case Cause::incremental_update: return "incremental_update";
    case Cause::single_term_update: return "single_term_update";
    case Cause::cache_maintenance: return "cache_maintenance";
  }
  return "unknown";
}

std::string gateway_node_id(int id) { return "gw:" + std::to_string(id); }
std::string key_node_id(const TagKey& key) { return "bk:key:" + key.label(); }
std::string resource_node_id(const ResourceId& id) { return "bk:res:" + id; }
bool is_gateway_node(const std::string& node_id) { return node_id.rfind("gw:", 0) == 0; }

void CauseCounters::add(const CauseCounters& other) {
  ck += other.ck;
  ik += other.ik;
  tr += other.tr;
  messages += other.messages;
  hr_gateway += other.hr_gateway;
  hr_backend += other.hr_backend;
}

void MetricsLedger::account_message(const std::string& from, const std::string& to,
                                    std::uint64_t resources, Cause cause) {
  if (from == to) return;
  CauseCounters& c = mut(cause);
  c.tr += resources;
  c.messages += 1;
  add_hr(from, resources, cause);
  add_hr(to, resources, cause);
}

void MetricsLedger::record_key_access(Cause cause, AccessKind kind) {
  CauseCounters& c = mut(cause);
  c.ck += 1;
  if (kind == AccessKind::read) c.ik += 1;
}

void MetricsLedger::record_local_io(const std::string& node, std::uint64_t resources,
                                    Cause cause) {
  add_hr(node, resources, cause);
}

void MetricsLedger::record_gw_lookup(bool hit) {
  ++gw_lookups_;
  if (hit) {
    ++gw_cache_hits_;
  } else {
    ++gw_cache_misses_;
  }
}

void MetricsLedger::add_hr(const std::string& node, std::uint64_t amount, Cause cause) {
  hr_by_node_[node] += amount;
  if (is_gateway_node(node)) {
    mut(cause).hr_gateway += amount;
  } else {
    mut(cause).hr_backend += amount;
  }
}

CauseCounters MetricsLedger::totals() const {
  CauseCounters t;
  for (const auto& c : by_cause_) t.add(c);
  return t;
}

std::uint64_t MetricsLedger::hr_gateway_total() const { return totals().hr_gateway; }
std::uint64_t MetricsLedger::hr_backend_total() const { return totals().hr_backend; }

}  // namespace mtindex
