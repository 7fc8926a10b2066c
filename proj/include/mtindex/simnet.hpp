#pragma once

#include <optional>
#include <variant>

#include "mtindex/cluster.hpp"
#include "mtindex/query_engine.hpp"
#include "mtindex/workload.hpp"

namespace mtindex {

struct TagActionEvent {
  ResourceId resource;
  std::string tag;
  bool add = true;
};
struct DecayTickEvent {};
struct UpdateTickEvent {};
struct QueryEvent {
  std::vector<std::string> terms;
  std::string user;
};

/// Simulation event. At equal timestamps the kind decides the order:
/// tag actions, then decay ticks, then update ticks, then queries, so a
/// query always observes the freshest state of its tick.
struct Event {
  Tick time = 0;
  std::uint64_t seq = 0;
  std::variant<TagActionEvent, DecayTickEvent, UpdateTickEvent, QueryEvent> payload;

  int priority() const { return static_cast<int>(payload.index()); }
};

struct QueryRunRecord {
  std::int64_t id = 0;
  Tick time = 0;
  std::size_t n_terms = 0;
  std::size_t size_probes = 0;
  std::uint64_t tr = 0;
  std::uint64_t ck = 0;
  std::uint64_t ik = 0;
  bool direct_hit = false;
  bool cache_hit = false;
  bool early_exit = false;
  std::vector<ResourceId> result;
};

struct EngineOptions {
  bool record_results = true;
  /// Debug mode: validate cache coherence and structural invariants after
  /// every processed event (expensive).
  bool coherence_check_each_event = false;
};

/// Deterministic discrete-event simulation over one Cluster.
class SimEngine {
 public:
  SimEngine(SystemConfig cfg, IndexMode mode, EngineOptions options = {});

  Cluster& cluster() { return cluster_; }
  const Cluster& cluster() const { return cluster_; }

  /// Unaccounted bulk insert of one resource into the corpus and the
  /// single-term index.
  void load_resource(const ResourceId& id, const std::set<std::string>& tags);

  /// Materializes a multi-term key as a fresh constituent intersection
  /// without traffic accounting (best-case experiments).
  void prewarm_key(const TagKey& key);
  void prewarm_for_queries(const std::vector<workload::QueryLogRecord>& queries);

  /// Validates ordering, applies the tie-break order, processes all events.
  void run(std::vector<Event> events);

  const std::vector<QueryRunRecord>& query_log() const { return query_log_; }
  const std::map<ResourceId, Resource>& resources() const { return resources_; }

  /// Ground truth {r : q subset of considered_tags(r)} over current state.
  std::vector<ResourceId> brute_force_answer(const std::vector<std::string>& terms) const;

  /// Throws std::logic_error when a cached copy diverges from the index
  /// live list or a cached key is not available.
  void verify_coherence() const;

 private:
  void handle_tag_action(const TagActionEvent& ev, Tick now, bool accounted);
  void apply_index_update(const std::string& term, const ResourceId& resource, bool add, Tick now,
                          bool accounted);
  void handle_decay_tick(Tick now);
  void handle_update_tick(Tick now);
  void handle_query(const QueryEvent& ev, Tick now);

  Cluster cluster_;
  EngineOptions options_;
  std::map<ResourceId, Resource> resources_;
  std::vector<QueryRunRecord> query_log_;
};

/// Merges live tag actions (ts > 0) and queries into a time-ordered event
/// stream, inserting decay and update ticks at their configured periods up
/// to the last payload event.
std::vector<Event> build_event_stream(const std::vector<workload::TagActionRecord>& actions,
                                      const std::vector<workload::QueryLogRecord>& queries,
                                      const SystemConfig& cfg, bool emit_ticks = true);

// --- run reporting -------------------------------------------------------

/// Flat metric name -> value view of a ledger, used for normalized
/// run-to-run comparison and the JSON/CSV exports.
std::map<std::string, std::uint64_t> metrics_summary(const MetricsLedger& ledger);

struct RelativeMetric {
  bool defined = true;
  double percent = 100.0;
};

/// Per-metric percentage of baseline; a zero baseline with nonzero variant
/// is reported undefined rather than infinite.
std::map<std::string, RelativeMetric> compare_runs(
    const std::map<std::string, std::uint64_t>& baseline,
    const std::map<std::string, std::uint64_t>& variant);

std::string metrics_csv(const MetricsLedger& ledger, const std::string& run_id,
                        const std::string& variant, const std::string& scheme);
std::string metrics_json(const MetricsLedger& ledger, const std::string& run_id,
                         const std::string& variant, const std::string& scheme,
                         std::size_t query_count);
std::string query_log_csv(const std::vector<QueryRunRecord>& records);
std::string results_tsv(const std::vector<QueryRunRecord>& records);
std::map<std::int64_t, std::vector<ResourceId>> parse_results_tsv(const std::string& text);
std::string compare_json(const std::map<std::string, RelativeMetric>& rel);

}  // namespace mtindex
