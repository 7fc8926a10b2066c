#include "mtindex/simnet.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "mtindex/gateway_cache.hpp"

namespace mtindex {

SimEngine::SimEngine(SystemConfig cfg, IndexMode mode, EngineOptions options)
    : cluster_(std::move(cfg), mode), options_(options) {}

void SimEngine::load_resource(const ResourceId& id, const std::set<std::string>& tags) {
  Resource& res = resources_[id];
  res.id = id;
  res.tags = tags;
  res.considered_tags = derive_considered_tags(tags, cluster_.cfg.t_max);
  for (const auto& tag : res.considered_tags) {
    cluster_.index.apply_tag_action(tag, id, TagAction::add, 0);
  }
}

void SimEngine::prewarm_key(const TagKey& key) {
  if (key.single()) {
    cluster_.index.touch(key);
    return;
  }
  std::optional<std::vector<ResourceId>> acc;
  for (const auto& term : key.terms()) {
    cluster_.index.touch(term_key(term));
    std::vector<ResourceId> list = cluster_.index.inverted_list(term_key(term));
    acc = acc ? intersect_sorted(*acc, list) : std::move(list);
  }
  cluster_.index.install_list(key, std::move(*acc), 0);
}

void SimEngine::prewarm_for_queries(const std::vector<workload::QueryLogRecord>& queries) {
  std::set<TagKey> keys;
  for (const auto& rec : queries) {
    Query q = make_query(rec.terms, rec.ts);
    for (TagKey& key : compute_subset_keys(q, cluster_.cfg.s_max)) keys.insert(std::move(key));
  }
  for (const TagKey& key : keys) prewarm_key(key);
}

void SimEngine::handle_tag_action(const TagActionEvent& ev, Tick now, bool accounted) {
  Resource& res = resources_[ev.resource];
  res.id = ev.resource;
  const bool noop = ev.add ? !res.tags.insert(ev.tag).second : res.tags.erase(ev.tag) == 0;
  if (noop) {
    cluster_.ledger.record_anomaly();
    return;
  }
  // The considered set can shift when the resource holds more tags than
  // t_max; forward exactly the induced single-term index changes.
  std::set<std::string> considered = derive_considered_tags(res.tags, cluster_.cfg.t_max);
  for (const auto& tag : considered) {
    if (!res.considered_tags.contains(tag)) apply_index_update(tag, ev.resource, true, now, accounted);
  }
  for (const auto& tag : res.considered_tags) {
    if (!considered.contains(tag)) apply_index_update(tag, ev.resource, false, now, accounted);
  }
  res.considered_tags = std::move(considered);
}

void SimEngine::apply_index_update(const std::string& term, const ResourceId& resource, bool add,
                                   Tick now, bool accounted) {
  const TagKey key = term_key(term);
  if (accounted) {
    cluster_.ledger.account_message(resource_node_id(resource), key_node_id(key), 1,
                                    Cause::single_term_update);
    cluster_.ledger.record_key_access(Cause::single_term_update, AccessKind::write);
    cluster_.ledger.record_local_io(key_node_id(key), 1, Cause::single_term_update);
  }
  ApplyResult result =
      cluster_.index.apply_tag_action(term, resource, add ? TagAction::add : TagAction::del, now);
  if (result.absent_delete) cluster_.ledger.record_anomaly();
  if (result.changed && cluster_.caching_enabled()) {
    const KeyRecord* rec = cluster_.index.find(key);
    if (rec != nullptr && rec->cached) {
      propagate_single_term_update(cluster_, key, resource, !add);
    }
  }
}

void SimEngine::handle_decay_tick(Tick now) {
  BackendIndex& index = cluster_.index;
  // Gateways report accumulated cache hits before the shift so the hits
  // of the closing window still count.
  for (auto& gw : cluster_.gateways) {
    for (const auto& [key, hits] : gw.pending_hits) {
      cluster_.ledger.account_message(gateway_node_id(gw.id), key_node_id(key), 0,
                                      Cause::cache_maintenance);
      cluster_.ledger.record_key_access(Cause::cache_maintenance, AccessKind::probe);
      for (int i = 0; i < hits; ++i) index.record_request(key);
    }
    gw.pending_hits.clear();
  }

  std::vector<std::pair<TagKey, ActionSet>> decisions;
  for (auto& [key, rec] : index.keys_mut()) {
    rec.pop = rec.pop.after_decay();
    ActionSet actions = classify(rec.pop, cluster_.cfg, rec.state, rec.cached);
    if (key.single()) {
      actions.suspend = false;
      actions.resume = false;
    }
    if (!cluster_.caching_enabled()) {
      actions.cache_insert = false;
      actions.cache_evict = false;
    }
    if (!actions.none()) decisions.emplace_back(key, actions);
  }
  for (const auto& [key, actions] : decisions) {
    if (actions.cache_evict) cache_evict(cluster_, key);
    if (actions.suspend) index.suspend_key(key);
    if (actions.resume) resume_key(index, cluster_.ledger, key, now);
    if (actions.cache_insert) cache_insert(cluster_, key);
  }
}

void SimEngine::handle_update_tick(Tick now) {
  BackendIndex& index = cluster_.index;
  std::vector<TagKey> due;
  for (const auto& [key, rec] : index.keys()) {
    if (key.single() || !rec.available()) continue;
    if (now - rec.list->last_update_ts > 0) due.push_back(key);
  }
  for (const TagKey& key : due) {
    DeltaSet delta = incremental_update(index, cluster_.ledger, key, now);
    const KeyRecord* rec = index.find(key);
    if (rec != nullptr && rec->cached) propagate_incremental_result(cluster_, key, delta);
  }
  index.gc_tombstones(now, cluster_.cfg.delta_update);
}

void SimEngine::handle_query(const QueryEvent& ev, Tick now) {
  Query q = make_query(ev.terms, now);
  QueryOutcome outcome = handle_query_request(cluster_, q);
  QueryRunRecord rec;
  rec.id = static_cast<std::int64_t>(query_log_.size());
  rec.time = now;
  rec.n_terms = q.terms.size();
  rec.size_probes = outcome.size_probes;
  rec.tr = outcome.tr;
  rec.ck = outcome.ck;
  rec.ik = outcome.ik;
  rec.direct_hit = outcome.direct_hit;
  rec.cache_hit = outcome.cache_hit;
  rec.early_exit = outcome.early_exit;
  if (options_.record_results) rec.result = std::move(outcome.result);
  query_log_.push_back(std::move(rec));
}

void SimEngine::run(std::vector<Event> events) {
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].time < events[i - 1].time) {
      throw std::invalid_argument("event stream not time-ordered");
    }
  }
  for (const Event& ev : events) {
    if (ev.time < 0) throw std::invalid_argument("negative event time");
    if (const auto* q = std::get_if<QueryEvent>(&ev.payload)) {
      if (q->terms.empty()) throw std::invalid_argument("query event without terms");
    }
    if (const auto* a = std::get_if<TagActionEvent>(&ev.payload)) {
      if (a->tag.empty() || a->resource.empty()) {
        throw std::invalid_argument("tag action event missing fields");
      }
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.priority() < b.priority();
  });

  for (const Event& ev : events) {
    std::visit(
        [&](const auto& payload) {
          using T = std::decay_t<decltype(payload)>;
          if constexpr (std::is_same_v<T, TagActionEvent>) {
            handle_tag_action(payload, ev.time, true);
          } else if constexpr (std::is_same_v<T, DecayTickEvent>) {
            handle_decay_tick(ev.time);
          } else if constexpr (std::is_same_v<T, UpdateTickEvent>) {
            handle_update_tick(ev.time);
          } else {
            handle_query(payload, ev.time);
          }
        },
        ev.payload);
    if (options_.coherence_check_each_event) verify_coherence();
  }
}

std::vector<ResourceId> SimEngine::brute_force_answer(
    const std::vector<std::string>& terms) const {
  std::vector<ResourceId> out;
  for (const auto& [id, res] : resources_) {
    bool all = std::all_of(terms.begin(), terms.end(), [&](const std::string& t) {
      return res.considered_tags.contains(t);
    });
    if (all) out.push_back(id);
  }
  return out;
}

void SimEngine::verify_coherence() const {
  for (const auto& gw : cluster_.gateways) {
    for (const auto& [key, copy] : gw.cache) {
      const KeyRecord* rec = cluster_.index.find(key);
      if (rec == nullptr || !rec->available()) {
        throw std::logic_error("cached key not available in index: " + key.label());
      }
      if (!rec->cached) {
        throw std::logic_error("cached key not flagged on back end: " + key.label());
      }
      if (rec->list->live() != copy) {
        throw std::logic_error("cache copy diverges from index: " + key.label());
      }
    }
  }
  for (const auto& [key, rec] : cluster_.index.keys()) {
    if (!rec.cached) continue;
    bool held = std::any_of(cluster_.gateways.begin(), cluster_.gateways.end(),
                            [&](const GatewayNode& gw) { return gw.cache.contains(key); });
    if (!held) throw std::logic_error("cached flag without gateway copy: " + key.label());
  }
}

std::vector<Event> build_event_stream(const std::vector<workload::TagActionRecord>& actions,
                                      const std::vector<workload::QueryLogRecord>& queries,
                                      const SystemConfig& cfg, bool emit_ticks) {
  std::vector<Event> events;
  std::uint64_t seq = 0;
  Tick horizon = 0;
  for (const auto& rec : actions) {
    if (rec.ts <= 0) continue;  // bulk rows are loaded, not replayed
    events.push_back(Event{rec.ts, seq++, TagActionEvent{rec.resource, rec.tag, rec.add}});
    horizon = std::max(horizon, rec.ts);
  }
  for (const auto& rec : queries) {
    events.push_back(Event{rec.ts, seq++, QueryEvent{rec.terms, rec.user}});
    horizon = std::max(horizon, rec.ts);
  }
  if (emit_ticks) {
    for (Tick t = cfg.delta_decay; t <= horizon; t += cfg.delta_decay) {
      events.push_back(Event{t, seq++, DecayTickEvent{}});
    }
    for (Tick t = cfg.delta_update; t <= horizon; t += cfg.delta_update) {
      events.push_back(Event{t, seq++, UpdateTickEvent{}});
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.priority() < b.priority();
  });
  return events;
}

std::map<std::string, std::uint64_t> metrics_summary(const MetricsLedger& ledger) {
  std::map<std::string, std::uint64_t> out;
  const CauseCounters total = ledger.totals();
  out["ck"] = total.ck;
  out["ik"] = total.ik;
  out["tr"] = total.tr;
  out["messages"] = total.messages;
  out["hr_gateway_total"] = total.hr_gateway;
  out["hr_backend_total"] = total.hr_backend;
  out["gw_lookups"] = ledger.gw_lookups();
  out["gw_cache_hits"] = ledger.gw_cache_hits();
  out["gw_cache_misses"] = ledger.gw_cache_misses();
  out["anomalies"] = ledger.anomalies();
  for (Cause cause : kAllCauses) {
    const CauseCounters& c = ledger.by_cause(cause);
    const std::string suffix = "." + to_string(cause);
    out["ck" + suffix] = c.ck;
    out["ik" + suffix] = c.ik;
    out["tr" + suffix] = c.tr;
    out["messages" + suffix] = c.messages;
    out["hr_gateway" + suffix] = c.hr_gateway;
    out["hr_backend" + suffix] = c.hr_backend;
  }
  return out;
}

std::map<std::string, RelativeMetric> compare_runs(
    const std::map<std::string, std::uint64_t>& baseline,
    const std::map<std::string, std::uint64_t>& variant) {
  std::map<std::string, RelativeMetric> out;
  for (const auto& [name, base] : baseline) {
    auto it = variant.find(name);
    const std::uint64_t var = it == variant.end() ? 0 : it->second;
    RelativeMetric rel;
    if (base == 0 && var == 0) {
      rel = RelativeMetric{true, 100.0};
    } else if (base == 0) {
      rel = RelativeMetric{false, 0.0};
    } else {
      rel = RelativeMetric{true, 100.0 * static_cast<double>(var) / static_cast<double>(base)};
    }
    out.emplace(name, rel);
  }
  return out;
}

std::string metrics_csv(const MetricsLedger& ledger, const std::string& run_id,
                        const std::string& variant, const std::string& scheme) {
  std::ostringstream out;
  out << "run_id,variant,scheme,ck,ik,tr,hr_gateway_total,hr_backend_total,cause,messages,"
         "gw_lookups,gw_cache_hits,gw_cache_misses,anomalies\n";
  auto row = [&](const std::string& cause, const CauseCounters& c, std::uint64_t lookups,
                 std::uint64_t hits, std::uint64_t misses, std::uint64_t anomalies) {
    out << run_id << ',' << variant << ',' << scheme << ',' << c.ck << ',' << c.ik << ',' << c.tr
        << ',' << c.hr_gateway << ',' << c.hr_backend << ',' << cause << ',' << c.messages << ','
        << lookups << ',' << hits << ',' << misses << ',' << anomalies << '\n';
  };
  for (Cause cause : kAllCauses) {
    row(to_string(cause), ledger.by_cause(cause), 0, 0, 0, 0);
  }
  row("total", ledger.totals(), ledger.gw_lookups(), ledger.gw_cache_hits(),
      ledger.gw_cache_misses(), ledger.anomalies());
  return out.str();
}

std::string metrics_json(const MetricsLedger& ledger, const std::string& run_id,
                         const std::string& variant, const std::string& scheme,
                         std::size_t query_count) {
  nlohmann::json doc;
  doc["run_id"] = run_id;
  doc["variant"] = variant;
  doc["scheme"] = scheme;
  doc["query_count"] = query_count;
  doc["metrics"] = metrics_summary(ledger);
  nlohmann::json nodes = nlohmann::json::object();
  for (const auto& [node, hr] : ledger.hr_by_node()) nodes[node] = hr;
  doc["hr_by_node"] = std::move(nodes);
  return doc.dump(2) + "\n";
}

std::string query_log_csv(const std::vector<QueryRunRecord>& records) {
  std::ostringstream out;
  out << "query_id,time,n_terms,size_probes,ck,ik,tr,result_size,direct_hit,cache_hit,"
         "early_exit\n";
  for (const auto& r : records) {
    out << r.id << ',' << r.time << ',' << r.n_terms << ',' << r.size_probes << ',' << r.ck << ','
        << r.ik << ',' << r.tr << ',' << r.result.size() << ',' << int(r.direct_hit) << ','
        << int(r.cache_hit) << ',' << int(r.early_exit) << '\n';
  }
  return out.str();
}

std::string results_tsv(const std::vector<QueryRunRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records) {
    out << r.id << '\t';
    for (std::size_t i = 0; i < r.result.size(); ++i) {
      if (i > 0) out << ' ';
      out << r.result[i];
    }
    out << '\n';
  }
  return out.str();
}

std::map<std::int64_t, std::vector<ResourceId>> parse_results_tsv(const std::string& text) {
  std::map<std::int64_t, std::vector<ResourceId>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    std::int64_t id = std::stoll(line.substr(0, tab));
    out[id] = split(line.substr(tab + 1), ' ');
  }
  return out;
}

std::string compare_json(const std::map<std::string, RelativeMetric>& rel) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [name, metric] : rel) {
    if (metric.defined) {
      doc[name] = metric.percent;
    } else {
      doc[name] = "undefined";
    }
  }
  return doc.dump(2) + "\n";
}

}  // namespace mtindex
