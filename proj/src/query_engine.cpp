#include "mtindex/query_engine.hpp"

#include <algorithm>
#include <set>

#include "mtindex/gateway_cache.hpp"

namespace mtindex {

bool KeyAccessPlan::covers(const Query& q) const {
  std::set<std::string> covered;
  for (const auto& entry : entries) {
    covered.insert(entry.key.terms().begin(), entry.key.terms().end());
  }
  return std::all_of(q.terms.begin(), q.terms.end(),
                     [&](const std::string& t) { return covered.contains(t); });
}

std::vector<TagKey> compute_subset_keys(const Query& q, int s_max) {
  const auto& terms = q.terms;
  const std::size_t n = terms.size();
  const std::size_t max_size = std::min<std::size_t>(static_cast<std::size_t>(s_max), n);
  std::vector<TagKey> out;
  std::vector<std::string> current;
  auto emit = [&]() { out.push_back(canonicalize_key(current, s_max)); };
  // Depth-first subset enumeration; terms are already sorted so keys come
  // out canonical without re-sorting.
  auto rec = [&](auto&& self, std::size_t start) -> void {
    for (std::size_t i = start; i < n; ++i) {
      current.push_back(terms[i]);
      emit();
      if (current.size() < max_size) self(self, i + 1);
      current.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

KeyAccessPlan compute_key_access_list(const Query& q, std::vector<AvailableKey> avail,
                                      DetRng& rng) {
  // Redundant keys: strictly contained in another available key. The scan
  // runs against a stable copy since erase_if compacts in place.
  const std::vector<AvailableKey> offered = avail;
  std::erase_if(avail, [&](const AvailableKey& a) {
    return std::any_of(offered.begin(), offered.end(), [&](const AvailableKey& b) {
      return a.key != b.key && a.key.subset_of(b.key);
    });
  });

  KeyAccessPlan plan;
  if (avail.empty()) return plan;

  std::sort(avail.begin(), avail.end(), [](const AvailableKey& a, const AvailableKey& b) {
    return a.key < b.key;
  });

  std::set<std::string> covered;
  std::vector<bool> selected(avail.size(), false);

  auto select = [&](std::size_t idx) {
    const AvailableKey& a = avail[idx];
    plan.entries.push_back(PlanEntry{a.key, a.cached, a.live_size});
    covered.insert(a.key.terms().begin(), a.key.terms().end());
    selected[idx] = true;
  };

  // First key: minimum live size, ties by lexicographic key (avail is
  // already in key order, so the first minimum wins).
  std::size_t first = 0;
  for (std::size_t i = 1; i < avail.size(); ++i) {
    if (avail[i].live_size < avail[first].live_size) first = i;
  }
  select(first);

  auto query_covered = [&]() {
    return std::all_of(q.terms.begin(), q.terms.end(),
                       [&](const std::string& t) { return covered.contains(t); });
  };

  while (!query_covered()) {
    std::size_t best_gain = 0;
    std::size_t best_size = 0;
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < avail.size(); ++i) {
      if (selected[i]) continue;
      std::size_t gain = 0;
      for (const auto& t : avail[i].key.terms()) {
        if (!covered.contains(t)) ++gain;
      }
      if (gain == 0) continue;
      if (gain > best_gain || (gain == best_gain && avail[i].live_size < best_size)) {
        best_gain = gain;
        best_size = avail[i].live_size;
        tied = {i};
      } else if (gain == best_gain && avail[i].live_size == best_size) {
        tied.push_back(i);
      }
    }
    // Coverage is guaranteed by the always-available single-term keys.
    std::vector<std::size_t> cached_tied;
    for (std::size_t i : tied) {
      if (avail[i].cached) cached_tied.push_back(i);
    }
    const auto& pool = cached_tied.empty() ? tied : cached_tied;
    select(pool[rng.uniform_index(pool.size())]);
  }

  // Interior entries flanked by uncached neighbors go to the back end
  // instead; a lone cached stop between two back-end hops saves nothing
  // and only loads the gateway.
  for (std::size_t i = 1; i + 1 < plan.entries.size(); ++i) {
    if (!plan.entries[i - 1].use_cache && !plan.entries[i + 1].use_cache) {
      plan.entries[i].use_cache = false;
    }
  }
  return plan;
}

ChainStep handle_key_list(const std::optional<std::vector<ResourceId>>& result_so_far,
                          const std::vector<ResourceId>& key_list) {
  ChainStep step;
  step.result = result_so_far ? intersect_sorted(*result_so_far, key_list) : key_list;
  step.terminated = step.result.empty();
  return step;
}

namespace {

/// Popularity bookkeeping: a key is counted once per query no matter how
/// often the retrieval touches it. Cache hits accumulate on the gateway
/// and reach the authoritative vector at the next decay tick.
class RequestRecorder {
 public:
  RequestRecorder(Cluster& cluster, GatewayNode& gw) : cluster_(cluster), gw_(gw) {}

  void backend(const TagKey& key) {
    if (seen_.insert(key).second) cluster_.index.record_request(key);
  }
  void gateway(const TagKey& key) {
    if (seen_.insert(key).second) gw_.pending_hits[key] += 1;
  }

 private:
  Cluster& cluster_;
  GatewayNode& gw_;
  std::set<TagKey> seen_;
};

}  // namespace

QueryOutcome handle_query_request(Cluster& cluster, const Query& q) {
  QueryOutcome outcome;
  MetricsLedger& ledger = cluster.ledger;
  const CauseCounters before = ledger.by_cause(Cause::query);

  const int eff_s_max = cluster.mode == IndexMode::stk ? 1 : cluster.cfg.s_max;
  const int gn_id = responsible_gateway_terms(q.terms, cluster.cfg.n_gateways);
  GatewayNode& gn = cluster.gateways[static_cast<std::size_t>(gn_id)];
  const std::string gn_node = gateway_node_id(gn_id);
  RequestRecorder recorder(cluster, gn);

  auto finish = [&]() {
    const CauseCounters after = ledger.by_cause(Cause::query);
    outcome.tr = after.tr - before.tr;
    outcome.ck = after.ck - before.ck;
    outcome.ik = after.ik - before.ik;
    return outcome;
  };

  // Direct hit for queries that fit into a single key.
  if (static_cast<int>(q.terms.size()) <= eff_s_max) {
    const TagKey kq = canonicalize_key(q.terms, eff_s_max);
    if (cluster.caching_enabled()) {
      const std::vector<ResourceId>* hit = cache_lookup(cluster, gn_id, kq);
      ledger.record_gw_lookup(hit != nullptr);
      if (hit != nullptr) {
        recorder.gateway(kq);
        ledger.record_local_io(gn_node, hit->size(), Cause::query);
        outcome.result = *hit;
        outcome.direct_hit = true;
        outcome.cache_hit = true;
        return finish();
      }
    }
    recorder.backend(kq);
    const std::string node = key_node_id(kq);
    ledger.account_message(gn_node, node, 0, Cause::query);
    if (cluster.index.result_size(kq).has_value()) {
      ledger.record_key_access(Cause::query, AccessKind::read);
      std::vector<ResourceId> list = cluster.index.inverted_list(kq);
      ledger.record_local_io(node, list.size(), Cause::query);
      ledger.account_message(node, gn_node, list.size(), Cause::query);
      outcome.result = std::move(list);
      outcome.direct_hit = true;
      return finish();
    }
    ledger.record_key_access(Cause::query, AccessKind::probe);
  }

  // Probe the size of every subset key, cache first.
  std::vector<AvailableKey> avail;
  bool zero_size = false;
  for (const TagKey& key : compute_subset_keys(q, eff_s_max)) {
    ++outcome.size_probes;
    if (cluster.caching_enabled()) {
      const std::vector<ResourceId>* hit = cache_lookup(cluster, gn_id, key);
      ledger.record_gw_lookup(hit != nullptr);
      if (hit != nullptr) {
        recorder.gateway(key);
        avail.push_back(AvailableKey{key, hit->size(), true});
        zero_size = zero_size || hit->empty();
        continue;
      }
    }
    recorder.backend(key);
    ledger.account_message(gn_node, key_node_id(key), 0, Cause::query);
    ledger.record_key_access(Cause::query, AccessKind::probe);
    if (auto size = cluster.index.result_size(key)) {
      avail.push_back(AvailableKey{key, *size, false});
      zero_size = zero_size || *size == 0;
    }
  }
  if (zero_size) {
    outcome.early_exit = true;
    return finish();  // some conjunct is empty, so the answer is too
  }

  KeyAccessPlan plan = compute_key_access_list(q, std::move(avail), cluster.rng);

  // Chain execution: the intermediate result travels from key to key and
  // finally back to the responsible gateway.
  std::optional<std::vector<ResourceId>> result;
  std::string at = gn_node;
  for (const PlanEntry& entry : plan.entries) {
    const std::string node = entry.use_cache ? gn_node : key_node_id(entry.key);
    ledger.account_message(at, node, result ? result->size() : 0, Cause::query);
    std::vector<ResourceId> list;
    if (entry.use_cache) {
      const std::vector<ResourceId>* hit = cache_lookup(cluster, gn_id, entry.key);
      ledger.record_gw_lookup(hit != nullptr);
      list = *hit;  // coherence guarantees presence
      ledger.record_local_io(gn_node, list.size(), Cause::query);
    } else {
      ledger.record_key_access(Cause::query, AccessKind::read);
      list = cluster.index.inverted_list(entry.key);
      ledger.record_local_io(node, list.size(), Cause::query);
    }
    ChainStep step = handle_key_list(result, list);
    result = std::move(step.result);
    at = node;
    if (step.terminated) break;
  }
  if (result) {
    ledger.account_message(at, gn_node, result->size(), Cause::query);
    outcome.result = std::move(*result);
  }
  return finish();
}

}  // namespace mtindex
