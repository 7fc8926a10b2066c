#include "mtindex/gateway_cache.hpp"

#include <algorithm>
#include <sstream>

namespace mtindex {

IndexMode parse_index_mode(const std::string& name) {
  if (name == "stk") return IndexMode::stk;
  if (name == "mtk") return IndexMode::mtk;
  throw ConfigError("unknown index mode: " + name);
}

std::string to_string(IndexMode mode) { return mode == IndexMode::stk ? "stk" : "mtk"; }

int responsible_gateway(const TagKey& key, int n_gateways) {
  return static_cast<int>(key.hash() % static_cast<std::uint64_t>(n_gateways));
}

int responsible_gateway_terms(const std::vector<std::string>& sorted_terms, int n_gateways) {
  return static_cast<int>(TagKey::hash_terms(sorted_terms) %
                          static_cast<std::uint64_t>(n_gateways));
}

std::vector<int> cache_holders(const Cluster& cluster, const TagKey& key) {
  switch (cluster.cfg.cache_scheme) {
    case CacheScheme::none: return {};
    case CacheScheme::uniform: {
      std::vector<int> all(cluster.gateways.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
      return all;
    }
    case CacheScheme::dedicated: return {responsible_gateway(key, cluster.cfg.n_gateways)};
  }
  return {};
}

const std::vector<ResourceId>* cache_lookup(const Cluster& cluster, int gateway_id,
                                            const TagKey& key) {
  const GatewayNode& gw = cluster.gateways[static_cast<std::size_t>(gateway_id)];
  auto it = gw.cache.find(key);
  return it == gw.cache.end() ? nullptr : &it->second;
}

void cache_insert(Cluster& cluster, const TagKey& key) {
  std::vector<ResourceId> list = cluster.index.inverted_list(key);
  const std::string from = key_node_id(key);
  for (int gw_id : cache_holders(cluster, key)) {
    GatewayNode& gw = cluster.gateways[static_cast<std::size_t>(gw_id)];
    cluster.ledger.account_message(from, gateway_node_id(gw_id), list.size(),
                                   Cause::cache_maintenance);
    cluster.ledger.record_local_io(gateway_node_id(gw_id), list.size(),
                                   Cause::cache_maintenance);
    gw.cache[key] = list;
  }
  cluster.index.touch(key).cached = true;
}

void cache_evict(Cluster& cluster, const TagKey& key) {
  KeyRecord* rec = cluster.index.find(key);
  if (rec == nullptr || !rec->cached) return;
  const std::string from = key_node_id(key);
  for (auto& gw : cluster.gateways) {
    if (gw.cache.erase(key) > 0) {
      cluster.ledger.account_message(from, gateway_node_id(gw.id), 0, Cause::cache_maintenance);
    }
  }
  rec->cached = false;
}

void propagate_single_term_update(Cluster& cluster, const TagKey& key, const ResourceId& resource,
                                  bool deleted) {
  const std::string from = key_node_id(key);
  for (auto& gw : cluster.gateways) {
    auto it = gw.cache.find(key);
    if (it == gw.cache.end()) continue;
    cluster.ledger.account_message(from, gateway_node_id(gw.id), 1, Cause::single_term_update);
    cluster.ledger.record_local_io(gateway_node_id(gw.id), 1, Cause::single_term_update);
    auto& list = it->second;
    auto pos = std::lower_bound(list.begin(), list.end(), resource);
    if (deleted) {
      if (pos != list.end() && *pos == resource) list.erase(pos);
    } else if (pos == list.end() || *pos != resource) {
      list.insert(pos, resource);
    }
  }
}

void propagate_incremental_result(Cluster& cluster, const TagKey& key, const DeltaSet& delta) {
  if (delta.empty()) return;
  const std::string from = key_node_id(key);
  for (auto& gw : cluster.gateways) {
    auto it = gw.cache.find(key);
    if (it == gw.cache.end()) continue;
    cluster.ledger.account_message(from, gateway_node_id(gw.id), delta.size(),
                                   Cause::incremental_update);
    cluster.ledger.record_local_io(gateway_node_id(gw.id), delta.size(),
                                   Cause::incremental_update);
    auto& list = it->second;
    for (const auto& r : delta.dels) {
      auto pos = std::lower_bound(list.begin(), list.end(), r);
      if (pos != list.end() && *pos == r) list.erase(pos);
    }
    for (const auto& r : delta.adds) {
      auto pos = std::lower_bound(list.begin(), list.end(), r);
      if (pos == list.end() || *pos != r) list.insert(pos, r);
    }
  }
}

std::string cache_snapshot(const Cluster& cluster) {
  std::ostringstream out;
  for (const auto& gw : cluster.gateways) {
    for (const auto& [key, list] : gw.cache) {
      out << gw.id << '\t' << key.label() << '\t';
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (i > 0) out << ',';
        out << list[i];
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace mtindex
