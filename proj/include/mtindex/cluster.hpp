#pragma once

#include <vector>

#include "mtindex/backend_index.hpp"
#include "mtindex/core.hpp"
#include "mtindex/metrics.hpp"

namespace mtindex {

/// stk: only single-term keys ever exist in the index.
/// mtk: multi-term keys are tracked, resumed and updated.
enum class IndexMode { stk, mtk };

IndexMode parse_index_mode(const std::string& name);  // throws ConfigError
std::string to_string(IndexMode mode);

struct GatewayNode {
  int id = 0;
  std::map<TagKey, std::vector<ResourceId>> cache;  // live view, sorted
  std::map<TagKey, int> pending_hits;               // reported at decay ticks
};

/// Gateway and back-end state for one simulated run. Back-end placement is
/// worst-case: every distinct key is its own virtual node, so all inter-key
/// traffic is remote.
struct Cluster {
  SystemConfig cfg;
  IndexMode mode;
  BackendIndex index;
  std::vector<GatewayNode> gateways;
  MetricsLedger ledger;
  DetRng rng;

  Cluster(SystemConfig config, IndexMode index_mode)
      : cfg(std::move(config)), mode(index_mode), index(cfg.ell), rng(cfg.rng_seed) {
    cfg.validate();
    gateways.resize(static_cast<std::size_t>(cfg.n_gateways));
    for (int i = 0; i < cfg.n_gateways; ++i) gateways[static_cast<std::size_t>(i)].id = i;
  }

  bool caching_enabled() const { return cfg.cache_scheme != CacheScheme::none; }
};

/// Stable uniform key-to-gateway routing.
int responsible_gateway(const TagKey& key, int n_gateways);

/// Routing for a whole query: hash of its canonical term set, valid also
/// when the query has more terms than s_max.
int responsible_gateway_terms(const std::vector<std::string>& sorted_terms, int n_gateways);

}  // namespace mtindex
