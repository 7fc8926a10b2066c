#include "mtindex/core.hpp"

#include <algorithm>

namespace mtindex {

std::uint64_t TagKey::hash_terms(const std::vector<std::string>& sorted_terms) {
  std::uint64_t h = kFnvOffset;
  for (const auto& term : sorted_terms) {
    h = fnv1a64(std::to_string(term.size()), h);
    h ^= ':';
    h *= kFnvPrime;
    h = fnv1a64(term, h);
  }
  return h;
}

bool TagKey::subset_of(const TagKey& other) const {
  return std::includes(other.terms_.begin(), other.terms_.end(), terms_.begin(), terms_.end());
}

bool TagKey::contains_term(const std::string& term) const {
  return std::binary_search(terms_.begin(), terms_.end(), term);
}

TagKey canonicalize_key(const std::vector<std::string>& terms, int s_max) {
  std::vector<std::string> sorted = terms;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.empty()) throw InvalidKey("key requires at least one term");
  if (static_cast<int>(sorted.size()) > s_max) {
    throw KeyTooLarge("key of size " + std::to_string(sorted.size()) + " exceeds s_max=" +
                      std::to_string(s_max));
  }
  return TagKey(std::move(sorted));
}

TagKey term_key(const std::string& term) { return canonicalize_key({term}, 1); }

Query make_query(std::vector<std::string> terms, Tick arrival_time) {
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  if (terms.empty()) throw InvalidKey("query requires at least one term");
  return Query{std::move(terms), arrival_time};
}

std::size_t PostingList::live_size() const {
  std::size_t n = 0;
  for (const auto& [id, entry] : entries) {
    if (!entry.deleted) ++n;
  }
  return n;
}

std::vector<ResourceId> PostingList::live() const {
  std::vector<ResourceId> out;
  out.reserve(entries.size());
  for (const auto& [id, entry] : entries) {
    if (!entry.deleted) out.push_back(id);
  }
  return out;  // map iteration order is sorted already
}

CacheScheme parse_cache_scheme(const std::string& name) {
  if (name == "none") return CacheScheme::none;
  if (name == "uniform") return CacheScheme::uniform;
  if (name == "dedicated") return CacheScheme::dedicated;
  throw ConfigError("unknown cache scheme: " + name);
}

std::string to_string(CacheScheme scheme) {
  switch (scheme) {
    case CacheScheme::none: return "none";
    case CacheScheme::uniform: return "uniform";
    case CacheScheme::dedicated: return "dedicated";
  }
  return "none";
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& constraint) {
    throw ConfigError("config violates: " + constraint);
  };
  if (s_max < 1) fail("s_max >= 1");
  if (t_max < 1) fail("t_max >= 1");
  if (ell < 1) fail("ell >= 1");
  if (ell > 64) fail("ell <= 64");
  if (delta_update <= 0) fail("delta_update > 0");
  if (delta_decay <= 0) fail("delta_decay > 0");
  if (n_gateways < 1) fail("n_gateways >= 1");
  // Threshold orderings for index suspend/resume and cache insert/delete.
  if (!(b_susp < b_res)) fail("b_susp < b_res");
  if (!(b_res <= c_ins)) fail("b_res <= c_ins");
  if (!(c_ins <= ell)) fail("c_ins <= ell");
  if (!(b_res <= ell)) fail("b_res <= ell");
  if (!(c_del < c_ins)) fail("c_del < c_ins");
  if (!(c_del >= b_susp)) fail("c_del >= b_susp");
}

SystemConfig parse_system_config(const std::string& text) {
  SystemConfig cfg;
  for (const auto& [key, value] : parse_kv_text(text)) {
    try {
      if (key == "s_max") {
        cfg.s_max = std::stoi(value);
      } else if (key == "t_max") {
        cfg.t_max = std::stoi(value);
      } else if (key == "ell") {
        cfg.ell = std::stoi(value);
      } else if (key == "delta_decay") {
        cfg.delta_decay = std::stoll(value);
      } else if (key == "delta_update") {
        cfg.delta_update = std::stoll(value);
      } else if (key == "b_res") {
        cfg.b_res = std::stoi(value);
      } else if (key == "b_susp") {
        cfg.b_susp = std::stoi(value);
      } else if (key == "c_ins") {
        cfg.c_ins = std::stoi(value);
      } else if (key == "c_del") {
        cfg.c_del = std::stoi(value);
      } else if (key == "n_gateways") {
        cfg.n_gateways = std::stoi(value);
      } else if (key == "cache_scheme") {
        cfg.cache_scheme = parse_cache_scheme(value);
      } else if (key == "rng_seed") {
        cfg.rng_seed = std::stoull(value);
      } else {
        throw ConfigError("unknown config key: " + key);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("bad value for config key " + key + ": " + value);
    }
  }
  return cfg;
}

std::set<std::string> derive_considered_tags(const std::set<std::string>& tags, int t_max) {
  std::set<std::string> out;
  for (const auto& t : tags) {
    if (static_cast<int>(out.size()) >= t_max) break;
    out.insert(t);
  }
  return out;
}

}  // namespace mtindex
