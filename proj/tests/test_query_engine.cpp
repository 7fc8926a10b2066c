#include <doctest.h>

#include <algorithm>
#include <set>

#include "mtindex/analysis.hpp"
#include "mtindex/query_engine.hpp"

using namespace mtindex;

namespace {

TagKey key(std::initializer_list<const char*> terms) {
  std::vector<std::string> v;
  for (const char* t : terms) v.emplace_back(t);
  return canonicalize_key(v, 6);
}

SystemConfig plain_config() {
  SystemConfig cfg;
  cfg.n_gateways = 3;
  cfg.cache_scheme = CacheScheme::none;
  cfg.validate();
  return cfg;
}

/// Brute-force subset enumeration via bitmasks, independent of the
/// DFS the implementation uses.
std::set<TagKey> subset_oracle(const Query& q, int s_max) {
  std::set<TagKey> out;
  const std::size_t n = q.terms.size();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<std::string> terms;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint64_t{1} << i)) terms.push_back(q.terms[i]);
    }
    if (static_cast<int>(terms.size()) <= s_max) out.insert(canonicalize_key(terms, s_max));
  }
  return out;
}

}  // namespace

TEST_CASE("compute_subset_keys enumerates all subsets up to s_max") {
  Query q = make_query({"a", "b", "c"}, 0);
  std::vector<TagKey> keys = compute_subset_keys(q, 2);
  CHECK(keys.size() == 6);
  CHECK(std::set<TagKey>(keys.begin(), keys.end()) == subset_oracle(q, 2));

  Query single = make_query({"a"}, 0);
  CHECK(compute_subset_keys(single, 4) == std::vector<TagKey>{key({"a"})});

  Query four = make_query({"a", "b", "c", "d"}, 0);
  CHECK(compute_subset_keys(four, 3).size() == 14);  // 4 + 6 + 4
}

TEST_CASE("compute_subset_keys matches the binomial count on random queries") {
  DetRng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(7);
    std::vector<std::string> terms;
    for (std::size_t i = 0; i < n; ++i) terms.push_back("t" + std::to_string(i));
    const int s_max = 1 + static_cast<int>(rng.uniform_index(4));
    Query q = make_query(terms, 0);
    std::uint64_t expected = 0;
    for (std::uint64_t i = 1; i <= std::min<std::uint64_t>(n, static_cast<std::uint64_t>(s_max)); ++i) {
      expected += analysis::binomial(n, i);
    }
    std::vector<TagKey> keys = compute_subset_keys(q, s_max);
    CHECK(keys.size() == expected);
    CHECK(std::set<TagKey>(keys.begin(), keys.end()) == subset_oracle(q, s_max));
  }
}

TEST_CASE("planner removes subset-redundant keys") {
  DetRng rng(1);
  Query q = make_query({"t1", "t2", "t3", "t4"}, 0);
  std::vector<AvailableKey> avail = {
      {key({"t1", "t4"}), 5, false},
      {key({"t1", "t3", "t4"}), 7, false},
      {key({"t2"}), 4, false},
  };
  KeyAccessPlan plan = compute_key_access_list(q, avail, rng);
  for (const auto& entry : plan.entries) {
    CHECK(entry.key != key({"t1", "t4"}));
  }
  CHECK(plan.covers(q));
}

TEST_CASE("planner follows the greedy hand trace") {
  DetRng rng(1);
  Query q = make_query({"a", "b", "c"}, 0);
  std::vector<AvailableKey> avail = {
      {key({"a"}), 3, false},
      {key({"b"}), 2, false},
      {key({"c"}), 1, false},
      {key({"a", "b"}), 2, false},
  };
  KeyAccessPlan plan = compute_key_access_list(q, avail, rng);
  REQUIRE(plan.entries.size() == 2);
  CHECK(plan.entries[0].key == key({"c"}));
  CHECK(plan.entries[1].key == key({"a", "b"}));
}

TEST_CASE("plan keeps coverage even when multi-term keys miss a term") {
  DetRng rng(9);
  Query q = make_query({"t1", "t2", "t3", "t4"}, 0);
  std::vector<AvailableKey> avail = {
      {key({"t1", "t2"}), 4, false}, {key({"t1", "t4"}), 6, false}, {key({"t1"}), 9, false},
      {key({"t2"}), 9, false},       {key({"t3"}), 9, false},       {key({"t4"}), 9, false},
  };
  KeyAccessPlan plan = compute_key_access_list(q, avail, rng);
  CHECK(plan.covers(q));
  bool covers_t3 = std::any_of(plan.entries.begin(), plan.entries.end(),
                               [&](const PlanEntry& e) { return e.key.contains_term("t3"); });
  CHECK(covers_t3);
}

TEST_CASE("interior cached entries between uncached neighbors lose the flag") {
  DetRng rng(2);
  Query q = make_query({"a", "b", "c"}, 0);
  std::vector<AvailableKey> avail = {
      {key({"a"}), 1, false},
      {key({"b"}), 2, true},
      {key({"c"}), 3, false},
  };
  KeyAccessPlan plan = compute_key_access_list(q, avail, rng);
  REQUIRE(plan.entries.size() == 3);
  CHECK(plan.entries[0].key == key({"a"}));
  CHECK(plan.entries[1].key == key({"b"}));
  CHECK_FALSE(plan.entries[1].use_cache);

  // with a cached neighbor the flag survives
  avail[2].cached = true;
  KeyAccessPlan plan2 = compute_key_access_list(q, avail, rng);
  REQUIRE(plan2.entries.size() == 3);
  CHECK(plan2.entries[1].use_cache);
}

TEST_CASE("planner invariants hold over random availability sets") {
  DetRng rng(77);
  const std::vector<std::string> universe = {"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t nq = 2 + rng.uniform_index(4);
    std::vector<std::string> qt(universe.begin(), universe.begin() + static_cast<long>(nq));
    Query q = make_query(qt, 0);

    std::vector<AvailableKey> avail;
    for (const auto& t : qt) {
      avail.push_back({canonicalize_key({t}, 3), 1 + rng.uniform_index(20), rng.uniform01() < 0.3});
    }
    for (const TagKey& k : compute_subset_keys(q, 3)) {
      if (!k.single() && rng.uniform01() < 0.4) {
        avail.push_back({k, 1 + rng.uniform_index(10), rng.uniform01() < 0.3});
      }
    }
    KeyAccessPlan plan = compute_key_access_list(q, avail, rng);
    CHECK(plan.covers(q));
    for (std::size_t i = 0; i < plan.entries.size(); ++i) {
      for (std::size_t j = 0; j < plan.entries.size(); ++j) {
        if (i != j) CHECK_FALSE(plan.entries[i].key.subset_of(plan.entries[j].key));
      }
    }
    // first key has the minimum size among non-redundant keys
    std::vector<AvailableKey> pruned = avail;
    std::erase_if(pruned, [&](const AvailableKey& a) {
      return std::any_of(avail.begin(), avail.end(), [&](const AvailableKey& b) {
        return a.key != b.key && a.key.subset_of(b.key);
      });
    });
    std::size_t min_size = SIZE_MAX;
    for (const auto& a : pruned) min_size = std::min(min_size, a.live_size);
    CHECK(plan.entries[0].probed_size == min_size);
  }
}

TEST_CASE("planner is deterministic for a fixed seed") {
  Query q = make_query({"a", "b", "c", "d"}, 0);
  std::vector<AvailableKey> avail = {
      {key({"a"}), 5, false}, {key({"b"}), 5, true},       {key({"c"}), 5, false},
      {key({"d"}), 5, true},  {key({"a", "b"}), 5, false}, {key({"c", "d"}), 5, true},
  };
  DetRng rng1(123), rng2(123);
  KeyAccessPlan p1 = compute_key_access_list(q, avail, rng1);
  KeyAccessPlan p2 = compute_key_access_list(q, avail, rng2);
  REQUIRE(p1.entries.size() == p2.entries.size());
  for (std::size_t i = 0; i < p1.entries.size(); ++i) {
    CHECK(p1.entries[i].key == p2.entries[i].key);
    CHECK(p1.entries[i].use_cache == p2.entries[i].use_cache);
  }
}

TEST_CASE("handle_key_list seeds, intersects and terminates early") {
  ChainStep first = handle_key_list(std::nullopt, {"r1", "r3"});
  CHECK(first.result == std::vector<ResourceId>{"r1", "r3"});
  CHECK_FALSE(first.terminated);

  ChainStep dead = handle_key_list(std::vector<ResourceId>{"r1", "r3"}, {"r2"});
  CHECK(dead.result.empty());
  CHECK(dead.terminated);

  DetRng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<ResourceId>> lists(3);
    for (auto& list : lists) {
      std::set<ResourceId> s;
      const std::size_t n = rng.uniform_index(12);
      for (std::size_t i = 0; i < n; ++i) s.insert("r" + std::to_string(rng.uniform_index(15)));
      list.assign(s.begin(), s.end());
    }
    std::optional<std::vector<ResourceId>> acc;
    for (const auto& list : lists) {
      ChainStep step = handle_key_list(acc, list);
      acc = step.result;
      if (step.terminated) break;
    }
    std::vector<ResourceId> expect;
    std::set_intersection(lists[0].begin(), lists[0].end(), lists[1].begin(), lists[1].end(),
                          std::back_inserter(expect));
    std::vector<ResourceId> expect3;
    std::set_intersection(expect.begin(), expect.end(), lists[2].begin(), lists[2].end(),
                          std::back_inserter(expect3));
    CHECK(*acc == expect3);
  }
}

namespace {

struct Corpus {
  std::map<ResourceId, std::set<std::string>> tags;

  std::vector<ResourceId> answer(const Query& q) const {
    std::vector<ResourceId> out;
    for (const auto& [id, ts] : tags) {
      bool all = std::all_of(q.terms.begin(), q.terms.end(),
                             [&](const std::string& t) { return ts.contains(t); });
      if (all) out.push_back(id);
    }
    return out;
  }

  void load(Cluster& cluster) const {
    for (const auto& [id, ts] : tags) {
      for (const auto& t : ts) cluster.index.apply_tag_action(t, id, TagAction::add, 0);
    }
  }
};

Corpus small_corpus() {
  Corpus corpus;
  corpus.tags["r1"] = {"a", "b"};
  corpus.tags["r2"] = {"a"};
  corpus.tags["r3"] = {"a", "b", "c"};
  return corpus;
}

}  // namespace

TEST_CASE("query over single-term keys intersects the constituent lists") {
  Cluster cluster(plain_config(), IndexMode::mtk);
  small_corpus().load(cluster);
  QueryOutcome outcome = handle_query_request(cluster, make_query({"a", "b"}, 1));
  CHECK(outcome.result == std::vector<ResourceId>{"r1", "r3"});
  CHECK_FALSE(outcome.direct_hit);
  CHECK(outcome.size_probes == 3);  // {a}, {b}, {a,b}
}

TEST_CASE("available multi-term key answers directly with zero chain hops") {
  Cluster cluster(plain_config(), IndexMode::mtk);
  small_corpus().load(cluster);
  MetricsLedger scratch;
  resume_key(cluster.index, scratch, key({"a", "b"}), 0);

  QueryOutcome outcome = handle_query_request(cluster, make_query({"a", "b"}, 1));
  CHECK(outcome.result == std::vector<ResourceId>{"r1", "r3"});
  CHECK(outcome.direct_hit);
  CHECK(outcome.size_probes == 0);
  CHECK(outcome.tr == 2);  // only the list travels to the gateway
  CHECK(outcome.ck == 1);
}

TEST_CASE("zero-size probed key short-circuits to an empty answer") {
  Cluster cluster(plain_config(), IndexMode::mtk);
  small_corpus().load(cluster);
  QueryOutcome outcome = handle_query_request(cluster, make_query({"a", "zzz"}, 1));
  CHECK(outcome.result.empty());
  CHECK(outcome.early_exit);
  CHECK(outcome.tr == 0);  // no list ever transferred
  CHECK(outcome.ik == 0);
}

TEST_CASE("query answers match the brute-force oracle on random fresh corpora") {
  DetRng rng(314);
  const std::vector<std::string> universe = {"a", "b", "c", "d", "e", "f"};
  for (int trial = 0; trial < 40; ++trial) {
    Corpus corpus;
    const std::size_t n_res = 5 + rng.uniform_index(50);
    for (std::size_t i = 0; i < n_res; ++i) {
      std::set<std::string> tags;
      const std::size_t nt = 1 + rng.uniform_index(4);
      while (tags.size() < nt) tags.insert(universe[rng.uniform_index(universe.size())]);
      corpus.tags["r" + std::to_string(100 + i)] = tags;
    }
    const bool prewarm = trial % 2 == 0;
    Cluster cluster(plain_config(), IndexMode::mtk);
    corpus.load(cluster);

    for (int qi = 0; qi < 25; ++qi) {
      std::set<std::string> qterms;
      const std::size_t nq = 1 + rng.uniform_index(4);
      while (qterms.size() < nq) qterms.insert(universe[rng.uniform_index(universe.size())]);
      Query q = make_query({qterms.begin(), qterms.end()}, qi);
      if (prewarm) {
        for (const TagKey& k : compute_subset_keys(q, cluster.cfg.s_max)) {
          if (!k.single() && !cluster.index.find(k)) {
            MetricsLedger scratch;
            resume_key(cluster.index, scratch, k, 0);
          }
        }
      }
      QueryOutcome outcome = handle_query_request(cluster, q);
      CHECK(outcome.result == corpus.answer(q));

      std::uint64_t probe_cap = 0;
      for (std::uint64_t i = 1;
           i <= std::min<std::uint64_t>(q.terms.size(), static_cast<std::uint64_t>(cluster.cfg.s_max)); ++i) {
        probe_cap += analysis::binomial(q.terms.size(), i);
      }
      CHECK(outcome.size_probes <= probe_cap);
    }
  }
}

TEST_CASE("stk mode only ever touches single-term keys") {
  Cluster cluster(plain_config(), IndexMode::stk);
  small_corpus().load(cluster);
  QueryOutcome outcome = handle_query_request(cluster, make_query({"a", "b"}, 1));
  CHECK(outcome.result == std::vector<ResourceId>{"r1", "r3"});
  CHECK(outcome.size_probes == 2);
  for (const auto& [k, rec] : cluster.index.keys()) CHECK(k.single());
}
