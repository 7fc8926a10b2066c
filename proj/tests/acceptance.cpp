// Acceptance suite: one pass/fail line per criterion.
// argv[1] = path to the CLI binary, argv[2] = test data directory.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "mtindex/analysis.hpp"
#include "mtindex/gateway_cache.hpp"
#include "mtindex/simnet.hpp"
#include "mtindex/workload.hpp"

namespace fs = std::filesystem;
using namespace mtindex;
using workload::GeneratorConfig;
using workload::QueryLogRecord;
using workload::TagActionRecord;

namespace {

std::string g_cli;
fs::path g_data;
fs::path g_work;

struct Check {
  bool ok = true;
  std::ostringstream notes;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes << (notes.str().empty() ? "" : "; ") << what;
    }
  }
  void note(const std::string& text) {
    notes << (notes.str().empty() ? "" : "; ") << text;
  }
};

/// Independent single-term list semantics used as the oracle for the
/// incremental-update and transfer-bound criteria.
struct Mirror {
  std::map<std::string, std::map<ResourceId, std::pair<Tick, bool>>> lists;

  void apply(const std::string& term, const ResourceId& r, bool add, Tick now) {
    auto& list = lists[term];
    auto it = list.find(r);
    if (add) {
      if (it == list.end() || it->second.second) list[r] = {now, false};
    } else if (it != list.end() && !it->second.second) {
      list[r] = {now, true};
    }
  }

  std::vector<ResourceId> intersection(const TagKey& key) const {
    std::vector<ResourceId> acc;
    bool first = true;
    for (const auto& term : key.terms()) {
      std::vector<ResourceId> live;
      if (auto it = lists.find(term); it != lists.end()) {
        for (const auto& [r, state] : it->second) {
          if (!state.second) live.push_back(r);
        }
      }
      if (first) {
        acc = std::move(live);
        first = false;
      } else {
        acc = intersect_sorted(acc, live);
      }
    }
    return acc;
  }
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint64_t probe_cap(std::size_t n_terms, int s_max) {
  std::uint64_t cap = 0;
  for (std::uint64_t i = 1; i <= std::min<std::uint64_t>(n_terms, static_cast<std::uint64_t>(s_max)); ++i) {
    cap += analysis::binomial(n_terms, i);
  }
  return cap;
}

void load_corpus(SimEngine& engine, const std::vector<TagActionRecord>& actions) {
  std::vector<TagActionRecord> bulk;
  for (const auto& rec : actions) {
    if (rec.ts <= 0) bulk.push_back(rec);
  }
  for (const auto& [id, tags] : workload::build_resources(bulk).tags) {
    engine.load_resource(id, tags);
  }
}

// --- criteria ------------------------------------------------------------

Check c01_incremental_update_oracle() {
  Check check;
  DetRng rng(101);
  const std::vector<std::string> terms = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 1000 && check.ok; ++trial) {
    BackendIndex index(8);
    MetricsLedger ledger;
    Mirror mirror;
    const std::size_t size = 2 + rng.uniform_index(3);
    const TagKey mkey =
        canonicalize_key({terms.begin(), terms.begin() + static_cast<long>(size)}, 4);
    Tick now = 0;
    auto burst = [&](int n) {
      for (int i = 0; i < n; ++i) {
        ++now;
        const std::string& term = terms[rng.uniform_index(terms.size())];
        const ResourceId r = "r" + std::to_string(rng.uniform_index(50));
        const bool add = rng.uniform01() < 0.6;
        index.apply_tag_action(term, r, add ? TagAction::add : TagAction::del, now);
        mirror.apply(term, r, add, now);
      }
    };
    burst(70);
    index.install_list(mkey, mirror.intersection(mkey), now);
    burst(50);
    incremental_update(index, ledger, mkey, ++now);
    check.expect(index.find(mkey)->list->live() == mirror.intersection(mkey),
                 "trial " + std::to_string(trial) + " diverged from the oracle");
  }
  check.note("1000 randomized instances, exact set equality");
  return check;
}

Check c02_query_correctness() {
  Check check;
  DetRng rng(202);
  std::vector<std::string> universe;
  for (int i = 0; i < 10; ++i) universe.push_back("t" + std::to_string(i));
  std::size_t total_queries = 0;
  for (int corpus = 0; corpus < 4 && check.ok; ++corpus) {
    SystemConfig cfg;
    cfg.cache_scheme = CacheScheme::none;
    SimEngine engine(cfg, IndexMode::mtk);
    const std::size_t n_res = 120 + rng.uniform_index(81);  // <= 200
    for (std::size_t i = 0; i < n_res; ++i) {
      std::set<std::string> tags;
      const std::size_t nt = 1 + rng.uniform_index(5);
      while (tags.size() < nt) tags.insert(universe[rng.uniform_index(universe.size())]);
      engine.load_resource("r" + std::to_string(i), tags);
    }
    for (int qi = 0; qi < 125 && check.ok; ++qi) {
      std::set<std::string> qterms;
      const std::size_t nq = 1 + rng.uniform_index(4);
      while (qterms.size() < nq) qterms.insert(universe[rng.uniform_index(universe.size())]);
      Query q = make_query({qterms.begin(), qterms.end()}, qi);
      if (corpus % 2 == 0) {
        // exercise the direct-hit and multi-term plan paths on a fresh index
        for (const TagKey& key : compute_subset_keys(q, cfg.s_max)) {
          if (!key.single() && engine.cluster().index.find(key) == nullptr) {
            engine.prewarm_key(key);
          }
        }
      }
      QueryOutcome outcome = handle_query_request(engine.cluster(), q);
      check.expect(outcome.result == engine.brute_force_answer(q.terms),
                   "query diverged from brute force in corpus " + std::to_string(corpus));
      ++total_queries;
    }
  }
  check.note(std::to_string(total_queries) + " queries over 4 random corpora, exact");
  return check;
}

GeneratorConfig best_case_generator() {
  GeneratorConfig gc;
  gc.n_resources = 10000;
  gc.n_distinct_tags = 2500;
  gc.tags_per_resource_max = 8;
  gc.tags_per_resource_exponent = 1.6;
  gc.tag_popularity_exponent = 0.9;
  gc.n_queries = 10000;
  gc.query_term_count_dist = {{2, 0.55}, {3, 0.30}, {4, 0.10}, {5, 0.05}};
  gc.query_key_pool = 3000;
  gc.actions_per_minute = 0;
  gc.horizon = 10000;
  gc.seed = 33;
  return gc;
}

Check c03_mtk_best_case_dominance() {
  Check check;
  workload::SyntheticWorkload w = workload::generate_synthetic(best_case_generator());
  SystemConfig cfg;
  cfg.s_max = 3;
  cfg.cache_scheme = CacheScheme::none;

  auto run_variant = [&](IndexMode mode, bool prewarm) {
    SimEngine engine(cfg, mode);
    load_corpus(engine, w.actions);
    if (prewarm) engine.prewarm_for_queries(w.queries);
    engine.run(build_event_stream({}, w.queries, cfg, false));
    return std::make_pair(engine.cluster().ledger.by_cause(Cause::query).tr,
                          engine.query_log());
  };
  auto [stk_tr, stk_log] = run_variant(IndexMode::stk, false);
  auto [mtk_tr, mtk_log] = run_variant(IndexMode::mtk, true);

  check.expect(stk_log.size() == 10000 && mtk_log.size() == 10000, "expected 10^4 queries");
  std::size_t violations = 0;
  for (std::size_t i = 0; i < stk_log.size(); ++i) {
    if (mtk_log[i].tr > stk_log[i].tr) ++violations;
  }
  check.expect(violations == 0,
               std::to_string(violations) + " per-query dominance violations");
  check.expect(mtk_tr * 2 <= stk_tr, "aggregate TR(MTK) exceeds 0.5 x TR(STK)");
  std::ostringstream ratio;
  ratio << "TR(MTK)=" << mtk_tr << " vs TR(STK)=" << stk_tr << " ("
        << (stk_tr ? 100.0 * static_cast<double>(mtk_tr) / static_cast<double>(stk_tr) : 0.0)
        << "%), 0 per-query violations";
  check.note(ratio.str());
  return check;
}

Check c04_staleness_overlap() {
  Check check;
  GeneratorConfig gc;
  gc.n_resources = 2000;
  gc.n_distinct_tags = 400;
  gc.tags_per_resource_max = 8;
  gc.n_queries = 2000;
  gc.query_term_count_dist = {{2, 0.6}, {3, 0.4}};
  gc.query_key_pool = 1500;
  gc.horizon = 1000;
  gc.seed = 44;

  // Size the add-only master stream to 4% of the initial index entries.
  GeneratorConfig probe = gc;
  probe.actions_per_minute = 0;
  probe.n_queries = 0;
  std::size_t total_entries = 0;
  for (const auto& [id, tags] :
       workload::build_resources(workload::generate_synthetic(probe).actions).tags) {
    total_entries += tags.size();
  }
  gc.actions_per_minute =
      static_cast<double>(total_entries * 4 / 100) / static_cast<double>(gc.horizon);
  gc.delete_fraction = 0.0;
  workload::SyntheticWorkload w = workload::generate_synthetic(gc);

  std::vector<TagActionRecord> master;
  for (const auto& rec : w.actions) {
    if (rec.ts > 0) master.push_back(rec);
  }
  check.expect(master.size() >= total_entries * 3 / 100, "master change stream too small");

  // queries run after all injected actions, before any update tick
  std::vector<QueryLogRecord> queries = w.queries;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    queries[i].ts = static_cast<Tick>(gc.horizon + 10 + static_cast<Tick>(i % 100));
  }

  SystemConfig cfg;
  cfg.s_max = 3;
  cfg.cache_scheme = CacheScheme::none;

  auto results_for = [&](IndexMode mode, const std::vector<TagActionRecord>& actions) {
    SimEngine engine(cfg, mode);
    load_corpus(engine, w.actions);
    if (mode == IndexMode::mtk) engine.prewarm_for_queries(queries);
    engine.run(build_event_stream(actions, queries, cfg, false));
    std::map<std::int64_t, std::vector<ResourceId>> out;
    for (const auto& rec : engine.query_log()) out[rec.id] = rec.result;
    return out;
  };

  const std::vector<double> fractions = {0.0, 0.0025, 0.01, 0.04};
  std::vector<double> overlaps;
  for (double f : fractions) {
    const std::size_t count = static_cast<std::size_t>(static_cast<double>(total_entries) * f);
    std::vector<TagActionRecord> prefix(master.begin(),
                                        master.begin() + static_cast<long>(std::min(count, master.size())));
    auto truth = results_for(IndexMode::stk, prefix);
    auto stale = results_for(IndexMode::mtk, prefix);
    overlaps.push_back(analysis::result_overlap(truth, stale));
  }
  check.expect(overlaps[0] == 100.0, "overlap with zero changes must be exactly 100%");
  for (std::size_t i = 1; i < overlaps.size(); ++i) {
    check.expect(overlaps[i] <= overlaps[i - 1] + 1e-12,
                 "overlap increased between fractions " + std::to_string(i - 1) + " and " +
                     std::to_string(i));
  }
  check.expect(overlaps.back() < 100.0, "4% changes should produce measurable staleness");
  std::ostringstream note;
  note << "overlap over {0%, 0.25%, 1%, 4%} changes: ";
  for (double o : overlaps) note << o << "% ";
  check.note(note.str());
  return check;
}

Check c05_storage_formula() {
  Check check;
  DetRng rng(505);
  auto enumerate = [](const std::vector<std::size_t>& counts, int s_max, int t_max) {
    std::uint64_t total = 0;
    for (std::size_t count : counts) {
      const std::size_t n = std::min<std::size_t>(count, static_cast<std::size_t>(t_max));
      const std::size_t cap = std::min<std::size_t>(n, static_cast<std::size_t>(s_max));
      auto rec = [&](auto&& self, std::size_t start, std::size_t depth) -> void {
        for (std::size_t i = start; i < n; ++i) {
          ++total;
          if (depth + 1 < cap) self(self, i + 1, depth + 1);
        }
      };
      if (cap > 0) rec(rec, 0, 0);
    }
    return total;
  };
  for (std::size_t corpus_size : {200u, 600u, 1000u}) {
    std::vector<std::size_t> counts(corpus_size);
    std::size_t max_count = 0;
    for (auto& c : counts) {
      c = 1 + rng.uniform_index(25);
      max_count = std::max(max_count, c);
    }
    for (int s = 1; s <= 4; ++s) {
      for (int t = 1; t <= 20; ++t) {
        if (analysis::count_list_entries(counts, s, t) != enumerate(counts, s, t)) {
          check.expect(false, "mismatch at corpus " + std::to_string(corpus_size) + " s_max " +
                                  std::to_string(s) + " t_max " + std::to_string(t));
          return check;
        }
      }
    }
    const std::uint64_t at_max =
        analysis::count_list_entries(counts, 4, static_cast<int>(max_count));
    for (int t = static_cast<int>(max_count); t <= static_cast<int>(max_count) + 5; ++t) {
      check.expect(analysis::count_list_entries(counts, 4, t) == at_max,
                   "no convergence once t_max covers all tags");
    }
  }
  check.note("3 corpora x s_max 1..4 x t_max 1..20 vs explicit enumeration, exact");
  return check;
}

Check c06_popularity_mechanics() {
  Check check;
  SystemConfig cfg;
  cfg.ell = 8;
  cfg.b_res = 2;
  cfg.b_susp = 0;
  cfg.c_ins = 8;
  cfg.c_del = 0;
  cfg.delta_decay = 10;
  cfg.delta_update = 1000;
  cfg.cache_scheme = CacheScheme::none;
  SimEngine engine(cfg, IndexMode::mtk);
  engine.load_resource("r1", {"a", "b"});
  engine.load_resource("r2", {"a", "b"});
  const TagKey mkey = canonicalize_key({"a", "b"}, 3);

  // b_res probes inside one decay window resume the key at the next tick
  std::vector<Event> phase1;
  phase1.push_back(Event{1, 0, QueryEvent{{"a", "b"}, "u"}});
  phase1.push_back(Event{2, 1, QueryEvent{{"a", "b"}, "u"}});
  phase1.push_back(Event{10, 2, DecayTickEvent{}});
  engine.run(phase1);
  const KeyRecord* rec = engine.cluster().index.find(mkey);
  check.expect(rec != nullptr && rec->available(),
               "suspended key with b_res probes was not resumed at the decay tick");

  // exactly ell idle decay ticks clear every vector, so all multi-term
  // keys suspend by the last of them
  std::vector<Event> phase2;
  std::uint64_t seq = 10;
  for (int i = 0; i < cfg.ell; ++i) {
    phase2.push_back(Event{20 + cfg.delta_decay * i, seq++, DecayTickEvent{}});
  }
  engine.run(phase2);
  for (const auto& [key, record] : engine.cluster().index.keys()) {
    if (key.single()) {
      check.expect(record.available(), "single-term key must stay available");
    } else {
      check.expect(!record.available(), "idle multi-term key still available: " + key.label());
      check.expect(record.pop.popcount() == 0, "popularity not fully decayed");
    }
  }
  check.note("resume after b_res probes, suspension after ell idle decay ticks, exact states");
  return check;
}

Check c07_threshold_validation() {
  Check check;
  auto rejects = [&](SystemConfig cfg, const std::string& constraint) {
    try {
      cfg.validate();
      check.expect(false, "accepted config violating " + constraint);
    } catch (const ConfigError& e) {
      check.expect(std::string(e.what()).find(constraint) != std::string::npos,
                   "rejection does not name " + constraint);
    }
  };
  SystemConfig base;  // defaults are valid
  try {
    base.validate();
  } catch (const ConfigError&) {
    check.expect(false, "default config rejected");
  }

  SystemConfig c1 = base;
  c1.b_susp = c1.b_res;
  rejects(c1, "b_susp < b_res");
  SystemConfig c2 = base;
  c2.c_ins = c2.b_res - 1;
  rejects(c2, "b_res <= c_ins");
  SystemConfig c3 = base;
  c3.c_ins = c3.ell + 1;
  rejects(c3, "c_ins <= ell");
  SystemConfig c4 = base;
  c4.b_res = c4.ell + 1;
  c4.c_ins = c4.ell + 1;
  rejects(c4, "c_ins <= ell");  // first violated ordering on that path
  SystemConfig c5 = base;
  c5.c_del = c5.c_ins;
  rejects(c5, "c_del < c_ins");
  SystemConfig c6 = base;
  c6.b_susp = 2;
  c6.b_res = 3;
  c6.c_del = 1;
  rejects(c6, "c_del >= b_susp");
  check.note("all six forbidden orderings rejected with the violated constraint named");
  return check;
}

Check c08_caching_scheme_equivalence() {
  Check check;
  GeneratorConfig gc;
  gc.n_resources = 500;
  gc.n_distinct_tags = 150;
  gc.tags_per_resource_max = 6;
  gc.n_queries = 3000;
  gc.query_term_count_dist = {{1, 1.0}};  // single-term stream
  gc.query_key_pool = 150;
  gc.actions_per_minute = 0;
  gc.horizon = 600;
  gc.seed = 88;
  workload::SyntheticWorkload w = workload::generate_synthetic(gc);

  SystemConfig cfg;
  cfg.ell = 8;
  cfg.b_res = 2;
  cfg.b_susp = 0;
  cfg.c_ins = 3;
  cfg.c_del = 0;
  cfg.delta_decay = 30;
  cfg.delta_update = 120;

  auto run_scheme = [&](CacheScheme scheme) {
    SystemConfig run_cfg = cfg;
    run_cfg.cache_scheme = scheme;
    SimEngine engine(run_cfg, IndexMode::stk);
    load_corpus(engine, w.actions);
    engine.run(build_event_stream({}, w.queries, run_cfg, true));
    std::map<std::int64_t, std::vector<ResourceId>> results;
    for (const auto& rec : engine.query_log()) results[rec.id] = rec.result;
    return std::make_tuple(engine.cluster().ledger.by_cause(Cause::query).tr,
                           engine.cluster().ledger.gw_cache_hits(), results);
  };
  auto [tr_uniform, hits_uniform, res_uniform] = run_scheme(CacheScheme::uniform);
  auto [tr_dedicated, hits_dedicated, res_dedicated] = run_scheme(CacheScheme::dedicated);

  check.expect(tr_uniform == tr_dedicated, "query TR differs between schemes");
  check.expect(hits_uniform == hits_dedicated, "cache hit counts differ between schemes");
  check.expect(res_uniform == res_dedicated, "results differ between schemes");
  check.expect(hits_uniform > 0, "stream never hit the cache");
  check.note("query TR " + std::to_string(tr_uniform) + " and " +
             std::to_string(hits_uniform) + " cache hits identical across schemes");
  return check;
}

Check c09_cache_coherence() {
  Check check;
  SystemConfig cfg;
  cfg.ell = 8;
  cfg.b_res = 2;
  cfg.b_susp = 0;
  cfg.c_ins = 3;
  cfg.c_del = 1;
  cfg.delta_decay = 25;
  cfg.delta_update = 100;
  cfg.n_gateways = 3;
  cfg.cache_scheme = CacheScheme::uniform;
  EngineOptions options;
  options.record_results = false;
  options.coherence_check_each_event = true;
  SimEngine engine(cfg, IndexMode::mtk, options);

  DetRng rng(909);
  std::vector<std::string> tags;
  for (int i = 0; i < 100; ++i) tags.push_back("t" + std::to_string(i));
  for (int i = 0; i < 400; ++i) {
    std::set<std::string> ts;
    const std::size_t n = 1 + rng.uniform_index(5);
    while (ts.size() < n) ts.insert(tags[rng.uniform_index(tags.size())]);
    engine.load_resource("r" + std::to_string(i), ts);
  }
  // query pool biased to a popular head so caching actually engages
  std::vector<std::vector<std::string>> pool;
  for (int i = 0; i < 160; ++i) {
    std::set<std::string> ts;
    const std::size_t n = 1 + rng.uniform_index(3);
    while (ts.size() < n) ts.insert(tags[rng.uniform_index(30)]);
    pool.emplace_back(ts.begin(), ts.end());
  }

  std::vector<Event> events;
  std::uint64_t seq = 0;
  std::size_t payload = 0;
  for (Tick t = 1; payload < 100000; ++t) {
    for (int i = 0; i < 36; ++i, ++payload) {
      events.push_back(Event{t, seq++, QueryEvent{pool[rng.uniform_index(pool.size() / (1 + rng.uniform_index(4)))], "u"}});
    }
    for (int i = 0; i < 4; ++i, ++payload) {
      events.push_back(Event{t, seq++,
                             TagActionEvent{"r" + std::to_string(rng.uniform_index(400)),
                                            tags[rng.uniform_index(tags.size())],
                                            rng.uniform01() < 0.7}});
    }
    if (t % cfg.delta_decay == 0) events.push_back(Event{t, seq++, DecayTickEvent{}});
    if (t % cfg.delta_update == 0) events.push_back(Event{t, seq++, UpdateTickEvent{}});
  }
  try {
    engine.run(events);
  } catch (const std::logic_error& e) {
    check.expect(false, std::string("coherence violation: ") + e.what());
    return check;
  }
  check.expect(engine.cluster().ledger.gw_cache_hits() > 0, "run never hit the cache");
  check.note(std::to_string(events.size()) +
             " events verified after each step, every cached list equals the index live list");
  return check;
}

Check c10_transfer_bound() {
  Check check;
  DetRng rng(1010);
  const std::vector<std::string> terms = {"a", "b", "c", "d"};
  std::size_t trials = 0;
  std::uint64_t worst_margin_num = 0, worst_margin_den = 1;
  for (int s = 2; s <= 4 && check.ok; ++s) {
    for (int trial = 0; trial < 250 && check.ok; ++trial) {
      BackendIndex index(8);
      MetricsLedger ledger;
      Mirror mirror;
      const TagKey mkey =
          canonicalize_key({terms.begin(), terms.begin() + s}, 4);
      Tick now = 0;
      auto burst = [&](int n) {
        for (int i = 0; i < n; ++i) {
          ++now;
          const std::string& term = terms[rng.uniform_index(static_cast<std::size_t>(s))];
          const ResourceId r = "r" + std::to_string(rng.uniform_index(40));
          const bool add = rng.uniform01() < 0.6;
          index.apply_tag_action(term, r, add ? TagAction::add : TagAction::del, now);
          mirror.apply(term, r, add, now);
        }
      };
      burst(60);
      index.install_list(mkey, mirror.intersection(mkey), now);
      burst(static_cast<int>(rng.uniform_index(60)));
      ++now;

      const Tick ref = index.find(mkey)->list->last_update_ts;
      std::uint64_t r_max = 0;
      for (int i = 0; i < s; ++i) {
        r_max = std::max<std::uint64_t>(
            r_max, index.compute_delta(term_key(terms[static_cast<std::size_t>(i)]), ref).size());
      }
      const std::uint64_t before = ledger.by_cause(Cause::incremental_update).tr;
      incremental_update(index, ledger, mkey, now);
      const std::uint64_t spent = ledger.by_cause(Cause::incremental_update).tr - before;
      analysis::TrBoundReport report = analysis::tr_bound_check(s, r_max, spent);
      check.expect(report.within_published,
                   "update exceeded the published bound at s=" + std::to_string(s) + " (tr=" +
                       std::to_string(spent) + ", bound=" + std::to_string(report.published_bound) +
                       ")");
      if (report.published_bound > 0 &&
          spent * worst_margin_den > worst_margin_num * report.published_bound) {
        worst_margin_num = spent;
        worst_margin_den = report.published_bound;
      }
      ++trials;
    }
  }
  std::ostringstream note;
  note << trials << " randomized updates within r_max*(s^2+3s); worst usage "
       << (100.0 * static_cast<double>(worst_margin_num) / static_cast<double>(worst_margin_den))
       << "% of the bound";
  check.note(note.str());
  return check;
}

Check c11_probe_complexity() {
  Check check;
  GeneratorConfig gc;
  gc.n_resources = 3000;
  gc.n_distinct_tags = 800;
  gc.tags_per_resource_max = 8;
  gc.n_queries = 10000;
  gc.query_term_count_dist = {{1, 0.25}, {2, 0.35}, {3, 0.20}, {4, 0.12}, {5, 0.08}};
  gc.query_key_pool = 2000;
  gc.actions_per_minute = 10;
  gc.delete_fraction = 0.2;
  gc.horizon = 1000;
  gc.seed = 1111;
  workload::SyntheticWorkload w = workload::generate_synthetic(gc);

  SystemConfig cfg;
  cfg.s_max = 3;
  cfg.delta_decay = 50;
  cfg.delta_update = 200;
  cfg.cache_scheme = CacheScheme::none;
  SimEngine engine(cfg, IndexMode::mtk);
  load_corpus(engine, w.actions);
  std::vector<TagActionRecord> live;
  for (const auto& rec : w.actions) {
    if (rec.ts > 0) live.push_back(rec);
  }
  engine.run(build_event_stream(live, w.queries, cfg, true));

  check.expect(engine.query_log().size() == 10000, "expected 10^4 queries");
  for (const auto& rec : engine.query_log()) {
    if (rec.size_probes > probe_cap(rec.n_terms, cfg.s_max)) {
      check.expect(false, "query " + std::to_string(rec.id) + " probed " +
                              std::to_string(rec.size_probes) + " keys, cap " +
                              std::to_string(probe_cap(rec.n_terms, cfg.s_max)));
      break;
    }
  }
  check.note("probes <= sum of binomials on every query of a 10^4-query run");
  return check;
}

Check c12_power_law_fit() {
  Check check;
  std::vector<std::pair<double, double>> exact;
  for (int x = 1; x <= 200; ++x) exact.emplace_back(x, 7.0 * std::pow(x, -1.6));
  analysis::PowerLawFit fit = analysis::fit_power_law(exact);
  check.expect(std::fabs(fit.beta - 1.6) / 1.6 <= 0.05, "exact-data exponent off by > 5%");
  check.expect(std::fabs(fit.alpha - 7.0) / 7.0 <= 0.05, "exact-data scale off by > 5%");

  GeneratorConfig gc;
  gc.n_resources = 10000;
  gc.n_distinct_tags = 500;
  gc.tag_popularity_exponent = 1.0;
  gc.tags_per_resource_max = 8;
  gc.n_queries = 0;
  gc.actions_per_minute = 0;
  gc.horizon = 1;
  gc.seed = 1212;
  workload::SyntheticWorkload w = workload::generate_synthetic(gc);
  std::map<std::string, std::uint64_t> counts;
  for (const auto& rec : w.actions) counts[rec.tag] += 1;
  std::vector<std::uint64_t> ranked;
  for (const auto& [tag, count] : counts) ranked.push_back(count);
  std::sort(ranked.rbegin(), ranked.rend());
  std::vector<std::pair<double, double>> points;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    points.emplace_back(static_cast<double>(i + 1), static_cast<double>(ranked[i]));
  }
  analysis::PowerLawFit sampled = analysis::fit_power_law(points);
  const double rel = std::fabs(sampled.beta - gc.tag_popularity_exponent) / gc.tag_popularity_exponent;
  check.expect(rel <= 0.10, "sampled exponent " + std::to_string(sampled.beta) +
                                " deviates more than 10% from 1.0");
  std::ostringstream note;
  note << "exact fit beta=" << fit.beta << ", generator fit beta=" << sampled.beta << " (target 1.0)";
  check.note(note.str());
  return check;
}

Check c13_cli_determinism() {
  Check check;
  GeneratorConfig gc;
  gc.n_resources = 800;
  gc.n_distinct_tags = 200;
  gc.tags_per_resource_max = 6;
  gc.n_queries = 1500;
  gc.actions_per_minute = 20;
  gc.delete_fraction = 0.2;
  gc.horizon = 300;
  gc.seed = 7;
  workload::SyntheticWorkload w = workload::generate_synthetic(gc);
  const fs::path dir = g_work / "determinism";
  fs::create_directories(dir);
  write_file((dir / "dataset.tsv").string(), workload::serialize_tag_actions(w.actions));
  write_file((dir / "queries.tsv").string(), workload::serialize_query_log(w.queries));

  auto simulate = [&](const std::string& out) {
    const std::string cmd = g_cli + " simulate --dataset " + (dir / "dataset.tsv").string() +
                            " --queries " + (dir / "queries.tsv").string() +
                            " --variant mtk_cached --scheme dedicated --seed 5 --run-id det" +
                            " --ell 8 --b-res 2 --c-ins 3 --delta-decay 30 --delta-update 120" +
                            " --out-dir " + (dir / out).string() + " > /dev/null 2> /dev/null";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  check.expect(simulate("one") == 0, "first simulate failed");
  check.expect(simulate("two") == 0, "second simulate failed");
  for (const char* name : {"metrics.csv", "metrics.json", "queries.csv", "results.tsv"}) {
    check.expect(slurp(dir / "one" / name) == slurp(dir / "two" / name),
                 std::string(name) + " differs between identical runs");
  }
  check.note("two CLI runs with identical config and seed emit byte-identical outputs");
  return check;
}

Check c14_cleaning_golden() {
  Check check;
  const std::string input = slurp(g_data / "clean_input.log");
  check.expect(!input.empty(), "missing crafted input log");
  const std::set<std::string> stopwords =
      workload::parse_stopwords(slurp(g_data / "stopwords.txt"));
  workload::CleanResult result = workload::clean_query_log(input, stopwords);
  check.expect(workload::serialize_query_log(result.records) ==
                   slurp(g_data / "clean_expected_output.tsv"),
               "cleaned trace differs from the committed expectation");

  const nlohmann::json expected = nlohmann::json::parse(slurp(g_data / "clean_expected_stats.json"));
  const workload::CleanStats& s = result.stats;
  check.expect(s.input_lines == expected.at("input_lines").get<std::uint64_t>(), "input_lines");
  check.expect(s.malformed_lines == expected.at("malformed_lines").get<std::uint64_t>(),
               "malformed_lines");
  check.expect(s.input_queries == expected.at("input_queries").get<std::uint64_t>(),
               "input_queries");
  check.expect(s.stopword_terms_removed ==
                   expected.at("stopword_terms_removed").get<std::uint64_t>(),
               "stopword_terms_removed");
  check.expect(s.url_only_queries == expected.at("url_only_queries").get<std::uint64_t>(),
               "url_only_queries");
  check.expect(s.nonalnum_terms_removed ==
                   expected.at("nonalnum_terms_removed").get<std::uint64_t>(),
               "nonalnum_terms_removed");
  check.expect(s.long_terms_removed == expected.at("long_terms_removed").get<std::uint64_t>(),
               "long_terms_removed");
  check.expect(s.long_queries == expected.at("long_queries").get<std::uint64_t>(), "long_queries");
  check.expect(s.emptied_queries == expected.at("emptied_queries").get<std::uint64_t>(),
               "emptied_queries");
  check.expect(s.output_queries == expected.at("output_queries").get<std::uint64_t>(),
               "output_queries");
  check.note("50-line crafted log: trace and all per-step counts match the committed golden");
  return check;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: mtindex_acceptance <cli-binary> <data-dir>\n";
    return 2;
  }
  g_cli = argv[1];
  g_data = argv[2];
  g_work = fs::temp_directory_path() / "mtindex_acceptance";
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"C1  incremental-update oracle", c01_incremental_update_oracle},
      {"C2  query correctness on fresh indexes", c02_query_correctness},
      {"C3  MTK best-case dominance", c03_mtk_best_case_dominance},
      {"C4  staleness and result overlap", c04_staleness_overlap},
      {"C5  storage formula vs enumeration", c05_storage_formula},
      {"C6  popularity suspend/resume mechanics", c06_popularity_mechanics},
      {"C7  threshold ordering validation", c07_threshold_validation},
      {"C8  caching scheme equivalence", c08_caching_scheme_equivalence},
      {"C9  cache coherence under load", c09_cache_coherence},
      {"C10 incremental-update transfer bound", c10_transfer_bound},
      {"C11 probe complexity", c11_probe_complexity},
      {"C12 power-law fit recovery", c12_power_law_fit},
      {"C13 CLI determinism", c13_cli_determinism},
      {"C14 cleaning pipeline golden file", c14_cleaning_golden},
  };

  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check check;
    try {
      check = fn();
    } catch (const std::exception& e) {
      check.ok = false;
      check.note(std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream line;
    line << (check.ok ? "[PASS] " : "[FAIL] ") << name << " (" << std::fixed
         << std::setprecision(1) << seconds << "s)";
    if (!check.notes.str().empty()) line << " - " << check.notes.str();
    std::cout << line.str() << "\n";
    if (!check.ok) ++failures;
  }
  std::cout << (failures == 0 ? "ACCEPTANCE: all criteria passed\n"
                              : "ACCEPTANCE: " + std::to_string(failures) + " criteria failed\n");
  return failures == 0 ? 0 : 1;
}
