#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtindex/analysis.hpp"
#include "mtindex/gateway_cache.hpp"
#include "mtindex/simnet.hpp"
#include "mtindex/workload.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mtindex;

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_input(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("no such file: " + path);
  return read_file(path);
}

void write_output(const std::string& path, std::string_view content) {
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  write_file(path, content);
}

json stats_to_json(const workload::CleanStats& s) {
  return json{{"input_lines", s.input_lines},
              {"malformed_lines", s.malformed_lines},
              {"input_queries", s.input_queries},
              {"stopword_terms_removed", s.stopword_terms_removed},
              {"url_only_queries", s.url_only_queries},
              {"nonalnum_terms_removed", s.nonalnum_terms_removed},
              {"long_terms_removed", s.long_terms_removed},
              {"long_queries", s.long_queries},
              {"emptied_queries", s.emptied_queries},
              {"output_queries", s.output_queries}};
}

int cmd_clean(const std::string& in, const std::string& stopwords_path, const std::string& out,
              const std::string& stats_out) {
  std::set<std::string> stopwords = stopwords_path.empty()
                                        ? workload::default_stopwords()
                                        : workload::parse_stopwords(read_input(stopwords_path));
  workload::CleanResult result = workload::clean_query_log(read_input(in), stopwords);
  write_output(out, workload::serialize_query_log(result.records));
  if (!stats_out.empty()) write_output(stats_out, stats_to_json(result.stats).dump(2) + "\n");
  std::cout << "cleaned " << result.stats.input_queries << " queries -> "
            << result.stats.output_queries << " kept\n";
  return 0;
}

std::vector<Resource> load_dataset_resources(const std::string& path, int t_max) {
  workload::ParsedActions parsed = workload::parse_tag_actions(read_input(path));
  if (parsed.malformed_lines > 0) {
    std::cerr << "warning: skipped " << parsed.malformed_lines << " malformed dataset lines\n";
  }
  return workload::to_resources(workload::build_resources(parsed.records), t_max);
}

int cmd_match(const std::string& queries_path, const std::string& dataset_path,
              const std::string& out, const std::string& stats_out) {
  workload::ParsedQueries queries = workload::parse_query_log(read_input(queries_path));
  std::set<std::string> universe;
  for (const Resource& res : load_dataset_resources(dataset_path, INT32_MAX)) {
    universe.insert(res.tags.begin(), res.tags.end());
  }
  workload::MatchResult result = workload::match_vocabulary(queries.records, universe);
  write_output(out, workload::serialize_query_log(result.records));
  if (!stats_out.empty()) {
    json doc{{"input_queries", result.stats.input_queries},
             {"output_queries", result.stats.output_queries},
             {"distinct_term_pct", result.stats.distinct_term_pct},
             {"term_occurrence_pct", result.stats.term_occurrence_pct},
             {"query_pct", result.stats.query_pct}};
    write_output(stats_out, doc.dump(2) + "\n");
  }
  std::cout << "matched vocabulary: kept " << result.stats.output_queries << " of "
            << result.stats.input_queries << " queries\n";
  return 0;
}

int cmd_filter_nonempty(const std::string& queries_path, const std::string& dataset_path,
                        int t_max, const std::string& out) {
  workload::ParsedQueries queries = workload::parse_query_log(read_input(queries_path));
  std::vector<Resource> resources = load_dataset_resources(dataset_path, t_max);
  std::vector<workload::QueryLogRecord> kept =
      workload::filter_nonempty(queries.records, resources);
  write_output(out, workload::serialize_query_log(kept));
  std::cout << "kept " << kept.size() << " of " << queries.records.size()
            << " queries with non-empty results\n";
  return 0;
}

int cmd_generate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_dir) {
  workload::GeneratorConfig cfg = config_path.empty()
                                      ? workload::GeneratorConfig{}
                                      : workload::parse_generator_config(read_input(config_path));
  if (seed) cfg.seed = *seed;
  cfg.validate();
  workload::SyntheticWorkload w = workload::generate_synthetic(cfg);
  fs::create_directories(out_dir);
  write_output((fs::path(out_dir) / "dataset.tsv").string(),
               workload::serialize_tag_actions(w.actions));
  write_output((fs::path(out_dir) / "queries.tsv").string(),
               workload::serialize_query_log(w.queries));
  write_output((fs::path(out_dir) / "generator_config.txt").string(),
               workload::serialize_generator_config(cfg));
  std::cout << "generated " << w.actions.size() << " tag actions and " << w.queries.size()
            << " queries in " << out_dir << "\n";
  return 0;
}

int cmd_analyze(const std::string& dataset_path, int s_max, int t_max,
                std::optional<std::size_t> l_max, std::uint64_t avg_entry_bytes,
                const std::string& out, const std::string& histogram_csv) {
  if (s_max < 1) throw UsageError("config violates: s_max >= 1");
  if (t_max < 1) throw UsageError("config violates: t_max >= 1");
  std::vector<Resource> resources = load_dataset_resources(dataset_path, t_max);
  const std::uint64_t entries = analysis::count_list_entries(resources, s_max, t_max);

  std::map<TagKey, std::size_t> lengths = analysis::full_index_lengths(resources, s_max, t_max);
  analysis::ExtentStats extent = analysis::extent_stats(lengths, l_max);

  json doc;
  doc["resources"] = resources.size();
  std::set<std::string> tags;
  for (const auto& res : resources) tags.insert(res.tags.begin(), res.tags.end());
  doc["distinct_tags"] = tags.size();
  doc["s_max"] = s_max;
  doc["t_max"] = t_max;
  doc["entry_count"] = entries;
  doc["avg_entry_bytes"] = avg_entry_bytes;
  doc["storage_bytes"] = analysis::estimate_storage_bytes(entries, avg_entry_bytes);
  doc["total_keys"] = extent.total_keys;
  json by_size = json::object();
  for (const auto& [size, count] : extent.keys_by_size) by_size[std::to_string(size)] = count;
  doc["keys_by_size"] = std::move(by_size);
  json histogram = json::object();
  for (const auto& [len, count] : extent.length_histogram) histogram[std::to_string(len)] = count;
  doc["length_histogram"] = std::move(histogram);
  if (l_max) {
    doc["l_max"] = *l_max;
    doc["coverage"] = extent.coverage ? json(*extent.coverage) : json(nullptr);
  }
  try {
    std::vector<std::pair<double, double>> points;
    for (const auto& [len, count] : extent.length_histogram) {
      points.emplace_back(static_cast<double>(len), static_cast<double>(count));
    }
    analysis::PowerLawFit fit = analysis::fit_power_law(points);
    doc["length_fit"] = json{{"alpha", fit.alpha}, {"beta", fit.beta}, {"r_squared", fit.r_squared}};
  } catch (const analysis::InsufficientData&) {
    doc["length_fit"] = nullptr;
  }
  write_output(out, doc.dump(2) + "\n");
  if (!histogram_csv.empty()) {
    std::ostringstream csv;
    csv << "list_length,key_count\n";
    for (const auto& [len, count] : extent.length_histogram) csv << len << ',' << count << '\n';
    write_output(histogram_csv, csv.str());
  }
  std::cout << "analyzed " << resources.size() << " resources: " << entries << " index entries\n";
  return 0;
}

struct SimulateArgs {
  std::string config_path;
  std::string dataset_path;
  std::string queries_path;
  std::string out_dir;
  std::string run_id = "run";
  std::string variant = "mtk";
  std::string scheme;
  std::string baseline_path;
  bool prewarm = false;
  bool no_ticks = false;
  bool no_results = false;
  bool coherence_debug = false;
  bool dump_index = false;
  bool dump_cache = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> s_max, t_max, ell, b_res, b_susp, c_ins, c_del, gateways;
  std::optional<Tick> delta_decay, delta_update;
};

json config_to_json(const SystemConfig& cfg) {
  return json{{"s_max", cfg.s_max},
              {"t_max", cfg.t_max},
              {"ell", cfg.ell},
              {"delta_decay", cfg.delta_decay},
              {"delta_update", cfg.delta_update},
              {"b_res", cfg.b_res},
              {"b_susp", cfg.b_susp},
              {"c_ins", cfg.c_ins},
              {"c_del", cfg.c_del},
              {"n_gateways", cfg.n_gateways},
              {"cache_scheme", to_string(cfg.cache_scheme)},
              {"rng_seed", cfg.rng_seed}};
}

int cmd_simulate(const SimulateArgs& args) {
  SystemConfig cfg = args.config_path.empty() ? SystemConfig{}
                                              : parse_system_config(read_input(args.config_path));
  if (args.seed) cfg.rng_seed = *args.seed;
  if (args.s_max) cfg.s_max = *args.s_max;
  if (args.t_max) cfg.t_max = *args.t_max;
  if (args.ell) cfg.ell = *args.ell;
  if (args.b_res) cfg.b_res = *args.b_res;
  if (args.b_susp) cfg.b_susp = *args.b_susp;
  if (args.c_ins) cfg.c_ins = *args.c_ins;
  if (args.c_del) cfg.c_del = *args.c_del;
  if (args.gateways) cfg.n_gateways = *args.gateways;
  if (args.delta_decay) cfg.delta_decay = *args.delta_decay;
  if (args.delta_update) cfg.delta_update = *args.delta_update;

  IndexMode mode;
  bool cached;
  if (args.variant == "stk" || args.variant == "mtk") {
    mode = parse_index_mode(args.variant);
    cached = false;
  } else if (args.variant == "stk_cached" || args.variant == "mtk_cached") {
    mode = parse_index_mode(args.variant.substr(0, 3));
    cached = true;
  } else {
    throw ConfigError("unknown variant: " + args.variant +
                      " (expected stk, mtk, stk_cached, mtk_cached)");
  }
  if (cached) {
    if (!args.scheme.empty()) {
      cfg.cache_scheme = parse_cache_scheme(args.scheme);
    } else if (cfg.cache_scheme == CacheScheme::none) {
      cfg.cache_scheme = CacheScheme::uniform;
    }
    if (cfg.cache_scheme == CacheScheme::none) {
      throw ConfigError("cached variant needs a cache scheme (uniform or dedicated)");
    }
  } else {
    cfg.cache_scheme = CacheScheme::none;
  }
  cfg.validate();

  workload::ParsedActions actions = workload::parse_tag_actions(read_input(args.dataset_path));
  workload::ParsedQueries queries = workload::parse_query_log(read_input(args.queries_path));
  if (actions.malformed_lines + queries.malformed_lines > 0) {
    std::cerr << "warning: skipped " << actions.malformed_lines << " dataset and "
              << queries.malformed_lines << " query lines\n";
  }

  fs::create_directories(args.out_dir);
  auto out_path = [&](const char* name) { return (fs::path(args.out_dir) / name).string(); };

  json manifest;
  manifest["artifact_version"] = kVersion;
  manifest["run_id"] = args.run_id;
  manifest["variant"] = args.variant;
  manifest["scheme"] = to_string(cfg.cache_scheme);
  manifest["seed"] = cfg.rng_seed;
  manifest["config"] = config_to_json(cfg);
  manifest["prewarm"] = args.prewarm;
  manifest["ticks"] = !args.no_ticks;
  manifest["inputs"] = json{
      {"dataset", {{"path", args.dataset_path}, {"digest", file_digest(args.dataset_path)}}},
      {"queries", {{"path", args.queries_path}, {"digest", file_digest(args.queries_path)}}}};
  manifest["outputs"] =
      json::array({out_path("metrics.csv"), out_path("metrics.json"), out_path("queries.csv"),
                   out_path("results.tsv")});
  write_output(out_path("manifest.json"), manifest.dump(2) + "\n");

  EngineOptions options;
  options.record_results = !args.no_results;
  options.coherence_check_each_event = args.coherence_debug;
  SimEngine engine(cfg, mode, options);

  // rows at ts 0 are the initial corpus, loaded without accounting
  std::vector<workload::TagActionRecord> bulk;
  std::vector<workload::TagActionRecord> live;
  for (auto& rec : actions.records) (rec.ts <= 0 ? bulk : live).push_back(rec);
  for (const auto& [id, tags] : workload::build_resources(bulk).tags) {
    engine.load_resource(id, tags);
  }
  if (args.prewarm && mode == IndexMode::mtk) engine.prewarm_for_queries(queries.records);

  engine.run(build_event_stream(live, queries.records, cfg, !args.no_ticks));

  const MetricsLedger& ledger = engine.cluster().ledger;
  const std::string scheme_name = to_string(cfg.cache_scheme);
  write_output(out_path("metrics.csv"), metrics_csv(ledger, args.run_id, args.variant, scheme_name));
  write_output(out_path("metrics.json"),
               metrics_json(ledger, args.run_id, args.variant, scheme_name,
                            engine.query_log().size()));
  write_output(out_path("queries.csv"), query_log_csv(engine.query_log()));
  write_output(out_path("results.tsv"), results_tsv(engine.query_log()));
  if (args.dump_index) {
    write_output(out_path("index_snapshot.tsv"), engine.cluster().index.snapshot());
  }
  if (args.dump_cache) {
    write_output(out_path("cache_snapshot.tsv"), cache_snapshot(engine.cluster()));
  }

  const CauseCounters totals = ledger.totals();
  std::cout << args.run_id << " " << args.variant << "/" << scheme_name << ": queries="
            << engine.query_log().size() << " ck=" << totals.ck << " ik=" << totals.ik
            << " tr=" << totals.tr << " hr_gw=" << totals.hr_gateway
            << " hr_bk=" << totals.hr_backend << "\n";

  if (!args.baseline_path.empty()) {
    json base = json::parse(read_input(args.baseline_path));
    std::map<std::string, std::uint64_t> base_metrics =
        base.at("metrics").get<std::map<std::string, std::uint64_t>>();
    auto rel = compare_runs(base_metrics, metrics_summary(ledger));
    write_output(out_path("comparison.json"), compare_json(rel));
    for (const char* name : {"ck", "ik", "tr", "hr_gateway_total", "hr_backend_total"}) {
      const RelativeMetric& m = rel.at(name);
      std::cout << "  " << name << ": ";
      if (m.defined) {
        std::cout << m.percent << "% of baseline\n";
      } else {
        std::cout << "undefined (baseline is zero)\n";
      }
    }
  }
  return 0;
}

int cmd_report(const std::string& baseline_path, const std::string& variant_path,
               const std::string& results_a, const std::string& results_b,
               const std::string& out) {
  json doc = json::object();
  if (!baseline_path.empty() && !variant_path.empty()) {
    json base = json::parse(read_input(baseline_path));
    json var = json::parse(read_input(variant_path));
    auto rel = compare_runs(base.at("metrics").get<std::map<std::string, std::uint64_t>>(),
                            var.at("metrics").get<std::map<std::string, std::uint64_t>>());
    doc["relative"] = json::parse(compare_json(rel));
    for (const char* name : {"ck", "ik", "tr"}) {
      const RelativeMetric& m = rel.at(name);
      std::cout << name << ": ";
      if (m.defined) {
        std::cout << m.percent << "% of baseline\n";
      } else {
        std::cout << "undefined\n";
      }
    }
  }
  if (!results_a.empty() && !results_b.empty()) {
    const double overlap = analysis::result_overlap(parse_results_tsv(read_input(results_a)),
                                                    parse_results_tsv(read_input(results_b)));
    doc["overlap_pct"] = overlap;
    std::cout << "result overlap: " << overlap << "%\n";
  }
  if (doc.empty()) {
    throw UsageError("report needs --baseline/--variant or --results-a/--results-b");
  }
  if (!out.empty()) write_output(out, doc.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"query-driven multi-term inverted index simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // clean
  auto* clean = app.add_subcommand("clean", "run the query-log cleaning pipeline");
  std::string clean_in, clean_stop, clean_out, clean_stats;
  clean->add_option("--in", clean_in, "raw query log")->required();
  clean->add_option("--stopwords", clean_stop, "stopword list, one per line");
  clean->add_option("--out", clean_out, "cleaned query log")->required();
  clean->add_option("--stats", clean_stats, "per-step statistics JSON");

  // match
  auto* match = app.add_subcommand("match", "restrict query terms to the dataset vocabulary");
  std::string match_q, match_d, match_out, match_stats;
  match->add_option("--queries", match_q)->required();
  match->add_option("--dataset", match_d)->required();
  match->add_option("--out", match_out)->required();
  match->add_option("--stats", match_stats);

  // filter-nonempty
  auto* filter = app.add_subcommand("filter-nonempty", "keep queries with non-empty answers");
  std::string filter_q, filter_d, filter_out;
  int filter_tmax = 20;
  filter->add_option("--queries", filter_q)->required();
  filter->add_option("--dataset", filter_d)->required();
  filter->add_option("--t-max", filter_tmax);
  filter->add_option("--out", filter_out)->required();

  // generate
  auto* generate = app.add_subcommand("generate", "write a synthetic power-law workload");
  std::string gen_config, gen_out;
  std::optional<std::uint64_t> gen_seed;
  generate->add_option("--config", gen_config, "generator config (key = value)");
  generate->add_option("--seed", gen_seed, "override the config seed");
  generate->add_option("--out-dir", gen_out)->required();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "index extent and storage analytics");
  std::string an_dataset, an_out, an_hist;
  int an_smax = 3, an_tmax = 20;
  std::optional<std::size_t> an_lmax;
  std::uint64_t an_bytes = 73;
  analyze->add_option("--dataset", an_dataset)->required();
  analyze->add_option("--s-max", an_smax);
  analyze->add_option("--t-max", an_tmax);
  analyze->add_option("--l-max", an_lmax, "coverage threshold for list lengths");
  analyze->add_option("--avg-entry-bytes", an_bytes);
  analyze->add_option("--out", an_out)->required();
  analyze->add_option("--histogram-csv", an_hist, "list-length histogram as CSV");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run a trace-driven cluster simulation");
  SimulateArgs sim;
  simulate->add_option("--config", sim.config_path, "system config (key = value)");
  simulate->add_option("--dataset", sim.dataset_path)->required();
  simulate->add_option("--queries", sim.queries_path)->required();
  simulate->add_option("--out-dir", sim.out_dir)->required();
  simulate->add_option("--run-id", sim.run_id);
  simulate->add_option("--variant", sim.variant, "stk | mtk | stk_cached | mtk_cached");
  simulate->add_option("--scheme", sim.scheme, "uniform | dedicated");
  simulate->add_option("--baseline", sim.baseline_path, "baseline metrics.json to normalize to");
  simulate->add_flag("--prewarm", sim.prewarm, "materialize all query-relevant multi-term keys");
  simulate->add_flag("--no-ticks", sim.no_ticks, "suppress decay and update ticks");
  simulate->add_flag("--no-results", sim.no_results, "skip per-query result recording");
  simulate->add_flag("--coherence-debug", sim.coherence_debug,
                     "verify cache coherence after every event");
  simulate->add_flag("--dump-index", sim.dump_index, "write the final index snapshot");
  simulate->add_flag("--dump-cache", sim.dump_cache, "write the final cache snapshot");
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--s-max", sim.s_max);
  simulate->add_option("--t-max", sim.t_max);
  simulate->add_option("--ell", sim.ell);
  simulate->add_option("--delta-decay", sim.delta_decay);
  simulate->add_option("--delta-update", sim.delta_update);
  simulate->add_option("--b-res", sim.b_res);
  simulate->add_option("--b-susp", sim.b_susp);
  simulate->add_option("--c-ins", sim.c_ins);
  simulate->add_option("--c-del", sim.c_del);
  simulate->add_option("--gateways", sim.gateways);

  // report
  auto* report = app.add_subcommand("report", "compare runs and compute result overlap");
  std::string rep_base, rep_var, rep_a, rep_b, rep_out;
  report->add_option("--baseline", rep_base, "baseline metrics.json");
  report->add_option("--variant", rep_var, "variant metrics.json");
  report->add_option("--results-a", rep_a, "results.tsv of the first run");
  report->add_option("--results-b", rep_b, "results.tsv of the second run");
  report->add_option("--out", rep_out, "report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (clean->parsed()) return cmd_clean(clean_in, clean_stop, clean_out, clean_stats);
    if (match->parsed()) return cmd_match(match_q, match_d, match_out, match_stats);
    if (filter->parsed()) return cmd_filter_nonempty(filter_q, filter_d, filter_tmax, filter_out);
    if (generate->parsed()) return cmd_generate(gen_config, gen_seed, gen_out);
    if (analyze->parsed()) {
      return cmd_analyze(an_dataset, an_smax, an_tmax, an_lmax, an_bytes, an_out, an_hist);
    }
    if (simulate->parsed()) return cmd_simulate(sim);
    if (report->parsed()) return cmd_report(rep_base, rep_var, rep_a, rep_b, rep_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
