#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mtindex/analysis.hpp"
#include "mtindex/gateway_cache.hpp"
#include "mtindex/simnet.hpp"
#include "mtindex/workload.hpp"

namespace py = pybind11;
using namespace mtindex;

namespace {

SystemConfig config_from_dict(const py::dict& overrides) {
  SystemConfig cfg;
  for (const auto& item : overrides) {
    const std::string key = py::cast<std::string>(item.first);
    if (key == "s_max") cfg.s_max = py::cast<int>(item.second);
    else if (key == "t_max") cfg.t_max = py::cast<int>(item.second);
    else if (key == "ell") cfg.ell = py::cast<int>(item.second);
    else if (key == "delta_decay") cfg.delta_decay = py::cast<Tick>(item.second);
    else if (key == "delta_update") cfg.delta_update = py::cast<Tick>(item.second);
    else if (key == "b_res") cfg.b_res = py::cast<int>(item.second);
    else if (key == "b_susp") cfg.b_susp = py::cast<int>(item.second);
    else if (key == "c_ins") cfg.c_ins = py::cast<int>(item.second);
    else if (key == "c_del") cfg.c_del = py::cast<int>(item.second);
    else if (key == "n_gateways") cfg.n_gateways = py::cast<int>(item.second);
    else if (key == "cache_scheme") cfg.cache_scheme = parse_cache_scheme(py::cast<std::string>(item.second));
    else if (key == "rng_seed") cfg.rng_seed = py::cast<std::uint64_t>(item.second);
    else throw ConfigError("unknown config key: " + key);
  }
  return cfg;
}

py::dict clean_stats_dict(const workload::CleanStats& s) {
  py::dict d;
  d["input_lines"] = s.input_lines;
  d["malformed_lines"] = s.malformed_lines;
  d["input_queries"] = s.input_queries;
  d["stopword_terms_removed"] = s.stopword_terms_removed;
  d["url_only_queries"] = s.url_only_queries;
  d["nonalnum_terms_removed"] = s.nonalnum_terms_removed;
  d["long_terms_removed"] = s.long_terms_removed;
  d["long_queries"] = s.long_queries;
  d["emptied_queries"] = s.emptied_queries;
  d["output_queries"] = s.output_queries;
  return d;
}

py::dict run_simulation(const std::string& dataset_text, const std::string& queries_text,
                        const py::dict& config, const std::string& variant,
                        const std::string& scheme, bool prewarm, bool ticks) {
  SystemConfig cfg = config_from_dict(config);
  IndexMode mode;
  if (variant == "stk" || variant == "mtk") {
    mode = parse_index_mode(variant);
    cfg.cache_scheme = CacheScheme::none;
  } else if (variant == "stk_cached" || variant == "mtk_cached") {
    mode = parse_index_mode(variant.substr(0, 3));
    cfg.cache_scheme = scheme.empty() ? CacheScheme::uniform : parse_cache_scheme(scheme);
  } else {
    throw ConfigError("unknown variant: " + variant);
  }
  cfg.validate();

  workload::ParsedActions actions = workload::parse_tag_actions(dataset_text);
  workload::ParsedQueries queries = workload::parse_query_log(queries_text);

  SimEngine engine(cfg, mode);
  std::vector<workload::TagActionRecord> bulk;
  std::vector<workload::TagActionRecord> live;
  for (auto& rec : actions.records) (rec.ts <= 0 ? bulk : live).push_back(rec);
  for (const auto& [id, tags] : workload::build_resources(bulk).tags) {
    engine.load_resource(id, tags);
  }
  if (prewarm && mode == IndexMode::mtk) engine.prewarm_for_queries(queries.records);
  engine.run(build_event_stream(live, queries.records, cfg, ticks));

  py::dict out;
  out["variant"] = variant;
  out["scheme"] = to_string(cfg.cache_scheme);
  out["query_count"] = engine.query_log().size();
  out["metrics"] = metrics_summary(engine.cluster().ledger);
  py::dict results;
  py::list per_query;
  for (const auto& rec : engine.query_log()) {
    results[py::int_(rec.id)] = rec.result;
    py::dict q;
    q["id"] = rec.id;
    q["time"] = rec.time;
    q["n_terms"] = rec.n_terms;
    q["size_probes"] = rec.size_probes;
    q["tr"] = rec.tr;
    q["ck"] = rec.ck;
    q["ik"] = rec.ik;
    q["direct_hit"] = rec.direct_hit;
    q["cache_hit"] = rec.cache_hit;
    q["early_exit"] = rec.early_exit;
    per_query.append(std::move(q));
  }
  out["results"] = std::move(results);
  out["queries"] = std::move(per_query);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "query-driven multi-term inverted index: core operations";

  m.def(
      "canonicalize_key",
      [](const std::vector<std::string>& terms, int s_max) {
        return canonicalize_key(terms, s_max).terms();
      },
      py::arg("terms"), py::arg("s_max") = 3,
      "Sorted, deduplicated key terms; raises ValueError on empty or oversized keys.");

  m.def(
      "derive_considered_tags",
      [](const std::set<std::string>& tags, int t_max) {
        const std::set<std::string> out = derive_considered_tags(tags, t_max);
        return std::vector<std::string>(out.begin(), out.end());
      },
      py::arg("tags"), py::arg("t_max") = 20);

  m.def(
      "compute_subset_keys",
      [](const std::vector<std::string>& terms, int s_max) {
        std::vector<std::vector<std::string>> out;
        for (const TagKey& key : compute_subset_keys(make_query(terms, 0), s_max)) {
          out.push_back(key.terms());
        }
        return out;
      },
      py::arg("terms"), py::arg("s_max") = 3);

  py::class_<PopularityVector>(m, "PopularityVector")
      .def(py::init<int, std::uint64_t>(), py::arg("length"), py::arg("bits") = 0)
      .def_property_readonly("length", &PopularityVector::length)
      .def_property_readonly("bits", &PopularityVector::bits)
      .def("after_request", &PopularityVector::after_request)
      .def("after_decay", &PopularityVector::after_decay)
      .def("popcount", &PopularityVector::popcount)
      .def("__eq__", [](const PopularityVector& a, const PopularityVector& b) { return a == b; });

  py::class_<SystemConfig>(m, "SystemConfig")
      .def(py::init([](const py::kwargs& kwargs) {
        py::dict d;
        for (const auto& item : kwargs) d[item.first] = item.second;
        return config_from_dict(d);
      }))
      .def_readwrite("s_max", &SystemConfig::s_max)
      .def_readwrite("t_max", &SystemConfig::t_max)
      .def_readwrite("ell", &SystemConfig::ell)
      .def_readwrite("delta_decay", &SystemConfig::delta_decay)
      .def_readwrite("delta_update", &SystemConfig::delta_update)
      .def_readwrite("b_res", &SystemConfig::b_res)
      .def_readwrite("b_susp", &SystemConfig::b_susp)
      .def_readwrite("c_ins", &SystemConfig::c_ins)
      .def_readwrite("c_del", &SystemConfig::c_del)
      .def_readwrite("n_gateways", &SystemConfig::n_gateways)
      .def_readwrite("rng_seed", &SystemConfig::rng_seed)
      .def("validate", &SystemConfig::validate);

  m.def(
      "classify",
      [](const PopularityVector& v, const py::dict& config, const std::string& state,
         bool cached) {
        SystemConfig cfg = config_from_dict(config);
        cfg.validate();
        const KeyState key_state =
            state == "suspended" ? KeyState::suspended : KeyState::available;
        ActionSet actions = classify(v, cfg, key_state, cached);
        std::vector<std::string> out;
        if (actions.resume) out.push_back("resume");
        if (actions.suspend) out.push_back("suspend");
        if (actions.cache_insert) out.push_back("cache_insert");
        if (actions.cache_evict) out.push_back("cache_evict");
        return out;
      },
      py::arg("vector"), py::arg("config"), py::arg("state"), py::arg("cached") = false);

  m.def(
      "clean_query_log",
      [](const std::string& text, const std::optional<std::vector<std::string>>& stopwords) {
        const std::set<std::string> stop =
            stopwords ? std::set<std::string>(stopwords->begin(), stopwords->end())
                      : workload::default_stopwords();
        workload::CleanResult result = workload::clean_query_log(text, stop);
        return py::make_tuple(workload::serialize_query_log(result.records),
                              clean_stats_dict(result.stats));
      },
      py::arg("text"), py::arg("stopwords") = std::nullopt,
      "Returns (cleaned_tsv, per_step_stats).");

  m.def(
      "generate_synthetic",
      [](const std::string& config_text) {
        workload::GeneratorConfig cfg = workload::parse_generator_config(config_text);
        workload::SyntheticWorkload w = workload::generate_synthetic(cfg);
        py::dict out;
        out["dataset"] = workload::serialize_tag_actions(w.actions);
        out["queries"] = workload::serialize_query_log(w.queries);
        out["n_actions"] = w.actions.size();
        out["n_queries"] = w.queries.size();
        return out;
      },
      py::arg("config_text") = "",
      "Synthetic power-law workload from a `key = value` config string.");

  m.def(
      "fit_power_law",
      [](const std::vector<std::pair<double, double>>& points) {
        analysis::PowerLawFit fit = analysis::fit_power_law(points);
        return py::make_tuple(fit.alpha, fit.beta, fit.r_squared);
      },
      py::arg("points"), "Least squares on the log-log scale: (alpha, beta, r_squared).");

  m.def(
      "count_list_entries",
      [](const std::vector<std::size_t>& tag_counts, int s_max, int t_max) {
        return analysis::count_list_entries(tag_counts, s_max, t_max);
      },
      py::arg("tag_counts"), py::arg("s_max") = 3, py::arg("t_max") = 20);

  m.def("estimate_storage_bytes", &analysis::estimate_storage_bytes, py::arg("entry_count"),
        py::arg("avg_entry_bytes") = 73);

  m.def(
      "tr_bound_check",
      [](int s, std::uint64_t r_max, std::uint64_t measured) {
        analysis::TrBoundReport report = analysis::tr_bound_check(s, r_max, measured);
        py::dict out;
        out["published_bound"] = report.published_bound;
        out["derived_bound"] = report.derived_bound;
        out["within_published"] = report.within_published;
        out["within_derived"] = report.within_derived;
        return out;
      },
      py::arg("s"), py::arg("r_max"), py::arg("measured_tr"));

  m.def(
      "result_overlap",
      [](const std::map<std::int64_t, std::vector<std::string>>& a,
         const std::map<std::int64_t, std::vector<std::string>>& b) {
        return analysis::result_overlap(a, b);
      },
      py::arg("a"), py::arg("b"), "Mean Jaccard overlap of per-query results, in percent.");

  m.def("run_simulation", &run_simulation, py::arg("dataset"), py::arg("queries"),
        py::arg("config") = py::dict(), py::arg("variant") = "mtk", py::arg("scheme") = "",
        py::arg("prewarm") = false, py::arg("ticks") = true,
        "Trace-driven simulation over in-memory dataset/query texts.");
}
