#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mtindex/core.hpp"

namespace mtindex::workload {

struct TagActionRecord {
  Tick ts = 0;
  bool add = true;
  ResourceId resource;
  std::string tag;
};

struct QueryLogRecord {
  Tick ts = 0;
  std::string user;
  std::vector<std::string> terms;
};

// --- trace file formats -----------------------------------------------
// tag actions: `<timestamp>\t<+|->\t<resource_id>\t<tag>`
// query log:   `<timestamp>\t<user_id>\t<space-separated terms>`

struct ParsedActions {
  std::vector<TagActionRecord> records;
  std::uint64_t malformed_lines = 0;
};
struct ParsedQueries {
  std::vector<QueryLogRecord> records;
  std::uint64_t malformed_lines = 0;
};

ParsedActions parse_tag_actions(const std::string& text);
ParsedQueries parse_query_log(const std::string& text);
std::string serialize_tag_actions(const std::vector<TagActionRecord>& records);
std::string serialize_query_log(const std::vector<QueryLogRecord>& records);

/// Replays a trace into per-resource tag sets (set semantics; duplicate
/// adds and absent deletes count as no-op anomalies).
struct CorpusState {
  std::map<ResourceId, std::set<std::string>> tags;
  std::uint64_t noop_actions = 0;
};
CorpusState build_resources(const std::vector<TagActionRecord>& records);

std::vector<Resource> to_resources(const CorpusState& state, int t_max);

// --- query-log cleaning -------------------------------------------------

struct CleanStats {
  std::uint64_t input_lines = 0;
  std::uint64_t malformed_lines = 0;
  std::uint64_t input_queries = 0;
  std::uint64_t stopword_terms_removed = 0;
  std::uint64_t url_only_queries = 0;
  std::uint64_t nonalnum_terms_removed = 0;
  std::uint64_t long_terms_removed = 0;
  std::uint64_t long_queries = 0;
  std::uint64_t emptied_queries = 0;
  std::uint64_t output_queries = 0;
};

struct CleanResult {
  std::vector<QueryLogRecord> records;
  CleanStats stats;
};

/// Six-step cleaning pipeline: stopwords, URL-only queries, terms without
/// any alphanumeric character, terms over 30 characters, queries over 100
/// characters after removals, emptied queries. The URL-only rule is
/// re-applied after term removals so the pipeline is idempotent.
CleanResult clean_query_log(const std::string& text, const std::set<std::string>& stopwords);

bool is_url_term(const std::string& term);
std::set<std::string> parse_stopwords(const std::string& text);  // one word per line
const std::set<std::string>& default_stopwords();

// --- vocabulary matching and non-empty filtering ------------------------

struct MatchStats {
  std::uint64_t input_queries = 0;
  std::uint64_t output_queries = 0;
  double distinct_term_pct = 0.0;    // distinct query terms that are tags
  double term_occurrence_pct = 0.0;  // term occurrences kept
  double query_pct = 0.0;            // queries kept
};
struct MatchResult {
  std::vector<QueryLogRecord> records;
  MatchStats stats;
};

/// Keeps only terms present in the tag universe, dropping emptied queries.
MatchResult match_vocabulary(const std::vector<QueryLogRecord>& queries,
                             const std::set<std::string>& tag_universe);

/// Keeps exactly the queries answered by at least one resource whose
/// considered tags cover all query terms.
std::vector<QueryLogRecord> filter_nonempty(const std::vector<QueryLogRecord>& queries,
                                            const std::vector<Resource>& resources);

// --- synthetic workload generation ---------------------------------------

struct GeneratorConfig {
  std::uint64_t n_resources = 1000;
  std::uint64_t n_distinct_tags = 500;
  double tag_popularity_exponent = 1.0;     // Zipf over tag ranks
  double tags_per_resource_exponent = 1.8;  // power-law tag-set size
  int tags_per_resource_max = 12;
  std::uint64_t n_queries = 1000;
  std::uint64_t n_users = 100;
  std::uint64_t query_key_pool = 5000;  // candidate keys per key size
  // share of queries by term count, and per-size power-law parameters of
  // the resulting key-frequency histograms
  std::map<int, double> query_term_count_dist = {{1, 0.265}, {2, 0.380}, {3, 0.205},
                                                 {4, 0.090}, {5, 0.040}, {6, 0.020}};
  std::map<int, double> query_key_beta = {{1, 1.8}, {2, 1.6}, {3, 1.9},
                                          {4, 2.1}, {5, 2.1}, {6, 2.1}};
  std::map<int, double> query_key_alpha = {{1, 8.3e5}, {2, 5.8e6}, {3, 1.2e7}, {4, 1.2e7}};
  double actions_per_minute = 150.0;
  double delete_fraction = 0.0;
  Tick horizon = 0;  // minutes covered by live actions/queries; 0 = auto
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

/// Flat `key = value` config; unknown keys are rejected.
GeneratorConfig parse_generator_config(const std::string& text);
std::string serialize_generator_config(const GeneratorConfig& cfg);

struct SyntheticWorkload {
  std::vector<TagActionRecord> actions;  // ts=0 rows are the initial corpus
  std::vector<QueryLogRecord> queries;
};

SyntheticWorkload generate_synthetic(const GeneratorConfig& cfg);

}  // namespace mtindex::workload
