#include "mtindex/workload.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace mtindex::workload {

namespace {

bool parse_tick(const std::string& s, Tick& out) {
  if (s.empty()) return false;
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size()) return false;
    out = v;
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

ParsedActions parse_tag_actions(const std::string& text) {
  ParsedActions out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields = split(line, '\t', true);
    Tick ts = 0;
    if (fields.size() != 4 || !parse_tick(fields[0], ts) ||
        (fields[1] != "+" && fields[1] != "-") || fields[2].empty() || fields[3].empty()) {
      ++out.malformed_lines;
      continue;
    }
    out.records.push_back(TagActionRecord{ts, fields[1] == "+", fields[2], fields[3]});
  }
  return out;
}

ParsedQueries parse_query_log(const std::string& text) {
  ParsedQueries out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields = split(line, '\t', true);
    Tick ts = 0;
    if (fields.size() != 3 || !parse_tick(fields[0], ts) || fields[1].empty()) {
      ++out.malformed_lines;
      continue;
    }
    std::vector<std::string> terms = split(fields[2], ' ');
    if (terms.empty()) {
      ++out.malformed_lines;
      continue;
    }
    out.records.push_back(QueryLogRecord{ts, fields[1], std::move(terms)});
  }
  return out;
}

std::string serialize_tag_actions(const std::vector<TagActionRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records) {
    out << r.ts << '\t' << (r.add ? '+' : '-') << '\t' << r.resource << '\t' << r.tag << '\n';
  }
  return out.str();
}

std::string serialize_query_log(const std::vector<QueryLogRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records) {
    out << r.ts << '\t' << r.user << '\t' << join(r.terms, " ") << '\n';
  }
  return out.str();
}

CorpusState build_resources(const std::vector<TagActionRecord>& records) {
  CorpusState state;
  for (const auto& r : records) {
    if (r.add) {
      if (!state.tags[r.resource].insert(r.tag).second) ++state.noop_actions;
    } else {
      auto it = state.tags.find(r.resource);
      if (it == state.tags.end() || it->second.erase(r.tag) == 0) ++state.noop_actions;
    }
  }
  return state;
}

std::vector<Resource> to_resources(const CorpusState& state, int t_max) {
  std::vector<Resource> out;
  out.reserve(state.tags.size());
  for (const auto& [id, tags] : state.tags) {
    Resource res;
    res.id = id;
    res.tags = tags;
    res.considered_tags = derive_considered_tags(tags, t_max);
    out.push_back(std::move(res));
  }
  return out;
}

bool is_url_term(const std::string& term) {
  static const std::set<std::string> kTlds = {
      "com", "org", "net", "edu", "gov", "mil", "int", "info", "biz", "name",
      "io",  "co",  "us",  "uk",  "ca",  "de",  "fr",  "it",   "es",  "nl",
      "se",  "no",  "fi",  "dk",  "ch",  "at",  "be",  "au",   "nz",  "jp",
      "cn",  "ru",  "br",  "in",  "pl",  "cz",  "gr",  "pt",   "ie",  "tv"};
  const std::string t = lower(term);
  if (t.rfind("http://", 0) == 0 || t.rfind("https://", 0) == 0 || t.rfind("www.", 0) == 0) {
    return true;
  }
  const std::string host = t.substr(0, t.find('/'));
  std::vector<std::string> labels = split(host, '.', true);
  if (labels.size() < 2) return false;
  for (const auto& label : labels) {
    if (label.empty()) return false;
  }
  return kTlds.contains(labels.back());
}

std::set<std::string> parse_stopwords(const std::string& text) {
  std::set<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string w = trim(line);
    if (!w.empty() && w[0] != '#') out.insert(w);
  }
  return out;
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> kWords = {
      "a",      "about",   "above",  "after",   "again",  "against", "all",    "am",
      "an",     "and",     "any",    "are",     "as",     "at",      "be",     "because",
      "been",   "before",  "being",  "below",   "between", "both",   "but",    "by",
      "can",    "cannot",  "could",  "did",     "do",     "does",    "doing",  "down",
      "during", "each",    "few",    "for",     "from",   "further", "had",    "has",
      "have",   "having",  "he",     "her",     "here",   "hers",    "him",    "his",
      "how",    "i",       "if",     "in",      "into",   "is",      "it",     "its",
      "itself", "me",      "more",   "most",    "my",     "no",      "nor",    "not",
      "of",     "off",     "on",     "once",    "only",   "or",      "other",  "our",
      "ours",   "out",     "over",   "own",     "same",   "she",     "should", "so",
      "some",   "such",    "than",   "that",    "the",    "their",   "theirs", "them",
      "then",   "there",   "these",  "they",    "this",   "those",   "through", "to",
      "too",    "under",   "until",  "up",      "very",   "was",     "we",     "were",
      "what",   "when",    "where",  "which",   "while",  "who",     "whom",   "why",
      "with",   "would",   "you",    "your",    "yours"};
  return kWords;
}

CleanResult clean_query_log(const std::string& text, const std::set<std::string>& stopwords) {
  CleanResult result;
  CleanStats& stats = result.stats;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++stats.input_lines;
    std::vector<std::string> fields = split(line, '\t', true);
    Tick ts = 0;
    if (fields.size() != 3 || !parse_tick(fields[0], ts) || fields[1].empty()) {
      ++stats.malformed_lines;
      continue;
    }
    std::vector<std::string> terms = split(fields[2], ' ');
    if (terms.empty()) {
      ++stats.malformed_lines;
      continue;
    }
    ++stats.input_queries;
    const std::size_t before_steps = terms.size();

    // (1) stopwords
    std::erase_if(terms, [&](const std::string& t) {
      if (stopwords.contains(t)) {
        ++stats.stopword_terms_removed;
        return true;
      }
      return false;
    });
    // (2) a URL as the only term
    if (terms.size() == 1 && is_url_term(terms[0])) {
      ++stats.url_only_queries;
      continue;
    }
    // (3) terms without any alphanumeric character
    std::erase_if(terms, [&](const std::string& t) {
      bool has_alnum = std::any_of(t.begin(), t.end(), [](unsigned char c) {
        return std::isalnum(c) != 0;
      });
      if (!has_alnum) {
        ++stats.nonalnum_terms_removed;
        return true;
      }
      return false;
    });
    // (4) terms longer than 30 characters
    std::erase_if(terms, [&](const std::string& t) {
      if (t.size() > 30) {
        ++stats.long_terms_removed;
        return true;
      }
      return false;
    });
    // re-check (2): removals above can leave a lone URL term behind
    if (terms.size() == 1 && is_url_term(terms[0])) {
      ++stats.url_only_queries;
      continue;
    }
    // (5) queries still longer than 100 characters
    if (join(terms, " ").size() > 100) {
      ++stats.long_queries;
      continue;
    }
    // (6) queries emptied by the steps above
    if (terms.empty()) {
      if (before_steps > 0) ++stats.emptied_queries;
      continue;
    }
    ++stats.output_queries;
    result.records.push_back(QueryLogRecord{ts, fields[1], std::move(terms)});
  }
  return result;
}

MatchResult match_vocabulary(const std::vector<QueryLogRecord>& queries,
                             const std::set<std::string>& tag_universe) {
  MatchResult result;
  MatchStats& stats = result.stats;
  stats.input_queries = queries.size();
  std::set<std::string> distinct_in;
  std::set<std::string> distinct_kept;
  std::uint64_t occurrences_in = 0;
  std::uint64_t occurrences_kept = 0;
  for (const auto& rec : queries) {
    std::vector<std::string> kept;
    for (const auto& t : rec.terms) {
      ++occurrences_in;
      distinct_in.insert(t);
      if (tag_universe.contains(t)) {
        ++occurrences_kept;
        distinct_kept.insert(t);
        kept.push_back(t);
      }
    }
    if (!kept.empty()) {
      result.records.push_back(QueryLogRecord{rec.ts, rec.user, std::move(kept)});
    }
  }
  stats.output_queries = result.records.size();
  auto pct = [](std::uint64_t part, std::uint64_t whole) {
    return whole == 0 ? 100.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
  };
  stats.distinct_term_pct = pct(distinct_kept.size(), distinct_in.size());
  stats.term_occurrence_pct = pct(occurrences_kept, occurrences_in);
  stats.query_pct = pct(stats.output_queries, stats.input_queries);
  return result;
}

std::vector<QueryLogRecord> filter_nonempty(const std::vector<QueryLogRecord>& queries,
                                            const std::vector<Resource>& resources) {
  std::map<std::string, std::vector<std::size_t>> by_tag;
  for (std::size_t i = 0; i < resources.size(); ++i) {
    for (const auto& tag : resources[i].considered_tags) by_tag[tag].push_back(i);
  }
  std::vector<QueryLogRecord> out;
  for (const auto& rec : queries) {
    std::vector<std::string> terms = rec.terms;
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    std::vector<std::size_t> acc;
    bool first = true;
    bool dead = false;
    for (const auto& t : terms) {
      auto it = by_tag.find(t);
      if (it == by_tag.end()) {
        dead = true;
        break;
      }
      if (first) {
        acc = it->second;
        first = false;
      } else {
        std::vector<std::size_t> merged;
        std::set_intersection(acc.begin(), acc.end(), it->second.begin(), it->second.end(),
                              std::back_inserter(merged));
        acc = std::move(merged);
      }
      if (acc.empty()) {
        dead = true;
        break;
      }
    }
    if (!dead && !acc.empty()) out.push_back(rec);
  }
  return out;
}

void GeneratorConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("generator config: " + what); };
  if (tag_popularity_exponent <= 0) fail("tag_popularity_exponent > 0");
  if (tags_per_resource_exponent <= 0) fail("tags_per_resource_exponent > 0");
  if (tags_per_resource_max < 1) fail("tags_per_resource_max >= 1");
  if (n_resources > 0 && n_distinct_tags == 0) fail("n_distinct_tags >= 1");
  if (n_resources > 0 &&
      static_cast<std::uint64_t>(tags_per_resource_max) > n_distinct_tags) {
    fail("tags_per_resource_max <= n_distinct_tags");
  }
  if (actions_per_minute < 0) fail("actions_per_minute >= 0");
  if (delete_fraction < 0 || delete_fraction > 1) fail("delete_fraction in [0, 1]");
  if (n_users == 0) fail("n_users >= 1");
  double total = 0;
  for (const auto& [size, share] : query_term_count_dist) {
    if (size < 1) fail("query term counts >= 1");
    if (share < 0) fail("query_term_count shares >= 0");
    total += share;
  }
  if (n_queries > 0 && total <= 0) fail("query_term_count shares sum > 0");
  for (const auto& [size, beta] : query_key_beta) {
    if (beta <= 1.0) fail("query_key_beta > 1");
  }
}

GeneratorConfig parse_generator_config(const std::string& text) {
  GeneratorConfig cfg;
  bool dist_cleared = false;
  bool beta_cleared = false;
  bool alpha_cleared = false;
  auto parse_size_suffix = [](const std::string& key, const std::string& prefix) {
    return std::stoi(key.substr(prefix.size()));
  };
  for (const auto& [key, value] : parse_kv_text(text)) {
    try {
      if (key == "n_resources") {
        cfg.n_resources = std::stoull(value);
      } else if (key == "n_distinct_tags") {
        cfg.n_distinct_tags = std::stoull(value);
      } else if (key == "tag_popularity_exponent") {
        cfg.tag_popularity_exponent = std::stod(value);
      } else if (key == "tags_per_resource_exponent") {
        cfg.tags_per_resource_exponent = std::stod(value);
      } else if (key == "tags_per_resource_max") {
        cfg.tags_per_resource_max = std::stoi(value);
      } else if (key == "n_queries") {
        cfg.n_queries = std::stoull(value);
      } else if (key == "n_users") {
        cfg.n_users = std::stoull(value);
      } else if (key == "query_key_pool") {
        cfg.query_key_pool = std::stoull(value);
      } else if (key == "actions_per_minute") {
        cfg.actions_per_minute = std::stod(value);
      } else if (key == "delete_fraction") {
        cfg.delete_fraction = std::stod(value);
      } else if (key == "horizon") {
        cfg.horizon = std::stoll(value);
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key.rfind("query_term_count_", 0) == 0) {
        if (!dist_cleared) {
          cfg.query_term_count_dist.clear();
          dist_cleared = true;
        }
        cfg.query_term_count_dist[parse_size_suffix(key, "query_term_count_")] = std::stod(value);
      } else if (key.rfind("query_key_beta_", 0) == 0) {
        if (!beta_cleared) {
          cfg.query_key_beta.clear();
          beta_cleared = true;
        }
        cfg.query_key_beta[parse_size_suffix(key, "query_key_beta_")] = std::stod(value);
      } else if (key.rfind("query_key_alpha_", 0) == 0) {
        if (!alpha_cleared) {
          cfg.query_key_alpha.clear();
          alpha_cleared = true;
        }
        cfg.query_key_alpha[parse_size_suffix(key, "query_key_alpha_")] = std::stod(value);
      } else {
        throw ConfigError("unknown generator config key: " + key);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("bad value for generator config key " + key + ": " + value);
    }
  }
  cfg.validate();
  return cfg;
}

std::string serialize_generator_config(const GeneratorConfig& cfg) {
  std::ostringstream out;
  out << "n_resources = " << cfg.n_resources << '\n'
      << "n_distinct_tags = " << cfg.n_distinct_tags << '\n'
      << "tag_popularity_exponent = " << cfg.tag_popularity_exponent << '\n'
      << "tags_per_resource_exponent = " << cfg.tags_per_resource_exponent << '\n'
      << "tags_per_resource_max = " << cfg.tags_per_resource_max << '\n'
      << "n_queries = " << cfg.n_queries << '\n'
      << "n_users = " << cfg.n_users << '\n'
      << "query_key_pool = " << cfg.query_key_pool << '\n'
      << "actions_per_minute = " << cfg.actions_per_minute << '\n'
      << "delete_fraction = " << cfg.delete_fraction << '\n'
      << "horizon = " << cfg.horizon << '\n'
      << "seed = " << cfg.seed << '\n';
  for (const auto& [size, share] : cfg.query_term_count_dist) {
    out << "query_term_count_" << size << " = " << share << '\n';
  }
  for (const auto& [size, beta] : cfg.query_key_beta) {
    out << "query_key_beta_" << size << " = " << beta << '\n';
  }
  for (const auto& [size, alpha] : cfg.query_key_alpha) {
    out << "query_key_alpha_" << size << " = " << alpha << '\n';
  }
  return out.str();
}

namespace {

/// Inverse-transform sampler over ranks 0..n-1 with weight (r+1)^-exponent.
class DiscretePowerLaw {
 public:
  DiscretePowerLaw(std::size_t n, double exponent) : cdf_(n) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      total += std::pow(static_cast<double>(i + 1), -exponent);
      cdf_[i] = total;
    }
    for (double& v : cdf_) v /= total;
  }

  std::size_t sample(DetRng& rng) const {
    const double u = rng.uniform01();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return it == cdf_.end() ? cdf_.size() - 1 : static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

std::string padded(const char* prefix, std::uint64_t value, int width) {
  std::string digits = std::to_string(value);
  std::string out = prefix;
  for (int i = static_cast<int>(digits.size()); i < width; ++i) out += '0';
  return out + digits;
}

}  // namespace

SyntheticWorkload generate_synthetic(const GeneratorConfig& cfg) {
  cfg.validate();
  SyntheticWorkload out;
  if (cfg.n_resources == 0) return out;

  DetRng rng(cfg.seed);

  // Tag names are assigned to popularity ranks through a shuffle so that
  // lexicographic order carries no popularity signal.
  std::vector<std::string> tag_by_rank(cfg.n_distinct_tags);
  for (std::uint64_t i = 0; i < cfg.n_distinct_tags; ++i) tag_by_rank[i] = padded("t", i + 1, 5);
  for (std::size_t i = tag_by_rank.size(); i > 1; --i) {
    std::swap(tag_by_rank[i - 1], tag_by_rank[rng.uniform_index(i)]);
  }
  DiscretePowerLaw tag_sampler(cfg.n_distinct_tags, cfg.tag_popularity_exponent);
  DiscretePowerLaw count_sampler(static_cast<std::size_t>(cfg.tags_per_resource_max),
                                 cfg.tags_per_resource_exponent);

  std::vector<ResourceId> ids(cfg.n_resources);
  std::vector<std::set<std::string>> tag_sets(cfg.n_resources);
  for (std::uint64_t i = 0; i < cfg.n_resources; ++i) {
    ids[i] = padded("r", i + 1, 6);
    const std::size_t want = count_sampler.sample(rng) + 1;
    std::set<std::string>& tags = tag_sets[i];
    std::size_t attempts = 0;
    while (tags.size() < want && attempts < want * 40) {
      ++attempts;
      tags.insert(tag_by_rank[tag_sampler.sample(rng)]);
    }
    for (std::size_t rank = 0; tags.size() < want && rank < tag_by_rank.size(); ++rank) {
      tags.insert(tag_by_rank[rank]);
    }
  }
  for (std::uint64_t i = 0; i < cfg.n_resources; ++i) {
    for (const auto& tag : tag_sets[i]) {
      out.actions.push_back(TagActionRecord{0, true, ids[i], tag});
    }
  }

  Tick horizon = cfg.horizon;
  if (horizon <= 0) {
    horizon = cfg.n_queries > 0 ? std::max<Tick>(1, static_cast<Tick>(cfg.n_queries / 10)) : 60;
  }

  // Live actions evolve a working copy of the tag sets so deletes always
  // target a tag the resource currently has.
  const std::uint64_t n_actions =
      static_cast<std::uint64_t>(std::llround(cfg.actions_per_minute * static_cast<double>(horizon)));
  std::vector<Tick> action_times(n_actions);
  for (auto& t : action_times) t = rng.uniform_int(1, horizon);
  std::sort(action_times.begin(), action_times.end());
  std::vector<std::set<std::string>> working = tag_sets;
  for (Tick ts : action_times) {
    const bool is_delete = rng.uniform01() < cfg.delete_fraction;
    const std::size_t ri = rng.uniform_index(ids.size());
    std::set<std::string>& tags = working[ri];
    if (is_delete) {
      if (tags.empty()) continue;
      auto it = tags.begin();
      std::advance(it, rng.uniform_index(tags.size()));
      out.actions.push_back(TagActionRecord{ts, false, ids[ri], *it});
      tags.erase(it);
    } else {
      std::string tag;
      for (int tries = 0; tries < 40; ++tries) {
        const std::string& candidate = tag_by_rank[tag_sampler.sample(rng)];
        if (!tags.contains(candidate)) {
          tag = candidate;
          break;
        }
      }
      if (tag.empty()) continue;
      tags.insert(tag);
      out.actions.push_back(TagActionRecord{ts, true, ids[ri], tag});
    }
  }

  if (cfg.n_queries == 0) return out;

  // Candidate key pools per query size, drawn from real tag combinations
  // of the initial corpus so generated queries have non-empty answers.
  std::map<int, std::vector<std::vector<std::string>>> pools;
  for (const auto& [size, share] : cfg.query_term_count_dist) {
    if (share <= 0) continue;
    std::set<std::vector<std::string>> seen;
    std::vector<std::vector<std::string>>& pool = pools[size];
    const std::uint64_t attempts = cfg.query_key_pool * 6;
    for (std::uint64_t a = 0; a < attempts && pool.size() < cfg.query_key_pool; ++a) {
      const std::size_t ri = rng.uniform_index(ids.size());
      const std::set<std::string>& tags = tag_sets[ri];
      if (tags.size() < static_cast<std::size_t>(size)) continue;
      std::vector<std::string> all(tags.begin(), tags.end());
      for (int k = 0; k < size; ++k) {
        std::swap(all[static_cast<std::size_t>(k)],
                  all[static_cast<std::size_t>(k) + rng.uniform_index(all.size() - static_cast<std::size_t>(k))]);
      }
      std::vector<std::string> key(all.begin(), all.begin() + size);
      std::sort(key.begin(), key.end());
      if (seen.insert(key).second) pool.push_back(std::move(key));
    }
    if (pool.empty()) pools.erase(size);
  }
  if (pools.empty()) return out;

  std::vector<int> sizes;
  std::vector<double> size_cdf;
  double total_share = 0;
  for (const auto& [size, share] : cfg.query_term_count_dist) {
    if (share <= 0 || !pools.contains(size)) continue;
    total_share += share;
    sizes.push_back(size);
    size_cdf.push_back(total_share);
  }
  for (double& v : size_cdf) v /= total_share;

  std::map<int, DiscretePowerLaw> rank_samplers;
  for (const auto& [size, pool] : pools) {
    const double beta = cfg.query_key_beta.contains(size) ? cfg.query_key_beta.at(size) : 2.0;
    // Rank-frequency exponent that yields a count histogram ~ f^-beta.
    const double theta = 1.0 / (beta - 1.0);
    rank_samplers.emplace(size, DiscretePowerLaw(pool.size(), theta));
  }

  for (std::uint64_t i = 0; i < cfg.n_queries; ++i) {
    const Tick ts = rng.uniform_int(1, horizon);
    const double u = rng.uniform01();
    std::size_t si = 0;
    while (si + 1 < size_cdf.size() && u > size_cdf[si]) ++si;
    const int size = sizes[si];
    const auto& pool = pools.at(size);
    const std::size_t rank = rank_samplers.at(size).sample(rng);
    const std::string user = padded("u", rng.uniform_index(cfg.n_users) + 1, 4);
    out.queries.push_back(QueryLogRecord{ts, user, pool[rank]});
  }
  std::stable_sort(out.queries.begin(), out.queries.end(),
                   [](const QueryLogRecord& a, const QueryLogRecord& b) { return a.ts < b.ts; });
  std::stable_sort(out.actions.begin(), out.actions.end(),
                   [](const TagActionRecord& a, const TagActionRecord& b) { return a.ts < b.ts; });
  return out;
}

}  // namespace mtindex::workload
