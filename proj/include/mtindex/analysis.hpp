#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "mtindex/backend_index.hpp"
#include "mtindex/core.hpp"

namespace mtindex::analysis {

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Number of inverted-list entries induced by a corpus: every resource
/// contributes all subsets of its min(|tags|, t_max) considered tags up to
/// size s_max.
std::uint64_t count_list_entries(const std::vector<std::size_t>& tag_counts, int s_max, int t_max);
std::uint64_t count_list_entries(const std::vector<Resource>& resources, int s_max, int t_max);

/// entry_count * avg_entry_bytes; 73 bytes is the default entry size.
std::uint64_t estimate_storage_bytes(std::uint64_t entry_count, std::uint64_t avg_entry_bytes = 73);

struct PowerLawFit {
  double alpha = 0.0;      // scale
  double beta = 0.0;       // exponent magnitude
  double r_squared = 0.0;  // goodness on the log-log scale
};

/// Least squares on (log x, log y) over strictly positive pairs; requires
/// at least three of them.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

struct ExtentStats {
  std::map<std::size_t, std::size_t> length_histogram;  // list length -> #keys
  std::map<std::size_t, std::size_t> keys_by_size;      // key size -> #keys
  std::size_t total_keys = 0;
  std::optional<double> coverage;  // fraction of keys with length <= l_max
};

ExtentStats extent_stats(const std::map<TagKey, std::size_t>& list_lengths,
                         std::optional<std::size_t> l_max);

/// Live list lengths of the available keys in an index.
std::map<TagKey, std::size_t> index_list_lengths(const BackendIndex& index);

/// List lengths of the fully materialized index a corpus would induce.
std::map<TagKey, std::size_t> full_index_lengths(const std::vector<Resource>& resources,
                                                 int s_max, int t_max);

/// Mean Jaccard overlap between per-query result sets, as a percentage.
/// Two empty results count as full overlap. Throws std::invalid_argument
/// when the query id sets differ.
double result_overlap(const std::map<std::int64_t, std::vector<ResourceId>>& a,
                      const std::map<std::int64_t, std::vector<ResourceId>>& b);

struct TrBoundReport {
  std::uint64_t published_bound = 0;  // r_max * (s^2 + 3s)
  std::uint64_t derived_bound = 0;    // r_max * (s^2 + 3s) / 2
  bool within_published = false;
  bool within_derived = false;
};

TrBoundReport tr_bound_check(int s, std::uint64_t r_max, std::uint64_t measured_tr);

}  // namespace mtindex::analysis
