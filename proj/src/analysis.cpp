#include "mtindex/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace mtindex::analysis {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
  }
  return result;
}

std::uint64_t count_list_entries(const std::vector<std::size_t>& tag_counts, int s_max,
                                 int t_max) {
  std::uint64_t total = 0;
  for (std::size_t count : tag_counts) {
    const std::uint64_t considered = std::min<std::uint64_t>(count, static_cast<std::uint64_t>(t_max));
    const std::uint64_t max_size = std::min<std::uint64_t>(considered, static_cast<std::uint64_t>(s_max));
    for (std::uint64_t i = 1; i <= max_size; ++i) total += binomial(considered, i);
  }
  return total;
}

std::uint64_t count_list_entries(const std::vector<Resource>& resources, int s_max, int t_max) {
  std::vector<std::size_t> counts;
  counts.reserve(resources.size());
  for (const auto& r : resources) counts.push_back(r.tags.size());
  return count_list_entries(counts, s_max, t_max);
}

std::uint64_t estimate_storage_bytes(std::uint64_t entry_count, std::uint64_t avg_entry_bytes) {
  return entry_count * avg_entry_bytes;
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
  std::vector<std::pair<double, double>> logs;
  for (const auto& [x, y] : points) {
    if (x > 0 && y > 0) logs.emplace_back(std::log(x), std::log(y));
  }
  if (logs.size() < 3) throw InsufficientData("power-law fit needs >= 3 positive points");

  double mx = 0, my = 0;
  for (const auto& [lx, ly] : logs) {
    mx += lx;
    my += ly;
  }
  mx /= static_cast<double>(logs.size());
  my /= static_cast<double>(logs.size());

  double sxx = 0, sxy = 0;
  for (const auto& [lx, ly] : logs) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
  }
  if (sxx == 0) throw InsufficientData("power-law fit needs distinct x values");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;

  double ss_res = 0, ss_tot = 0;
  for (const auto& [lx, ly] : logs) {
    const double pred = intercept + slope * lx;
    ss_res += (ly - pred) * (ly - pred);
    ss_tot += (ly - my) * (ly - my);
  }

  PowerLawFit fit;
  fit.alpha = std::exp(intercept);
  fit.beta = std::fabs(slope);
  fit.r_squared = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

ExtentStats extent_stats(const std::map<TagKey, std::size_t>& list_lengths,
                         std::optional<std::size_t> l_max) {
  ExtentStats stats;
  stats.total_keys = list_lengths.size();
  std::size_t within = 0;
  for (const auto& [key, length] : list_lengths) {
    stats.length_histogram[length] += 1;
    stats.keys_by_size[key.size()] += 1;
    if (l_max && length <= *l_max) ++within;
  }
  if (l_max && stats.total_keys > 0) {
    stats.coverage = static_cast<double>(within) / static_cast<double>(stats.total_keys);
  } else if (l_max) {
    stats.coverage = 1.0;
  }
  return stats;
}

std::map<TagKey, std::size_t> index_list_lengths(const BackendIndex& index) {
  std::map<TagKey, std::size_t> out;
  for (const auto& [key, rec] : index.keys()) {
    if (rec.available()) out[key] = rec.list->live_size();
  }
  return out;
}

std::map<TagKey, std::size_t> full_index_lengths(const std::vector<Resource>& resources, int s_max,
                                                 int t_max) {
  std::map<TagKey, std::size_t> out;
  std::vector<std::string> current;
  for (const auto& res : resources) {
    const std::set<std::string> considered = derive_considered_tags(res.tags, t_max);
    std::vector<std::string> tags(considered.begin(), considered.end());
    const std::size_t max_size = std::min<std::size_t>(static_cast<std::size_t>(s_max), tags.size());
    auto rec = [&](auto&& self, std::size_t start) -> void {
      for (std::size_t i = start; i < tags.size(); ++i) {
        current.push_back(tags[i]);
        out[canonicalize_key(current, s_max)] += 1;
        if (current.size() < max_size) self(self, i + 1);
        current.pop_back();
      }
    };
    if (max_size > 0) rec(rec, 0);
  }
  return out;
}

double result_overlap(const std::map<std::int64_t, std::vector<ResourceId>>& a,
                      const std::map<std::int64_t, std::vector<ResourceId>>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("result sets cover different queries");
  double total = 0;
  for (const auto& [id, ra] : a) {
    auto it = b.find(id);
    if (it == b.end()) throw std::invalid_argument("result sets cover different queries");
    const auto& rb = it->second;
    if (ra.empty() && rb.empty()) {
      total += 1.0;
      continue;
    }
    std::vector<ResourceId> inter;
    std::set_intersection(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(inter));
    const std::size_t uni = ra.size() + rb.size() - inter.size();
    total += static_cast<double>(inter.size()) / static_cast<double>(uni);
  }
  return a.empty() ? 100.0 : 100.0 * total / static_cast<double>(a.size());
}

TrBoundReport tr_bound_check(int s, std::uint64_t r_max, std::uint64_t measured_tr) {
  if (s < 2) throw std::invalid_argument("tr_bound_check requires s >= 2");
  TrBoundReport report;
  const std::uint64_t su = static_cast<std::uint64_t>(s);
  report.published_bound = r_max * (su * su + 3 * su);
  report.derived_bound = r_max * (su * su + 3 * su) / 2;
  report.within_published = measured_tr <= report.published_bound;
  report.within_derived = measured_tr <= report.derived_bound;
  return report;
}

}  // namespace mtindex::analysis
