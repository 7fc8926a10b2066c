#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace mtindex {

// FNV-1a. Used for key routing and file digests; must stay stable across
// runs and platforms, so std::hash is not an option here.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

/// Deterministic RNG wrapper. std::uniform_*_distribution is
/// implementation-defined, so all sampling goes through these helpers.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, n), rejection sampled. A single candidate consumes no
  // randomness so tie-free decisions stay independent of rng position.
  std::size_t uniform_index(std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = eng_();
    while (x >= limit) x = eng_();
    return static_cast<std::size_t>(x % n);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {  // inclusive bounds
    return lo + static_cast<std::int64_t>(uniform_index(static_cast<std::size_t>(hi - lo + 1)));
  }

 private:
  std::mt19937_64 eng_;
};

std::vector<std::string> split(std::string_view s, char sep, bool keep_empty = false);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string trim(std::string_view s);

/// Parses a flat `key = value` text file. Blank lines and lines starting
/// with '#' are ignored. Duplicate keys keep the last value.
std::vector<std::pair<std::string, std::string>> parse_kv_text(const std::string& text);

std::string read_file(const std::string& path);           // throws std::runtime_error
void write_file(const std::string& path, std::string_view content);
std::uint64_t file_digest(const std::string& path);       // FNV-1a over raw bytes

}  // namespace mtindex
