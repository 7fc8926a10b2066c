#pragma once

#include <bit>
#include <cstdint>

#include "mtindex/core.hpp"

namespace mtindex {

/// Fixed-length bit vector encoding a key's recent request history.
/// Bit (length-1) is the most recent slot; a request shifts right and
/// sets that bit, a decay tick only shifts.
class PopularityVector {
 public:
  PopularityVector() = default;
  explicit PopularityVector(int length, std::uint64_t bits = 0)
      : length_(length), bits_(bits & mask()) {}

  int length() const { return length_; }
  std::uint64_t bits() const { return bits_; }

  [[nodiscard]] PopularityVector after_request() const {
    return PopularityVector(length_, (bits_ >> 1) | (std::uint64_t{1} << (length_ - 1)));
  }

  [[nodiscard]] PopularityVector after_decay() const {
    return PopularityVector(length_, bits_ >> 1);
  }

  int popcount() const { return std::popcount(bits_); }

  bool operator==(const PopularityVector&) const = default;

 private:
  std::uint64_t mask() const {
    return length_ >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << length_) - 1;
  }

  int length_ = 1;
  std::uint64_t bits_ = 0;
};

enum class KeyState { available, suspended };

struct ActionSet {
  bool resume = false;
  bool suspend = false;
  bool cache_insert = false;
  bool cache_evict = false;

  bool none() const { return !resume && !suspend && !cache_insert && !cache_evict; }
  bool operator==(const ActionSet&) const = default;
};

/// Threshold classification. Pure; the caller decides applicability
/// (single-term keys are never suspended or resumed).
ActionSet classify(const PopularityVector& v, const SystemConfig& cfg, KeyState state,
                   bool cached);

}  // namespace mtindex
