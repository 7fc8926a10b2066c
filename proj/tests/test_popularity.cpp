#include <doctest.h>

#include "mtindex/popularity.hpp"

using namespace mtindex;

namespace {

// "1100" with length 4 means bits 3 and 2 set (index 0 = most recent slot).
PopularityVector vec(const std::string& pattern) {
  const int n = static_cast<int>(pattern.size());
  std::uint64_t bits = 0;
  for (int i = 0; i < n; ++i) {
    if (pattern[static_cast<std::size_t>(i)] == '1') bits |= std::uint64_t{1} << (n - 1 - i);
  }
  return PopularityVector(n, bits);
}

SystemConfig small_config() {
  SystemConfig cfg;
  cfg.ell = 4;
  cfg.b_res = 2;
  cfg.b_susp = 0;
  cfg.c_ins = 4;
  cfg.c_del = 0;
  cfg.validate();
  return cfg;
}

}  // namespace

TEST_CASE("record_request shifts right and sets the most recent bit") {
  CHECK(vec("0000").after_request() == vec("1000"));
  CHECK(vec("1000").after_request() == vec("1100"));
  CHECK(vec("0001").after_request() == vec("1000"));
}

TEST_CASE("decay shifts right") {
  CHECK(vec("1100").after_decay() == vec("0110"));
  CHECK(vec("0000").after_decay() == vec("0000"));
  CHECK(vec("0001").after_decay() == vec("0000"));
}

TEST_CASE("popcount counts set bits") {
  CHECK(vec("0110").popcount() == 2);
  CHECK(vec("0000").popcount() == 0);
  CHECK(vec("1111").popcount() == 4);
}

TEST_CASE("request then decay on the empty vector gives the shifted single bit") {
  CHECK(vec("0000").after_request().after_decay() == vec("0100"));
}

TEST_CASE("length consecutive decays always clear the vector") {
  DetRng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_index(64));
    PopularityVector v(n, rng.next_u64());
    for (int i = 0; i < n; ++i) v = v.after_decay();
    CHECK(v.popcount() == 0);
  }
}

TEST_CASE("classify applies the threshold rules") {
  const SystemConfig cfg = small_config();

  // two requests on a fresh vector: 0000 -> 1000 -> 1100, popcount 2
  PopularityVector v = PopularityVector(4).after_request().after_request();
  CHECK(v == vec("1100"));
  ActionSet a = classify(v, cfg, KeyState::suspended, false);
  CHECK(a.resume);
  CHECK_FALSE(a.suspend);

  a = classify(vec("0000"), cfg, KeyState::available, false);
  CHECK(a.suspend);
  CHECK_FALSE(a.resume);

  a = classify(vec("1111"), cfg, KeyState::available, false);
  CHECK(a.cache_insert);

  a = classify(vec("0000"), cfg, KeyState::available, true);
  CHECK(a.cache_evict);
}

TEST_CASE("classify never resumes below b_res and never caches suspended keys") {
  const SystemConfig cfg = small_config();
  DetRng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    PopularityVector v(4, rng.next_u64() & 0xf);
    ActionSet sus = classify(v, cfg, KeyState::suspended, false);
    if (v.popcount() < cfg.b_res) CHECK_FALSE(sus.resume);
    CHECK_FALSE(sus.cache_insert);
    CHECK_FALSE(sus.suspend);

    ActionSet avail = classify(v, cfg, KeyState::available, false);
    CHECK_FALSE(avail.resume);
    const bool both = avail.resume && avail.suspend;
    CHECK_FALSE(both);
  }
}
