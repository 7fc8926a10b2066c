#include "mtindex/popularity.hpp"

namespace mtindex {

ActionSet classify(const PopularityVector& v, const SystemConfig& cfg, KeyState state,
                   bool cached) {
  ActionSet actions;
  const int pop = v.popcount();
  if (state == KeyState::suspended) {
    if (pop >= cfg.b_res) actions.resume = true;
  } else {
    if (pop <= cfg.b_susp) actions.suspend = true;
    if (!cached && pop >= cfg.c_ins) actions.cache_insert = true;
  }
  if (cached && pop <= cfg.c_del) actions.cache_evict = true;
  return actions;
}

}  // namespace mtindex
