#include "mtindex/backend_index.hpp"

#include <algorithm>
#include <sstream>

namespace mtindex {

std::vector<ResourceId> intersect_sorted(const std::vector<ResourceId>& a,
                                         const std::vector<ResourceId>& b) {
  std::vector<ResourceId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

KeyRecord& BackendIndex::touch(const TagKey& key) {
  auto it = keys_.find(key);
  if (it != keys_.end()) return it->second;
  KeyRecord rec;
  rec.pop = PopularityVector(ell_);
  if (key.single()) {
    rec.state = KeyState::available;
    rec.list = PostingList{};
  } else {
    rec.state = KeyState::suspended;
  }
  return keys_.emplace(key, std::move(rec)).first->second;
}

const KeyRecord* BackendIndex::find(const TagKey& key) const {
  auto it = keys_.find(key);
  return it == keys_.end() ? nullptr : &it->second;
}

KeyRecord* BackendIndex::find(const TagKey& key) {
  auto it = keys_.find(key);
  return it == keys_.end() ? nullptr : &it->second;
}

void BackendIndex::record_request(const TagKey& key) {
  KeyRecord& rec = touch(key);
  rec.pop = rec.pop.after_request();
}

ApplyResult BackendIndex::apply_tag_action(const std::string& term, const ResourceId& resource,
                                           TagAction action, Tick now) {
  KeyRecord& rec = touch(term_key(term));
  PostingList& list = *rec.list;
  ApplyResult result;
  auto it = list.entries.find(resource);
  if (action == TagAction::add) {
    if (it == list.entries.end()) {
      list.entries.emplace(resource, PostingEntry{now, false});
      result.changed = true;
    } else if (it->second.deleted) {
      it->second.deleted = false;  // tombstoned entry comes back live
      it->second.ts = now;
      result.changed = true;
    }
    // re-add of a live resource is a no-op
  } else {
    if (it == list.entries.end()) {
      result.absent_delete = true;
    } else if (!it->second.deleted) {
      it->second.deleted = true;
      it->second.ts = now;
      result.changed = true;
    }
  }
  return result;
}

std::optional<std::size_t> BackendIndex::result_size(const TagKey& key) const {
  const KeyRecord* rec = find(key);
  if (rec == nullptr || !rec->available()) return std::nullopt;
  return rec->list->live_size();
}

std::vector<ResourceId> BackendIndex::inverted_list(const TagKey& key) const {
  const KeyRecord* rec = find(key);
  if (rec == nullptr || !rec->available()) {
    throw KeyUnavailable("key unavailable: " + key.label());
  }
  return rec->list->live();
}

void BackendIndex::suspend_key(const TagKey& key) {
  if (key.single()) throw Forbidden("single-term keys are never suspended: " + key.label());
  KeyRecord& rec = touch(key);
  rec.state = KeyState::suspended;
  rec.list.reset();
}

void BackendIndex::install_list(const TagKey& key, std::vector<ResourceId> live, Tick now) {
  KeyRecord& rec = touch(key);
  PostingList list;
  for (auto& r : live) list.entries.emplace(std::move(r), PostingEntry{now, false});
  list.last_update_ts = now;
  rec.list = std::move(list);
  rec.state = KeyState::available;
}

std::size_t BackendIndex::gc_tombstones(Tick now, Tick delta_update) {
  std::size_t removed = 0;
  for (auto& [key, rec] : keys_) {
    if (!rec.list) continue;
    auto& entries = rec.list->entries;
    for (auto it = entries.begin(); it != entries.end();) {
      if (it->second.deleted && now - it->second.ts >= delta_update) {
        it = entries.erase(it);
        ++removed;
      } else {
        ++it;
      }
    }
  }
  return removed;
}

DeltaSet BackendIndex::compute_delta(const TagKey& single_key, Tick reference_ts) const {
  const KeyRecord* rec = find(single_key);
  if (rec == nullptr || !rec->available() || !single_key.single()) {
    throw Forbidden("compute_delta requires an available single-term key");
  }
  DeltaSet delta;
  delta.reference_ts = reference_ts;
  for (const auto& [r, entry] : rec->list->entries) {
    if (entry.ts <= reference_ts) continue;
    if (entry.deleted) {
      delta.dels.push_back(r);
    } else {
      delta.adds.push_back(r);
    }
  }
  return delta;  // map order keeps both sides sorted
}

std::string BackendIndex::snapshot() const {
  std::ostringstream out;
  for (const auto& [key, rec] : keys_) {
    out << key.label() << '\t' << (rec.available() ? "available" : "suspended") << '\t'
        << (rec.list ? rec.list->last_update_ts : 0) << '\t';
    if (rec.list) {
      bool first = true;
      for (const auto& [r, entry] : rec.list->entries) {
        if (!first) out << ',';
        first = false;
        out << r << ':' << entry.ts;
        if (entry.deleted) out << ":D";
      }
    }
    out << '\n';
  }
  return out.str();
}

namespace {

std::vector<TagKey> constituents(const TagKey& key) {
  std::vector<TagKey> out;
  out.reserve(key.size());
  for (const auto& term : key.terms()) out.push_back(term_key(term));
  return out;
}

bool live_member(const BackendIndex& index, const TagKey& single, const ResourceId& r) {
  const KeyRecord* rec = index.find(single);
  if (rec == nullptr || !rec->list) return false;
  auto it = rec->list->entries.find(r);
  return it != rec->list->entries.end() && !it->second.deleted;
}

}  // namespace

void resume_key(BackendIndex& index, MetricsLedger& ledger, const TagKey& key, Tick now) {
  if (key.single()) throw Forbidden("resume applies to multi-term keys only");
  const std::string home = key_node_id(key);

  // Query restricted to the constituent single-term keys: probe sizes,
  // then chain in ascending list-size order.
  std::vector<std::pair<std::size_t, TagKey>> order;
  for (const TagKey& single : constituents(key)) {
    index.touch(single);
    ledger.record_key_access(Cause::resume, AccessKind::probe);
    ledger.account_message(home, key_node_id(single), 0, Cause::resume);
    order.emplace_back(*index.result_size(single), single);
  }
  std::sort(order.begin(), order.end());

  std::vector<ResourceId> result;
  std::string at = home;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const TagKey& single = order[i].second;
    const std::string node = key_node_id(single);
    ledger.account_message(at, node, i == 0 ? 0 : result.size(), Cause::resume);
    ledger.record_key_access(Cause::resume, AccessKind::read);
    std::vector<ResourceId> list = index.inverted_list(single);
    ledger.record_local_io(node, list.size(), Cause::resume);
    result = (i == 0) ? std::move(list) : intersect_sorted(result, list);
    at = node;
    if (result.empty() && i + 1 < order.size()) {
      // Remaining constituents cannot grow an empty intersection.
      break;
    }
  }
  ledger.account_message(at, home, result.size(), Cause::resume);
  ledger.record_key_access(Cause::resume, AccessKind::write);
  ledger.record_local_io(home, result.size(), Cause::resume);
  index.install_list(key, std::move(result), now);
}

DeltaSet incremental_update(BackendIndex& index, MetricsLedger& ledger, const TagKey& key,
                            Tick now) {
  KeyRecord* rec = index.find(key);
  if (rec == nullptr || !rec->available() || key.single()) {
    throw Forbidden("incremental update requires an available multi-term key");
  }
  const Tick reference_ts = rec->list->last_update_ts;
  const std::vector<TagKey> singles = constituents(key);
  for (const TagKey& single : singles) {
    const KeyRecord* srec = index.find(single);
    if (srec == nullptr || !srec->available()) {
      throw KeyUnavailable("constituent unavailable: " + single.label());
    }
  }

  const std::string home = key_node_id(key);
  struct Candidate {
    ResourceId resource;
    std::size_t origin;  // chain position (1-based) that contributed it
  };
  std::vector<Candidate> adds;
  std::vector<ResourceId> dels;
  auto payload = [&]() { return adds.size() + dels.size(); };

  // Forward pass over constituents in lexicographic (= key term) order.
  std::string at = home;
  for (std::size_t pos = 1; pos <= singles.size(); ++pos) {
    const TagKey& single = singles[pos - 1];
    const std::string node = key_node_id(single);
    ledger.account_message(at, node, pos == 1 ? 0 : payload(), Cause::incremental_update);
    ledger.record_key_access(Cause::incremental_update, AccessKind::read);

    // Candidates collected earlier must be live here as well.
    std::erase_if(adds, [&](const Candidate& c) {
      return c.origin != pos && !live_member(index, single, c.resource);
    });

    DeltaSet local = index.compute_delta(single, reference_ts);
    ledger.record_local_io(node, local.size(), Cause::incremental_update);
    for (const auto& r : local.adds) {
      bool known = std::any_of(adds.begin(), adds.end(),
                               [&](const Candidate& c) { return c.resource == r; });
      if (!known) adds.push_back(Candidate{r, pos});
    }
    for (const auto& r : local.dels) {
      if (!std::binary_search(dels.begin(), dels.end(), r)) {
        dels.insert(std::upper_bound(dels.begin(), dels.end(), r), r);
      }
    }
    at = node;
  }

  // Backward pass: a candidate from position j still needs membership
  // checks at positions j-1..1.
  auto max_origin = [&]() {
    std::size_t m = 1;
    for (const Candidate& c : adds) m = std::max(m, c.origin);
    return m;
  };
  std::size_t pos = max_origin();
  while (pos > 1) {
    const std::size_t check = pos - 1;
    const TagKey& single = singles[check - 1];
    const std::string node = key_node_id(single);
    ledger.account_message(at, node, payload(), Cause::incremental_update);
    ledger.record_key_access(Cause::incremental_update, AccessKind::probe);
    ledger.record_local_io(node, adds.size(), Cause::incremental_update);
    std::erase_if(adds, [&](const Candidate& c) {
      return c.origin > check && !live_member(index, single, c.resource);
    });
    at = node;
    pos = std::min(check, max_origin());
  }

  ledger.account_message(at, home, payload(), Cause::incremental_update);
  ledger.record_key_access(Cause::incremental_update, AccessKind::write);

  // Apply at the multi-term key: deletes are remove-if-present, verified
  // candidates are inserted.
  DeltaSet applied;
  applied.reference_ts = reference_ts;
  PostingList& list = *rec->list;
  for (const auto& r : dels) {
    if (list.entries.erase(r) > 0) applied.dels.push_back(r);
  }
  for (const Candidate& c : adds) {
    if (list.entries.emplace(c.resource, PostingEntry{now, false}).second) {
      applied.adds.push_back(c.resource);
    }
  }
  std::sort(applied.adds.begin(), applied.adds.end());
  list.last_update_ts = now;
  ledger.record_local_io(home, applied.size(), Cause::incremental_update);
  return applied;
}

}  // namespace mtindex
