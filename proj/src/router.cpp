#include "retk/router.hpp"

#include <sstream>
#include <unordered_map>

#include "retk/common.hpp"

namespace retk {

std::vector<EntityPairKey> default_pair_keyset() {
  return {
      {EntityType{"ORG"}, EntityType{"GPE"}},
      {EntityType{"ORG"}, EntityType{"ORG"}},
      {EntityType{"PERS"}, EntityType{"TITLE"}},
      {EntityType{"ORG"}, EntityType{"DATE"}},
      {EntityType{"PERS"}, EntityType{"ORG"}},
      {EntityType{"ORG"}, EntityType{"MONEY"}},
      {EntityType{"PERS"}, EntityType{"UNIV"}},
      {EntityType{"PERS"}, EntityType{"GOV_AGY"}},
  };
}

EntityPairKey pair_key(const TokenizedInstance& inst) {
  return {inst.subj.etype, inst.obj.etype};
}

std::vector<EntityPairKey> load_pair_keyset(const std::string& text,
                                            std::string_view source_name) {
  std::vector<EntityPairKey> keys;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t dash = line.find('-');
    if (dash == 0 || dash == std::string::npos || dash + 1 == line.size())
      throw DataError(std::string(source_name) + " line " +
                      std::to_string(lineno) + ": bad pair key '" + line +
                      "' (expected SUBJ-OBJ)");
    EntityPairKey key{EntityType{line.substr(0, dash)},
                      EntityType{line.substr(dash + 1)}};
    for (const auto& k : keys)
      if (k == key)
        throw DataError(std::string(source_name) + " line " +
                        std::to_string(lineno) + ": duplicate pair key '" +
                        key.str() + "'");
    keys.push_back(std::move(key));
  }
  if (keys.empty())
    throw DataError(std::string(source_name) + ": no pair keys");
  return keys;
}

std::vector<EntityPairKey> load_pair_keyset_file(const std::string& path) {
  return load_pair_keyset(read_file(path), path);
}

std::size_t Partition::total_size() const {
  std::size_t n = residual.size();
  for (const auto& [key, bucket] : buckets) n += bucket.size();
  return n;
}

Partition partition_dataset(const std::vector<TokenizedInstance>& instances,
                            const std::vector<EntityPairKey>& keyset) {
  Partition part;
  part.keyset = keyset;
  for (const auto& key : keyset) part.buckets[key];  // keep empty keys visible
  for (const auto& inst : instances) {
    auto it = part.buckets.find(pair_key(inst));
    if (it != part.buckets.end())
      it->second.push_back(inst);
    else
      part.residual.push_back(inst);
  }
  return part;
}

std::vector<PredictionRecord> merge_prediction_groups(
    const std::vector<std::vector<PredictionRecord>>& groups,
    const std::vector<std::string>& reference_ids) {
  std::unordered_map<std::string, const PredictionRecord*> by_id;
  by_id.reserve(reference_ids.size());
  for (const auto& group : groups) {
    for (const auto& rec : group) {
      if (!by_id.emplace(rec.id, &rec).second)
        throw DataError("duplicate prediction for id '" + rec.id + "'");
    }
  }
  std::vector<PredictionRecord> merged;
  merged.reserve(reference_ids.size());
  std::size_t used = 0;
  for (const auto& id : reference_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw DataError("missing prediction for id '" + id + "'");
    merged.push_back(*it->second);
    used++;
  }
  if (used != by_id.size()) {
    // some predicted id is not in the reference set; name one
    std::unordered_map<std::string, bool> ref;
    for (const auto& id : reference_ids) ref[id] = true;
    for (const auto& [id, rec] : by_id)
      if (!ref.count(id))
        throw DataError("unknown prediction id '" + id + "'");
  }
  return merged;
}

std::vector<PredictionRecord> merge_predictions(
    const std::map<EntityPairKey, std::vector<PredictionRecord>>& per_bucket,
    const std::vector<std::string>& reference_ids) {
  std::vector<std::vector<PredictionRecord>> groups;
  groups.reserve(per_bucket.size());
  for (const auto& [key, records] : per_bucket) groups.push_back(records);
  return merge_prediction_groups(groups, reference_ids);
}

}  // namespace retk
