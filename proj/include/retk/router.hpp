#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "retk/classifier.hpp"
#include "retk/corpus.hpp"

namespace retk {

// Ordered (subject-type, object-type) pair; direction-sensitive, so
// PERS-ORG and ORG-PERS are distinct keys.
struct EntityPairKey {
  EntityType subj_type;
  EntityType obj_type;

  std::string str() const { return subj_type.name + "-" + obj_type.name; }
  auto operator<=>(const EntityPairKey&) const = default;
};

// The eight pairs the corpus annotates relations over.
std::vector<EntityPairKey> default_pair_keyset();

EntityPairKey pair_key(const TokenizedInstance& inst);

// One pair-key per non-empty line, e.g. "PERS-TITLE".
std::vector<EntityPairKey> load_pair_keyset(const std::string& text,
                                            std::string_view source_name);
std::vector<EntityPairKey> load_pair_keyset_file(const std::string& path);

struct Partition {
  std::vector<EntityPairKey> keyset;  // configured order
  std::map<EntityPairKey, std::vector<TokenizedInstance>> buckets;
  std::vector<TokenizedInstance> residual;

  std::size_t total_size() const;
};

// Routes each instance to its pair's bucket, or to the residual bucket for
// pairs outside the keyset. Bucket order preserves input order. Configured
// keys that match no instance still appear, empty.
Partition partition_dataset(const std::vector<TokenizedInstance>& instances,
                            const std::vector<EntityPairKey>& keyset);

// Flattens per-bucket predictions back into reference order. Every
// reference id must be predicted exactly once.
std::vector<PredictionRecord> merge_predictions(
    const std::map<EntityPairKey, std::vector<PredictionRecord>>& per_bucket,
    const std::vector<std::string>& reference_ids);

// Same contract for anonymous groups (e.g. buckets plus the residual).
std::vector<PredictionRecord> merge_prediction_groups(
    const std::vector<std::vector<PredictionRecord>>& groups,
    const std::vector<std::string>& reference_ids);

}  // namespace retk
