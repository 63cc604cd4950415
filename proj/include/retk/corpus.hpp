#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "retk/common.hpp"

namespace retk {

inline constexpr std::string_view kNoRelationSentinel = "no_relation";

// Entity type label, normalized to uppercase on construction.
struct EntityType {
  std::string name;

  EntityType() = default;
  explicit EntityType(std::string_view raw) : name(upper_ascii(raw)) {}

  bool operator==(const EntityType&) const = default;
  auto operator<=>(const EntityType&) const = default;
};

// The eight types appearing in the default entity-pair key set.
const std::vector<EntityType>& default_entity_types();

// Half-open token interval [start, end) tagged with an entity type.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  EntityType etype;

  std::size_t size() const { return end > start ? end - start : 0; }
  bool operator==(const EntitySpan&) const = default;
};

struct RelationLabel {
  std::string name;

  RelationLabel() = default;
  explicit RelationLabel(std::string_view n) : name(n) {}

  // True iff the name matches the NO_RELATION sentinel (case-insensitive).
  bool is_no_relation(std::string_view sentinel = kNoRelationSentinel) const {
    return iequals_ascii(name, sentinel);
  }

  bool operator==(const RelationLabel&) const = default;
  auto operator<=>(const RelationLabel&) const = default;
};

// One sentence with a subject/object entity pair and an optional gold
// relation (absent for unlabeled inference input).
struct TokenizedInstance {
  std::string id;
  std::vector<std::string> tokens;
  EntitySpan subj;
  EntitySpan obj;
  std::optional<RelationLabel> relation;

  bool operator==(const TokenizedInstance&) const = default;
};

// Maps an external record layout onto TokenizedInstance fields. Defaults
// follow the interchange convention (e1 = subject, e2 = object).
struct FieldMapping {
  std::string id_key = "id";
  std::string tokens_key = "token";
  std::string subj_start_key = "e1_start";
  std::string subj_end_key = "e1_end";
  std::string subj_type_key = "e1_type";
  std::string obj_start_key = "e2_start";
  std::string obj_end_key = "e2_end";
  std::string obj_type_key = "e2_type";
  std::string relation_key = "rel_group";

  // Source files that encode spans with inclusive end indices.
  bool inclusive_end = false;

  // Throws DataError unless all mapped keys are distinct and non-empty.
  void validate() const;
};

// Parses a field mapping from a flat JSON object; unknown keys rejected.
FieldMapping field_mapping_from_json(const std::string& json_text);

struct Violation {
  std::string field;    // "tokens", "subj", "obj", "spans"
  std::string message;  // e.g. "span out of range"

  bool operator==(const Violation&) const = default;
};

// Lists every violated instance invariant; an empty result means ok.
std::vector<Violation> validate_instance(const TokenizedInstance& inst);

enum class ParseMode { kStrict, kLenient };

struct SkippedRecord {
  std::size_t line = 0;
  std::string reason;
};

struct ParseResult {
  std::vector<TokenizedInstance> instances;
  // Value of the optional "scheme" record annotation, parallel to instances
  // (stamped by the preprocess stage, absent on raw corpora).
  std::vector<std::optional<std::string>> schemes;
  std::vector<SkippedRecord> skipped;  // lenient mode only
};

// Reads line-delimited records. Strict mode throws DataError carrying the
// line number on the first bad record; lenient mode records skips instead.
ParseResult parse_dataset(std::istream& in, const FieldMapping& mapping,
                          ParseMode mode = ParseMode::kStrict,
                          std::string_view source_name = "<input>");
ParseResult parse_dataset_file(const std::string& path,
                               const FieldMapping& mapping,
                               ParseMode mode = ParseMode::kStrict);

// Writes instances in the interchange format. When scheme_annotation is
// set every record carries a "scheme" key with that value.
void serialize_dataset(
    const std::vector<TokenizedInstance>& instances,
    const FieldMapping& mapping, std::ostream& out,
    const std::optional<std::string>& scheme_annotation = std::nullopt);
std::string serialize_dataset_to_string(
    const std::vector<TokenizedInstance>& instances,
    const FieldMapping& mapping,
    const std::optional<std::string>& scheme_annotation = std::nullopt);

// Canonical "SUBJ-OBJ" rendering used by pair histograms and routing keys.
std::string pair_key_string(const EntityType& subj_type,
                            const EntityType& obj_type);

struct DatasetStats {
  std::size_t instance_count = 0;
  std::map<std::string, std::size_t> relation_histogram;
  std::map<std::string, std::size_t> pair_histogram;
  double no_relation_fraction = 0.0;
  double mean_sentence_length = 0.0;
  double mean_entity_distance = 0.0;  // tokens strictly between the spans
};

// All instances must carry gold relations; empty input is an error.
DatasetStats compute_stats(
    const std::vector<TokenizedInstance>& instances,
    std::string_view no_relation_sentinel = kNoRelationSentinel);

// Ordered label set; the sentinel is flagged with a leading '!' in files
// and otherwise detected by case-insensitive match on "no_relation".
struct LabelVocabulary {
  std::vector<RelationLabel> labels;
  std::optional<std::size_t> sentinel_index;

  std::optional<std::size_t> index_of(std::string_view name) const;
  RelationLabel no_relation() const {
    return sentinel_index ? labels[*sentinel_index]
                          : RelationLabel(std::string(kNoRelationSentinel));
  }
};

LabelVocabulary load_label_vocabulary(std::istream& in,
                                      std::string_view source_name = "<labels>");
LabelVocabulary load_label_vocabulary_file(const std::string& path);

// Sorted distinct labels observed in data, sentinel auto-detected.
LabelVocabulary vocabulary_from_labels(const std::vector<RelationLabel>& seen);

}  // namespace retk
