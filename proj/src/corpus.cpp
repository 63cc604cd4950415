#include "retk/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace retk {

using nlohmann::json;

const std::vector<EntityType>& default_entity_types() {
  static const std::vector<EntityType> kTypes = {
      EntityType("ORG"),  EntityType("GPE"),   EntityType("PERS"),
      EntityType("TITLE"), EntityType("DATE"), EntityType("MONEY"),
      EntityType("UNIV"), EntityType("GOV_AGY")};
  return kTypes;
}

void FieldMapping::validate() const {
  const std::string* keys[] = {&id_key,        &tokens_key,   &subj_start_key,
                               &subj_end_key,  &subj_type_key, &obj_start_key,
                               &obj_end_key,   &obj_type_key, &relation_key};
  std::set<std::string> seen;
  for (const std::string* k : keys) {
    if (k->empty()) throw DataError("field mapping contains an empty key");
    if (!seen.insert(*k).second)
      throw DataError("field mapping key used twice: '" + *k + "'");
  }
}

FieldMapping field_mapping_from_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed field mapping: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("field mapping must be a JSON object");

  FieldMapping m;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& k = it.key();
    if (k == "inclusive_end") {
      if (!it.value().is_boolean())
        throw DataError("field mapping: inclusive_end must be a boolean");
      m.inclusive_end = it.value().get<bool>();
      continue;
    }
    if (!it.value().is_string())
      throw DataError("field mapping: value for '" + k + "' must be a string");
    const std::string v = it.value().get<std::string>();
    if (k == "id") m.id_key = v;
    else if (k == "token") m.tokens_key = v;
    else if (k == "e1_start") m.subj_start_key = v;
    else if (k == "e1_end") m.subj_end_key = v;
    else if (k == "e1_type") m.subj_type_key = v;
    else if (k == "e2_start") m.obj_start_key = v;
    else if (k == "e2_end") m.obj_end_key = v;
    else if (k == "e2_type") m.obj_type_key = v;
    else if (k == "rel_group") m.relation_key = v;
    else throw DataError("field mapping: unknown field '" + k + "'");
  }
  m.validate();
  return m;
}

std::vector<Violation> validate_instance(const TokenizedInstance& inst) {
  std::vector<Violation> out;
  const std::size_t n = inst.tokens.size();
  if (n == 0) out.push_back({"tokens", "empty token sequence"});

  auto check_span = [&](const EntitySpan& s, const std::string& field) {
    bool ok = true;
    if (s.start >= s.end) {
      out.push_back({field, "empty span"});
      ok = false;
    }
    if (s.end > n) {
      out.push_back({field, "span out of range"});
      ok = false;
    }
    if (s.etype.name.empty())
      out.push_back({field, "empty entity type"});
    else if (contains_whitespace(s.etype.name))
      out.push_back({field, "entity type contains whitespace"});
    return ok;
  };

  bool subj_ok = check_span(inst.subj, "subj");
  bool obj_ok = check_span(inst.obj, "obj");
  if (subj_ok && obj_ok &&
      inst.subj.start < inst.obj.end && inst.obj.start < inst.subj.end)
    out.push_back({"spans", "overlapping spans"});
  return out;
}

namespace {

std::string location(std::string_view source, std::size_t line) {
  return std::string(source) + " line " + std::to_string(line);
}

const json& require_key(const json& rec, const std::string& key,
                        std::string_view source, std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end())
    throw DataError(location(source, line) + ": missing key '" + key + "'");
  return *it;
}

std::size_t parse_index(const json& v, const std::string& key,
                        std::string_view source, std::size_t line) {
  if (v.is_number_integer()) {
    long long raw = v.get<long long>();
    if (raw < 0)
      throw DataError(location(source, line) + ": key '" + key +
                      "': span out of range (negative index)");
    return static_cast<std::size_t>(raw);
  }
  throw DataError(location(source, line) + ": key '" + key +
                  "' must be an integer");
}

std::string parse_id(const json& v, std::string_view source,
                     std::size_t line) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw DataError(location(source, line) + ": id must be a string");
}

TokenizedInstance record_to_instance(const json& rec,
                                     const FieldMapping& mapping,
                                     std::string_view source,
                                     std::size_t line) {
  if (!rec.is_object())
    throw DataError(location(source, line) + ": record is not an object");

  TokenizedInstance inst;
  inst.id = parse_id(require_key(rec, mapping.id_key, source, line), source,
                     line);

  const json& toks = require_key(rec, mapping.tokens_key, source, line);
  if (!toks.is_array())
    throw DataError(location(source, line) + ": key '" + mapping.tokens_key +
                    "' must be an array of strings");
  inst.tokens.reserve(toks.size());
  for (const auto& t : toks) {
    if (!t.is_string())
      throw DataError(location(source, line) + ": key '" + mapping.tokens_key +
                      "' must be an array of strings");
    inst.tokens.push_back(t.get<std::string>());
  }

  auto read_span = [&](const std::string& start_key,
                       const std::string& end_key,
                       const std::string& type_key) {
    EntitySpan s;
    s.start = parse_index(require_key(rec, start_key, source, line), start_key,
                          source, line);
    s.end = parse_index(require_key(rec, end_key, source, line), end_key,
                        source, line);
    if (mapping.inclusive_end) s.end += 1;
    const json& ty = require_key(rec, type_key, source, line);
    if (!ty.is_string())
      throw DataError(location(source, line) + ": key '" + type_key +
                      "' must be a string");
    s.etype = EntityType(ty.get<std::string>());
    return s;
  };
  inst.subj = read_span(mapping.subj_start_key, mapping.subj_end_key,
                        mapping.subj_type_key);
  inst.obj = read_span(mapping.obj_start_key, mapping.obj_end_key,
                       mapping.obj_type_key);

  auto rel = rec.find(mapping.relation_key);
  if (rel != rec.end() && !rel->is_null()) {
    if (!rel->is_string())
      throw DataError(location(source, line) + ": key '" +
                      mapping.relation_key + "' must be a string");
    inst.relation = RelationLabel(rel->get<std::string>());
  }
  return inst;
}

}  // namespace

ParseResult parse_dataset(std::istream& in, const FieldMapping& mapping,
                          ParseMode mode, std::string_view source_name) {
  mapping.validate();
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    line_no++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    try {
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::exception&) {
        throw DataError(location(source_name, line_no) + ": malformed record");
      }
      TokenizedInstance inst =
          record_to_instance(rec, mapping, source_name, line_no);
      std::vector<Violation> violations = validate_instance(inst);
      if (!violations.empty())
        throw DataError(location(source_name, line_no) + ": instance '" +
                        inst.id + "': " + violations.front().field + " " +
                        violations.front().message);

      std::optional<std::string> scheme;
      auto s = rec.find("scheme");
      if (s != rec.end() && s->is_string()) scheme = s->get<std::string>();

      result.instances.push_back(std::move(inst));
      result.schemes.push_back(std::move(scheme));
    } catch (const DataError& e) {
      if (mode == ParseMode::kStrict) throw;
      result.skipped.push_back({line_no, e.what()});
    }
  }
  if (in.bad())
    throw DataError("error reading " + std::string(source_name));
  return result;
}

ParseResult parse_dataset_file(const std::string& path,
                               const FieldMapping& mapping, ParseMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  return parse_dataset(in, mapping, mode, path);
}

void serialize_dataset(const std::vector<TokenizedInstance>& instances,
                       const FieldMapping& mapping, std::ostream& out,
                       const std::optional<std::string>& scheme_annotation) {
  mapping.validate();
  for (const TokenizedInstance& inst : instances) {
    json rec;
    rec[mapping.id_key] = inst.id;
    rec[mapping.tokens_key] = inst.tokens;
    rec[mapping.subj_start_key] = inst.subj.start;
    rec[mapping.subj_end_key] =
        mapping.inclusive_end ? inst.subj.end - 1 : inst.subj.end;
    rec[mapping.subj_type_key] = inst.subj.etype.name;
    rec[mapping.obj_start_key] = inst.obj.start;
    rec[mapping.obj_end_key] =
        mapping.inclusive_end ? inst.obj.end - 1 : inst.obj.end;
    rec[mapping.obj_type_key] = inst.obj.etype.name;
    if (inst.relation) rec[mapping.relation_key] = inst.relation->name;
    if (scheme_annotation) rec["scheme"] = *scheme_annotation;
    out << rec.dump() << '\n';
  }
}

std::string serialize_dataset_to_string(
    const std::vector<TokenizedInstance>& instances,
    const FieldMapping& mapping,
    const std::optional<std::string>& scheme_annotation) {
  std::ostringstream out;
  serialize_dataset(instances, mapping, out, scheme_annotation);
  return out.str();
}

std::string pair_key_string(const EntityType& subj_type,
                            const EntityType& obj_type) {
  return subj_type.name + "-" + obj_type.name;
}

DatasetStats compute_stats(const std::vector<TokenizedInstance>& instances,
                           std::string_view no_relation_sentinel) {
  if (instances.empty()) throw DataError("empty dataset");

  DatasetStats stats;
  stats.instance_count = instances.size();
  std::size_t no_count = 0;
  double token_sum = 0.0;
  double distance_sum = 0.0;
  for (const TokenizedInstance& inst : instances) {
    if (!inst.relation)
      throw DataError("instance '" + inst.id + "' has no relation label");
    stats.relation_histogram[inst.relation->name]++;
    stats.pair_histogram[pair_key_string(inst.subj.etype, inst.obj.etype)]++;
    if (inst.relation->is_no_relation(no_relation_sentinel)) no_count++;
    token_sum += static_cast<double>(inst.tokens.size());
    const EntitySpan& first =
        inst.subj.start <= inst.obj.start ? inst.subj : inst.obj;
    const EntitySpan& second =
        inst.subj.start <= inst.obj.start ? inst.obj : inst.subj;
    distance_sum += static_cast<double>(second.start - first.end);
  }
  const double n = static_cast<double>(instances.size());
  stats.no_relation_fraction = static_cast<double>(no_count) / n;
  stats.mean_sentence_length = token_sum / n;
  stats.mean_entity_distance = distance_sum / n;
  return stats;
}

std::optional<std::size_t> LabelVocabulary::index_of(
    std::string_view name) const {
  for (std::size_t i = 0; i < labels.size(); i++)
    if (labels[i].name == name) return i;
  return std::nullopt;
}

LabelVocabulary load_label_vocabulary(std::istream& in,
                                      std::string_view source_name) {
  LabelVocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    line_no++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    bool sentinel = line[0] == '!';
    std::string name = sentinel ? line.substr(1) : line;
    if (name.empty())
      throw DataError(location(source_name, line_no) + ": empty label");
    if (vocab.index_of(name))
      throw DataError(location(source_name, line_no) + ": duplicate label '" +
                      name + "'");
    if (sentinel) {
      if (vocab.sentinel_index)
        throw DataError(location(source_name, line_no) +
                        ": more than one sentinel label");
      vocab.sentinel_index = vocab.labels.size();
    }
    vocab.labels.emplace_back(name);
  }
  // Fall back to the conventional sentinel spelling.
  if (!vocab.sentinel_index) {
    for (std::size_t i = 0; i < vocab.labels.size(); i++) {
      if (vocab.labels[i].is_no_relation()) {
        if (vocab.sentinel_index)
          throw DataError(std::string(source_name) +
                          ": multiple labels match the NO_RELATION sentinel");
        vocab.sentinel_index = i;
      }
    }
  }
  return vocab;
}

LabelVocabulary load_label_vocabulary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  return load_label_vocabulary(in, path);
}

LabelVocabulary vocabulary_from_labels(
    const std::vector<RelationLabel>& seen) {
  std::set<std::string> names;
  for (const RelationLabel& l : seen) names.insert(l.name);
  LabelVocabulary vocab;
  for (const std::string& n : names) vocab.labels.emplace_back(n);
  for (std::size_t i = 0; i < vocab.labels.size(); i++) {
    if (vocab.labels[i].is_no_relation()) {
      if (vocab.sentinel_index)
        throw DataError("multiple labels match the NO_RELATION sentinel");
      vocab.sentinel_index = i;
    }
  }
  return vocab;
}

}  // namespace retk
