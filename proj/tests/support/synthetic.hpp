#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "retk/classifier.hpp"
#include "retk/corpus.hpp"
#include "retk/markers.hpp"

// Synthetic corpora with known structure, shared by the unit suites and
// the acceptance runner.
namespace synth {

inline retk::TokenizedInstance make_instance(
    std::string id, std::vector<std::string> tokens, std::size_t s_start,
    std::size_t s_end, std::string s_type, std::size_t o_start,
    std::size_t o_end, std::string o_type, std::string relation = "") {
  retk::TokenizedInstance inst;
  inst.id = std::move(id);
  inst.tokens = std::move(tokens);
  inst.subj = retk::EntitySpan{s_start, s_end, retk::EntityType{s_type}};
  inst.obj = retk::EntitySpan{o_start, o_end, retk::EntityType{o_type}};
  if (!relation.empty()) inst.relation = retk::RelationLabel{relation};
  return inst;
}

// --- verb corpus: the relation is exactly the verb between the entities ---

struct VerbCorpus {
  std::vector<retk::TokenizedInstance> train;
  std::vector<retk::TokenizedInstance> test;
};

// 4 relations, each tied to one verb; entity names and filler tokens are
// unique per instance and disjoint between train and test, so only the
// verb (and structure) generalizes. Linearly separable by construction.
inline VerbCorpus verb_corpus(std::size_t train_per_label = 50,
                              std::size_t test_per_label = 20) {
  static const std::vector<std::pair<std::string, std::string>> kVerbRelation =
      {{"acquired", "acquired_by"},
       {"founded", "founder_of"},
       {"employs", "employer_of"},
       {"supplies", "supplier_of"}};
  VerbCorpus corpus;
  std::size_t serial = 0;
  for (std::size_t i = 0; i < train_per_label + test_per_label; i++) {
    for (std::size_t v = 0; v < kVerbRelation.size(); v++) {
      std::string n = std::to_string(serial++);
      std::vector<std::string> tokens = {
          "CorpA" + n, kVerbRelation[v].first, "CorpB" + n, "on", "day" + n};
      auto inst = make_instance("verb-" + n, std::move(tokens), 0, 1, "ORG",
                                2, 3, "ORG", kVerbRelation[v].second);
      (i < train_per_label ? corpus.train : corpus.test).push_back(inst);
    }
  }
  return corpus;
}

// --- type-dependent corpus: the label is a joint function of the subject
// type and which trigger verb sits next to the subject span ---

struct TypedCorpus {
  std::vector<retk::TokenizedInstance> train;
  std::vector<retk::TokenizedInstance> test;
};

// Both trigger verbs occur in every sentence, so bag-of-words sees a
// constant signal; only the trigger adjacent to the subject varies, and the
// label needs (subject type x adjacent trigger). Without markers the only
// generalizable feature left is the type pair, which caps accuracy at 1/2;
// typed markers expose glyph-trigger adjacency n-grams and separate all
// four labels.
inline TypedCorpus typed_corpus(std::size_t train_per_label = 30,
                                std::size_t test_per_label = 10) {
  struct Shape {
    const char* subj_type;
    const char* near;   // trigger adjacent to the subject
    const char* far_;   // the other trigger, later in the sentence
    const char* label;
  };
  static const std::vector<Shape> kShapes = {
      {"PERS", "hired", "advises", "works_at"},
      {"PERS", "advises", "hired", "advised_by"},
      {"ORG", "hired", "advises", "runs"},
      {"ORG", "advises", "hired", "consults"},
  };
  TypedCorpus corpus;
  std::size_t serial = 0;
  for (std::size_t i = 0; i < train_per_label + test_per_label; i++) {
    for (const auto& shape : kShapes) {
      std::string n = std::to_string(serial++);
      std::vector<std::string> tokens = {"Name" + n,  shape.near,
                                         "which" + n, shape.far_,
                                         "there" + n, "Place" + n};
      auto inst = make_instance("typed-" + n, std::move(tokens), 0, 1,
                                shape.subj_type, 5, 6, "GPE", shape.label);
      (i < train_per_label ? corpus.train : corpus.test).push_back(inst);
    }
  }
  return corpus;
}

// --- helpers to drive the classifier on a corpus ---

inline std::vector<retk::TrainingExample> as_examples(
    const std::vector<retk::TokenizedInstance>& instances,
    retk::MarkerScheme scheme) {
  std::vector<retk::TrainingExample> examples;
  examples.reserve(instances.size());
  for (const auto& inst : instances)
    examples.emplace_back(retk::insert_markers(inst, scheme), *inst.relation);
  return examples;
}

// Held-out micro F1 of a model over a labeled test set (labels are all
// real relations here, so nothing is sentinel-excluded and the score
// equals plain accuracy).
inline double held_out_micro_f1(
    const retk::SoftmaxModel& model,
    const std::vector<retk::TokenizedInstance>& test,
    retk::MarkerScheme scheme) {
  std::size_t correct = 0;
  for (const auto& inst : test) {
    retk::PredictionRecord rec =
        retk::predict(model, retk::insert_markers(inst, scheme));
    if (rec.predicted == *inst.relation) correct++;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

// --- eight-pair routing fixture ---

// Instances covering all eight configured pair keys (3 each) plus two
// residual-pair instances, each bucket with two distinct labels.
inline std::vector<retk::TokenizedInstance> eight_pair_fixture() {
  static const std::vector<std::pair<std::string, std::string>> kPairs = {
      {"ORG", "GPE"},     {"ORG", "ORG"},   {"PERS", "TITLE"},
      {"ORG", "DATE"},    {"PERS", "ORG"},  {"ORG", "MONEY"},
      {"PERS", "UNIV"},   {"PERS", "GOV_AGY"},
  };
  std::vector<retk::TokenizedInstance> out;
  std::size_t serial = 0;
  for (const auto& [subj_type, obj_type] : kPairs) {
    for (int i = 0; i < 3; i++) {
      std::string n = std::to_string(serial++);
      std::string rel = i < 2 ? "rel_even" : "rel_odd";
      out.push_back(make_instance("px-" + n, {"A" + n, "links", "B" + n}, 0, 1,
                                  subj_type, 2, 3, obj_type, rel));
    }
  }
  for (int i = 0; i < 2; i++) {
    std::string n = std::to_string(serial++);
    out.push_back(make_instance("px-" + n, {"A" + n, "links", "B" + n}, 0, 1,
                                "DATE", 2, 3, "ORG", i ? "rel_odd" : "rel_even"));
  }
  return out;
}

// The per-pair reference scores shipped as the default baseline column.
inline std::map<std::string, double> reference_baselines() {
  return {{"ORG-GPE", 0.85},   {"ORG-ORG", 0.41},  {"PERS-TITLE", 0.90},
          {"ORG-DATE", 0.81},  {"PERS-ORG", 0.67}, {"ORG-MONEY", 0.78},
          {"PERS-UNIV", 0.61}, {"PERS-GOV_AGY", 0.22}};
}

// --- serialization helper: instances -> interchange JSONL text ---

inline std::string to_jsonl(const std::vector<retk::TokenizedInstance>& data) {
  return retk::serialize_dataset_to_string(data, retk::FieldMapping{});
}

}  // namespace synth
