#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "retk/corpus.hpp"

using namespace retk;

namespace {

const char* kRecord =
    R"({"id": "e1", "token": ["Musk", "founded", "SpaceX"], "e1_start": 0, )"
    R"("e1_end": 1, "e1_type": "PERS", "e2_start": 2, "e2_end": 3, )"
    R"("e2_type": "ORG", "rel_group": "founder_of"})";

ParseResult parse_text(const std::string& text,
                       ParseMode mode = ParseMode::kStrict,
                       const FieldMapping& mapping = {}) {
  std::istringstream in(text);
  return parse_dataset(in, mapping, mode);
}

TokenizedInstance sample_instance() {
  TokenizedInstance inst;
  inst.id = "e1";
  inst.tokens = {"Musk", "founded", "SpaceX"};
  inst.subj = {0, 1, EntityType("PERS")};
  inst.obj = {2, 3, EntityType("ORG")};
  inst.relation = RelationLabel("founder_of");
  return inst;
}

}  // namespace

TEST_CASE("parses an interchange record into a tokenized instance") {
  ParseResult r = parse_text(std::string(kRecord) + "\n");
  REQUIRE(r.instances.size() == 1);
  const TokenizedInstance& inst = r.instances[0];
  CHECK(inst.id == "e1");
  CHECK(inst.tokens == std::vector<std::string>{"Musk", "founded", "SpaceX"});
  CHECK(inst.subj == EntitySpan{0, 1, EntityType("PERS")});
  CHECK(inst.obj == EntitySpan{2, 3, EntityType("ORG")});
  REQUIRE(inst.relation.has_value());
  CHECK(inst.relation->name == "founder_of");
  CHECK_FALSE(r.schemes[0].has_value());
}

TEST_CASE("entity types are normalized to uppercase") {
  ParseResult r = parse_text(
      R"({"id":"a","token":["x","y"],"e1_start":0,"e1_end":1,"e1_type":"pers",)"
      R"("e2_start":1,"e2_end":2,"e2_type":"Org","rel_group":"r"})"
      "\n");
  CHECK(r.instances[0].subj.etype.name == "PERS");
  CHECK(r.instances[0].obj.etype.name == "ORG");
}

TEST_CASE("integer record ids are accepted as strings") {
  ParseResult r = parse_text(
      R"({"id":7,"token":["x","y"],"e1_start":0,"e1_end":1,"e1_type":"A",)"
      R"("e2_start":1,"e2_end":2,"e2_type":"B","rel_group":"r"})"
      "\n");
  CHECK(r.instances[0].id == "7");
}

TEST_CASE("blank lines and CRLF terminators are tolerated") {
  std::string text = std::string(kRecord) + "\r\n\n   \t\n" + kRecord + "\r\n";
  ParseResult r = parse_text(text);
  CHECK(r.instances.size() == 2);
  CHECK(r.instances[0] == r.instances[1]);
}

TEST_CASE("a scheme annotation on a record is captured") {
  std::string annotated(kRecord);
  annotated.insert(annotated.size() - 1, R"(, "scheme": "typed-punct")");
  ParseResult r = parse_text(annotated + "\n" + kRecord + "\n");
  REQUIRE(r.schemes.size() == 2);
  REQUIRE(r.schemes[0].has_value());
  CHECK(*r.schemes[0] == "typed-punct");
  CHECK_FALSE(r.schemes[1].has_value());
}

TEST_CASE("records missing a mapped key name the key and line") {
  std::string text =
      R"({"id":"a","token":["x","y"],"e1_start":0,"e1_end":1,"e1_type":"A",)"
      R"("e2_start":1,"e2_end":2,"rel_group":"r"})"
      "\n";
  CHECK_THROWS_WITH_AS(parse_text(text),
                       "<input> line 1: missing key 'e2_type'", DataError);
}

TEST_CASE("unparseable lines report the line number") {
  std::string text = std::string(kRecord) + "\nnot json at all\n";
  CHECK_THROWS_WITH_AS(parse_text(text), "<input> line 2: malformed record",
                       DataError);
}

TEST_CASE("span violations are reported with the instance id") {
  std::string text =
      R"({"id":"bad","token":["x","y"],"e1_start":0,"e1_end":9,"e1_type":"A",)"
      R"("e2_start":1,"e2_end":2,"e2_type":"B","rel_group":"r"})"
      "\n";
  CHECK_THROWS_WITH_AS(parse_text(text),
                       "<input> line 1: instance 'bad': subj span out of range",
                       DataError);
}

TEST_CASE("negative span indices are rejected") {
  std::string text =
      R"({"id":"a","token":["x","y"],"e1_start":-1,"e1_end":1,"e1_type":"A",)"
      R"("e2_start":1,"e2_end":2,"e2_type":"B","rel_group":"r"})"
      "\n";
  CHECK_THROWS_WITH_AS(
      parse_text(text),
      "<input> line 1: key 'e1_start': span out of range (negative index)",
      DataError);
}

TEST_CASE("wrongly typed fields name the offending key") {
  std::string text =
      R"({"id":"a","token":"not an array","e1_start":0,"e1_end":1,)"
      R"("e1_type":"A","e2_start":1,"e2_end":2,"e2_type":"B","rel_group":"r"})"
      "\n";
  CHECK_THROWS_WITH_AS(
      parse_text(text),
      "<input> line 1: key 'token' must be an array of strings", DataError);
}

TEST_CASE("lenient parsing collects skips instead of throwing") {
  std::string text = std::string(kRecord) + "\nbroken\n" + kRecord + "\n" +
                     kRecord + "\n";
  ParseResult strict_failure_expected = parse_text(text, ParseMode::kLenient);
  CHECK(strict_failure_expected.instances.size() == 3);
  REQUIRE(strict_failure_expected.skipped.size() == 1);
  CHECK(strict_failure_expected.skipped[0].line == 2);
  CHECK(strict_failure_expected.skipped[0].reason ==
        "<input> line 2: malformed record");
  CHECK_THROWS_AS(parse_text(text, ParseMode::kStrict), DataError);
}

TEST_CASE("field mappings rename and reshape record keys") {
  FieldMapping m = field_mapping_from_json(
      R"({"id": "docid", "e1_start": "s_begin", "inclusive_end": true})");
  CHECK(m.id_key == "docid");
  CHECK(m.subj_start_key == "s_begin");
  CHECK(m.tokens_key == "token");
  CHECK(m.inclusive_end);

  SUBCASE("unknown fields are rejected") {
    CHECK_THROWS_WITH_AS(field_mapping_from_json(R"({"e3_start": "x"})"),
                         "field mapping: unknown field 'e3_start'", DataError);
  }
  SUBCASE("inclusive_end must be boolean") {
    CHECK_THROWS_WITH_AS(field_mapping_from_json(R"({"inclusive_end": 1})"),
                         "field mapping: inclusive_end must be a boolean",
                         DataError);
  }
  SUBCASE("mapped keys must be distinct") {
    CHECK_THROWS_WITH_AS(field_mapping_from_json(R"({"id": "token"})"),
                         "field mapping key used twice: 'token'", DataError);
  }
  SUBCASE("mapping text must be a JSON object") {
    CHECK_THROWS_AS(field_mapping_from_json("[1,2]"), DataError);
    CHECK_THROWS_AS(field_mapping_from_json("{nope"), DataError);
  }
}

TEST_CASE("inclusive end mappings convert to half-open spans and back") {
  FieldMapping m;
  m.inclusive_end = true;
  std::istringstream in(
      R"({"id":"a","token":["x","y","z"],"e1_start":0,"e1_end":0,)"
      R"("e1_type":"A","e2_start":1,"e2_end":2,"e2_type":"B","rel_group":"r"})"
      "\n");
  ParseResult r = parse_dataset(in, m);
  CHECK(r.instances[0].subj == EntitySpan{0, 1, EntityType("A")});
  CHECK(r.instances[0].obj == EntitySpan{1, 3, EntityType("B")});

  // Serializing under the same mapping restores the inclusive indices.
  std::string text = serialize_dataset_to_string(r.instances, m);
  CHECK(text.find("\"e1_end\":0") != std::string::npos);
  CHECK(text.find("\"e2_end\":2") != std::string::npos);
  std::istringstream again(text);
  CHECK(parse_dataset(again, m).instances == r.instances);
}

TEST_CASE("instance validation lists every violated invariant") {
  TokenizedInstance inst = sample_instance();
  CHECK(validate_instance(inst).empty());

  SUBCASE("overlapping spans") {
    inst.tokens = {"a", "b", "c", "d", "e"};
    inst.subj = {1, 3, EntityType("A")};
    inst.obj = {2, 4, EntityType("B")};
    std::vector<Violation> v = validate_instance(inst);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == Violation{"spans", "overlapping spans"});
  }
  SUBCASE("adjacent spans are legal") {
    inst.tokens = {"a", "b", "c"};
    inst.subj = {0, 1, EntityType("A")};
    inst.obj = {1, 2, EntityType("B")};
    CHECK(validate_instance(inst).empty());
  }
  SUBCASE("empty span") {
    inst.subj = {2, 2, EntityType("A")};
    std::vector<Violation> v = validate_instance(inst);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == Violation{"subj", "empty span"});
  }
  SUBCASE("span past the end of the sentence") {
    inst.obj = {2, 9, EntityType("B")};
    std::vector<Violation> v = validate_instance(inst);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == Violation{"obj", "span out of range"});
  }
  SUBCASE("entity types must be present and whitespace-free") {
    inst.subj.etype = EntityType("");
    inst.obj.etype = EntityType("T WO");
    std::vector<Violation> v = validate_instance(inst);
    CHECK(std::count(v.begin(), v.end(),
                     Violation{"subj", "empty entity type"}) == 1);
    CHECK(std::count(v.begin(), v.end(),
                     Violation{"obj", "entity type contains whitespace"}) ==
          1);
  }
  SUBCASE("empty token sequence") {
    inst.tokens.clear();
    std::vector<Violation> v = validate_instance(inst);
    CHECK(std::count(v.begin(), v.end(),
                     Violation{"tokens", "empty token sequence"}) == 1);
  }
}

TEST_CASE("serialize then parse is the identity") {
  std::vector<TokenizedInstance> instances;
  TokenizedInstance a = sample_instance();
  TokenizedInstance b = sample_instance();
  b.id = "e2";
  b.tokens = {"SpaceX", "hired", "Musk", "today"};
  b.subj = {2, 3, EntityType("PERS")};
  b.obj = {0, 1, EntityType("ORG")};
  b.relation = RelationLabel("employer_of");
  TokenizedInstance c = sample_instance();
  c.id = "e3";
  c.relation.reset();  // unlabeled inference input
  instances = {a, b, c};

  FieldMapping m;
  std::string text = serialize_dataset_to_string(instances, m);
  std::istringstream in(text);
  ParseResult r = parse_dataset(in, m);
  CHECK(r.instances == instances);

  SUBCASE("a scheme annotation survives the round trip") {
    std::string marked = serialize_dataset_to_string(
        instances, m, std::optional<std::string>("entity-mask"));
    std::istringstream min(marked);
    ParseResult mr = parse_dataset(min, m);
    CHECK(mr.instances == instances);
    for (const auto& s : mr.schemes) {
      REQUIRE(s.has_value());
      CHECK(*s == "entity-mask");
    }
  }
}

TEST_CASE("dataset statistics summarize labels, pairs and geometry") {
  auto make = [](const std::string& id, std::size_t len,
                 const std::string& subj_type, const std::string& obj_type,
                 const std::string& rel) {
    TokenizedInstance inst;
    inst.id = id;
    for (std::size_t i = 0; i < len; i++)
      inst.tokens.push_back("t" + std::to_string(i));
    inst.subj = {0, 1, EntityType(subj_type)};
    inst.obj = {len - 1, len, EntityType(obj_type)};
    inst.relation = RelationLabel(rel);
    return inst;
  };

  SUBCASE("no-relation fraction counts the sentinel case-insensitively") {
    std::vector<TokenizedInstance> data = {
        make("a", 4, "PERS", "ORG", "works_at"),
        make("b", 4, "PERS", "ORG", "no_relation"),
        make("c", 4, "PERS", "ORG", "NO_RELATION"),
        make("d", 4, "PERS", "ORG", "founder_of"),
    };
    DatasetStats s = compute_stats(data);
    CHECK(s.instance_count == 4);
    CHECK(s.no_relation_fraction == doctest::Approx(0.5));
    CHECK(s.relation_histogram.at("no_relation") == 1);
    CHECK(s.relation_histogram.at("NO_RELATION") == 1);
  }

  SUBCASE("pair histogram keys are SUBJ-OBJ strings") {
    std::vector<TokenizedInstance> data = {
        make("a", 4, "ORG", "GPE", "r"),  make("b", 4, "ORG", "GPE", "r"),
        make("c", 4, "ORG", "GPE", "r"),  make("d", 4, "PERS", "ORG", "r"),
        make("e", 4, "PERS", "ORG", "r"), make("f", 4, "GPE", "ORG", "r"),
    };
    DatasetStats s = compute_stats(data);
    CHECK(s.pair_histogram.at("ORG-GPE") == 3);
    CHECK(s.pair_histogram.at("PERS-ORG") == 2);
    CHECK(s.pair_histogram.at("GPE-ORG") == 1);
    std::size_t total = 0;
    for (const auto& [key, count] : s.pair_histogram) total += count;
    CHECK(total == s.instance_count);
  }

  SUBCASE("mean sentence length and entity distance") {
    std::vector<TokenizedInstance> data = {make("a", 4, "A", "B", "r"),
                                           make("b", 6, "A", "B", "r")};
    DatasetStats s = compute_stats(data);
    CHECK(s.mean_sentence_length == doctest::Approx(5.0));
    // Tokens strictly between span end and span start: 2 and 4.
    CHECK(s.mean_entity_distance == doctest::Approx(3.0));
  }

  SUBCASE("order of instances does not matter") {
    std::vector<TokenizedInstance> data = {
        make("a", 4, "PERS", "ORG", "works_at"),
        make("b", 5, "ORG", "GPE", "no_relation"),
        make("c", 6, "PERS", "ORG", "works_at"),
        make("d", 7, "ORG", "DATE", "founded_on"),
    };
    DatasetStats before = compute_stats(data);
    std::mt19937 rng(11);
    std::shuffle(data.begin(), data.end(), rng);
    DatasetStats after = compute_stats(data);
    CHECK(before.relation_histogram == after.relation_histogram);
    CHECK(before.pair_histogram == after.pair_histogram);
    CHECK(before.no_relation_fraction ==
          doctest::Approx(after.no_relation_fraction));
    CHECK(before.mean_sentence_length ==
          doctest::Approx(after.mean_sentence_length));
    CHECK(before.mean_entity_distance ==
          doctest::Approx(after.mean_entity_distance));
  }

  SUBCASE("empty input is an error") {
    CHECK_THROWS_WITH_AS(compute_stats({}), "empty dataset", DataError);
  }

  SUBCASE("unlabeled instances are an error") {
    TokenizedInstance inst = make("u1", 4, "A", "B", "r");
    inst.relation.reset();
    CHECK_THROWS_WITH_AS(compute_stats({inst}),
                         "instance 'u1' has no relation label", DataError);
  }
}

TEST_CASE("label vocabulary files fix order and mark the sentinel") {
  auto load = [](const std::string& text) {
    std::istringstream in(text);
    return load_label_vocabulary(in);
  };

  SUBCASE("a leading bang marks the sentinel explicitly") {
    LabelVocabulary v = load("!no_match\nfounder_of\nworks_at\n");
    REQUIRE(v.labels.size() == 3);
    CHECK(v.labels[0].name == "no_match");
    REQUIRE(v.sentinel_index.has_value());
    CHECK(*v.sentinel_index == 0);
    CHECK(v.no_relation().name == "no_match");
    CHECK(v.index_of("works_at") == std::size_t{2});
    CHECK_FALSE(v.index_of("absent").has_value());
  }
  SUBCASE("the conventional spelling is detected as a fallback") {
    LabelVocabulary v = load("founder_of\nNo_Relation\n");
    REQUIRE(v.sentinel_index.has_value());
    CHECK(*v.sentinel_index == 1);
  }
  SUBCASE("a vocabulary may lack a sentinel entirely") {
    LabelVocabulary v = load("alpha\nbeta\n");
    CHECK_FALSE(v.sentinel_index.has_value());
    CHECK(v.no_relation().name == "no_relation");
  }
  SUBCASE("duplicates are rejected") {
    CHECK_THROWS_WITH_AS(load("a\nb\na\n"),
                         "<labels> line 3: duplicate label 'a'", DataError);
  }
  SUBCASE("two bang lines are rejected") {
    CHECK_THROWS_WITH_AS(load("!a\n!b\n"),
                         "<labels> line 2: more than one sentinel label",
                         DataError);
  }
  SUBCASE("ambiguous fallback sentinels are rejected") {
    CHECK_THROWS_WITH_AS(load("no_relation\nNO_RELATION\n"),
                         "<labels>: multiple labels match the NO_RELATION "
                         "sentinel",
                         DataError);
  }
  SUBCASE("a bare bang is an empty label") {
    CHECK_THROWS_WITH_AS(load("!\n"), "<labels> line 1: empty label",
                         DataError);
  }
}

TEST_CASE("vocabularies derived from data are sorted and deduplicated") {
  std::vector<RelationLabel> seen = {
      RelationLabel("works_at"), RelationLabel("no_relation"),
      RelationLabel("founder_of"), RelationLabel("works_at")};
  LabelVocabulary v = vocabulary_from_labels(seen);
  REQUIRE(v.labels.size() == 3);
  CHECK(v.labels[0].name == "founder_of");
  CHECK(v.labels[1].name == "no_relation");
  CHECK(v.labels[2].name == "works_at");
  REQUIRE(v.sentinel_index.has_value());
  CHECK(*v.sentinel_index == 1);
}

TEST_CASE("pair key strings join subject and object types") {
  CHECK(pair_key_string(EntityType("org"), EntityType("gpe")) == "ORG-GPE");
  CHECK(pair_key_string(EntityType("PERS"), EntityType("GOV_AGY")) ==
        "PERS-GOV_AGY");
}
