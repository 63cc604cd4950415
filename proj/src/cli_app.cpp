#include "retk/cli.hpp"

#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <CLI11.hpp>
#include <json.hpp>

#include "retk/classifier.hpp"
#include "retk/common.hpp"
#include "retk/corpus.hpp"
#include "retk/eval.hpp"
#include "retk/manifest.hpp"
#include "retk/markers.hpp"
#include "retk/router.hpp"

namespace fs = std::filesystem;

namespace retk {
namespace {

// Relative input paths fall back to $RETK_DATA_DIR when they don't resolve
// from the working directory.
std::string resolve_input(const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute() || fs::exists(path))
    return path;
  const char* base = std::getenv("RETK_DATA_DIR");
  if (!base || !*base) return path;
  fs::path candidate = fs::path(base) / path;
  if (fs::exists(candidate)) return candidate.string();
  return path;
}

FieldMapping make_mapping(const std::string& field_map_path,
                          bool inclusive_end) {
  FieldMapping mapping;
  if (!field_map_path.empty())
    mapping = field_mapping_from_json(read_file(resolve_input(field_map_path)));
  if (inclusive_end) mapping.inclusive_end = true;
  mapping.validate();
  return mapping;
}

struct LoadedData {
  std::vector<TokenizedInstance> instances;
  std::optional<std::string> annotated_scheme;  // stamped by preprocess
  std::size_t skipped = 0;
};

LoadedData load_dataset(const std::string& path, const FieldMapping& mapping,
                        ParseMode mode = ParseMode::kStrict) {
  ParseResult parsed = parse_dataset_file(resolve_input(path), mapping, mode);
  LoadedData data;
  data.instances = std::move(parsed.instances);
  data.skipped = parsed.skipped.size();
  for (std::size_t i = 0; i < parsed.schemes.size(); i++) {
    const auto& s = parsed.schemes[i];
    if (i == 0) {
      data.annotated_scheme = s;
    } else if (data.annotated_scheme != s) {
      throw DataError(path + ": mixed scheme annotations across records");
    }
  }
  return data;
}

// Resolves which marker scheme a model stage should run under, reconciling
// the --scheme flag with any annotation left by preprocess.
MarkerScheme resolve_scheme(const LoadedData& data,
                            const std::string& scheme_flag,
                            MarkerScheme fallback) {
  std::optional<MarkerScheme> annotated;
  if (data.annotated_scheme) {
    annotated = marker_scheme_from_string(*data.annotated_scheme);
    if (!annotated)
      throw DataError("unknown scheme annotation '" + *data.annotated_scheme +
                      "'");
  }
  if (!scheme_flag.empty()) {
    auto flag = marker_scheme_from_string(scheme_flag);
    if (!flag)
      throw std::invalid_argument("unknown marker scheme '" + scheme_flag +
                                  "'");
    if (annotated && *annotated != *flag)
      throw DataError("input is already marked with scheme '" +
                      *data.annotated_scheme + "', --scheme says '" +
                      scheme_flag + "'");
    return *flag;
  }
  return annotated ? *annotated : fallback;
}

// Already-annotated data is marked verbatim; raw data gets markers now.
MarkedInstance to_marked(const TokenizedInstance& inst, MarkerScheme scheme,
                         bool already_marked) {
  if (already_marked)
    return MarkedInstance{inst.id, inst.tokens, inst.subj, inst.obj, scheme};
  return insert_markers(inst, scheme);
}

RelationLabel require_relation(const TokenizedInstance& inst) {
  if (!inst.relation)
    throw DataError("instance '" + inst.id + "' has no relation label");
  return *inst.relation;
}

std::vector<EntityPairKey> resolve_keyset(const std::string& keys_path) {
  if (keys_path.empty()) return default_pair_keyset();
  return load_pair_keyset_file(resolve_input(keys_path));
}

// Pair keys become model filenames; anything outside the portable set is
// flattened so models.json remains the source of truth for lookup.
std::string key_filename(const std::string& key) {
  std::string out = key;
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_')
      c = '_';
  return out + ".model";
}

void run_tasks(std::size_t jobs, std::vector<std::function<void()>>& tasks) {
  if (tasks.empty()) return;
  jobs = std::max<std::size_t>(1, std::min(jobs, tasks.size()));
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      try {
        tasks[i]();
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < jobs; t++) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Tolerant pre-scan of a prediction TSV's label column, used to build a
// label vocabulary when none was supplied; full validation happens in the
// real parse afterwards.
void scan_prediction_labels(const std::string& tsv_text,
                            std::vector<RelationLabel>& out) {
  std::istringstream in(tsv_text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::size_t t1 = line.find('\t');
    if (t1 == std::string::npos) continue;
    std::size_t t2 = line.find('\t', t1 + 1);
    std::string label = t2 == std::string::npos
                            ? line.substr(t1 + 1)
                            : line.substr(t1 + 1, t2 - t1 - 1);
    if (!label.empty()) out.push_back(RelationLabel{label});
  }
}

LabelVocabulary vocabulary_for(
    const std::string& labels_path,
    const std::vector<TokenizedInstance>& gold,
    const std::vector<std::string>& prediction_paths) {
  if (!labels_path.empty())
    return load_label_vocabulary_file(resolve_input(labels_path));
  std::vector<RelationLabel> seen;
  for (const auto& inst : gold) seen.push_back(require_relation(inst));
  for (const auto& path : prediction_paths)
    scan_prediction_labels(read_file(resolve_input(path)), seen);
  return vocabulary_from_labels(seen);
}

void emit_text(const std::string& text, const std::string& output_path) {
  if (output_path.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_file_atomic(output_path, text);
}

// --- subcommand options ---

struct CommonOpts {
  std::string input;
  std::string field_map;
  bool inclusive_end = false;
};

struct IngestOpts : CommonOpts {
  std::string output;
  bool lenient = false;
};

struct StatsOpts : CommonOpts {
  std::string output;
  bool json = false;
};

struct PreprocessOpts : CommonOpts {
  std::string output;
  std::string scheme = "typed-punct";
};

struct RouteOpts : CommonOpts {
  std::string output;
  std::string keys;
};

struct TrainOpts : CommonOpts {
  std::string model;
  std::string scheme;
  std::string labels;
  std::string keys;
  bool per_pair = false;
  std::uint64_t seed = 42;
  std::size_t jobs = 1;
  TrainConfig cfg;
};

struct PredictOpts : CommonOpts {
  std::string model;
  std::string output;
  std::string scheme;
  bool per_pair = false;
  bool probs = false;
};

struct EvaluateOpts {
  std::string gold;
  std::string pred;
  std::string labels;
  std::string field_map;
  bool inclusive_end = false;
  bool strict_only = false;
  std::string strict_mode = "accuracy";
  bool per_pair = false;
  std::string keys;
  std::string baseline;
  std::string output;
  bool json = false;
};

struct CompareOpts {
  std::string gold;
  std::vector<std::string> preds;  // NAME=FILE
  std::string labels;
  std::string field_map;
  bool inclusive_end = false;
  bool per_class = false;
  std::string output;
  bool json = false;
};

// --- subcommand bodies ---

void cmd_ingest(const IngestOpts& opt) {
  RunManifest manifest{.subcommand = "ingest", .started_at = iso8601_utc_now()};
  FieldMapping mapping = make_mapping(opt.field_map, opt.inclusive_end);
  LoadedData data = load_dataset(
      opt.input, mapping, opt.lenient ? ParseMode::kLenient : ParseMode::kStrict);
  write_file_atomic(opt.output,
                    serialize_dataset_to_string(data.instances, FieldMapping{},
                                                data.annotated_scheme));
  if (opt.lenient)
    std::fprintf(stderr, "skipped %zu malformed record(s)\n", data.skipped);
  manifest.config = {{"input", opt.input},
                     {"output", opt.output},
                     {"field_map", opt.field_map},
                     {"lenient", opt.lenient ? "true" : "false"},
                     {"skipped", std::to_string(data.skipped)},
                     {"instances", std::to_string(data.instances.size())}};
  write_manifest_for(manifest, opt.output);
}

void cmd_stats(const StatsOpts& opt) {
  RunManifest manifest{.subcommand = "stats", .started_at = iso8601_utc_now()};
  FieldMapping mapping = make_mapping(opt.field_map, opt.inclusive_end);
  LoadedData data = load_dataset(opt.input, mapping);
  DatasetStats stats = compute_stats(data.instances);

  std::string text;
  if (opt.json) {
    nlohmann::json j{{"instances", stats.instance_count},
                     {"no_relation_fraction", stats.no_relation_fraction},
                     {"mean_sentence_length", stats.mean_sentence_length},
                     {"mean_entity_distance", stats.mean_entity_distance},
                     {"relations", stats.relation_histogram},
                     {"pairs", stats.pair_histogram}};
    text = j.dump(2) + "\n";
  } else {
    char buf[64];
    text += "instances            " + std::to_string(stats.instance_count) +
            "\n";
    std::snprintf(buf, sizeof(buf), "%.4f", stats.no_relation_fraction);
    text += std::string("no-relation-fraction ") + buf + "\n";
    std::snprintf(buf, sizeof(buf), "%.2f", stats.mean_sentence_length);
    text += std::string("mean-sentence-length ") + buf + "\n";
    std::snprintf(buf, sizeof(buf), "%.2f", stats.mean_entity_distance);
    text += std::string("mean-entity-distance ") + buf + "\n";
    text += "relations\n";
    for (const auto& [label, count] : stats.relation_histogram)
      text += "  " + label + " " + std::to_string(count) + "\n";
    text += "pairs\n";
    for (const auto& [key, count] : stats.pair_histogram)
      text += "  " + key + " " + std::to_string(count) + "\n";
  }
  emit_text(text, opt.output);
  manifest.config = {{"input", opt.input},
                     {"field_map", opt.field_map},
                     {"json", opt.json ? "true" : "false"}};
  write_manifest_for(manifest, opt.output);
}

void cmd_preprocess(const PreprocessOpts& opt) {
  RunManifest manifest{.subcommand = "preprocess",
                       .started_at = iso8601_utc_now()};
  FieldMapping mapping = make_mapping(opt.field_map, opt.inclusive_end);
  LoadedData data = load_dataset(opt.input, mapping);
  if (data.annotated_scheme)
    throw DataError(opt.input + ": input is already marked with scheme '" +
                    *data.annotated_scheme + "'");
  auto scheme = marker_scheme_from_string(opt.scheme);
  if (!scheme)
    throw std::invalid_argument("unknown marker scheme '" + opt.scheme + "'");

  std::vector<TokenizedInstance> marked;
  marked.reserve(data.instances.size());
  for (const auto& inst : data.instances) {
    MarkedInstance m = insert_markers(inst, *scheme);
    marked.push_back(TokenizedInstance{m.id, std::move(m.tokens), m.subj,
                                       m.obj, inst.relation});
  }
  write_file_atomic(opt.output,
                    serialize_dataset_to_string(marked, FieldMapping{},
                                                std::string(to_string(*scheme))));
  manifest.config = {{"input", opt.input},
                     {"output", opt.output},
                     {"scheme", std::string(to_string(*scheme))},
                     {"field_map", opt.field_map},
                     {"instances", std::to_string(marked.size())}};
  write_manifest_for(manifest, opt.output);
}

void cmd_route(const RouteOpts& opt) {
  RunManifest manifest{.subcommand = "route", .started_at = iso8601_utc_now()};
  FieldMapping mapping = make_mapping(opt.field_map, opt.inclusive_end);
  LoadedData data = load_dataset(opt.input, mapping);
  std::vector<EntityPairKey> keyset = resolve_keyset(opt.keys);
  Partition part = partition_dataset(data.instances, keyset);

  std::size_t width = 8;  // "RESIDUAL"
  for (const auto& key : part.keyset) width = std::max(width, key.str().size());
  std::string text;
  for (const auto& key : part.keyset) {
    std::string name = key.str();
    text += name + std::string(width - name.size(), ' ') + " " +
            std::to_string(part.buckets.at(key).size()) + "\n";
  }
  text += "RESIDUAL" + std::string(width - 8, ' ') + " " +
          std::to_string(part.residual.size()) + "\n";
  text += "TOTAL" + std::string(width - 5, ' ') + " " +
          std::to_string(part.total_size()) + "\n";
  emit_text(text, opt.output);
  manifest.config = {{"input", opt.input},
                     {"keys", opt.keys},
                     {"field_map", opt.field_map}};
  write_manifest_for(manifest, opt.output);
}

std::map<std::string, std::string> train_config_entries(const TrainOpts& opt,
                                                        MarkerScheme scheme) {
  std::string orders;
  for (std::size_t k : opt.cfg.ngram_orders) {
    if (!orders.empty()) orders += ",";
    orders += std::to_string(k);
  }
  return {{"input", opt.input},
          {"model", opt.model},
          {"scheme", std::string(to_string(scheme))},
          {"labels", opt.labels},
          {"keys", opt.keys},
          {"field_map", opt.field_map},
          {"per_pair", opt.per_pair ? "true" : "false"},
          {"batch_size", std::to_string(opt.cfg.batch_size)},
          {"epochs", std::to_string(opt.cfg.epochs)},
          {"learning_rate", std::to_string(opt.cfg.learning_rate)},
          {"l2", std::to_string(opt.cfg.l2)},
          {"dim", std::to_string(opt.cfg.dim)},
          {"ngram_orders", orders},
          {"jobs", std::to_string(opt.jobs)}};
}

void cmd_train(const TrainOpts& opt) {
  RunManifest manifest{.subcommand = "train",
                       .seed = opt.seed,
                       .started_at = iso8601_utc_now()};
  FieldMapping mapping = make_mapping(opt.field_map, opt.inclusive_end);
  LoadedData data = load_dataset(opt.input, mapping);
  MarkerScheme scheme =
      resolve_scheme(data, opt.scheme, MarkerScheme::kTypedPunct);
  bool already_marked = data.annotated_scheme.has_value();

  TrainConfig cfg = opt.cfg;
  cfg.seed = opt.seed;
  cfg.validate();

  std::optional<LabelVocabulary> vocab;
  if (!opt.labels.empty())
    vocab = load_label_vocabulary_file(resolve_input(opt.labels));
  const LabelVocabulary* vocab_ptr = vocab ? &*vocab : nullptr;

  auto build_examples = [&](const std::vector<TokenizedInstance>& instances) {
    std::vector<TrainingExample> examples;
    examples.reserve(instances.size());
    for (const auto& inst : instances) {
      RelationLabel gold = require_relation(inst);
      examples.emplace_back(to_marked(inst, scheme, already_marked), gold);
    }
    return examples;
  };

  if (!opt.per_pair) {
    SoftmaxModel model = train(build_examples(data.instances), cfg, vocab_ptr);
    save_model_file(model, opt.model);
    manifest.config = train_config_entries(opt, scheme);
    write_manifest_for(manifest, opt.model);
    return;
  }

  // Per-pair mode: one model per configured pair with enough label
  // diversity, plus a global fallback for everything else.
  std::vector<EntityPairKey> keyset = resolve_keyset(opt.keys);
  Partition part = partition_dataset(data.instances, keyset);
  fs::create_directories(opt.model);

  struct Task {
    std::string key;  // empty for the global model
    const std::vector<TokenizedInstance>* bucket;
    std::uint64_t seed;
    SoftmaxModel model;
  };
  std::vector<Task> tasks;
  tasks.push_back({"", &data.instances, cfg.seed, {}});
  for (const auto& key : part.keyset) {
    const auto& bucket = part.buckets.at(key);
    std::set<std::string> labels;
    for (const auto& inst : bucket) labels.insert(require_relation(inst).name);
    if (labels.size() < 2) continue;  // degenerate: served by the fallback
    tasks.push_back({key.str(), &bucket, fnv1a64(key.str()) ^ cfg.seed, {}});
  }

  std::vector<std::function<void()>> work;
  work.reserve(tasks.size());
  for (auto& task : tasks) {
    work.push_back([&task, &build_examples, &cfg, vocab_ptr] {
      TrainConfig task_cfg = cfg;
      task_cfg.seed = task.seed;
      task.model = train(build_examples(*task.bucket), task_cfg, vocab_ptr);
    });
  }
  run_tasks(opt.jobs, work);

  nlohmann::json index;
  index["scheme"] = std::string(to_string(scheme));
  index["keyset"] = nlohmann::json::array();
  for (const auto& key : keyset) index["keyset"].push_back(key.str());
  index["keys"] = nlohmann::json::object();
  for (const auto& task : tasks) {
    std::string filename =
        task.key.empty() ? "GLOBAL.model" : key_filename(task.key);
    save_model_file(task.model, (fs::path(opt.model) / filename).string());
    if (task.key.empty())
      index["global"] = filename;
    else
      index["keys"][task.key] = filename;
  }
  std::string index_path = (fs::path(opt.model) / "models.json").string();
  write_file_atomic(index_path, index.dump(2) + "\n");
  manifest.config = train_config_entries(opt, scheme);
  write_manifest_for(manifest, index_path);
}

void cmd_predict(const PredictOpts& opt) {
  RunManifest manifest{.subcommand = "predict",
                       .started_at = iso8601_utc_now()};
  FieldMapping mapping = make_mapping(opt.field_map, opt.inclusive_end);
  LoadedData data = load_dataset(opt.input, mapping);
  bool already_marked = data.annotated_scheme.has_value();

  std::string model_path = resolve_input(opt.model);
  bool per_pair = opt.per_pair || fs::is_directory(model_path);

  std::string tsv;
  if (!per_pair) {
    SoftmaxModel model = load_model_file(model_path);
    MarkerScheme scheme =
        resolve_scheme(data, opt.scheme, model.scheme);
    if (scheme != model.scheme)
      throw DataError("marker scheme mismatch: model expects '" +
                      std::string(to_string(model.scheme)) +
                      "', input is marked '" +
                      std::string(to_string(scheme)) + "'");
    std::vector<PredictionRecord> records;
    records.reserve(data.instances.size());
    for (const auto& inst : data.instances)
      records.push_back(
          predict(model, to_marked(inst, scheme, already_marked)));
    tsv = predictions_to_tsv(records, model.labels.size(), opt.probs);
  } else {
    if (opt.probs)
      throw std::invalid_argument(
          "--probs requires a single model (per-pair vocabularies differ)");
    std::string index_path = (fs::path(model_path) / "models.json").string();
    std::string scheme_name, global_file;
    std::vector<std::string> keyset_names;
    std::map<std::string, std::string> key_files;
    try {
      nlohmann::json index = nlohmann::json::parse(read_file(index_path));
      scheme_name = index.at("scheme").get<std::string>();
      global_file = index.at("global").get<std::string>();
      for (const auto& key : index.at("keyset"))
        keyset_names.push_back(key.get<std::string>());
      for (const auto& [key, file] : index.at("keys").items())
        key_files[key] = file.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(index_path + ": " + e.what());
    }

    auto scheme = marker_scheme_from_string(scheme_name);
    if (!scheme)
      throw DataError(index_path + ": unknown scheme '" + scheme_name + "'");
    MarkerScheme resolved = resolve_scheme(data, opt.scheme, *scheme);
    if (resolved != *scheme)
      throw DataError("marker scheme mismatch: models expect '" +
                      std::string(to_string(*scheme)) + "', input is marked '" +
                      std::string(to_string(resolved)) + "'");

    std::vector<EntityPairKey> keyset;
    for (const auto& s : keyset_names) {
      std::size_t dash = s.find('-');
      if (dash == 0 || dash == std::string::npos || dash + 1 == s.size())
        throw DataError(index_path + ": bad pair key '" + s + "'");
      keyset.push_back(EntityPairKey{EntityType{s.substr(0, dash)},
                                     EntityType{s.substr(dash + 1)}});
    }
    Partition part = partition_dataset(data.instances, keyset);

    auto load_for = [&](const std::string& filename) {
      SoftmaxModel m =
          load_model_file((fs::path(model_path) / filename).string());
      if (m.scheme != *scheme)
        throw DataError(filename + ": scheme differs from models.json");
      return m;
    };
    SoftmaxModel global = load_for(global_file);

    auto predict_bucket = [&](const std::vector<TokenizedInstance>& bucket,
                              const SoftmaxModel& model) {
      std::vector<PredictionRecord> records;
      records.reserve(bucket.size());
      for (const auto& inst : bucket)
        records.push_back(
            predict(model, to_marked(inst, *scheme, already_marked)));
      return records;
    };

    std::vector<std::vector<PredictionRecord>> groups;
    for (const auto& key : part.keyset) {
      const auto& bucket = part.buckets.at(key);
      if (bucket.empty()) continue;
      auto it = key_files.find(key.str());
      if (it != key_files.end())
        groups.push_back(predict_bucket(bucket, load_for(it->second)));
      else
        groups.push_back(predict_bucket(bucket, global));
    }
    if (!part.residual.empty())
      groups.push_back(predict_bucket(part.residual, global));

    std::vector<std::string> reference_ids;
    reference_ids.reserve(data.instances.size());
    for (const auto& inst : data.instances) reference_ids.push_back(inst.id);
    std::vector<PredictionRecord> merged =
        merge_prediction_groups(groups, reference_ids);
    tsv = predictions_to_tsv(merged, 0, false);
  }

  write_file_atomic(opt.output, tsv);
  manifest.config = {{"input", opt.input},
                     {"model", opt.model},
                     {"output", opt.output},
                     {"per_pair", per_pair ? "true" : "false"},
                     {"probs", opt.probs ? "true" : "false"},
                     {"field_map", opt.field_map}};
  write_manifest_for(manifest, opt.output);
}

StrictMode parse_strict_mode(const std::string& name) {
  if (name == "accuracy") return StrictMode::kFilteredAccuracy;
  if (name == "no-excluded") return StrictMode::kFilteredNoExcluded;
  throw std::invalid_argument("unknown strict mode '" + name +
                              "' (accuracy|no-excluded)");
}

void cmd_evaluate(const EvaluateOpts& opt) {
  RunManifest manifest{.subcommand = "evaluate",
                       .started_at = iso8601_utc_now()};
  FieldMapping mapping = make_mapping(opt.field_map, opt.inclusive_end);
  LoadedData data = load_dataset(opt.gold, mapping);
  LabelVocabulary vocab = vocabulary_for(opt.labels, data.instances, {opt.pred});
  ExternalScoreFile pred_file =
      load_external_predictions_file(resolve_input(opt.pred), "pred", vocab);

  std::unordered_map<std::string, const RelationLabel*> pred_by_id;
  pred_by_id.reserve(pred_file.records.size());
  for (const auto& rec : pred_file.records) pred_by_id[rec.id] = &rec.predicted;

  std::vector<RelationLabel> gold, pred;
  gold.reserve(data.instances.size());
  for (const auto& inst : data.instances) {
    gold.push_back(require_relation(inst));
    auto it = pred_by_id.find(inst.id);
    if (it == pred_by_id.end())
      throw DataError("missing prediction for id '" + inst.id + "'");
    pred.push_back(*it->second);
  }

  std::string text;
  if (opt.per_pair) {
    std::vector<EntityPairKey> keyset = resolve_keyset(opt.keys);
    Partition part = partition_dataset(data.instances, keyset);
    std::map<std::string, double> baselines;
    if (!opt.baseline.empty())
      baselines = load_baseline_file_path(resolve_input(opt.baseline));
    ModelComparison comp = per_pair_report(part, pred_file.records, baselines,
                                           vocab.no_relation());
    text = opt.json ? comparison_to_json(comp) : render_comparison_table(comp);
  } else {
    EvalReport report = evaluate_predictions(gold, pred, vocab,
                                             parse_strict_mode(opt.strict_mode));
    if (opt.strict_only)
      text = "strict-f1 " + render_metric(report.strict, 4) + "\n";
    else
      text = opt.json ? eval_report_to_json(report)
                      : render_eval_report(report);
  }
  emit_text(text, opt.output);
  manifest.config = {{"gold", opt.gold},
                     {"pred", opt.pred},
                     {"labels", opt.labels},
                     {"strict", opt.strict_only ? "true" : "false"},
                     {"strict_mode", opt.strict_mode},
                     {"per_pair", opt.per_pair ? "true" : "false"},
                     {"keys", opt.keys},
                     {"baseline", opt.baseline},
                     {"json", opt.json ? "true" : "false"}};
  write_manifest_for(manifest, opt.output);
}

void cmd_compare(const CompareOpts& opt) {
  RunManifest manifest{.subcommand = "compare",
                       .started_at = iso8601_utc_now()};
  FieldMapping mapping = make_mapping(opt.field_map, opt.inclusive_end);
  LoadedData data = load_dataset(opt.gold, mapping);

  std::vector<std::pair<std::string, std::string>> sources;  // name, path
  for (const auto& spec : opt.preds) {
    std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
      throw std::invalid_argument("--pred expects NAME=FILE, got '" + spec +
                                  "'");
    sources.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
  }
  if (sources.empty())
    throw std::invalid_argument("compare needs at least one --pred NAME=FILE");

  std::vector<std::string> paths;
  for (const auto& [name, path] : sources) paths.push_back(path);
  LabelVocabulary vocab = vocabulary_for(opt.labels, data.instances, paths);

  std::vector<ExternalScoreFile> files;
  files.reserve(sources.size());
  for (const auto& [name, path] : sources)
    files.push_back(
        load_external_predictions_file(resolve_input(path), name, vocab));

  std::vector<std::pair<std::string, RelationLabel>> gold_by_id;
  gold_by_id.reserve(data.instances.size());
  for (const auto& inst : data.instances)
    gold_by_id.emplace_back(inst.id, require_relation(inst));

  ModelComparison comp = compare_models(files, gold_by_id, vocab);
  std::string text;
  if (opt.json) {
    text = comparison_to_json(comp);
  } else {
    text = render_comparison_table(comp);
    if (opt.per_class) text += "\n" + render_per_class_grid(comp);
  }
  emit_text(text, opt.output);
  std::string names;
  for (const auto& [name, path] : sources) {
    if (!names.empty()) names += ",";
    names += name;
  }
  manifest.config = {{"gold", opt.gold},
                     {"sources", names},
                     {"labels", opt.labels},
                     {"per_class", opt.per_class ? "true" : "false"},
                     {"json", opt.json ? "true" : "false"}};
  write_manifest_for(manifest, opt.output);
}

void add_common(CLI::App* sub, CommonOpts& opt) {
  sub->add_option("--input", opt.input, "input dataset (JSONL)")->required();
  sub->add_option("--field-map", opt.field_map,
                  "JSON file remapping record field names");
  sub->add_flag("--inclusive-end", opt.inclusive_end,
                "treat span ends as inclusive indices");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"relation-extraction pipeline toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  IngestOpts ingest;
  CLI::App* sub_ingest =
      app.add_subcommand("ingest", "normalize a corpus to interchange JSONL");
  add_common(sub_ingest, ingest);
  sub_ingest->add_option("--output", ingest.output, "normalized JSONL path")
      ->required();
  sub_ingest->add_flag("--lenient", ingest.lenient,
                       "skip malformed records instead of failing");

  StatsOpts stats;
  CLI::App* sub_stats =
      app.add_subcommand("stats", "corpus census: relations, pairs, lengths");
  add_common(sub_stats, stats);
  sub_stats->add_option("--output", stats.output, "write report here");
  sub_stats->add_flag("--json", stats.json, "machine-readable output");

  PreprocessOpts preprocess;
  CLI::App* sub_preprocess = app.add_subcommand(
      "preprocess", "insert entity markers and remap spans");
  add_common(sub_preprocess, preprocess);
  sub_preprocess
      ->add_option("--output", preprocess.output, "marked JSONL path")
      ->required();
  sub_preprocess->add_option(
      "--scheme", preprocess.scheme,
      "marker scheme: typed-punct|entity-marker|entity-mask|none");

  RouteOpts route;
  CLI::App* sub_route =
      app.add_subcommand("route", "partition census by entity-type pair");
  add_common(sub_route, route);
  sub_route->add_option("--output", route.output, "write census here");
  sub_route->add_option("--keys", route.keys, "pair keyset file");

  TrainOpts train_opt;
  CLI::App* sub_train =
      app.add_subcommand("train", "fit softmax relation classifier(s)");
  add_common(sub_train, train_opt);
  sub_train->add_option("--model", train_opt.model, "model artifact path")
      ->required();
  sub_train->add_option("--scheme", train_opt.scheme,
                        "marker scheme for raw input (default typed-punct)");
  sub_train->add_option("--labels", train_opt.labels,
                        "label vocabulary file fixing label order");
  sub_train->add_option("--keys", train_opt.keys,
                        "pair keyset file (per-pair mode)");
  sub_train->add_flag("--per-pair", train_opt.per_pair,
                      "train one model per entity-type pair plus fallback");
  sub_train->add_option("--seed", train_opt.seed, "RNG seed (default 42)");
  sub_train->add_option("--jobs", train_opt.jobs,
                        "concurrent per-pair training tasks");
  sub_train->add_option("--batch-size", train_opt.cfg.batch_size,
                        "SGD mini-batch size (default 8)");
  sub_train->add_option("--epochs", train_opt.cfg.epochs,
                        "training passes (default 5)");
  sub_train->add_option("--learning-rate", train_opt.cfg.learning_rate,
                        "initial learning rate (default 0.1)");
  sub_train->add_option("--l2", train_opt.cfg.l2,
                        "L2 regularization strength (default 1e-6)");
  sub_train->add_option("--dim", train_opt.cfg.dim,
                        "hashing dimension, power of two (default 2^20)");
  sub_train->add_option("--ngram-orders", train_opt.cfg.ngram_orders,
                        "token n-gram orders (default 1 2)");

  PredictOpts predict_opt;
  CLI::App* sub_predict =
      app.add_subcommand("predict", "label instances with a trained model");
  add_common(sub_predict, predict_opt);
  sub_predict->add_option("--model", predict_opt.model,
                          "model artifact or per-pair model directory")
      ->required();
  sub_predict->add_option("--output", predict_opt.output,
                          "prediction TSV path")
      ->required();
  sub_predict->add_option("--scheme", predict_opt.scheme,
                          "marker scheme for raw input");
  sub_predict->add_flag("--per-pair", predict_opt.per_pair,
                        "treat --model as a per-pair model directory");
  sub_predict->add_flag("--probs", predict_opt.probs,
                        "emit per-label probability columns");

  EvaluateOpts evaluate;
  CLI::App* sub_evaluate =
      app.add_subcommand("evaluate", "score predictions against gold labels");
  sub_evaluate->add_option("--gold", evaluate.gold, "gold dataset (JSONL)")
      ->required();
  sub_evaluate->add_option("--pred", evaluate.pred, "prediction TSV")
      ->required();
  sub_evaluate->add_option("--labels", evaluate.labels,
                           "label vocabulary file");
  sub_evaluate->add_option("--field-map", evaluate.field_map,
                           "JSON file remapping record field names");
  sub_evaluate->add_flag("--inclusive-end", evaluate.inclusive_end,
                         "treat span ends as inclusive indices");
  sub_evaluate->add_flag("--strict", evaluate.strict_only,
                         "print only the strict validation F1");
  sub_evaluate->add_option("--strict-mode", evaluate.strict_mode,
                           "strict metric variant: accuracy|no-excluded");
  sub_evaluate->add_flag("--per-pair", evaluate.per_pair,
                         "report per entity-type pair");
  sub_evaluate->add_option("--keys", evaluate.keys,
                           "pair keyset file (per-pair mode)");
  sub_evaluate->add_option("--baseline", evaluate.baseline,
                           "pair-key<TAB>baseline-F1 file (per-pair mode)");
  sub_evaluate->add_option("--output", evaluate.output, "write report here");
  sub_evaluate->add_flag("--json", evaluate.json, "machine-readable output");

  CompareOpts compare;
  CLI::App* sub_compare = app.add_subcommand(
      "compare", "score several prediction sources side by side");
  sub_compare->add_option("--gold", compare.gold, "gold dataset (JSONL)")
      ->required();
  sub_compare->add_option("--pred", compare.preds,
                          "prediction source as NAME=FILE (repeatable)");
  sub_compare->add_option("--labels", compare.labels,
                          "label vocabulary file");
  sub_compare->add_option("--field-map", compare.field_map,
                          "JSON file remapping record field names");
  sub_compare->add_flag("--inclusive-end", compare.inclusive_end,
                        "treat span ends as inclusive indices");
  sub_compare->add_flag("--per-class", compare.per_class,
                        "append the class-by-model F1 grid");
  sub_compare->add_option("--output", compare.output, "write report here");
  sub_compare->add_flag("--json", compare.json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sub_ingest->parsed()) cmd_ingest(ingest);
    if (sub_stats->parsed()) cmd_stats(stats);
    if (sub_preprocess->parsed()) cmd_preprocess(preprocess);
    if (sub_route->parsed()) cmd_route(route);
    if (sub_train->parsed()) cmd_train(train_opt);
    if (sub_predict->parsed()) cmd_predict(predict_opt);
    if (sub_evaluate->parsed()) cmd_evaluate(evaluate);
    if (sub_compare->parsed()) cmd_compare(compare);
    return 0;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace retk
