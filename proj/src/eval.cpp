#include "retk/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "retk/common.hpp"

namespace retk {

ConfusionMatrix confusion(const std::vector<RelationLabel>& gold,
                          const std::vector<RelationLabel>& pred,
                          const LabelVocabulary& vocabulary) {
  if (gold.size() != pred.size())
    throw DataError("confusion: gold has " + std::to_string(gold.size()) +
                    " labels, predictions have " + std::to_string(pred.size()));
  ConfusionMatrix cm;
  cm.labels.reserve(vocabulary.labels.size());
  for (const auto& l : vocabulary.labels) cm.labels.push_back(l.name);
  cm.counts.assign(cm.labels.size(),
                   std::vector<std::uint64_t>(cm.labels.size(), 0));
  for (std::size_t i = 0; i < gold.size(); i++) {
    auto g = vocabulary.index_of(gold[i].name);
    if (!g) throw DataError("unknown label '" + gold[i].name + "'");
    auto p = vocabulary.index_of(pred[i].name);
    if (!p) throw DataError("unknown label '" + pred[i].name + "'");
    cm.counts[*g][*p]++;
    cm.total++;
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total == 0) throw DataError("empty confusion matrix");
  std::uint64_t correct = 0;
  for (std::size_t i = 0; i < cm.labels.size(); i++) correct += cm.counts[i][i];
  return static_cast<double>(correct) / static_cast<double>(cm.total);
}

Metric micro_f1(const ConfusionMatrix& cm, const RelationLabel& no_relation) {
  if (cm.total == 0) throw DataError("empty confusion matrix");
  // The sentinel may be absent from the vocabulary (e.g. corpora where
  // every instance expresses a relation); then nothing is excluded.
  std::size_t no_idx = cm.labels.size();
  for (std::size_t i = 0; i < cm.labels.size(); i++)
    if (cm.labels[i] == no_relation.name) no_idx = i;

  std::uint64_t correct = 0, pred_pos = 0, gold_pos = 0;
  for (std::size_t g = 0; g < cm.labels.size(); g++) {
    for (std::size_t p = 0; p < cm.labels.size(); p++) {
      std::uint64_t c = cm.counts[g][p];
      if (p != no_idx) pred_pos += c;
      if (g != no_idx) gold_pos += c;
      if (g == p && g != no_idx) correct += c;
    }
  }
  if (pred_pos == 0 && gold_pos == 0) return std::nullopt;
  double precision =
      pred_pos ? static_cast<double>(correct) / static_cast<double>(pred_pos)
               : 0.0;
  double recall =
      gold_pos ? static_cast<double>(correct) / static_cast<double>(gold_pos)
               : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<ClassScore> per_class_f1(const ConfusionMatrix& cm) {
  if (cm.total == 0) throw DataError("empty confusion matrix");
  std::vector<ClassScore> scores;
  scores.reserve(cm.labels.size());
  for (std::size_t l = 0; l < cm.labels.size(); l++) {
    std::uint64_t tp = cm.counts[l][l], fp = 0, fn = 0;
    for (std::size_t o = 0; o < cm.labels.size(); o++) {
      if (o == l) continue;
      fp += cm.counts[o][l];
      fn += cm.counts[l][o];
    }
    ClassScore s;
    s.label = cm.labels[l];
    s.support = tp + fn;
    std::uint64_t denom = 2 * tp + fp + fn;
    s.f1 = denom ? 2.0 * static_cast<double>(tp) / static_cast<double>(denom)
                 : 0.0;
    s.zero_support = denom == 0;
    scores.push_back(std::move(s));
  }
  return scores;
}

Metric strict_f1(const std::vector<RelationLabel>& gold,
                 const std::vector<RelationLabel>& pred,
                 const RelationLabel& no_relation, StrictMode mode) {
  if (gold.size() != pred.size())
    throw DataError("strict_f1: gold has " + std::to_string(gold.size()) +
                    " labels, predictions have " + std::to_string(pred.size()));
  std::vector<RelationLabel> fg, fp;
  for (std::size_t i = 0; i < gold.size(); i++) {
    if (gold[i].name == no_relation.name && pred[i].name == no_relation.name)
      continue;
    fg.push_back(gold[i]);
    fp.push_back(pred[i]);
  }
  if (fg.empty()) return std::nullopt;

  if (mode == StrictMode::kFilteredAccuracy) {
    std::uint64_t correct = 0;
    for (std::size_t i = 0; i < fg.size(); i++)
      if (fg[i].name == fp[i].name) correct++;
    return static_cast<double>(correct) / static_cast<double>(fg.size());
  }

  std::vector<RelationLabel> seen = fg;
  seen.insert(seen.end(), fp.begin(), fp.end());
  seen.push_back(no_relation);
  LabelVocabulary vocab = vocabulary_from_labels(seen);
  return micro_f1(confusion(fg, fp, vocab), no_relation);
}

EvalReport evaluate_predictions(const std::vector<RelationLabel>& gold,
                                const std::vector<RelationLabel>& pred,
                                const LabelVocabulary& vocabulary,
                                StrictMode mode) {
  RelationLabel no_rel = vocabulary.no_relation();
  ConfusionMatrix cm = confusion(gold, pred, vocabulary);
  EvalReport report;
  report.accuracy = accuracy(cm);
  report.micro = micro_f1(cm, no_rel);
  report.strict = strict_f1(gold, pred, no_rel, mode);
  report.per_class = per_class_f1(cm);
  report.instance_count = cm.total;
  for (std::size_t i = 0; i < gold.size(); i++)
    if (gold[i].name == no_rel.name && pred[i].name == no_rel.name)
      report.filtered_out++;
  return report;
}

ModelComparison per_pair_report(const Partition& partition,
                                const std::vector<PredictionRecord>& merged,
                                const std::map<std::string, double>& baselines,
                                const RelationLabel& no_relation) {
  std::unordered_map<std::string, const RelationLabel*> pred_by_id;
  pred_by_id.reserve(merged.size());
  for (const auto& rec : merged) pred_by_id[rec.id] = &rec.predicted;

  ModelComparison comp;
  auto score_bucket = [&](const std::string& name,
                          const std::vector<TokenizedInstance>& bucket) {
    ComparisonRow row;
    row.name = name;
    row.support = bucket.size();
    auto b = baselines.find(name);
    if (b != baselines.end()) row.baseline = b->second;
    if (!bucket.empty()) {
      std::vector<RelationLabel> gold, pred, seen;
      for (const auto& inst : bucket) {
        if (!inst.relation)
          throw DataError("instance '" + inst.id + "' has no relation label");
        auto it = pred_by_id.find(inst.id);
        if (it == pred_by_id.end())
          throw DataError("missing prediction for id '" + inst.id + "'");
        gold.push_back(*inst.relation);
        pred.push_back(*it->second);
        seen.push_back(*inst.relation);
        seen.push_back(*it->second);
      }
      LabelVocabulary vocab = vocabulary_from_labels(seen);
      ConfusionMatrix cm = confusion(gold, pred, vocab);
      row.accuracy = accuracy(cm);
      row.micro = micro_f1(cm, no_relation);
    }
    comp.rows.push_back(std::move(row));
  };

  for (const auto& key : partition.keyset)
    score_bucket(key.str(), partition.buckets.at(key));
  if (!partition.residual.empty()) score_bucket("RESIDUAL", partition.residual);
  return comp;
}

ModelComparison compare_models(
    const std::vector<ExternalScoreFile>& sources,
    const std::vector<std::pair<std::string, RelationLabel>>& gold_by_id,
    const LabelVocabulary& vocabulary) {
  RelationLabel no_rel = vocabulary.no_relation();
  std::vector<RelationLabel> gold;
  gold.reserve(gold_by_id.size());
  for (const auto& [id, label] : gold_by_id) gold.push_back(label);

  ModelComparison comp;
  for (const auto& l : vocabulary.labels) comp.class_labels.push_back(l.name);
  for (const auto& source : sources) {
    std::unordered_map<std::string, const RelationLabel*> by_id;
    by_id.reserve(source.records.size());
    for (const auto& rec : source.records) by_id[rec.id] = &rec.predicted;

    std::vector<RelationLabel> pred;
    pred.reserve(gold_by_id.size());
    for (const auto& [id, label] : gold_by_id) {
      auto it = by_id.find(id);
      if (it == by_id.end())
        throw DataError("source '" + source.model_name +
                        "' has no prediction for id '" + id + "'");
      pred.push_back(*it->second);
    }
    ConfusionMatrix cm = confusion(gold, pred, vocabulary);
    ComparisonRow row;
    row.name = source.model_name;
    row.support = cm.total;
    row.accuracy = accuracy(cm);
    row.micro = micro_f1(cm, no_rel);
    row.per_class = per_class_f1(cm);
    comp.rows.push_back(std::move(row));
  }
  return comp;
}

std::map<std::string, double> load_baseline_file(const std::string& text,
                                                 std::string_view source_name) {
  std::map<std::string, double> baselines;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw DataError(std::string(source_name) + " line " +
                      std::to_string(lineno) +
                      ": expected pair-key<TAB>baseline-F1");
    std::string key = line.substr(0, tab);
    std::string num = line.substr(tab + 1);
    char* end = nullptr;
    double v = std::strtod(num.c_str(), &end);
    if (end == num.c_str() || *end != '\0')
      throw DataError(std::string(source_name) + " line " +
                      std::to_string(lineno) + ": bad baseline value '" + num +
                      "'");
    if (!baselines.emplace(key, v).second)
      throw DataError(std::string(source_name) + " line " +
                      std::to_string(lineno) + ": duplicate pair key '" + key +
                      "'");
  }
  return baselines;
}

std::map<std::string, double> load_baseline_file_path(const std::string& path) {
  return load_baseline_file(read_file(path), path);
}

// --- rendering ---

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string render_metric(const Metric& m, int decimals) {
  return m ? fixed(*m, decimals) : "n/a";
}

std::string render_comparison_table(const ModelComparison& comp) {
  bool with_baseline = false;
  for (const auto& row : comp.rows)
    if (row.baseline) with_baseline = true;

  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"model", "micro-f1", "accuracy"};
  if (with_baseline) header.push_back("baseline");
  cells.push_back(header);
  for (const auto& row : comp.rows) {
    std::vector<std::string> line = {row.name, render_metric(row.micro, 2),
                                     render_metric(row.accuracy, 2)};
    if (with_baseline)
      line.push_back(row.baseline ? fixed(*row.baseline, 2) : "n/a");
    cells.push_back(std::move(line));
  }

  std::vector<std::size_t> widths(cells[0].size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); c++)
      widths[c] = std::max(widths[c], line[c].size());

  std::string out;
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); c++) {
      if (c) out += ' ';
      out += c + 1 == line.size() ? line[c] : pad(line[c], widths[c]);
    }
    out += '\n';
  }
  return out;
}

std::string render_per_class_grid(const ModelComparison& comp) {
  // Rows are classes, columns are models; cells are per-class F1.
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"class"};
  for (const auto& row : comp.rows) header.push_back(row.name);
  cells.push_back(header);

  for (std::size_t l = 0; l < comp.class_labels.size(); l++) {
    std::vector<std::string> line = {comp.class_labels[l]};
    for (const auto& row : comp.rows) {
      const ClassScore* found = nullptr;
      for (const auto& s : row.per_class)
        if (s.label == comp.class_labels[l]) found = &s;
      line.push_back(found ? fixed(found->f1, 2) : "n/a");
    }
    cells.push_back(std::move(line));
  }

  std::vector<std::size_t> widths(cells[0].size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); c++)
      widths[c] = std::max(widths[c], line[c].size());

  std::string out;
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); c++) {
      if (c) out += ' ';
      out += c + 1 == line.size() ? line[c] : pad(line[c], widths[c]);
    }
    out += '\n';
  }
  return out;
}

std::string render_eval_report(const EvalReport& report) {
  std::string out;
  out += "instances    " + std::to_string(report.instance_count) + "\n";
  out += "accuracy     " + fixed(report.accuracy, 4) + "\n";
  out += "micro-f1     " + render_metric(report.micro, 4) + "\n";
  out += "strict-f1    " + render_metric(report.strict, 4) + "\n";
  out += "filtered-out " + std::to_string(report.filtered_out) + "\n";
  out += "per-class-f1\n";
  for (const auto& s : report.per_class) {
    out += "  " + pad(s.label, 24) + " " + fixed(s.f1, 4) + " (support " +
           std::to_string(s.support) + ")\n";
  }
  return out;
}

namespace {

nlohmann::json metric_json(const Metric& m) {
  if (!m) return nullptr;
  return *m;
}

nlohmann::json class_scores_json(const std::vector<ClassScore>& scores) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : scores) {
    arr.push_back({{"label", s.label},
                   {"f1", s.f1},
                   {"support", s.support},
                   {"zero_support", s.zero_support}});
  }
  return arr;
}

}  // namespace

std::string eval_report_to_json(const EvalReport& report) {
  nlohmann::json j{{"instances", report.instance_count},
                   {"accuracy", report.accuracy},
                   {"micro_f1", metric_json(report.micro)},
                   {"strict_f1", metric_json(report.strict)},
                   {"filtered_out", report.filtered_out},
                   {"per_class", class_scores_json(report.per_class)}};
  return j.dump(2) + "\n";
}

std::string comparison_to_json(const ModelComparison& comp) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : comp.rows) {
    nlohmann::json r{{"name", row.name},
                     {"micro_f1", metric_json(row.micro)},
                     {"accuracy", metric_json(row.accuracy)},
                     {"support", row.support}};
    if (row.baseline) r["baseline"] = *row.baseline;
    if (!row.per_class.empty())
      r["per_class"] = class_scores_json(row.per_class);
    rows.push_back(std::move(r));
  }
  nlohmann::json j{{"rows", std::move(rows)}};
  if (!comp.class_labels.empty()) j["class_labels"] = comp.class_labels;
  return j.dump(2) + "\n";
}

}  // namespace retk
