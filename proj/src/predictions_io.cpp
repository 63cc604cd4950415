#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <sstream>
#include <unordered_set>

#include "retk/classifier.hpp"
#include "retk/common.hpp"

namespace retk {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

[[noreturn]] void row_error(std::string_view source, std::size_t row,
                            const std::string& message) {
  throw DataError(std::string(source) + " row " + std::to_string(row) + ": " +
                  message);
}

}  // namespace

ExternalScoreFile load_external_predictions(std::istream& in,
                                            std::string model_name,
                                            const LabelVocabulary& vocabulary,
                                            std::string_view source_name) {
  ExternalScoreFile file;
  file.model_name = std::move(model_name);

  const std::size_t k = vocabulary.labels.size();
  std::string line;
  std::size_t row = 0;
  bool with_probs = false;
  bool saw_header = false;
  std::unordered_set<std::string> ids;

  while (std::getline(in, line)) {
    row++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols = split_tabs(line);

    if (!saw_header) {
      if (cols.size() < 2 || cols[0] != "id" || cols[1] != "label")
        row_error(source_name, row, "bad header (expected id<TAB>label)");
      if (cols.size() > 2) {
        if (cols.size() != 2 + k)
          row_error(source_name, row,
                    "header declares " + std::to_string(cols.size() - 2) +
                        " probability columns, vocabulary has " +
                        std::to_string(k));
        for (std::size_t i = 0; i < k; i++)
          if (cols[2 + i] != "p_" + std::to_string(i))
            row_error(source_name, row, "bad probability column '" +
                                            cols[2 + i] + "'");
        with_probs = true;
      }
      saw_header = true;
      continue;
    }

    std::size_t expected = with_probs ? 2 + k : 2;
    if (cols.size() != expected)
      row_error(source_name, row,
                "expected " + std::to_string(expected) + " columns, got " +
                    std::to_string(cols.size()));
    if (cols[0].empty()) row_error(source_name, row, "empty id");
    if (!ids.insert(cols[0]).second)
      row_error(source_name, row, "duplicate prediction id '" + cols[0] + "'");
    if (!vocabulary.index_of(cols[1]))
      row_error(source_name, row, "unknown label '" + cols[1] + "'");

    PredictionRecord rec;
    rec.id = cols[0];
    rec.predicted = RelationLabel{cols[1]};
    if (with_probs) {
      std::vector<double> p(k);
      for (std::size_t i = 0; i < k; i++) {
        char* end = nullptr;
        p[i] = std::strtod(cols[2 + i].c_str(), &end);
        if (end == cols[2 + i].c_str() || *end != '\0' || !std::isfinite(p[i]))
          row_error(source_name, row,
                    "bad probability value '" + cols[2 + i] + "'");
      }
      std::size_t best = 0;
      for (std::size_t i = 1; i < k; i++)
        if (p[i] > p[best]) best = i;
      if (vocabulary.labels[best].name != cols[1])
        row_error(source_name, row,
                  "probabilities argmax to '" + vocabulary.labels[best].name +
                      "' but label column says '" + cols[1] + "'");
      rec.probabilities = std::move(p);
    }
    file.records.push_back(std::move(rec));
  }

  if (!saw_header)
    throw DataError(std::string(source_name) + ": empty prediction file");
  return file;
}

ExternalScoreFile load_external_predictions_file(const std::string& path,
                                                 std::string model_name,
                                                 const LabelVocabulary& vocab) {
  std::istringstream in(read_file(path));
  return load_external_predictions(in, std::move(model_name), vocab, path);
}

std::string predictions_to_tsv(const std::vector<PredictionRecord>& records,
                               std::size_t vocabulary_size,
                               bool with_probabilities) {
  std::string out = "id\tlabel";
  if (with_probabilities)
    for (std::size_t i = 0; i < vocabulary_size; i++)
      out += "\tp_" + std::to_string(i);
  out += '\n';

  char num[64];
  for (const auto& rec : records) {
    out += rec.id;
    out += '\t';
    out += rec.predicted.name;
    if (with_probabilities) {
      if (!rec.probabilities || rec.probabilities->size() != vocabulary_size)
        throw DataError("prediction '" + rec.id +
                        "' lacks probabilities over the label vocabulary");
      for (double p : *rec.probabilities) {
        std::snprintf(num, sizeof(num), "%.17g", p);
        out += '\t';
        out += num;
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace retk
