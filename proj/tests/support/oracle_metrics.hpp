#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

// Independent brute-force metric implementations, computed directly from
// label lists. Deliberately shares no code with the library so the two can
// check each other.
namespace oracle {

inline double accuracy(const std::vector<std::string>& gold,
                       const std::vector<std::string>& pred) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); i++)
    if (gold[i] == pred[i]) correct++;
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

// Micro F1 with the no-relation sentinel excluded as a positive class.
inline std::optional<double> micro_f1(const std::vector<std::string>& gold,
                                      const std::vector<std::string>& pred,
                                      const std::string& no_rel) {
  std::size_t correct = 0, pred_pos = 0, gold_pos = 0;
  for (std::size_t i = 0; i < gold.size(); i++) {
    if (pred[i] != no_rel) pred_pos++;
    if (gold[i] != no_rel) gold_pos++;
    if (gold[i] == pred[i] && gold[i] != no_rel) correct++;
  }
  if (pred_pos == 0 && gold_pos == 0) return std::nullopt;
  double p = pred_pos ? static_cast<double>(correct) / pred_pos : 0.0;
  double r = gold_pos ? static_cast<double>(correct) / gold_pos : 0.0;
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

inline double class_f1(const std::vector<std::string>& gold,
                       const std::vector<std::string>& pred,
                       const std::string& label) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); i++) {
    if (gold[i] == label && pred[i] == label) tp++;
    if (gold[i] != label && pred[i] == label) fp++;
    if (gold[i] == label && pred[i] != label) fn++;
  }
  std::size_t denom = 2 * tp + fp + fn;
  return denom ? 2.0 * static_cast<double>(tp) / static_cast<double>(denom)
               : 0.0;
}

// Keep every instance except correctly predicted no-relation ones, then
// score the remainder.
inline std::optional<double> strict_accuracy(
    const std::vector<std::string>& gold, const std::vector<std::string>& pred,
    const std::string& no_rel) {
  std::size_t kept = 0, correct = 0;
  for (std::size_t i = 0; i < gold.size(); i++) {
    if (gold[i] == no_rel && pred[i] == no_rel) continue;
    kept++;
    if (gold[i] == pred[i]) correct++;
  }
  if (kept == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(kept);
}

inline std::optional<double> strict_micro_f1(
    const std::vector<std::string>& gold, const std::vector<std::string>& pred,
    const std::string& no_rel) {
  std::vector<std::string> fg, fp;
  for (std::size_t i = 0; i < gold.size(); i++) {
    if (gold[i] == no_rel && pred[i] == no_rel) continue;
    fg.push_back(gold[i]);
    fp.push_back(pred[i]);
  }
  if (fg.empty()) return std::nullopt;
  return micro_f1(fg, fp, no_rel);
}

struct RandomCase {
  std::vector<std::string> gold;
  std::vector<std::string> pred;
  std::vector<std::string> labels;  // distinct labels, sentinel included
};

// Random scoring scenario: up to 22 labels including the sentinel, up to
// 200 instances, labels drawn non-uniformly so degenerate shapes (all-NO,
// perfect, disjoint) appear regularly.
inline RandomCase random_case(std::mt19937_64& rng,
                              const std::string& no_rel) {
  RandomCase c;
  std::uniform_int_distribution<std::size_t> label_count(2, 22);
  std::uniform_int_distribution<std::size_t> instance_count(1, 200);
  std::size_t k = label_count(rng);
  c.labels.push_back(no_rel);
  for (std::size_t i = 1; i < k; i++)
    c.labels.push_back("rel_" + std::to_string(i));

  std::size_t n = instance_count(rng);
  // Bias towards the sentinel so correct-NO filtering paths get exercised.
  std::uniform_int_distribution<std::size_t> pick(0, 2 * k - 1);
  auto draw = [&] {
    std::size_t v = pick(rng);
    return c.labels[v < k ? v : 0];
  };
  for (std::size_t i = 0; i < n; i++) {
    c.gold.push_back(draw());
    // Predictions correlate with gold half the time.
    c.pred.push_back(rng() % 2 ? c.gold.back() : draw());
  }
  return c;
}

}  // namespace oracle
