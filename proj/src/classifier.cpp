#include "retk/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "retk/common.hpp"

namespace retk {

namespace {

// Feature keys are namespaced strings joined by a unit separator, so token
// content can never collide with the namespace structure.
constexpr char kSep = '\x1f';

const char* distance_bucket(long d) {
  if (d <= 0) return "0";
  if (d == 1) return "1";
  if (d == 2) return "2";
  if (d == 3) return "3";
  if (d == 4) return "4";
  if (d <= 7) return "5-7";
  if (d <= 15) return "8-15";
  if (d <= 31) return "16-31";
  if (d <= 63) return "32-63";
  return "64+";
}

void softmax_inplace(std::vector<double>& scores) {
  double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double& s : scores) {
    s = std::exp(s - mx);
    z += s;
  }
  for (double& s : scores) s /= z;
}

std::size_t argmax_lowest(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); i++)
    if (v[i] > v[best]) best = i;
  return best;
}

// Fisher-Yates with an explicit generator so shuffle order is identical on
// every platform (std::shuffle's draw sequence is implementation-defined).
void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; i--) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("learning rate must be > 0");
  if (l2 < 0.0) throw std::invalid_argument("l2 strength must be >= 0");
  if (dim < 2 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("hashing dimension must be a power of two");
  if (ngram_orders.empty())
    throw std::invalid_argument("at least one n-gram order required");
  for (std::size_t k : ngram_orders)
    if (k < 1) throw std::invalid_argument("n-gram orders must be >= 1");
}

std::optional<std::size_t> SoftmaxModel::label_index(
    std::string_view name) const {
  for (std::size_t i = 0; i < labels.size(); i++)
    if (labels[i].name == name) return i;
  return std::nullopt;
}

FeatureVector featurize(const MarkedInstance& marked, const TrainConfig& cfg) {
  const auto& toks = marked.tokens;
  const std::uint32_t mask = cfg.dim - 1;
  std::vector<std::uint32_t> idx;
  idx.reserve(toks.size() * cfg.ngram_orders.size() + 2);

  std::string key;
  for (std::size_t k : cfg.ngram_orders) {
    if (toks.size() < k) continue;
    std::string ns = "g" + std::to_string(k);
    for (std::size_t i = 0; i + k <= toks.size(); i++) {
      key = ns;
      for (std::size_t j = 0; j < k; j++) {
        key += kSep;
        key += toks[i + j];
      }
      idx.push_back(static_cast<std::uint32_t>(fnv1a64(key)) & mask);
    }
  }

  key = "pt";
  key += kSep;
  key += marked.subj.etype.name;
  key += kSep;
  key += marked.obj.etype.name;
  idx.push_back(static_cast<std::uint32_t>(fnv1a64(key)) & mask);

  const EntitySpan& first = marked.subj.start <= marked.obj.start
                                ? marked.subj
                                : marked.obj;
  const EntitySpan& second = &first == &marked.subj ? marked.obj : marked.subj;
  long dist = static_cast<long>(second.start) - static_cast<long>(first.end);
  key = "dist";
  key += kSep;
  key += distance_bucket(dist);
  idx.push_back(static_cast<std::uint32_t>(fnv1a64(key)) & mask);

  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());

  FeatureVector fv;
  fv.dim = cfg.dim;
  fv.entries.reserve(idx.size());
  for (std::uint32_t i : idx) fv.entries.emplace_back(i, 1.0f);
  return fv;
}

namespace {

struct Scorer {
  const std::vector<double>& bias;
  const std::unordered_map<std::uint32_t, std::vector<double>>& weights;
  double scale;

  std::vector<double> scores(const FeatureVector& fv) const {
    std::vector<double> s = bias;
    for (const auto& [j, x] : fv.entries) {
      auto it = weights.find(j);
      if (it == weights.end()) continue;
      for (std::size_t l = 0; l < s.size(); l++)
        s[l] += scale * it->second[l] * x;
    }
    return s;
  }
};

double dataset_loss(const Scorer& sc, const std::vector<LabeledVector>& data,
                    double l2) {
  double ce = 0.0;
  for (const auto& ex : data) {
    std::vector<double> s = sc.scores(ex.features);
    double mx = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (double v : s) z += std::exp(v - mx);
    ce += -(s[ex.label] - mx - std::log(z));
  }
  ce /= static_cast<double>(data.size());
  double sq = 0.0;
  for (const auto& [j, row] : sc.weights)
    for (double w : row) sq += w * w;
  return ce + 0.5 * l2 * sc.scale * sc.scale * sq;
}

}  // namespace

SoftmaxModel train(const std::vector<TrainingExample>& data,
                   const TrainConfig& cfg, const LabelVocabulary* vocabulary,
                   TrainDiagnostics* diagnostics) {
  cfg.validate();

  std::set<std::string> seen;
  for (const auto& [inst, label] : data) seen.insert(label.name);
  if (seen.size() < 2) throw DataError("degenerate label set");

  std::vector<std::string> label_names;
  if (vocabulary)
    for (const auto& l : vocabulary->labels) label_names.push_back(l.name);
  if (!vocabulary) label_names.assign(seen.begin(), seen.end());

  std::unordered_map<std::string, std::size_t> label_index;
  for (std::size_t i = 0; i < label_names.size(); i++)
    label_index[label_names[i]] = i;

  const MarkerScheme scheme = data.front().first.scheme;
  std::vector<LabeledVector> examples;
  examples.reserve(data.size());
  for (const auto& [inst, label] : data) {
    if (inst.scheme != scheme)
      throw DataError("mixed marker schemes in training data");
    auto it = label_index.find(label.name);
    if (it == label_index.end())
      throw DataError("training label '" + label.name +
                      "' not in vocabulary");
    examples.push_back({featurize(inst, cfg), it->second});
  }

  const std::size_t L = label_names.size();
  const std::size_t N = examples.size();
  std::vector<double> bias(L, 0.0);
  std::unordered_map<std::uint32_t, std::vector<double>> weights;
  double scale = 1.0;

  auto fold_scale = [&] {
    for (auto& [j, row] : weights)
      for (double& w : row) w *= scale;
    scale = 1.0;
  };

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(N);
  for (std::size_t i = 0; i < N; i++) order[i] = i;

  std::unordered_map<std::uint32_t, std::vector<double>> grad;
  std::vector<double> grad_bias(L);
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; epoch++) {
    shuffle_indices(order, rng);
    for (std::size_t off = 0; off < N; off += cfg.batch_size) {
      std::size_t count = std::min(cfg.batch_size, N - off);
      step++;
      double eta = cfg.learning_rate / std::sqrt(static_cast<double>(step));

      grad.clear();
      std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
      Scorer sc{bias, weights, scale};
      for (std::size_t b = 0; b < count; b++) {
        const LabeledVector& ex = examples[order[off + b]];
        std::vector<double> p = sc.scores(ex.features);
        softmax_inplace(p);
        p[ex.label] -= 1.0;
        for (std::size_t l = 0; l < L; l++) grad_bias[l] += p[l];
        for (const auto& [j, x] : ex.features.entries) {
          auto& g = grad[j];
          if (g.empty()) g.assign(L, 0.0);
          for (std::size_t l = 0; l < L; l++) g[l] += p[l] * x;
        }
      }

      // L2 decay applied as a global scale; the data-term update is divided
      // back by the scale so the effective weights see the exact step.
      scale *= 1.0 - eta * cfg.l2;
      if (scale < 1e-9) fold_scale();
      double k = eta / (static_cast<double>(count) * scale);
      for (const auto& [j, g] : grad) {
        auto& row = weights[j];
        if (row.empty()) row.assign(L, 0.0);
        for (std::size_t l = 0; l < L; l++) row[l] -= k * g[l];
      }
      for (std::size_t l = 0; l < L; l++)
        bias[l] -= eta * grad_bias[l] / static_cast<double>(count);
    }
    if (diagnostics)
      diagnostics->epoch_losses.push_back(
          dataset_loss(Scorer{bias, weights, scale}, examples, cfg.l2));
  }

  fold_scale();

  SoftmaxModel model;
  model.labels.reserve(L);
  for (const auto& name : label_names)
    model.labels.push_back(RelationLabel{name});
  model.bias = std::move(bias);
  model.weights = std::move(weights);
  model.scheme = scheme;
  model.config = cfg;
  return model;
}

std::vector<double> predict_probabilities(const SoftmaxModel& model,
                                          const FeatureVector& features) {
  Scorer sc{model.bias, model.weights, 1.0};
  std::vector<double> p = sc.scores(features);
  softmax_inplace(p);
  return p;
}

PredictionRecord predict(const SoftmaxModel& model,
                         const MarkedInstance& marked) {
  if (marked.scheme != model.scheme)
    throw DataError("marker scheme mismatch: model expects '" +
                    std::string(to_string(model.scheme)) +
                    "', instance '" + marked.id + "' uses '" +
                    std::string(to_string(marked.scheme)) + "'");
  std::vector<double> p =
      predict_probabilities(model, featurize(marked, model.config));
  PredictionRecord rec;
  rec.id = marked.id;
  rec.predicted = model.labels[argmax_lowest(p)];
  rec.probabilities = std::move(p);
  return rec;
}

double regularized_loss(const SoftmaxModel& model,
                        const std::vector<LabeledVector>& batch, double l2) {
  return dataset_loss(Scorer{model.bias, model.weights, 1.0}, batch, l2);
}

BatchGradient regularized_gradient(const SoftmaxModel& model,
                                   const std::vector<LabeledVector>& batch,
                                   double l2) {
  const std::size_t L = model.labels.size();
  BatchGradient g;
  g.bias.assign(L, 0.0);
  Scorer sc{model.bias, model.weights, 1.0};
  double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    std::vector<double> p = sc.scores(ex.features);
    softmax_inplace(p);
    p[ex.label] -= 1.0;
    for (std::size_t l = 0; l < L; l++) g.bias[l] += inv * p[l];
    for (const auto& [j, x] : ex.features.entries) {
      auto& row = g.weights[j];
      if (row.empty()) row.assign(L, 0.0);
      for (std::size_t l = 0; l < L; l++) row[l] += inv * p[l] * x;
    }
  }
  // The penalty term differentiates over every stored weight, touched by
  // this batch or not.
  for (const auto& [j, row] : model.weights) {
    auto& grow = g.weights[j];
    if (grow.empty()) grow.assign(L, 0.0);
    for (std::size_t l = 0; l < L; l++) grow[l] += l2 * row[l];
  }
  return g;
}

}  // namespace retk
