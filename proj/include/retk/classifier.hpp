#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "retk/corpus.hpp"
#include "retk/markers.hpp"

namespace retk {

// Sparse binary-ish feature vector in a fixed hashing space.
struct FeatureVector {
  std::uint32_t dim = 0;
  std::vector<std::pair<std::uint32_t, float>> entries;  // sorted, unique
};

struct TrainConfig {
  std::size_t batch_size = 8;
  std::size_t epochs = 5;
  double learning_rate = 0.1;  // step t uses learning_rate / sqrt(t)
  double l2 = 1e-6;
  std::uint64_t seed = 42;
  std::uint32_t dim = 1u << 20;
  std::vector<std::size_t> ngram_orders = {1, 2};

  // Throws std::invalid_argument on out-of-range settings.
  void validate() const;
};

// Multiclass softmax model over hashed features. Weights are stored
// feature-major: one row of per-label weights per active feature index.
struct SoftmaxModel {
  std::vector<RelationLabel> labels;  // vocabulary order
  std::vector<double> bias;
  std::unordered_map<std::uint32_t, std::vector<double>> weights;
  MarkerScheme scheme = MarkerScheme::kNone;
  TrainConfig config;  // training fingerprint; dim/ngrams drive featurize

  std::optional<std::size_t> label_index(std::string_view name) const;
};

struct PredictionRecord {
  std::string id;
  RelationLabel predicted;
  // Probabilities over the declared label vocabulary order; absent for
  // external sources that only report labels.
  std::optional<std::vector<double>> probabilities;
  std::optional<RelationLabel> gold;
};

// Predictions of one compared model, parsed from a prediction TSV.
struct ExternalScoreFile {
  std::string model_name;
  std::vector<PredictionRecord> records;
};

// Hashed token n-grams over the full marked sequence plus distinguished
// features for the entity-type pair and the inter-entity distance bucket.
FeatureVector featurize(const MarkedInstance& marked, const TrainConfig& cfg);

using TrainingExample = std::pair<MarkedInstance, RelationLabel>;

struct TrainDiagnostics {
  std::vector<double> epoch_losses;  // regularized loss after each epoch
};

// Mini-batch SGD on the regularized cross-entropy, deterministic given the
// seed. When `vocabulary` is null the label set is collected from the data
// in sorted order. Throws DataError on a single-label set or mixed schemes.
SoftmaxModel train(const std::vector<TrainingExample>& data,
                   const TrainConfig& cfg,
                   const LabelVocabulary* vocabulary = nullptr,
                   TrainDiagnostics* diagnostics = nullptr);

// Softmax inference; ties broken toward the lowest label index.
PredictionRecord predict(const SoftmaxModel& model,
                         const MarkedInstance& marked);

// Per-label softmax probabilities for an explicit feature vector.
std::vector<double> predict_probabilities(const SoftmaxModel& model,
                                          const FeatureVector& features);

// --- training math, exposed for verification ---

struct LabeledVector {
  FeatureVector features;
  std::size_t label = 0;  // index into the model vocabulary
};

// Mean cross-entropy over the batch plus (l2/2)*||W||^2 (biases excluded).
double regularized_loss(const SoftmaxModel& model,
                        const std::vector<LabeledVector>& batch, double l2);

struct BatchGradient {
  std::unordered_map<std::uint32_t, std::vector<double>> weights;
  std::vector<double> bias;
};

// Exact gradient of regularized_loss with respect to weights and biases.
BatchGradient regularized_gradient(const SoftmaxModel& model,
                                   const std::vector<LabeledVector>& batch,
                                   double l2);

// --- persistence (binary artifact with magic, version, checksum) ---

void save_model(const SoftmaxModel& model, std::ostream& out);
std::string save_model_to_string(const SoftmaxModel& model);
void save_model_file(const SoftmaxModel& model, const std::string& path);
SoftmaxModel load_model(std::istream& in);
SoftmaxModel load_model_from_string(const std::string& bytes);
SoftmaxModel load_model_file(const std::string& path);

// --- prediction TSV interchange ---

// Parses `id<TAB>label[<TAB>p_0..p_{k-1}]` rows; labels must belong to the
// vocabulary, ids must be unique, probabilities (if present) must argmax to
// the stated label.
ExternalScoreFile load_external_predictions(
    std::istream& in, std::string model_name, const LabelVocabulary& vocabulary,
    std::string_view source_name = "<predictions>");
ExternalScoreFile load_external_predictions_file(const std::string& path,
                                                 std::string model_name,
                                                 const LabelVocabulary& vocab);

// Writes the TSV; with_probabilities requires every record to carry a
// probability vector over `vocabulary_size` labels.
std::string predictions_to_tsv(const std::vector<PredictionRecord>& records,
                               std::size_t vocabulary_size,
                               bool with_probabilities);

}  // namespace retk
