// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

// Classification math: label mapping, class rebalancing, the siamese
// sentence-embedding softmax head, weighted cross-entropy training, greedy
// token-matching similarity (BERTScore) and the two-step relevance/stance
// pipeline.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "covmis/datamodel.hpp"
#include "covmis/linalg.hpp"
#include "covmis/vectorize.hpp"

namespace covmis {

using Probs = std::array<double, kNumLabels>;

// --- labels and rebalancing ------------------------------------------------

/// Loss weight per class, w_k = max(counts) / counts_k.
struct ClassWeights {
  std::array<double, kNumLabels> w{1.0, 1.0, 1.0};

  double operator[](Label l) const { return w[code(l)]; }
  static ClassWeights uniform() { return {}; }
};

/// Throws std::invalid_argument when any count is zero.
ClassWeights class_weights(const std::array<std::size_t, kNumLabels>& counts);
std::array<std::size_t, kNumLabels> label_counts(std::span<const Label> labels);

/// Keeps every Against example and each Favor/Neither example with
/// probability min(1, expected / class_count). Returns kept indices in
/// input order.
std::vector<std::size_t> undersample_indices(std::span<const Label> labels, std::size_t expected,
                                             std::uint64_t seed);
/// Pair form. Throws DataError on an unlabeled pair.
std::vector<StancePair> undersample(const std::vector<StancePair>& pairs, std::size_t expected,
                                    std::uint64_t seed);

enum class LabelScheme { Identity, Nli, RumourEval, CovidLies };
LabelScheme parse_label_scheme(std::string_view s);
std::string_view to_string(LabelScheme s);

/// identity: favor/against/neither; nli: entailment/contradiction/neutral;
/// rumoureval: support/deny/query/comment (query and comment -> Neither);
/// covidlies: agree/disagree/no stance. Case-insensitive. Throws DataError
/// on a label outside the scheme.
Label map_label(std::string_view source, LabelScheme scheme);

/// Canonical source label for each class (rumoureval maps Neither to "comment").
std::string_view inverse_label(Label label, LabelScheme scheme);

/// Labeled example of an external training set: a target sentence (claim,
/// hypothesis or source tweet) and a text (tweet or premise) by id.
struct TrainingExample {
  std::string target_id;
  std::string text_id;
  Label label = Label::Neither;
};

/// JSONL {"target_id", "text_id", "label"} with labels in the given scheme.
std::vector<TrainingExample> read_training_examples(const std::filesystem::path& path,
                                                    LabelScheme scheme);
void write_training_examples(const std::filesystem::path& path,
                             const std::vector<TrainingExample>& examples);

/// Conversation thread: source tweet plus replies.
struct Thread {
  std::string source_id;
  /// Source tweet's own stance toward the rumour ("support", "deny", ...).
  std::optional<std::string> source_stance;
  struct Reply {
    std::string id;
    std::string label;  // rumoureval label
  };
  std::vector<Reply> replies;
};

struct ThreadFilterResult {
  std::vector<TrainingExample> examples;
  std::size_t skipped_missing_flag = 0;
  std::size_t dropped_deny_threads = 0;
};

/// Emits (source, reply) examples with rumoureval-mapped labels, skipping
/// threads whose source denies the rumour. Threads without a source flag are
/// skipped and counted.
ThreadFilterResult filter_denied_sources(const std::vector<Thread>& threads);

/// JSONL {"source_id", "source_stance"?, "replies": [{"id", "label"}]}.
std::vector<Thread> read_threads(const std::filesystem::path& path);

enum class Orientation { TweetAsPremise, MisinfoAsPremise };
Orientation parse_orientation(std::string_view s);

/// (premise, hypothesis). TweetAsPremise is the default.
template <typename T>
std::pair<T, T> orient(const T& misinfo, const T& tweet,
                       Orientation dir = Orientation::TweetAsPremise) {
  if (dir == Orientation::TweetAsPremise) return {tweet, misinfo};
  return {misinfo, tweet};
}

// --- BERTScore -----------------------------------------------------------

struct BertScoreResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Greedy matching over unit-normalized token vectors. Recall averages, over
/// reference tokens, the best cosine against the candidate; precision does
/// the converse; F1 is their harmonic mean (0 when P + R <= 0). Throws
/// std::invalid_argument on an empty side or a dimension mismatch.
BertScoreResult bertscore(const Matrix& candidate, const Matrix& reference);

// --- heads and training --------------------------------------------------

/// Linear softmax classifier: probs = softmax(W^T x + b).
struct HeadModel {
  Matrix weights;  // features x 3
  std::array<double, kNumLabels> bias{};
  std::string feature_spec;

  std::size_t features() const { return weights.rows(); }
};

/// Model file: {"shape": [rows, 3], "weights": [row-major], "bias": [3],
/// "feature_spec": str, "feature_spec_hash": "<16 hex digits>"}.
void save_head(const std::filesystem::path& path, const HeadModel& model);
HeadModel load_head(const std::filesystem::path& path);
std::string feature_spec_hash(std::string_view spec);

Probs softmax(const Probs& logits);

/// Sparse feature rows sharing one dimension. Dense rows are stored with
/// every coordinate present.
struct FeatureMatrix {
  std::size_t dim = 0;
  std::vector<SparseVector> rows;

  std::size_t size() const { return rows.size(); }
  void add_dense(std::span<const double> row);
  void add_sparse(SparseVector row);
};

Probs logits(const HeadModel& model, const SparseVector& x);
Probs logits(const HeadModel& model, std::span<const double> x);

/// [u; v; |u - v|].
std::vector<double> sbert_features(std::span<const double> u, std::span<const double> v);

/// softmax(W^T [u; v; |u - v|] + b). Throws std::invalid_argument unless
/// |u| = |v| and the model has 3|u| feature rows.
Probs sbert_head_forward(std::span<const double> u, std::span<const double> v, const HeadModel& model);

/// Batch-mean weighted cross-entropy, (1/n) sum_i -w_{y_i} log p_{i,y_i},
/// and its gradient with respect to the logits.
struct LossAndGradient {
  double loss = 0.0;
  std::vector<Probs> grad;
};

/// From probabilities (as produced by softmax). The gradient is taken with
/// respect to the logits that produced them: (w_y / n) (p_i - onehot(y_i)).
LossAndGradient weighted_ce(std::span<const Probs> probs, std::span<const Label> labels,
                            const ClassWeights& weights);
LossAndGradient weighted_ce_from_logits(std::span<const Probs> logits, std::span<const Label> labels,
                                        const ClassWeights& weights);

struct TrainConfig {
  double learning_rate = 0.1;
  double weight_decay = 0.01;
  std::size_t epochs = 3;
  /// 0 means full batch.
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
};

struct TrainResult {
  HeadModel model;
  /// Objective (mean weighted CE + decay/2 ||W||^2) on the full training set
  /// after each epoch.
  std::vector<double> loss_trace;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mini-batch gradient descent from zero weights, L2 decay on W (not b),
/// batches drawn from a seeded permutation each epoch. Throws TrainingError
/// when the loss becomes non-finite.
TrainResult train_head(const FeatureMatrix& features, std::span<const Label> labels,
                       const ClassWeights& weights, const TrainConfig& config,
                       std::string feature_spec = {});

/// Full-data objective used by the loss trace.
double training_objective(const HeadModel& model, const FeatureMatrix& features,
                          std::span<const Label> labels, const ClassWeights& weights,
                          double weight_decay);

/// Argmax with ties going to the lowest class code.
Label argmax_label(const Probs& p);
Label predict(const HeadModel& model, const SparseVector& x);
Label predict(const HeadModel& model, std::span<const double> x);
std::vector<Label> predict_batch(const HeadModel& model, const FeatureMatrix& features);

/// Relevance gate then stance: F1 <= threshold gives Neither, otherwise the
/// head's Favor/Against probabilities decide (ties to Favor).
struct TwoStepDecision {
  Label label;
  BertScoreResult score;
  Probs head_probs{};
};

TwoStepDecision two_step(const Matrix& tweet_tokens, const Matrix& misinfo_tokens,
                         std::span<const double> u, std::span<const double> v, double threshold,
                         const HeadModel& head);

// --- linear baseline features --------------------------------------------

/// Concatenation of the TF-IDF vectors of both sentences (dimension 2|V|).
SparseVector tfidf_pair_features(const TfidfModel& model, const std::vector<std::string>& premise,
                                 const std::vector<std::string>& hypothesis);

/// Concatenation of the averaged word embeddings of both sentences.
std::vector<double> glove_pair_features(const EmbeddingTable& table,
                                        const std::vector<std::string>& premise,
                                        const std::vector<std::string>& hypothesis);

}  // namespace covmis
