#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "irk/corpus.hpp"
#include "irk/embedding.hpp"

namespace irk::solution {

inline constexpr int kModelVersion = 1;
inline constexpr std::size_t kStructuralCount = 6;

// Order is part of the model format.
enum StructuralFeature : std::size_t {
  kRelativePosition = 0,
  kLogTokenCount,
  kHasCodeBlock,
  kHasPatchLink,
  kAuthorIsReporter,
  kAuthorPriorComments,
};

using Structural = std::array<double, kStructuralCount>;

struct Vocabulary {
  struct Term {
    std::size_t index = 0;
    double idf = 0.0;
    bool operator==(const Term&) const = default;
  };
  std::map<std::string, Term> terms;  // indices follow sorted term order
  std::size_t n_docs = 0;

  std::size_t size() const noexcept { return terms.size(); }
  bool operator==(const Vocabulary&) const = default;
};

// Smoothed idf: ln((1 + N) / (1 + df)) + 1, one document per comment.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& documents, std::size_t min_df = 1);
Vocabulary build_vocabulary(std::span<const IssueReport* const> issues, std::size_t min_df = 1);

struct CommentFeatures {
  std::map<std::string, std::size_t> term_counts;  // all tokens, before vocabulary filtering
  std::map<std::string, double> tfidf;             // l2-normalized against the featurizing vocabulary
  Structural structural{};
  std::optional<std::vector<double>> embedding;

  bool operator==(const CommentFeatures&) const = default;
};

// Sublinear tf (1 + ln tf) times idf, out-of-vocabulary terms dropped, l2
// normalized (empty when nothing survives).
std::map<std::string, double> tfidf_weights(const std::map<std::string, std::size_t>& term_counts,
                                            const Vocabulary& vocabulary);

// Throws COMMENT_NOT_IN_THREAD. The comment's embedding is looked up under
// comment_embedding_key() when a store is given.
CommentFeatures featurize(const Comment& comment, const IssueReport& thread, const Vocabulary& vocabulary,
                          const EmbeddingStore* store = nullptr);

std::string comment_embedding_key(const IssueReport& issue, const Comment& comment);
bool has_code_block(std::string_view text);
bool has_patch_link(std::string_view text);

enum class ModelKind { LinearTfidf, LinearEmbedding, NearestCentroidEmbedding };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view s);

struct TrainingMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  double lambda = 0.0;
  double learning_rate = 0.0;
  int accepted_steps = 0;
  double final_loss = 0.0;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;

  bool operator==(const TrainingMeta&) const = default;
};

// Structural features are min-max scaled with constants from the training
// split.
struct Scaling {
  Structural min{};
  Structural max{};

  bool operator==(const Scaling&) const = default;
};

struct ClassifierModel {
  ModelKind kind = ModelKind::LinearTfidf;
  // LINEAR_TFIDF: vocabulary.size() + 6; LINEAR_EMBEDDING: embedding_dim + 6;
  // NEAREST_CENTROID_EMBEDDING: negative centroid followed by positive centroid.
  std::vector<double> weights;
  double bias = 0.0;
  Vocabulary vocabulary;  // LINEAR_TFIDF only
  std::size_t embedding_dim = 0;
  Scaling scaling;
  double threshold = 0.5;
  TrainingMeta training_meta;

  std::size_t input_dim() const;
  bool operator==(const ClassifierModel&) const = default;
};

struct LabeledItem {
  std::string issue_id;
  std::string comment_id;
  CommentFeatures features;
  int label = 0;
};

struct LabeledDataset {
  std::string project_id;
  std::vector<LabeledItem> items;
  std::optional<Vocabulary> vocabulary;  // required to train LINEAR_TFIDF
};

// Labeled comments (is_solution set) of the given issues, featurized with
// `vocabulary`.
LabeledDataset make_dataset(std::string project_id, std::span<const IssueReport* const> issues,
                            const Vocabulary& vocabulary, const EmbeddingStore* store = nullptr);

struct TrainConfig {
  ModelKind kind = ModelKind::LinearTfidf;
  double lambda = 1e-4;
  double learning_rate = 0.5;
  int epochs = 500;
  std::uint64_t seed = 0;
  bool class_weighting = true;
  double threshold = 0.5;
};

// --- logistic regression core ---------------------------------------------

using SparseRow = std::vector<std::pair<std::size_t, double>>;

// Mean sample-weighted binary cross-entropy plus lambda/2 * ||w||^2 (bias not
// regularized).
struct LogisticProblem {
  std::vector<SparseRow> rows;
  std::vector<int> labels;
  std::vector<double> sample_weights;
  std::size_t dim = 0;
  double lambda = 0.0;
};

double logistic_loss(const LogisticProblem& problem, std::span<const double> w, double b);
double logistic_loss_and_gradient(const LogisticProblem& problem, std::span<const double> w, double b,
                                  std::vector<double>& grad_w, double& grad_b);

struct DescentTrace {
  int accepted_steps = 0;
  double final_loss = 0.0;
  std::vector<double> accepted_losses;  // loss after each accepted step, starting with the initial loss
};

// Full-batch gradient descent; a step that increases the loss is rejected and
// the learning rate halved.
DescentTrace gradient_descent(const LogisticProblem& problem, std::vector<double>& w, double& b, double learning_rate,
                              int epochs);

// Inverse class frequency weights, N / (classes present * n_class).
std::vector<double> inverse_frequency_weights(std::span<const int> labels);

double sigmoid(double z);

// --- training and prediction -----------------------------------------------

// Throws SINGLE_CLASS_DATASET, INVALID_CONFIG (missing vocabulary for
// LINEAR_TFIDF), DIMENSION_MISMATCH (missing or inconsistent embeddings).
ClassifierModel train(const LabeledDataset& dataset, const TrainConfig& config = {});

// Warm-started continuation on extra data; scaling and vocabulary stay fixed.
ClassifierModel continue_training(const ClassifierModel& model, const LabeledDataset& extra, const TrainConfig& config);

struct Prediction {
  int label = 0;
  double probability = 0.0;

  bool operator==(const Prediction&) const = default;
};

// Throws DIMENSION_MISMATCH.
Prediction predict(const ClassifierModel& model, const CommentFeatures& features);

// Model input row for the given features (exposed for tests).
SparseRow model_row(const ClassifierModel& model, const CommentFeatures& features);

// Opaque ensemble member built from an external prediction file (TSV of
// issue-id, comment-id, label, probability).
struct ExternalPredictions {
  std::string name;
  std::map<std::pair<std::string, std::string>, Prediction> predictions;

  // Throws MALFORMED_FILE.
  static ExternalPredictions parse_tsv(const std::string& content, std::string name);
  std::string to_tsv() const;
};

using EnsembleMember = std::variant<ClassifierModel, ExternalPredictions>;

// Throws MISSING_KEY when an external member has no prediction for the item.
Prediction member_predict(const EnsembleMember& member, const LabeledItem& item);

// Majority vote; ties go to the side with the higher mean confidence in its
// own label, then to label 0.
int majority_vote(std::span<const Prediction> votes);
int ensemble_predict(std::span<const EnsembleMember> members, const LabeledItem& item);

struct Metrics {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;

  // Zero denominators yield 0.
  static Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);
  bool operator==(const Metrics&) const = default;
};

Metrics score_predictions(std::span<const int> predicted, std::span<const int> gold);
Metrics evaluate(const ClassifierModel& model, const LabeledDataset& dataset);
Metrics evaluate(std::span<const EnsembleMember> members, const LabeledDataset& dataset);

struct TransferConfig {
  TrainConfig train;
  // Epochs of warm-started descent on the adaptation slice; 0 means train.epochs.
  int adapt_epochs = 0;
};

struct TransferResult {
  Metrics zero_shot;
  Metrics adapted;
  std::vector<std::string> adaptation_issues;
  std::size_t evaluated_items = 0;
};

// Adaptation slice = first ceil(fraction * |test issues|) issue ids in sorted
// order; both models are scored on the remaining items.
// Throws SAME_PROJECT, EMPTY_SPLIT, INVALID_CONFIG.
TransferResult transfer_evaluate(const LabeledDataset& train_set, const LabeledDataset& test_set,
                                 double adapt_fraction, const TransferConfig& config = {});

// Model file (JSON, model_version 1). Throws MALFORMED_FILE on load.
std::string serialize_model(const ClassifierModel& model);
ClassifierModel parse_model(const std::string& content);

}  // namespace irk::solution
