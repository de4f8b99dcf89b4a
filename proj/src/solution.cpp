#include "irk/solution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "irk/error.hpp"
#include "irk/text.hpp"

namespace irk::solution {

using nlohmann::json;

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double dot_row(const SparseRow& row, std::span<const double> w) {
  double z = 0.0;
  for (const auto& [i, x] : row) z += w[i] * x;
  return z;
}

double scale(double x, double lo, double hi) { return hi > lo ? (x - lo) / (hi - lo) : 0.0; }

void require_embedding(const CommentFeatures& f, std::size_t dim) {
  if (!f.embedding) throw Error(ErrorCode::DimensionMismatch, "comment has no embedding");
  if (f.embedding->size() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "embedding has " + std::to_string(f.embedding->size()) +
                                                  " entries, model expects " + std::to_string(dim));
  }
}

std::pair<std::size_t, std::size_t> class_counts(const LabeledDataset& d) {
  std::size_t pos = 0, neg = 0;
  for (const auto& it : d.items) (it.label == 1 ? pos : neg)++;
  return {pos, neg};
}

Scaling fit_scaling(const LabeledDataset& d) {
  Scaling s;
  s.min.fill(std::numeric_limits<double>::infinity());
  s.max.fill(-std::numeric_limits<double>::infinity());
  for (const auto& it : d.items) {
    for (std::size_t k = 0; k < kStructuralCount; ++k) {
      s.min[k] = std::min(s.min[k], it.features.structural[k]);
      s.max[k] = std::max(s.max[k], it.features.structural[k]);
    }
  }
  return s;
}

LogisticProblem make_problem(const ClassifierModel& model, const LabeledDataset& d, const TrainConfig& config) {
  LogisticProblem p;
  p.dim = model.input_dim();
  p.lambda = config.lambda;
  for (const auto& it : d.items) {
    p.rows.push_back(model_row(model, it.features));
    p.labels.push_back(it.label);
  }
  p.sample_weights = config.class_weighting ? inverse_frequency_weights(p.labels)
                                            : std::vector<double>(p.labels.size(), 1.0);
  return p;
}

// Centroid c_k = mean embedding of class k; weights hold [c0, c1].
void fit_centroids(ClassifierModel& m, const LabeledDataset& d, std::size_t prior_neg, std::size_t prior_pos) {
  const std::size_t dim = m.embedding_dim;
  std::vector<double> sum0(dim, 0.0), sum1(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    sum0[i] = m.weights[i] * static_cast<double>(prior_neg);
    sum1[i] = m.weights[dim + i] * static_cast<double>(prior_pos);
  }
  std::size_t n0 = prior_neg, n1 = prior_pos;
  for (const auto& it : d.items) {
    require_embedding(it.features, dim);
    auto& sum = it.label == 1 ? sum1 : sum0;
    for (std::size_t i = 0; i < dim; ++i) sum[i] += (*it.features.embedding)[i];
    (it.label == 1 ? n1 : n0)++;
  }
  for (std::size_t i = 0; i < dim; ++i) {
    m.weights[i] = n0 ? sum0[i] / static_cast<double>(n0) : 0.0;
    m.weights[dim + i] = n1 ? sum1[i] / static_cast<double>(n1) : 0.0;
  }
  m.training_meta.n_negative = n0;
  m.training_meta.n_positive = n1;
}

}  // namespace

// --- features --------------------------------------------------------------

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& documents, std::size_t min_df) {
  std::map<std::string, std::size_t> df;
  for (const auto& doc : documents) {
    for (const auto& t : std::set<std::string>(doc.begin(), doc.end())) ++df[t];
  }
  Vocabulary v;
  v.n_docs = documents.size();
  const double n = static_cast<double>(v.n_docs);
  std::size_t index = 0;
  for (const auto& [term, f] : df) {
    if (f < min_df) continue;
    v.terms.emplace(term, Vocabulary::Term{index++, std::log((1.0 + n) / (1.0 + static_cast<double>(f))) + 1.0});
  }
  return v;
}

Vocabulary build_vocabulary(std::span<const IssueReport* const> issues, std::size_t min_df) {
  std::vector<std::vector<std::string>> docs;
  for (const IssueReport* issue : issues) {
    for (const auto& c : issue->comments) docs.push_back(text::tokenize(c.text));
  }
  return build_vocabulary(docs, min_df);
}

std::map<std::string, double> tfidf_weights(const std::map<std::string, std::size_t>& term_counts,
                                            const Vocabulary& vocabulary) {
  std::map<std::string, double> out;
  double norm2 = 0.0;
  for (const auto& [term, tf] : term_counts) {
    auto it = vocabulary.terms.find(term);
    if (it == vocabulary.terms.end() || tf == 0) continue;
    const double w = (1.0 + std::log(static_cast<double>(tf))) * it->second.idf;
    out.emplace(term, w);
    norm2 += w * w;
  }
  if (norm2 <= 0.0) return {};
  const double norm = std::sqrt(norm2);
  for (auto& [term, w] : out) w /= norm;
  return out;
}

bool has_code_block(std::string_view text) {
  if (text.find("```") != std::string_view::npos) return true;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    if (line.size() > 4 && line.substr(0, 4) == "    " && !text::trim(line).empty()) return true;
    start = end + 1;
  }
  return false;
}

bool has_patch_link(std::string_view text) {
  static const std::regex url(R"(https?://[^\s<>"')\]]+)", std::regex::icase);
  static const std::regex patch("(commit|revision|attachment|pull|diff)", std::regex::icase);
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), url); it != std::sregex_iterator(); ++it) {
    if (std::regex_search(it->str(), patch)) return true;
  }
  return false;
}

std::string comment_embedding_key(const IssueReport& issue, const Comment& comment) {
  return issue.id + ":" + comment.id;
}

CommentFeatures featurize(const Comment& comment, const IssueReport& thread, const Vocabulary& vocabulary,
                          const EmbeddingStore* store) {
  const auto& cs = thread.comments;
  auto pos = std::find_if(cs.begin(), cs.end(), [&](const Comment& c) { return c.id == comment.id; });
  if (pos == cs.end()) {
    throw Error(ErrorCode::CommentNotInThread, "comment '" + comment.id + "' is not in issue '" + thread.id + "'");
  }
  const std::size_t index = static_cast<std::size_t>(pos - cs.begin());

  CommentFeatures f;
  for (auto& t : text::tokenize(comment.text)) ++f.term_counts[t];
  f.tfidf = tfidf_weights(f.term_counts, vocabulary);

  f.structural[kRelativePosition] =
      cs.size() > 1 ? static_cast<double>(index) / static_cast<double>(cs.size() - 1) : 0.0;
  f.structural[kLogTokenCount] = std::log1p(static_cast<double>(text::raw_tokens(comment.text).size()));
  f.structural[kHasCodeBlock] = has_code_block(comment.text) ? 1.0 : 0.0;
  f.structural[kHasPatchLink] = has_patch_link(comment.text) ? 1.0 : 0.0;
  f.structural[kAuthorIsReporter] = cs.front().author == comment.author ? 1.0 : 0.0;
  f.structural[kAuthorPriorComments] =
      std::any_of(cs.begin(), pos, [&](const Comment& c) { return c.author == comment.author; }) ? 1.0 : 0.0;

  if (store) {
    const std::string key = comment_embedding_key(thread, comment);
    if (store->contains(key)) {
      const auto v = store->at(key);
      f.embedding = std::vector<double>(v.begin(), v.end());
    }
  }
  return f;
}

LabeledDataset make_dataset(std::string project_id, std::span<const IssueReport* const> issues,
                            const Vocabulary& vocabulary, const EmbeddingStore* store) {
  LabeledDataset d;
  d.project_id = std::move(project_id);
  d.vocabulary = vocabulary;
  for (const IssueReport* issue : issues) {
    for (const auto& c : issue->comments) {
      if (!c.is_solution) continue;
      d.items.push_back({issue->id, c.id, featurize(c, *issue, vocabulary, store), *c.is_solution ? 1 : 0});
    }
  }
  return d;
}

// --- model kinds -----------------------------------------------------------

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::LinearTfidf: return "LINEAR_TFIDF";
    case ModelKind::LinearEmbedding: return "LINEAR_EMBEDDING";
    case ModelKind::NearestCentroidEmbedding: return "NEAREST_CENTROID_EMBEDDING";
  }
  return "LINEAR_TFIDF";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  for (ModelKind k : {ModelKind::LinearTfidf, ModelKind::LinearEmbedding, ModelKind::NearestCentroidEmbedding}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::size_t ClassifierModel::input_dim() const {
  switch (kind) {
    case ModelKind::LinearTfidf: return vocabulary.size() + kStructuralCount;
    case ModelKind::LinearEmbedding: return embedding_dim + kStructuralCount;
    case ModelKind::NearestCentroidEmbedding: return 2 * embedding_dim;
  }
  return 0;
}

SparseRow model_row(const ClassifierModel& model, const CommentFeatures& features) {
  SparseRow row;
  std::size_t offset = 0;
  if (model.kind == ModelKind::LinearTfidf) {
    for (const auto& [term, w] : tfidf_weights(features.term_counts, model.vocabulary)) {
      row.emplace_back(model.vocabulary.terms.at(term).index, w);
    }
    std::sort(row.begin(), row.end());
    offset = model.vocabulary.size();
  } else {
    require_embedding(features, model.embedding_dim);
    for (std::size_t i = 0; i < model.embedding_dim; ++i) {
      if ((*features.embedding)[i] != 0.0) row.emplace_back(i, (*features.embedding)[i]);
    }
    if (model.kind == ModelKind::NearestCentroidEmbedding) return row;
    offset = model.embedding_dim;
  }
  for (std::size_t k = 0; k < kStructuralCount; ++k) {
    const double x = scale(features.structural[k], model.scaling.min[k], model.scaling.max[k]);
    if (x != 0.0) row.emplace_back(offset + k, x);
  }
  return row;
}

// --- logistic regression ---------------------------------------------------

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<double> inverse_frequency_weights(std::span<const int> labels) {
  std::size_t n[2] = {0, 0};
  for (int y : labels) ++n[y == 1];
  const double classes = static_cast<double>((n[0] > 0) + (n[1] > 0));
  std::vector<double> w;
  w.reserve(labels.size());
  for (int y : labels) {
    w.push_back(static_cast<double>(labels.size()) / (classes * static_cast<double>(n[y == 1])));
  }
  return w;
}

double logistic_loss(const LogisticProblem& p, std::span<const double> w, double b) {
  double total = 0.0, weight = 0.0;
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    const double z = dot_row(p.rows[i], w) + b;
    total += p.sample_weights[i] * (softplus(z) - p.labels[i] * z);
    weight += p.sample_weights[i];
  }
  double reg = 0.0;
  for (double v : w) reg += v * v;
  return (weight > 0.0 ? total / weight : 0.0) + 0.5 * p.lambda * reg;
}

double logistic_loss_and_gradient(const LogisticProblem& p, std::span<const double> w, double b,
                                  std::vector<double>& grad_w, double& grad_b) {
  grad_w.assign(p.dim, 0.0);
  grad_b = 0.0;
  double total = 0.0, weight = 0.0;
  for (double s : p.sample_weights) weight += s;
  const double inv = weight > 0.0 ? 1.0 / weight : 0.0;
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    const double z = dot_row(p.rows[i], w) + b;
    const double s = p.sample_weights[i];
    total += s * (softplus(z) - p.labels[i] * z);
    const double r = s * (sigmoid(z) - p.labels[i]) * inv;
    for (const auto& [j, x] : p.rows[i]) grad_w[j] += r * x;
    grad_b += r;
  }
  double reg = 0.0;
  for (std::size_t j = 0; j < p.dim; ++j) {
    reg += w[j] * w[j];
    grad_w[j] += p.lambda * w[j];
  }
  return total * inv + 0.5 * p.lambda * reg;
}

DescentTrace gradient_descent(const LogisticProblem& p, std::vector<double>& w, double& b, double learning_rate,
                              int epochs) {
  DescentTrace trace;
  std::vector<double> gw, next(p.dim);
  double gb = 0.0;
  double loss = logistic_loss_and_gradient(p, w, b, gw, gb);
  trace.accepted_losses.push_back(loss);
  double lr = learning_rate;
  int halvings = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    // A rejected step retries the same epoch at half the rate.
    for (;;) {
      for (std::size_t j = 0; j < p.dim; ++j) next[j] = w[j] - lr * gw[j];
      const double next_b = b - lr * gb;
      const double next_loss = logistic_loss(p, next, next_b);
      if (next_loss <= loss) {
        w = next;
        b = next_b;
        loss = logistic_loss_and_gradient(p, w, b, gw, gb);
        trace.accepted_losses.push_back(loss);
        ++trace.accepted_steps;
        break;
      }
      lr *= 0.5;
      if (++halvings > 200) {
        trace.final_loss = loss;
        return trace;
      }
    }
  }
  trace.final_loss = loss;
  return trace;
}

// --- training ----------------------------------------------------------------

ClassifierModel train(const LabeledDataset& dataset, const TrainConfig& config) {
  const auto [pos, neg] = class_counts(dataset);
  if (pos == 0 || neg == 0) {
    throw Error(ErrorCode::SingleClassDataset, "training data for '" + dataset.project_id +
                                                   "' needs both labels (" + std::to_string(pos) + " positive, " +
                                                   std::to_string(neg) + " negative)");
  }
  if (!(config.threshold > 0.0 && config.threshold < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "threshold must lie in (0, 1)");
  }

  ClassifierModel m;
  m.kind = config.kind;
  m.threshold = config.threshold;
  m.scaling = fit_scaling(dataset);
  m.training_meta.seed = config.seed;
  m.training_meta.epochs = config.epochs;
  m.training_meta.lambda = config.lambda;
  m.training_meta.learning_rate = config.learning_rate;

  if (m.kind == ModelKind::LinearTfidf) {
    if (!dataset.vocabulary) throw Error(ErrorCode::InvalidConfig, "LINEAR_TFIDF training needs a vocabulary");
    m.vocabulary = *dataset.vocabulary;
  } else {
    const auto& first = dataset.items.front().features;
    if (!first.embedding) throw Error(ErrorCode::DimensionMismatch, "comment has no embedding");
    m.embedding_dim = first.embedding->size();
  }
  m.weights.assign(m.input_dim(), 0.0);

  if (m.kind == ModelKind::NearestCentroidEmbedding) {
    fit_centroids(m, dataset, 0, 0);
    return m;
  }
  const LogisticProblem problem = make_problem(m, dataset, config);
  const DescentTrace t = gradient_descent(problem, m.weights, m.bias, config.learning_rate, config.epochs);
  m.training_meta.accepted_steps = t.accepted_steps;
  m.training_meta.final_loss = t.final_loss;
  m.training_meta.n_positive = pos;
  m.training_meta.n_negative = neg;
  return m;
}

ClassifierModel continue_training(const ClassifierModel& model, const LabeledDataset& extra,
                                  const TrainConfig& config) {
  ClassifierModel m = model;
  if (extra.items.empty()) return m;
  if (m.kind == ModelKind::NearestCentroidEmbedding) {
    fit_centroids(m, extra, model.training_meta.n_negative, model.training_meta.n_positive);
    return m;
  }
  const LogisticProblem problem = make_problem(m, extra, config);
  const DescentTrace t = gradient_descent(problem, m.weights, m.bias, config.learning_rate, config.epochs);
  const auto [pos, neg] = class_counts(extra);
  m.training_meta.accepted_steps += t.accepted_steps;
  m.training_meta.final_loss = t.final_loss;
  m.training_meta.n_positive += pos;
  m.training_meta.n_negative += neg;
  return m;
}

Prediction predict(const ClassifierModel& model, const CommentFeatures& features) {
  if (model.weights.size() != model.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "model has " + std::to_string(model.weights.size()) +
                                                  " weights, expected " + std::to_string(model.input_dim()));
  }
  double p = 0.0;
  if (model.kind == ModelKind::NearestCentroidEmbedding) {
    require_embedding(features, model.embedding_dim);
    const std::span<const double> w(model.weights);
    const double c0 = cosine(*features.embedding, w.subspan(0, model.embedding_dim));
    const double c1 = cosine(*features.embedding, w.subspan(model.embedding_dim));
    p = (1.0 + c1 - c0) / 2.0;
  } else {
    p = sigmoid(dot_row(model_row(model, features), model.weights) + model.bias);
  }
  return {p >= model.threshold ? 1 : 0, p};
}

// --- ensembles -------------------------------------------------------------

ExternalPredictions ExternalPredictions::parse_tsv(const std::string& content, std::string name) {
  ExternalPredictions ext;
  ext.name = std::move(name);
  std::istringstream in(content);
  std::string line;
  std::size_t n = 0;
  const auto bad = [&](const std::string& what) {
    throw Error(ErrorCode::MalformedFile, ext.name + ":" + std::to_string(n) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, '\t');) cols.push_back(c);
    if (cols.size() != 4) bad("expected 4 tab-separated columns, got " + std::to_string(cols.size()));
    if (n == 1 && cols[2] == "label") continue;
    if (cols[2] != "0" && cols[2] != "1") bad("label must be 0 or 1");
    double p = 0.0;
    try {
      std::size_t used = 0;
      p = std::stod(cols[3], &used);
      if (used != cols[3].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      bad("probability '" + cols[3] + "' is not a number");
    }
    if (!(p >= 0.0 && p <= 1.0)) bad("probability must lie in [0, 1]");
    if (!ext.predictions.emplace(std::pair{cols[0], cols[1]}, Prediction{cols[2] == "1" ? 1 : 0, p}).second) {
      bad("duplicate prediction for " + cols[0] + "/" + cols[1]);
    }
  }
  return ext;
}

std::string ExternalPredictions::to_tsv() const {
  std::string out = "issue_id\tcomment_id\tlabel\tprobability\n";
  for (const auto& [key, p] : predictions) {
    out += key.first + "\t" + key.second + "\t" + std::to_string(p.label) + "\t" + json(p.probability).dump() + "\n";
  }
  return out;
}

Prediction member_predict(const EnsembleMember& member, const LabeledItem& item) {
  if (const auto* m = std::get_if<ClassifierModel>(&member)) return predict(*m, item.features);
  const auto& ext = std::get<ExternalPredictions>(member);
  auto it = ext.predictions.find({item.issue_id, item.comment_id});
  if (it == ext.predictions.end()) {
    throw Error(ErrorCode::MissingKey,
                ext.name + " has no prediction for " + item.issue_id + "/" + item.comment_id);
  }
  return it->second;
}

int majority_vote(std::span<const Prediction> votes) {
  std::size_t ones = 0, zeros = 0;
  double conf1 = 0.0, conf0 = 0.0;
  for (const auto& v : votes) {
    if (v.label == 1) {
      ++ones;
      conf1 += v.probability;
    } else {
      ++zeros;
      conf0 += 1.0 - v.probability;
    }
  }
  if (ones != zeros) return ones > zeros ? 1 : 0;
  if (ones == 0) return 0;
  return conf1 / static_cast<double>(ones) > conf0 / static_cast<double>(zeros) ? 1 : 0;
}

int ensemble_predict(std::span<const EnsembleMember> members, const LabeledItem& item) {
  if (members.empty()) throw Error(ErrorCode::InvalidConfig, "ensemble has no members");
  std::vector<Prediction> votes;
  for (const auto& m : members) votes.push_back(member_predict(m, item));
  return majority_vote(votes);
}

// --- metrics -----------------------------------------------------------------

Metrics Metrics::from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  Metrics m{tp, fp, fn, tn};
  const auto ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

Metrics score_predictions(std::span<const int> predicted, std::span<const int> gold) {
  if (predicted.size() != gold.size()) {
    throw Error(ErrorCode::DimensionMismatch, "prediction and gold lists differ in length");
  }
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i] == 1) (gold[i] == 1 ? tp : fp)++;
    else (gold[i] == 1 ? fn : tn)++;
  }
  return Metrics::from_counts(tp, fp, fn, tn);
}

Metrics evaluate(const ClassifierModel& model, const LabeledDataset& dataset) {
  std::vector<int> pred, gold;
  for (const auto& it : dataset.items) {
    pred.push_back(predict(model, it.features).label);
    gold.push_back(it.label);
  }
  return score_predictions(pred, gold);
}

Metrics evaluate(std::span<const EnsembleMember> members, const LabeledDataset& dataset) {
  std::vector<int> pred, gold;
  for (const auto& it : dataset.items) {
    pred.push_back(ensemble_predict(members, it));
    gold.push_back(it.label);
  }
  return score_predictions(pred, gold);
}

// --- transfer ----------------------------------------------------------------

TransferResult transfer_evaluate(const LabeledDataset& train_set, const LabeledDataset& test_set,
                                 double adapt_fraction, const TransferConfig& config) {
  if (train_set.project_id == test_set.project_id) {
    throw Error(ErrorCode::SameProject, "train and test sets both belong to '" + train_set.project_id + "'");
  }
  if (!(adapt_fraction >= 0.0 && adapt_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "adapt_fraction must lie in [0, 1]");
  }
  std::set<std::string> issue_set;
  for (const auto& it : test_set.items) issue_set.insert(it.issue_id);
  const std::vector<std::string> issues(issue_set.begin(), issue_set.end());
  const auto n_adapt = static_cast<std::size_t>(std::ceil(adapt_fraction * static_cast<double>(issues.size()) - 1e-9));

  TransferResult result;
  result.adaptation_issues.assign(issues.begin(), issues.begin() + static_cast<std::ptrdiff_t>(n_adapt));
  const std::set<std::string> adapt_ids(result.adaptation_issues.begin(), result.adaptation_issues.end());

  LabeledDataset adapt{test_set.project_id, {}, test_set.vocabulary};
  LabeledDataset held_out{test_set.project_id, {}, test_set.vocabulary};
  for (const auto& it : test_set.items) (adapt_ids.count(it.issue_id) ? adapt : held_out).items.push_back(it);
  if (held_out.items.empty()) throw Error(ErrorCode::EmptySplit, "no test items remain after the adaptation slice");

  const ClassifierModel zero_shot = train(train_set, config.train);
  TrainConfig adapt_cfg = config.train;
  if (config.adapt_epochs > 0) adapt_cfg.epochs = config.adapt_epochs;
  const ClassifierModel adapted = continue_training(zero_shot, adapt, adapt_cfg);

  result.zero_shot = evaluate(zero_shot, held_out);
  result.adapted = evaluate(adapted, held_out);
  result.evaluated_items = held_out.items.size();
  return result;
}

// --- serialization -------------------------------------------------------------

std::string serialize_model(const ClassifierModel& m) {
  json terms = json::object();
  for (const auto& [term, t] : m.vocabulary.terms) terms[term] = {{"index", t.index}, {"idf", t.idf}};
  const auto& meta = m.training_meta;
  json j = {{"model_version", kModelVersion},
            {"kind", std::string(to_string(m.kind))},
            {"weights", m.weights},
            {"bias", m.bias},
            {"vocabulary", {{"n_docs", m.vocabulary.n_docs}, {"terms", terms}}},
            {"embedding_dim", m.embedding_dim},
            {"scaling", {{"min", m.scaling.min}, {"max", m.scaling.max}}},
            {"threshold", m.threshold},
            {"training_meta",
             {{"seed", meta.seed},
              {"epochs", meta.epochs},
              {"lambda", meta.lambda},
              {"learning_rate", meta.learning_rate},
              {"accepted_steps", meta.accepted_steps},
              {"final_loss", meta.final_loss},
              {"n_positive", meta.n_positive},
              {"n_negative", meta.n_negative}}}};
  return j.dump(2) + "\n";
}

ClassifierModel parse_model(const std::string& content) {
  const auto bad = [](const std::string& what) -> void {
    throw Error(ErrorCode::MalformedFile, "<model>: " + what);
  };
  ClassifierModel m;
  try {
    const json j = json::parse(content);
    if (j.at("model_version").get<int>() != kModelVersion) bad("unsupported model_version");
    const auto kind = parse_model_kind(j.at("kind").get<std::string>());
    if (!kind) bad("unknown kind '" + j.at("kind").get<std::string>() + "'");
    m.kind = *kind;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    const json& v = j.at("vocabulary");
    m.vocabulary.n_docs = v.at("n_docs").get<std::size_t>();
    for (const auto& [term, t] : v.at("terms").items()) {
      m.vocabulary.terms[term] = {t.at("index").get<std::size_t>(), t.at("idf").get<double>()};
    }
    m.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    m.scaling.min = j.at("scaling").at("min").get<Structural>();
    m.scaling.max = j.at("scaling").at("max").get<Structural>();
    m.threshold = j.at("threshold").get<double>();
    const json& meta = j.at("training_meta");
    m.training_meta.seed = meta.at("seed").get<std::uint64_t>();
    m.training_meta.epochs = meta.at("epochs").get<int>();
    m.training_meta.lambda = meta.at("lambda").get<double>();
    m.training_meta.learning_rate = meta.at("learning_rate").get<double>();
    m.training_meta.accepted_steps = meta.at("accepted_steps").get<int>();
    m.training_meta.final_loss = meta.at("final_loss").get<double>();
    m.training_meta.n_positive = meta.at("n_positive").get<std::size_t>();
    m.training_meta.n_negative = meta.at("n_negative").get<std::size_t>();
  } catch (const json::exception& e) {
    bad(e.what());
  }
  if (m.weights.size() != m.input_dim()) bad("weights do not match the vocabulary or embedding dimension");
  if (!(m.threshold > 0.0 && m.threshold < 1.0)) bad("threshold must lie in (0, 1)");
  std::set<std::size_t> seen;
  for (const auto& [term, t] : m.vocabulary.terms) {
    if (t.index >= m.vocabulary.size() || !seen.insert(t.index).second) bad("vocabulary indices are not a permutation");
  }
  return m;
}

}  // namespace irk::solution
