#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "irk/corpus.hpp"
#include "irk/error.hpp"
#include "irk/solution.hpp"
#include "irk/text.hpp"
#include "synthetic.hpp"

using namespace irk;
using namespace irk::solution;

namespace {

const std::filesystem::path kTiny = std::filesystem::path(IRK_FIXTURES_DIR) / "tiny";

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an irk::Error");
  return ErrorCode::IoFailure;
}

IssueReport thread(std::size_t n) {
  IssueReport t = testing::make_issue("T", "app", "body");
  for (std::size_t i = 0; i < n; ++i) {
    t.comments.push_back({"c" + std::to_string(i), i % 2 ? "bob" : "ann", static_cast<std::int64_t>(i), "text " +
                          std::to_string(i), std::nullopt});
  }
  return t;
}

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

ClassifierModel train_points(std::uint64_t seed, std::size_t n, TrainConfig cfg = {}) {
  cfg.kind = ModelKind::LinearEmbedding;
  cfg.seed = seed;
  return train(testing::make_separable_points(seed, n), cfg);
}

Prediction vote(int label, double p) { return {label, p}; }

}  // namespace

// --- features ---------------------------------------------------------------------

TEST_CASE("relative position of the first comment is 0") {
  const auto t = thread(5);
  const Vocabulary v;
  CHECK(featurize(t.comments[0], t, v).structural[kRelativePosition] == 0.0);
  CHECK(featurize(t.comments[4], t, v).structural[kRelativePosition] == 1.0);
  CHECK(featurize(t.comments[1], t, v).structural[kRelativePosition] == 0.25);
  const auto single = thread(1);
  CHECK(featurize(single.comments[0], single, v).structural[kRelativePosition] == 0.0);
  const Comment stranger{"zz", "x", 0, "hi", std::nullopt};
  CHECK(code_of([&] { featurize(stranger, t, v); }) == ErrorCode::CommentNotInThread);
}

TEST_CASE("code block and patch link detection") {
  CHECK(has_code_block("see ```fix``` attached"));
  CHECK(has_code_block("intro\n    return 0;\nend"));
  CHECK(!has_code_block("no code here"));
  CHECK(!has_code_block("    \n   x"));
  CHECK(has_patch_link("https://hg.example.org/rev/commit/abcd"));
  CHECK(has_patch_link("see http://x.org/attachment.cgi?id=3 please"));
  CHECK(has_patch_link("https://github.com/a/b/pull/42"));
  CHECK(!has_patch_link("https://example.org/docs"));
  CHECK(!has_patch_link("commit abc without a url"));
}

TEST_CASE("fixture structural features") {
  const Corpus c = load_corpus(kTiny);
  const auto& i1 = *c.find_issue("I1");
  const Vocabulary v;
  const auto c2 = featurize(i1.comments[1], i1, v);
  CHECK(c2.structural[kRelativePosition] == 0.5);
  CHECK(c2.structural[kHasCodeBlock] == 1.0);
  CHECK(c2.structural[kHasPatchLink] == 1.0);
  CHECK(c2.structural[kAuthorIsReporter] == 0.0);
  CHECK(c2.structural[kAuthorPriorComments] == 0.0);
  const auto c3 = featurize(i1.comments[2], i1, v);
  CHECK(c3.structural[kAuthorIsReporter] == 1.0);
  CHECK(c3.structural[kAuthorPriorComments] == 1.0);
  CHECK(c3.structural[kHasCodeBlock] == 0.0);
  CHECK(c3.structural[kLogTokenCount] == doctest::Approx(std::log(1.0 + 5.0)));
}

TEST_CASE("tf-idf by hand for three in-vocabulary terms") {
  const Corpus c = load_corpus(kTiny);
  const auto& i1 = *c.find_issue("I1");
  // "Same crash here on the login screen." against a 3-document vocabulary
  const auto v = build_vocabulary({{"crash", "login"}, {"crash", "screen"}, {"fix"}});
  const auto f = featurize(i1.comments[0], i1, v);
  const double idf_crash = std::log(4.0 / 3.0) + 1.0;
  const double idf_other = std::log(4.0 / 2.0) + 1.0;
  const double norm = std::sqrt(idf_crash * idf_crash + 2.0 * idf_other * idf_other);
  REQUIRE(f.tfidf.size() == 3);
  CHECK(f.tfidf.at("crash") == doctest::Approx(idf_crash / norm).epsilon(1e-14));
  CHECK(f.tfidf.at("login") == doctest::Approx(idf_other / norm).epsilon(1e-14));
  CHECK(f.tfidf.at("screen") == doctest::Approx(idf_other / norm).epsilon(1e-14));
}

TEST_CASE("tf-idf: sublinear tf and the fixture vocabulary") {
  const auto v = build_vocabulary({{"aa", "bb"}, {"aa"}});
  const auto w = tfidf_weights({{"aa", 1}, {"bb", 3}, {"zz", 2}}, v);
  const double a = 1.0 * (std::log(3.0 / 3.0) + 1.0);
  const double b = (1.0 + std::log(3.0)) * (std::log(3.0 / 2.0) + 1.0);
  REQUIRE(w.size() == 2);
  CHECK(w.at("aa") == doctest::Approx(a / std::hypot(a, b)).epsilon(1e-14));
  CHECK(w.at("bb") == doctest::Approx(b / std::hypot(a, b)).epsilon(1e-14));
  CHECK(tfidf_weights({{"zz", 1}}, v).empty());

  const Corpus c = load_corpus(kTiny);
  std::vector<const IssueReport*> issues;
  for (const auto& i : c.issues) issues.push_back(&i);
  const auto fv = build_vocabulary(issues);
  CHECK(fv.n_docs == 5);
  const auto& i1 = *c.find_issue("I1");
  // "Thanks, confirmed the fix works." has four terms, each in one comment only
  REQUIRE(text::tokenize(i1.comments[2].text) == std::vector<std::string>{"thanks", "confirmed", "fix", "works"});
  const auto f = featurize(i1.comments[2], i1, fv);
  for (const auto& [term, weight] : f.tfidf) CHECK(weight == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("tf-idf vectors have norm 0 or 1") {
  const auto c = testing::make_solution_corpus(4);
  std::vector<const IssueReport*> issues;
  for (const auto& i : c.issues) issues.push_back(&i);
  const auto v = build_vocabulary(issues, 2);
  for (const auto& issue : c.issues) {
    for (const auto& cm : issue.comments) {
      double s = 0.0;
      for (const auto& [t, w] : featurize(cm, issue, v).tfidf) s += w * w;
      CHECK((s == 0.0 || std::abs(s - 1.0) <= 1e-12));
    }
  }
}

// --- training ---------------------------------------------------------------------

TEST_CASE("separable 200-point set is fit almost perfectly") {
  const auto d = testing::make_separable_points(1, 200);
  const auto m = train_points(1, 200);
  CHECK(evaluate(m, d).f1 >= 0.99);
  CHECK(m.training_meta.n_positive + m.training_meta.n_negative == 200);
}

TEST_CASE("huge lambda drives weights to zero") {
  TrainConfig cfg;
  cfg.lambda = 1e6;
  const auto m = train_points(2, 200, cfg);
  CHECK(l2(m.weights) < 1e-2);
}

TEST_CASE("training is deterministic") {
  const auto a = train_points(3, 120);
  const auto b = train_points(3, 120);
  CHECK(a == b);
  CHECK(serialize_model(a) == serialize_model(b));
}

TEST_CASE("training errors") {
  auto d = testing::make_separable_points(5, 20);
  for (auto& it : d.items) it.label = 1;
  TrainConfig cfg;
  cfg.kind = ModelKind::LinearEmbedding;
  CHECK(code_of([&] { train(d, cfg); }) == ErrorCode::SingleClassDataset);
  const auto ok = testing::make_separable_points(5, 20);
  cfg.kind = ModelKind::LinearTfidf;
  CHECK(code_of([&] { train(ok, cfg); }) == ErrorCode::InvalidConfig);
  cfg.kind = ModelKind::LinearEmbedding;
  cfg.threshold = 1.0;
  CHECK(code_of([&] { train(ok, cfg); }) == ErrorCode::InvalidConfig);
  auto ragged = ok;
  ragged.items[3].features.embedding = std::vector<double>{1.0};
  cfg.threshold = 0.5;
  CHECK(code_of([&] { train(ragged, cfg); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("nearest centroid separates the point set") {
  const auto d = testing::make_separable_points(6, 200);
  TrainConfig cfg;
  cfg.kind = ModelKind::NearestCentroidEmbedding;
  const auto m = train(d, cfg);
  CHECK(m.weights.size() == 4);
  CHECK(evaluate(m, d).f1 >= 0.95);
}

TEST_CASE("tf-idf model on a synthetic corpus") {
  const auto c = testing::make_solution_corpus(8);
  std::vector<const IssueReport*> issues;
  for (const auto& i : c.issues) issues.push_back(&i);
  const auto v = build_vocabulary(issues);
  auto d = make_dataset("proj", issues, v);
  d.vocabulary = v;
  const auto m = train(d);
  CHECK(m.weights.size() == v.size() + kStructuralCount);
  CHECK(evaluate(m, d).f1 >= 0.95);
}

// --- optimization core ----------------------------------------------------------

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> n(0.0, 1.0);
  const double h = 1e-5;
  for (int draw = 0; draw < 100; ++draw) {
    LogisticProblem p;
    p.dim = 1 + rng() % 6;
    p.lambda = std::abs(n(rng)) * 0.1;
    const std::size_t rows = 1 + rng() % 15;
    for (std::size_t r = 0; r < rows; ++r) {
      SparseRow row;
      for (std::size_t j = 0; j < p.dim; ++j) {
        if (rng() % 3) row.push_back({j, n(rng)});
      }
      p.rows.push_back(row);
      p.labels.push_back(static_cast<int>(rng() % 2));
      p.sample_weights.push_back(0.5 + std::abs(n(rng)));
    }
    std::vector<double> w(p.dim);
    for (auto& x : w) x = n(rng);
    const double b = n(rng);
    std::vector<double> gw;
    double gb = 0.0;
    const double loss = logistic_loss_and_gradient(p, w, b, gw, gb);
    CHECK(loss == doctest::Approx(logistic_loss(p, w, b)).epsilon(1e-14));

    std::vector<double> numeric(p.dim + 1);
    for (std::size_t j = 0; j <= p.dim; ++j) {
      auto wp = w, wm = w;
      double bp = b, bm = b;
      if (j < p.dim) {
        wp[j] += h;
        wm[j] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      numeric[j] = (logistic_loss(p, wp, bp) - logistic_loss(p, wm, bm)) / (2.0 * h);
    }
    std::vector<double> analytic = gw;
    analytic.push_back(gb);
    std::vector<double> diff(analytic.size());
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = analytic[j] - numeric[j];
    const double scale = std::max(l2(analytic), l2(numeric));
    CHECK(l2(diff) <= 1e-6 * std::max(scale, 1e-12));
  }
}

TEST_CASE("accepted steps never increase the loss") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto d = testing::make_separable_points(seed, 60);
    LogisticProblem p;
    p.dim = 2;
    p.lambda = 1e-4;
    for (const auto& it : d.items) {
      p.rows.push_back({{0, (*it.features.embedding)[0]}, {1, (*it.features.embedding)[1]}});
      p.labels.push_back(it.label);
    }
    p.sample_weights = inverse_frequency_weights(p.labels);
    std::vector<double> w(2, 0.0);
    double b = 0.0;
    // A large step size forces rejections.
    const auto trace = gradient_descent(p, w, b, 50.0, 200);
    REQUIRE(trace.accepted_losses.size() == static_cast<std::size_t>(trace.accepted_steps) + 1);
    for (std::size_t i = 1; i < trace.accepted_losses.size(); ++i) {
      CHECK(trace.accepted_losses[i] <= trace.accepted_losses[i - 1]);
    }
    CHECK(trace.final_loss == trace.accepted_losses.back());
    CHECK(trace.accepted_losses.front() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("inverse frequency weights") {
  const std::vector<int> labels{1, 0, 0, 0};
  const auto w = inverse_frequency_weights(labels);
  CHECK(w == std::vector<double>{2.0, 4.0 / 6.0, 4.0 / 6.0, 4.0 / 6.0});
}

// --- prediction -----------------------------------------------------------------

TEST_CASE("predict: zero model, large margin, hand-computed value") {
  ClassifierModel m;
  m.kind = ModelKind::LinearEmbedding;
  m.embedding_dim = 2;
  m.weights.assign(2 + kStructuralCount, 0.0);
  m.scaling.max.fill(1.0);
  CommentFeatures f;
  f.embedding = std::vector<double>{0.3, 0.1};
  f.structural[0] = 1.0;
  CHECK(predict(m, f).probability == 0.5);
  CHECK(predict(m, f).label == 1);

  m.weights[0] = 1e4;
  CHECK(predict(m, f).probability == doctest::Approx(1.0).epsilon(1e-15));

  m.weights = {1.0, -2.0, 0.5, 0, 0, 0, 0, 0};
  m.bias = 0.25;
  m.scaling.max[0] = 2.0;  // structural[0] scales to 0.5
  const double z = 0.3 - 0.2 + 0.5 * 0.5 + 0.25;
  CHECK(predict(m, f).probability == doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-15));

  f.embedding = std::vector<double>{1.0};
  CHECK(code_of([&] { predict(m, f); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("sigmoid is stable at the extremes") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(1000.0) == 1.0);
  CHECK(sigmoid(-1000.0) == 0.0);
  CHECK(sigmoid(2.0) + sigmoid(-2.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("raising the threshold never increases recall") {
  const auto d = testing::make_separable_points(9, 200);
  TrainConfig cfg;
  cfg.kind = ModelKind::LinearEmbedding;
  cfg.epochs = 5;  // underfit so recall varies with the threshold
  auto m = train(d, cfg);
  double prev = 2.0;
  for (double t = 0.05; t < 1.0; t += 0.05) {
    m.threshold = t;
    const double r = evaluate(m, d).recall;
    CHECK(r <= prev);
    prev = r;
  }
}

// --- ensembles ------------------------------------------------------------------

TEST_CASE("majority vote") {
  const std::vector<Prediction> three{vote(1, 0.9), vote(1, 0.6), vote(0, 0.1)};
  CHECK(majority_vote(three) == 1);
  const std::vector<Prediction> tie{vote(1, 0.8), vote(0, 0.3)};
  CHECK(majority_vote(tie) == 1);
  const std::vector<Prediction> tie0{vote(1, 0.6), vote(0, 0.1)};
  CHECK(majority_vote(tie0) == 0);
  const std::vector<Prediction> even{vote(1, 0.7), vote(0, 0.3)};
  CHECK(majority_vote(even) == 0);
}

TEST_CASE("three binary votes: all eight cases give the mode") {
  for (int mask = 0; mask < 8; ++mask) {
    std::vector<Prediction> votes;
    int ones = 0;
    for (int i = 0; i < 3; ++i) {
      const int label = (mask >> i) & 1;
      ones += label;
      votes.push_back(vote(label, label ? 0.6 : 0.4));
    }
    CHECK(majority_vote(votes) == (ones >= 2 ? 1 : 0));
  }
}

TEST_CASE("ensemble of one model equals the model") {
  const auto d = testing::make_separable_points(10, 80);
  const auto m = train_points(10, 80);
  const std::vector<EnsembleMember> one{m};
  for (const auto& it : d.items) CHECK(ensemble_predict(one, it) == predict(m, it.features).label);
  CHECK(evaluate(one, d) == evaluate(m, d));
}

TEST_CASE("external predictions") {
  const auto e = ExternalPredictions::parse_tsv(
      "issue_id\tcomment_id\tlabel\tprobability\nP0\tc0\t1\t0.9\nP0\tc1\t0\t0.2\n", "llm");
  CHECK(e.predictions.size() == 2);
  CHECK(ExternalPredictions::parse_tsv(e.to_tsv(), "llm").predictions == e.predictions);
  CHECK(ExternalPredictions::parse_tsv("P0\tc0\t1\t0.9\n", "x").predictions.size() == 1);
  CHECK(code_of([] { ExternalPredictions::parse_tsv("P0\tc0\t7\t0.9\n", "x"); }) == ErrorCode::MalformedFile);
  CHECK(code_of([] { ExternalPredictions::parse_tsv("P0\tc0\t1\n", "x"); }) == ErrorCode::MalformedFile);
  LabeledItem item;
  item.issue_id = "P0";
  item.comment_id = "c0";
  CHECK(member_predict(EnsembleMember{e}, item).label == 1);
  item.comment_id = "c9";
  CHECK(code_of([&] { member_predict(EnsembleMember{e}, item); }) == ErrorCode::MissingKey);
}

// --- metrics --------------------------------------------------------------------

TEST_CASE("metrics from confusion counts") {
  const auto m = Metrics::from_counts(3, 1, 2, 0);
  CHECK(m.precision == 0.75);
  CHECK(m.recall == 0.6);
  CHECK(m.f1 == doctest::Approx(2.0 * 0.45 / 1.35).epsilon(1e-15));
  const auto zero = Metrics::from_counts(0, 0, 4, 6);
  CHECK(zero.precision == 0.0);
  CHECK(zero.recall == 0.0);
  CHECK(zero.f1 == 0.0);
  const std::vector<int> gold{1, 0, 1, 0};
  const auto perfect = score_predictions(gold, gold);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);
}

TEST_CASE("F1 is the harmonic mean and all metrics lie in [0, 1]") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 500; ++t) {
    const auto m = Metrics::from_counts(rng() % 20, rng() % 20, rng() % 20, rng() % 20);
    for (double x : {m.precision, m.recall, m.f1}) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
    if (m.precision > 0 && m.recall > 0) {
      CHECK(m.f1 == doctest::Approx(2.0 * m.precision * m.recall / (m.precision + m.recall)).epsilon(1e-14));
    }
  }
}

// --- transfer -------------------------------------------------------------------

TEST_CASE("transfer: fraction 0 leaves the model unchanged") {
  const auto a = testing::make_separable_points(1, 100, "A");
  const auto b = testing::make_separable_points(2, 100, "B");
  TransferConfig cfg;
  cfg.train.kind = ModelKind::LinearEmbedding;
  const auto r = transfer_evaluate(a, b, 0.0, cfg);
  CHECK(r.zero_shot == r.adapted);
  CHECK(r.adaptation_issues.empty());
  CHECK(r.evaluated_items == 100);
}

TEST_CASE("transfer: a relabeled copy scores like the training set") {
  const auto a = testing::make_separable_points(3, 100, "A");
  auto b = a;
  b.project_id = "B";
  TransferConfig cfg;
  cfg.train.kind = ModelKind::LinearEmbedding;
  const auto r = transfer_evaluate(a, b, 0.0, cfg);
  CHECK(r.zero_shot.f1 == evaluate(train(a, cfg.train), a).f1);
}

TEST_CASE("transfer: adaptation slice is the first issues by id") {
  const auto a = testing::make_separable_points(4, 80, "A");
  const auto b = testing::make_separable_points(5, 80, "B");  // 20 issues of 4 items
  TransferConfig cfg;
  cfg.train.kind = ModelKind::LinearEmbedding;
  const auto r = transfer_evaluate(a, b, 0.2, cfg);
  std::set<std::string> ids;
  for (const auto& it : b.items) ids.insert(it.issue_id);
  const std::vector<std::string> first4(ids.begin(), std::next(ids.begin(), 4));
  CHECK(r.adaptation_issues == first4);
  CHECK(r.evaluated_items == 64);
  CHECK(r.adapted.f1 >= r.zero_shot.f1 - 0.05);
}

TEST_CASE("transfer errors") {
  const auto a = testing::make_separable_points(1, 40, "A");
  TransferConfig cfg;
  cfg.train.kind = ModelKind::LinearEmbedding;
  CHECK(code_of([&] { transfer_evaluate(a, a, 0.0, cfg); }) == ErrorCode::SameProject);
  const auto b = testing::make_separable_points(2, 40, "B");
  CHECK(code_of([&] { transfer_evaluate(a, b, 1.0, cfg); }) == ErrorCode::EmptySplit);
  CHECK(code_of([&] { transfer_evaluate(a, b, 1.5, cfg); }) == ErrorCode::InvalidConfig);
}

// --- serialization --------------------------------------------------------------

TEST_CASE("model JSON round trip") {
  const auto c = testing::make_solution_corpus(2);
  std::vector<const IssueReport*> issues;
  for (const auto& i : c.issues) issues.push_back(&i);
  const auto v = build_vocabulary(issues);
  auto d = make_dataset("proj", issues, v, &c.embeddings.at("comments"));
  d.vocabulary = v;
  for (ModelKind kind : {ModelKind::LinearTfidf, ModelKind::LinearEmbedding, ModelKind::NearestCentroidEmbedding}) {
    TrainConfig cfg;
    cfg.kind = kind;
    cfg.epochs = 50;
    const auto m = train(d, cfg);
    const auto text = serialize_model(m);
    const auto back = parse_model(text);
    CHECK(back == m);
    CHECK(serialize_model(back) == text);
    for (const auto& it : d.items) CHECK(predict(back, it.features) == predict(m, it.features));
  }
  CHECK(code_of([] { parse_model("{\"model_version\": 2}"); }) == ErrorCode::MalformedFile);
  CHECK(code_of([] { parse_model("nope"); }) == ErrorCode::MalformedFile);
  CHECK(parse_model_kind("LINEAR_TFIDF") == ModelKind::LinearTfidf);
  CHECK(!parse_model_kind("SVM"));
}
