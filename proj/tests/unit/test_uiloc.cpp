#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "irk/corpus.hpp"
#include "irk/error.hpp"
#include "irk/uiloc.hpp"

using namespace irk;
using namespace irk::uiloc;
using Tokens = std::vector<std::string>;

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

// Closed-form Okapi BM25 evaluated per document from raw token lists.
std::vector<double> bm25_oracle(const std::vector<Tokens>& docs, const Tokens& query, double k1 = 1.2,
                                double b = 0.75) {
  const double n = static_cast<double>(docs.size());
  double total = 0.0;
  for (const auto& d : docs) total += static_cast<double>(d.size());
  const double avgdl = total / n;
  std::vector<double> out(docs.size(), 0.0);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (const auto& q : query) {
      double tf = 0.0, df = 0.0;
      for (const auto& t : docs[i]) tf += t == q ? 1.0 : 0.0;
      for (const auto& d : docs) df += std::count(d.begin(), d.end(), q) > 0 ? 1.0 : 0.0;
      if (tf == 0.0) continue;
      const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
      const double dl = static_cast<double>(docs[i].size());
      out[i] += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl));
    }
  }
  return out;
}

Screen screen(const std::string& id, const std::string& name, std::vector<std::pair<std::string, std::string>> comps) {
  Screen s{id, name, {}, std::nullopt};
  for (auto& [cid, label] : comps) s.components.push_back({cid, ComponentKind::Button, label, "", {0, 0, 1, 1}, std::nullopt});
  return s;
}

Ranking ranking(std::vector<ScoredDoc> entries) {
  Ranking r;
  r.entries = std::move(entries);
  r.sort();
  return r;
}

}  // namespace

TEST_CASE("tokenize matches the shared tokenizer examples") {
  CHECK(tokenize("LoginButton") == Tokens{"login", "button"});
  CHECK(tokenize("the The THE").empty());
  CHECK(tokenize("saveFile_v2 crash!") == Tokens{"save", "file", "v2", "crash"});
}

TEST_CASE("index: screen and component granularity") {
  const std::vector<Screen> screens{screen("S1", "Main", {{"a", "Open"}, {"b", "Close"}})};
  const auto s = build_index(screens, Granularity::Screen);
  CHECK(s.documents().size() == 1);
  CHECK(s.documents()[0].tokens == Tokens{"main", "open", "close"});
  const auto c = build_index(screens, Granularity::Component);
  REQUIRE(c.documents().size() == 2);
  for (const auto& d : c.documents()) CHECK(d.parent_screen == "S1");
  CHECK(c.documents()[0].tokens == Tokens{"open", "button"});
  CHECK(code_of([] { build_index(std::vector<Screen>{}, Granularity::Screen); }) == ErrorCode::EmptyApp);
  const std::vector<Screen> bare{screen("S1", "Main", {})};
  CHECK(code_of([&] { build_index(bare, Granularity::Component); }) == ErrorCode::EmptyApp);
}

TEST_CASE("index: fixture screen documents and average length") {
  const Corpus c = load_corpus(kTiny);
  const auto index = build_index(c.apps.at("tiny").screens, Granularity::Screen);
  // Counted by hand from app.json ("in" and "the" are stopwords).
  const std::map<std::string, Tokens> expected{
      {"S_home", {"home", "login", "settings", "open", "settings", "app", "logo"}},
      {"S_login", {"login", "username", "password", "sign"}},
      {"S_settings", {"settings", "dark", "mode", "about", "version", "information"}},
  };
  REQUIRE(index.documents().size() == 3);
  for (const auto& d : index.documents()) CHECK(d.tokens == expected.at(d.doc_id));
  CHECK(index.avg_doc_length() == doctest::Approx(17.0 / 3.0).epsilon(1e-15));
  CHECK(index.document_frequency("settings") == 2);
  CHECK(index.document_frequency("nothing") == 0);
  // postings agree with the documents
  for (const auto& [term, postings] : index.postings()) {
    for (const auto& p : postings) {
      const auto& toks = index.documents()[p.doc].tokens;
      CHECK(static_cast<std::size_t>(std::count(toks.begin(), toks.end(), term)) == p.tf);
    }
  }
}

TEST_CASE("BM25: empty query gives zeros in doc id order") {
  const std::vector<Screen> screens{screen("S2", "Beta", {}), screen("S1", "Alpha", {}), screen("S3", "Gamma", {})};
  const auto r = score_lexical(Tokens{}, build_index(screens, Granularity::Screen));
  CHECK(r.doc_ids() == Tokens{"S1", "S2", "S3"});
  for (const auto& e : r.entries) CHECK(e.score == 0.0);
}

TEST_CASE("BM25: single document, single term by hand") {
  const std::vector<Screen> screens{screen("S1", "Crash", {})};
  const auto r = score_lexical(Tokens{"crash"}, build_index(screens, Granularity::Screen));
  const double k1 = 1.2, b = 0.75, tf = 1.0;
  const double idf = std::log(1.0 + (1.0 - 1.0 + 0.5) / (1.0 + 0.5));
  const double expected = idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * 1.0));
  REQUIRE(r.entries.size() == 1);
  CHECK(std::abs(r.entries[0].score - expected) <= 1e-12);
}

TEST_CASE("BM25: fixture query matches the oracle") {
  const Corpus c = load_corpus(kTiny);
  const auto index = build_index(c.apps.at("tiny").screens, Granularity::Screen);
  std::vector<Tokens> docs;
  for (const auto& d : index.documents()) docs.push_back(d.tokens);
  const Tokens query{"crash", "login"};
  const auto expected = bm25_oracle(docs, query);
  const auto r = score_lexical(query, index);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    CHECK(std::abs(r.entries[r.rank_of(index.documents()[i].doc_id) - 1].score - expected[i]) <= 1e-12);
  }
  // shorter document wins on equal tf
  CHECK(r.doc_ids() == Tokens{"S_login", "S_home", "S_settings"});
}

TEST_CASE("BM25: random corpora match the oracle") {
  std::mt19937_64 rng(99);
  const Tokens vocab{"alpha", "beta", "gamma", "delta", "omega", "sigma", "theta", "kappa"};
  for (int t = 0; t < 200; ++t) {
    std::vector<UiDocument> docs;
    std::vector<Tokens> raw;
    const std::size_t n = 1 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      Tokens toks;
      for (std::size_t k = rng() % 8; k > 0; --k) toks.push_back(vocab[rng() % vocab.size()]);
      docs.push_back({"d" + std::to_string(i), Granularity::Screen, toks, "", std::nullopt});
      raw.push_back(toks);
    }
    Tokens query;
    for (std::size_t k = rng() % 4; k > 0; --k) query.push_back(vocab[rng() % vocab.size()]);
    const Index index(docs);
    const auto r = score_lexical(query, index);
    const auto expected = bm25_oracle(raw, query);
    REQUIRE(r.entries.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(r.entries[r.rank_of(docs[i].doc_id) - 1].score - expected[i]) <= 1e-9);
    }
  }
}

TEST_CASE("dense scoring") {
  EmbeddingStore store(3);
  store.add("a", {1, 0, 0});
  store.add("b", {0, 1, 0});
  const std::vector<double> q{1, 0, 0};
  const auto r = score_dense(q, store, {{"A", "a"}, {"B", "b"}});
  CHECK(r.doc_ids() == Tokens{"A", "B"});
  CHECK(std::abs(r.entries[0].score - 1.0) <= 1e-12);
  CHECK(r.entries[1].score == 0.0);
  CHECK(code_of([&] { score_dense(std::vector<double>{1, 0}, store, {{"A", "a"}}); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { score_dense(q, store, {{"A", "zz"}}); }) == ErrorCode::MissingKey);
}

TEST_CASE("dense scoring on the fixture store") {
  const Corpus c = load_corpus(kTiny);
  const auto& store = c.embeddings.at("tiny");
  const auto q = store.at("ob:I1");
  const auto r = score_dense(q, store, {{"S_home", "S_home"}, {"S_login", "S_login"}, {"S_settings", "S_settings"}});
  const double norm = std::sqrt(0.1 * 0.1 + 0.9 * 0.9);
  CHECK(r.doc_ids() == Tokens{"S_login", "S_home", "S_settings"});
  CHECK(std::abs(r.entries[0].score - 0.9 / norm) <= 1e-12);
  CHECK(std::abs(r.entries[1].score - 0.1 / norm) <= 1e-12);
  CHECK(r.entries[2].score == 0.0);
}

TEST_CASE("fuse: weights concentrated on one ranking keep its order") {
  const auto a = ranking({{"x", 3}, {"y", 9}, {"z", 1}});
  const auto b = ranking({{"x", 5}, {"y", 0}, {"z", 7}});
  const std::vector<Ranking> both{a, b};
  CHECK(fuse(both, std::vector<double>{1, 0}).doc_ids() == a.doc_ids());
  CHECK(fuse(both, std::vector<double>{0, 1}).doc_ids() == b.doc_ids());
  const std::vector<Ranking> same{a, a};
  CHECK(fuse(same, std::vector<double>{0.5, 0.5}).doc_ids() == a.doc_ids());
}

TEST_CASE("fuse: hand-computed min-max fusion") {
  // a: x=1, y=0.5, z=0 after normalization; b: x=0, y=1, z=0.5
  const auto a = ranking({{"x", 3}, {"y", 2}, {"z", 1}});
  const auto b = ranking({{"x", 0}, {"y", 10}, {"z", 5}});
  const std::vector<Ranking> both{a, b};
  const auto f = fuse(both, std::vector<double>{0.7, 0.3});
  REQUIRE(f.doc_ids() == Tokens{"x", "y", "z"});
  CHECK(f.entries[0].score == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(f.entries[1].score == doctest::Approx(0.35 + 0.3).epsilon(1e-12));
  CHECK(f.entries[2].score == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("fuse: constant ranking normalizes to 0.5 and absent docs contribute 0") {
  const auto a = ranking({{"x", 2}, {"y", 2}});
  const auto b = ranking({{"z", 4}});
  const std::vector<Ranking> both{a, b};
  const auto f = fuse(both, std::vector<double>{1, 1});
  CHECK(f.doc_ids() == Tokens{"x", "y", "z"});
  for (const auto& e : f.entries) CHECK(e.score == 0.5);
}

TEST_CASE("fuse: reciprocal rank") {
  const auto a = ranking({{"x", 3}, {"y", 2}});
  const auto b = ranking({{"y", 3}, {"x", 2}});
  const std::vector<Ranking> both{a, b};
  const auto f = fuse(both, std::vector<double>{0.6, 0.4}, {FusionMethod::Rrf, 60.0});
  CHECK(f.doc_ids() == Tokens{"x", "y"});
  CHECK(f.entries[0].score == doctest::Approx(0.6 / 61 + 0.4 / 62).epsilon(1e-12));
}

TEST_CASE("fuse: weight errors") {
  const std::vector<Ranking> one{ranking({{"x", 1}})};
  CHECK(code_of([&] { fuse(one, std::vector<double>{1, 1}); }) == ErrorCode::WeightMismatch);
  CHECK(code_of([&] { fuse(one, std::vector<double>{-1}); }) == ErrorCode::WeightMismatch);
  CHECK(code_of([&] { fuse(one, std::vector<double>{0}); }) == ErrorCode::WeightMismatch);
}

TEST_CASE("localize screens: dominant tokens, empty query, fixture gold") {
  const Corpus c = load_corpus(kTiny);
  const App& app = c.apps.at("tiny");
  CHECK(localize_screens("dark mode dark mode", app).entries.front().doc_id == "S_settings");
  const auto empty = localize_screens("", app);
  CHECK(empty.doc_ids() == Tokens{"S_home", "S_login", "S_settings"});
  for (const auto& issue : c.issues) {
    const auto r = localize_screens(observed_behavior_text(issue), app);
    CAPTURE(issue.id);
    CHECK(r.entries.size() == app.screens.size());
    const auto rank = r.rank_of(issue.gold_screen_ids->front());
    CHECK(rank >= 1);
    CHECK(rank <= 3);
  }
}

TEST_CASE("localize components: alpha = 1 is the pure component ranking") {
  const Corpus c = load_corpus(kTiny);
  const App& app = c.apps.at("tiny");
  LocalizeConfig cfg;
  cfg.alpha = 1.0;
  const std::string ob = "login username crash";
  const auto pure = score_lexical(tokenize(ob), build_index(app.screens, Granularity::Component));
  CHECK(localize_components(ob, app, cfg).doc_ids() == pure.doc_ids());
}

TEST_CASE("localize components: same label ranks by parent screen") {
  App app;
  app.id = "two";
  app.screens = {screen("S_a", "Alpha crash", {{"go_a", "Go"}}), screen("S_b", "Beta", {{"go_b", "Go"}})};
  const auto r = localize_components("go crash", app);
  CHECK(r.doc_ids() == Tokens{"go_a", "go_b"});
}

TEST_CASE("localize components: fixture gold within top 3 and totality") {
  const Corpus c = load_corpus(kTiny);
  const App& app = c.apps.at("tiny");
  std::size_t n_components = 0;
  for (const auto& s : app.screens) n_components += s.components.size();
  for (const auto& issue : c.issues) {
    const auto r = localize_components(observed_behavior_text(issue), app);
    CAPTURE(issue.id);
    CHECK(r.entries.size() == n_components);
    const auto ids = r.doc_ids();
    const std::set<std::string> unique(ids.begin(), ids.end());
    CHECK(unique.size() == n_components);
    const auto rank = r.rank_of(issue.gold_component_ids->front());
    CHECK(rank >= 1);
    CHECK(rank <= 3);
  }
}

TEST_CASE("localize with dense fusion") {
  const Corpus c = load_corpus(kTiny);
  const App& app = c.apps.at("tiny");
  const auto store = c.merged_embeddings();
  REQUIRE(store);
  LocalizeConfig cfg;
  cfg.dense = true;
  cfg.store = &*store;
  const auto q = store->at("ob:I2");
  cfg.query_vector = std::vector<double>(q.begin(), q.end());
  cfg.fusion_weights = {0.0, 1.0};
  const auto r = localize_screens("", app, cfg);
  CHECK(r.entries.front().doc_id == "S_settings");
  CHECK(r.entries.size() == 3);
  // no query vector: lexical only
  cfg.query_vector.reset();
  CHECK(localize_screens("login", app, cfg) == localize_screens("login", app));
}

TEST_CASE("rerank: gamma = 0 preserves base order") {
  const auto base = ranking({{"A.java", 0.9}, {"B.java", 0.5}, {"C.java", 0.1}});
  const auto screens = ranking({{"S1", 1.0}, {"S2", 0.0}});
  const std::map<std::string, std::vector<std::string>> map{{"S1", {"C.java"}}};
  CHECK(rerank_code_files(base, screens, map, 0.0).doc_ids() == base.doc_ids());
}

TEST_CASE("rerank: tied base goes to the file on the top screen") {
  const auto base = ranking({{"A.java", 0.5}, {"B.java", 0.5}});
  const auto screens = ranking({{"S1", 2.0}, {"S2", 1.0}});
  const std::map<std::string, std::vector<std::string>> map{{"S1", {"B.java"}}, {"S2", {"A.java"}}};
  CHECK(rerank_code_files(base, screens, map).doc_ids() == Tokens{"B.java", "A.java"});
}

TEST_CASE("rerank: fixture base ranking by hand") {
  const Corpus c = load_corpus(kTiny);
  const auto& issue = *c.find_issue("I1");
  const auto base = ranking(*issue.base_code_ranking);
  // screen scores normalize to S_login 1, S_home 0.5, S_settings 0
  const auto screens = ranking({{"S_login", 2.0}, {"S_home", 1.0}, {"S_settings", 0.0}});
  const auto r = rerank_code_files(base, screens, *c.code_map);
  // base normalized: Home 1, Auth 0.875, Login 0.375, Settings 0
  REQUIRE(r.doc_ids() == Tokens{"AuthService.java", "HomeActivity.java", "LoginActivity.java", "SettingsActivity.java"});
  CHECK(r.entries[0].score == doctest::Approx(0.7 * 0.875 + 0.3 * 1.0).epsilon(1e-12));
  CHECK(r.entries[1].score == doctest::Approx(0.7 * 1.0 + 0.3 * 0.5).epsilon(1e-12));
  CHECK(r.entries[2].score == doctest::Approx(0.7 * 0.375 + 0.3 * 1.0).epsilon(1e-12));
  CHECK(r.entries[3].score == 0.0);
}

TEST_CASE("observed behavior text") {
  const Corpus c = load_corpus(kTiny);
  CHECK(observed_behavior_text(*c.find_issue("I1")) ==
        "The app crashes with an error on the login screen after typing the username.");
  auto issue = *c.find_issue("I2");
  // no failure term outside the steps: title plus every non-step sentence
  CHECK(observed_behavior_text(issue) ==
        "Dark mode setting is not saved The dark mode checkbox is unchecked after restart. "
        "Expected it to stay checked.");
  issue.ob_sentences = std::vector<int>{1};
  CHECK(observed_behavior_text(issue) == "The dark mode checkbox is unchecked after restart.");
  CHECK(query_embedding_key(issue) == "ob:I2");
}

TEST_CASE("localization is deterministic") {
  const Corpus c = load_corpus(kTiny);
  const App& app = c.apps.at("tiny");
  for (const auto& issue : c.issues) {
    const auto ob = observed_behavior_text(issue);
    CHECK(localize_screens(ob, app) == localize_screens(ob, app));
    CHECK(localize_components(ob, app) == localize_components(ob, app));
  }
}
