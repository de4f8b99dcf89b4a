#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irk/corpus.hpp"
#include "irk/embedding.hpp"
#include "irk/ranking.hpp"

namespace irk::uiloc {

enum class Granularity { Screen, Component };

struct UiDocument {
  std::string doc_id;
  Granularity granularity = Granularity::Screen;
  std::vector<std::string> tokens;
  std::string parent_screen;  // COMPONENT only
  std::optional<std::string> embedding_key;

  bool operator==(const UiDocument&) const = default;
};

struct Posting {
  std::size_t doc = 0;  // ordinal into Index::documents()
  std::size_t tf = 0;

  bool operator==(const Posting&) const = default;
};

// Inverted index over one app's screens or components. Immutable after build.
class Index {
 public:
  explicit Index(std::vector<UiDocument> documents);

  const std::vector<UiDocument>& documents() const noexcept { return documents_; }
  const std::map<std::string, std::vector<Posting>, std::less<>>& postings() const noexcept { return postings_; }
  const std::vector<std::size_t>& doc_lengths() const noexcept { return doc_lengths_; }
  double avg_doc_length() const noexcept { return avg_doc_length_; }
  std::size_t document_frequency(std::string_view term) const;

 private:
  std::vector<UiDocument> documents_;
  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
  std::vector<std::size_t> doc_lengths_;
  double avg_doc_length_ = 0.0;
};

// Same tokenizer as irk::text::tokenize.
std::vector<std::string> tokenize(std::string_view text);

// SCREEN documents: screen name tokens followed by every child component's
// label and description tokens. COMPONENT documents: label + description +
// kind tokens. Throws EMPTY_APP when there is nothing to index.
Index build_index(std::span<const Screen> screens, Granularity granularity);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

double bm25_idf(std::size_t n_docs, std::size_t df);

// Okapi BM25 over every document (zero-score documents included).
Ranking score_lexical(std::span<const std::string> query, const Index& index, const Bm25Params& params = {});

// Cosine similarity for each doc in doc_keys (doc id -> embedding key).
// Throws DIMENSION_MISMATCH, MISSING_KEY.
Ranking score_dense(std::span<const double> query_vector, const EmbeddingStore& store,
                    const std::map<std::string, std::string>& doc_keys);

enum class FusionMethod { MinMax, Rrf };

struct FusionConfig {
  FusionMethod method = FusionMethod::MinMax;
  double rrf_k = 60.0;
};

// Weighted sum of per-ranking min-max normalized scores (absent docs count 0),
// or weighted reciprocal-rank fusion. Throws WEIGHT_MISMATCH.
Ranking fuse(std::span<const Ranking> rankings, std::span<const double> weights, const FusionConfig& config = {});

struct LocalizeConfig {
  Bm25Params bm25;
  bool dense = false;
  // (lexical, dense) fusion weights.
  std::vector<double> fusion_weights = {0.5, 0.5};
  FusionConfig fusion;
  double alpha = 0.7;  // component vs parent-screen weight
  // Dense inputs; dense scoring is skipped when either is missing.
  const EmbeddingStore* store = nullptr;
  std::optional<std::vector<double>> query_vector;
};

Ranking localize_screens(std::string_view ob_text, const App& app, const LocalizeConfig& config = {});
Ranking localize_components(std::string_view ob_text, const App& app, const LocalizeConfig& config = {});

// new score = (1 - gamma) * normalized base + gamma * best normalized score
// among screens mapped to the file (0 when unmapped).
Ranking rerank_code_files(const Ranking& base, const Ranking& screens,
                          const std::map<std::string, std::vector<std::string>>& code_map, double gamma = 0.3);

// OB query text for an issue: gold OB sentences when annotated; otherwise
// non-S2R sentences containing failure terms; otherwise title plus all
// non-S2R sentences.
std::string observed_behavior_text(const IssueReport& issue);

// Key under which an issue's precomputed OB query vector is stored.
std::string query_embedding_key(const IssueReport& issue);

}  // namespace irk::uiloc
