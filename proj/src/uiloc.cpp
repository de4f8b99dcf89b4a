#include "irk/uiloc.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "irk/error.hpp"
#include "irk/s2r.hpp"
#include "irk/text.hpp"

namespace irk::uiloc {

namespace {

constexpr std::string_view kFailureTerms[] = {"crash", "crashes", "crashed", "error",   "errors",    "exception",
                                              "fail",  "fails",   "failed",  "failure", "incorrect", "wrong",
                                              "broken"};

void append(std::vector<std::string>& out, std::vector<std::string> more) {
  out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

std::vector<std::string> kind_tokens(ComponentKind kind) {
  if (kind == ComponentKind::Other) return {};
  return text::tokenize(to_string(kind));
}

std::map<std::string, double> score_map(const Ranking& r) {
  std::map<std::string, double> m;
  for (const auto& e : r.entries) m.emplace(e.doc_id, e.score);
  return m;
}

Ranking with_dense(const Ranking& lexical, const Index& index, const LocalizeConfig& config) {
  if (!config.dense || !config.store || !config.query_vector) return lexical;
  std::map<std::string, std::string> keys;
  for (const auto& d : index.documents()) {
    if (d.embedding_key) keys.emplace(d.doc_id, *d.embedding_key);
  }
  if (keys.empty()) return lexical;
  const Ranking dense = score_dense(*config.query_vector, *config.store, keys);
  const Ranking parts[] = {lexical, dense};
  Ranking fused = fuse(parts, config.fusion_weights, config.fusion);
  fused.query_id = lexical.query_id;
  return fused;
}

}  // namespace

Index::Index(std::vector<UiDocument> documents) : documents_(std::move(documents)) {
  std::size_t total = 0;
  for (std::size_t d = 0; d < documents_.size(); ++d) {
    std::map<std::string_view, std::size_t> tf;
    for (const auto& t : documents_[d].tokens) ++tf[t];
    for (const auto& [term, count] : tf) postings_[std::string(term)].push_back({d, count});
    doc_lengths_.push_back(documents_[d].tokens.size());
    total += documents_[d].tokens.size();
  }
  avg_doc_length_ = documents_.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(documents_.size());
}

std::size_t Index::document_frequency(std::string_view term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

std::vector<std::string> tokenize(std::string_view text) { return text::tokenize(text); }

Index build_index(std::span<const Screen> screens, Granularity granularity) {
  std::vector<UiDocument> docs;
  for (const auto& s : screens) {
    if (granularity == Granularity::Screen) {
      UiDocument d{s.id, Granularity::Screen, text::tokenize(s.name), "", s.embedding_key};
      for (const auto& c : s.components) {
        append(d.tokens, text::tokenize(c.label));
        append(d.tokens, text::tokenize(c.description));
      }
      docs.push_back(std::move(d));
    } else {
      for (const auto& c : s.components) {
        UiDocument d{c.id, Granularity::Component, text::tokenize(c.label), s.id, c.embedding_key};
        append(d.tokens, text::tokenize(c.description));
        append(d.tokens, kind_tokens(c.kind));
        docs.push_back(std::move(d));
      }
    }
  }
  if (docs.empty()) {
    throw Error(ErrorCode::EmptyApp,
                granularity == Granularity::Screen ? "app has no screens" : "app has no components");
  }
  return Index(std::move(docs));
}

double bm25_idf(std::size_t n_docs, std::size_t df) {
  const double n = static_cast<double>(n_docs);
  const double f = static_cast<double>(df);
  return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

Ranking score_lexical(std::span<const std::string> query, const Index& index, const Bm25Params& params) {
  const auto& docs = index.documents();
  std::vector<double> scores(docs.size(), 0.0);
  const double avgdl = index.avg_doc_length();
  for (const auto& term : query) {
    auto it = index.postings().find(term);
    if (it == index.postings().end()) continue;
    const double idf = bm25_idf(docs.size(), it->second.size());
    for (const Posting& p : it->second) {
      const double tf = static_cast<double>(p.tf);
      const double dl = static_cast<double>(index.doc_lengths()[p.doc]);
      const double norm = avgdl > 0.0 ? (1.0 - params.b + params.b * dl / avgdl) : 1.0;
      scores[p.doc] += idf * (tf * (params.k1 + 1.0)) / (tf + params.k1 * norm);
    }
  }
  Ranking r;
  for (std::size_t d = 0; d < docs.size(); ++d) r.entries.push_back({docs[d].doc_id, scores[d]});
  r.sort();
  return r;
}

Ranking score_dense(std::span<const double> query_vector, const EmbeddingStore& store,
                    const std::map<std::string, std::string>& doc_keys) {
  if (query_vector.size() != store.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "query vector has " + std::to_string(query_vector.size()) +
                                                  " entries, store dimension is " + std::to_string(store.dim()));
  }
  Ranking r;
  for (const auto& [doc, key] : doc_keys) r.entries.push_back({doc, cosine(query_vector, store.at(key))});
  r.sort();
  return r;
}

Ranking fuse(std::span<const Ranking> rankings, std::span<const double> weights, const FusionConfig& config) {
  if (rankings.size() != weights.size()) {
    throw Error(ErrorCode::WeightMismatch, std::to_string(rankings.size()) + " rankings but " +
                                               std::to_string(weights.size()) + " weights");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::WeightMismatch, "weights must be non-negative");
    sum += w;
  }
  if (sum <= 0.0) throw Error(ErrorCode::WeightMismatch, "weights must not all be zero");

  std::map<std::string, double> fused;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    if (config.method == FusionMethod::MinMax) {
      for (const auto& e : min_max_normalized(rankings[i]).entries) fused[e.doc_id] += weights[i] * e.score;
    } else {
      Ranking sorted = rankings[i];
      sorted.sort();
      for (std::size_t r = 0; r < sorted.entries.size(); ++r) {
        fused[sorted.entries[r].doc_id] += weights[i] / (config.rrf_k + static_cast<double>(r + 1));
      }
    }
  }
  Ranking out;
  if (!rankings.empty()) out.query_id = rankings.front().query_id;
  for (const auto& [doc, score] : fused) out.entries.push_back({doc, score});
  out.sort();
  return out;
}

Ranking localize_screens(std::string_view ob_text, const App& app, const LocalizeConfig& config) {
  const Index index = build_index(app.screens, Granularity::Screen);
  const auto query = text::tokenize(ob_text);
  return with_dense(score_lexical(query, index, config.bm25), index, config);
}

Ranking localize_components(std::string_view ob_text, const App& app, const LocalizeConfig& config) {
  const Index components = build_index(app.screens, Granularity::Component);
  const Index screens = build_index(app.screens, Granularity::Screen);
  const auto query = text::tokenize(ob_text);

  const auto comp_norm = score_map(min_max_normalized(score_lexical(query, components, config.bm25)));
  const auto screen_norm = score_map(min_max_normalized(score_lexical(query, screens, config.bm25)));

  Ranking combined;
  for (const auto& d : components.documents()) {
    const double c = comp_norm.at(d.doc_id);
    const double s = screen_norm.at(d.parent_screen);
    combined.entries.push_back({d.doc_id, config.alpha * c + (1.0 - config.alpha) * s});
  }
  combined.sort();
  return with_dense(combined, components, config);
}

Ranking rerank_code_files(const Ranking& base, const Ranking& screens,
                          const std::map<std::string, std::vector<std::string>>& code_map, double gamma) {
  const auto screen_norm = score_map(min_max_normalized(screens));
  std::map<std::string, double> file_boost;
  for (const auto& [ui_id, files] : code_map) {
    auto s = screen_norm.find(ui_id);
    if (s == screen_norm.end()) continue;
    for (const auto& f : files) {
      auto [it, inserted] = file_boost.emplace(f, s->second);
      if (!inserted) it->second = std::max(it->second, s->second);
    }
  }
  Ranking out;
  out.query_id = base.query_id;
  for (const auto& e : min_max_normalized(base).entries) {
    auto b = file_boost.find(e.doc_id);
    const double boost = b == file_boost.end() ? 0.0 : b->second;
    out.entries.push_back({e.doc_id, (1.0 - gamma) * e.score + gamma * boost});
  }
  out.sort();
  return out;
}

std::string observed_behavior_text(const IssueReport& issue) {
  const auto sentences = s2r::sentence_texts(issue.body);
  std::string out;
  const auto add = [&](const std::string& s) {
    if (!out.empty()) out += ' ';
    out += s;
  };
  if (issue.ob_sentences && !issue.ob_sentences->empty()) {
    for (int i : *issue.ob_sentences) {
      if (i >= 0 && static_cast<std::size_t>(i) < sentences.size()) add(sentences[static_cast<std::size_t>(i)]);
    }
    return out;
  }

  const auto s2r_idx = s2r::identify_s2r_sentences(issue);
  const std::set<int> s2r(s2r_idx.begin(), s2r_idx.end());
  std::vector<std::string> other;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (!s2r.count(static_cast<int>(i))) other.push_back(sentences[i]);
  }
  for (const auto& s : other) {
    const auto words = text::raw_tokens(s);
    const bool failure = std::any_of(words.begin(), words.end(), [](const std::string& w) {
      return std::find(std::begin(kFailureTerms), std::end(kFailureTerms), w) != std::end(kFailureTerms);
    });
    if (failure) add(s);
  }
  if (!out.empty()) return out;
  add(issue.title);
  for (const auto& s : other) add(s);
  return out;
}

std::string query_embedding_key(const IssueReport& issue) { return "ob:" + issue.id; }

}  // namespace irk::uiloc
