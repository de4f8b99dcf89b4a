#include "irk/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "irk/corpus.hpp"
#include "irk/error.hpp"
#include "irk/execmodel.hpp"
#include "irk/io.hpp"
#include "irk/s2r.hpp"
#include "irk/solution.hpp"
#include "irk/uiloc.hpp"

namespace irk::eval {

using nlohmann::json;

// --- ranking metrics -----------------------------------------------------------

int hits_at_k(const Ranking& ranking, const std::set<std::string>& gold, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be at least 1");
  const std::size_t n = std::min(k, ranking.entries.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (gold.count(ranking.entries[i].doc_id)) return 1;
  }
  return 0;
}

double reciprocal_rank(const Ranking& ranking, const std::set<std::string>& gold) {
  for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
    if (gold.count(ranking.entries[i].doc_id)) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

double average_precision(const Ranking& ranking, const std::set<std::string>& gold) {
  if (gold.empty()) return 0.0;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
    if (gold.count(ranking.entries[i].doc_id)) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(gold.size());
}

double mrr(std::span<const RankedQuery> queries) {
  if (queries.empty()) throw Error(ErrorCode::InvalidConfig, "MRR needs at least one query");
  double sum = 0.0;
  for (const auto& q : queries) sum += reciprocal_rank(q.ranking, q.gold);
  return sum / static_cast<double>(queries.size());
}

double mean_average_precision(std::span<const RankedQuery> queries) {
  if (queries.empty()) throw Error(ErrorCode::InvalidConfig, "MAP needs at least one query");
  double sum = 0.0;
  for (const auto& q : queries) sum += average_precision(q.ranking, q.gold);
  return sum / static_cast<double>(queries.size());
}

// --- seeded splitting ----------------------------------------------------------

std::uint64_t Lcg64::next() {
  state_ = kMultiplier * state_ + kIncrement;
  return state_;
}

std::uint64_t Lcg64::below(std::uint64_t bound) { return (next() >> 33) % bound; }

void shuffle(std::vector<std::size_t>& v, std::uint64_t seed) {
  Lcg64 rng(seed);
  for (std::size_t i = v.size(); i-- > 1;) std::swap(v[i], v[rng.below(i + 1)]);
}

namespace {

std::vector<Fold> deal(const std::vector<std::size_t>& order, std::size_t n, std::size_t k) {
  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < order.size(); ++i) folds[i % k].test.push_back(order[i]);
  for (auto& f : folds) {
    std::sort(f.test.begin(), f.test.end());
    std::vector<bool> in_test(n, false);
    for (auto t : f.test) in_test[t] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_test[i]) f.train.push_back(i);
    }
  }
  return folds;
}

void check_fold_args(std::size_t n, std::size_t k) {
  if (k < 2) throw Error(ErrorCode::InvalidConfig, "k must be at least 2");
  if (n < k) {
    throw Error(ErrorCode::TooFewItems, std::to_string(n) + " items cannot fill " + std::to_string(k) + " folds");
  }
}

}  // namespace

std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  check_fold_args(n, k);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  shuffle(order, seed);
  return deal(order, n, k);
}

std::vector<Fold> kfold_split(std::span<const int> labels, std::size_t k, std::uint64_t seed, bool stratify) {
  if (!stratify) return kfold_split(labels.size(), k, seed);
  check_fold_args(labels.size(), k);
  std::vector<std::size_t> order(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(order, seed);
  std::stable_partition(order.begin(), order.end(), [&](std::size_t i) { return labels[i] == 1; });
  return deal(order, labels.size(), k);
}

// --- experiments ---------------------------------------------------------------

std::string_view to_string(Pipeline p) {
  switch (p) {
    case Pipeline::S2r: return "S2R";
    case Pipeline::UilocScreen: return "UILOC_SCREEN";
    case Pipeline::UilocComponent: return "UILOC_COMPONENT";
    case Pipeline::Solution: return "SOLUTION";
    case Pipeline::CodeRerank: return "CODE_RERANK";
  }
  return "S2R";
}

std::optional<Pipeline> parse_pipeline(std::string_view s) {
  for (Pipeline p : {Pipeline::S2r, Pipeline::UilocScreen, Pipeline::UilocComponent, Pipeline::Solution,
                     Pipeline::CodeRerank}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

std::vector<std::string> config_keys(Pipeline p) {
  const std::vector<std::string> lexical = {"k1", "b", "dense", "fusion", "fusion_weights", "rrf_k"};
  std::vector<std::string> keys;
  switch (p) {
    case Pipeline::S2r: keys = {"tau_high", "tau_match", "delta", "use_gold"}; break;
    case Pipeline::UilocScreen: keys = lexical; break;
    case Pipeline::UilocComponent: keys = lexical; keys.push_back("alpha"); break;
    case Pipeline::CodeRerank: keys = lexical; keys.push_back("gamma"); break;
    case Pipeline::Solution:
      keys = {"kind", "folds", "lambda", "learning_rate", "epochs", "class_weighting", "threshold", "stratify",
              "min_df"};
      break;
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

ExperimentSpec parse_spec(const std::string& content, const std::filesystem::path& base_dir) {
  const auto bad = [](const std::string& field, const std::string& what) {
    throw Error(ErrorCode::MalformedFile, "spec field '" + field + "': " + what);
  };
  json j;
  try {
    j = json::parse(content);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedFile, std::string("spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::MalformedFile, "spec must be a JSON object");
  static const std::set<std::string> known = {"name", "pipeline", "corpus", "config", "seed", "k_values"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) bad(key, "unknown field");
  }
  ExperimentSpec s;
  for (const char* required : {"name", "pipeline", "corpus"}) {
    if (!j.contains(required)) bad(required, "missing");
    if (!j[required].is_string()) bad(required, "must be a string");
  }
  s.name = j["name"].get<std::string>();
  if (!is_valid_id(s.name)) bad("name", "must be an identifier ([A-Za-z0-9_.-])");
  const auto p = parse_pipeline(j["pipeline"].get<std::string>());
  if (!p) bad("pipeline", "unknown pipeline '" + j["pipeline"].get<std::string>() + "'");
  s.pipeline = *p;
  s.corpus = j["corpus"].get<std::string>();
  if (s.corpus.is_relative() && !base_dir.empty()) s.corpus = base_dir / s.corpus;
  if (j.contains("config")) {
    if (!j["config"].is_object()) bad("config", "must be an object");
    s.config = j["config"];
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad("seed", "must be a non-negative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("k_values")) {
    if (!j["k_values"].is_array()) bad("k_values", "must be an array of integers");
    s.k_values.clear();
    for (const auto& k : j["k_values"]) {
      if (!k.is_number_integer()) bad("k_values", "must be an array of integers");
      s.k_values.push_back(k.get<int>());
    }
  }
  return s;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

class ConfigReader {
 public:
  ConfigReader(const json& config, Pipeline p) : config_(config) {
    const auto keys = config_keys(p);
    for (const auto& [key, _] : config.items()) {
      if (!std::binary_search(keys.begin(), keys.end(), key)) {
        throw Error(ErrorCode::InvalidConfig,
                    "unknown config key '" + key + "' for pipeline " + std::string(to_string(p)));
      }
    }
  }

  double number(const std::string& key, double fallback) const {
    if (!config_.contains(key)) return fallback;
    if (!config_[key].is_number()) fail(key, "must be a number");
    return config_[key].get<double>();
  }
  int integer(const std::string& key, int fallback) const {
    if (!config_.contains(key)) return fallback;
    if (!config_[key].is_number_integer()) fail(key, "must be an integer");
    return config_[key].get<int>();
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!config_.contains(key)) return fallback;
    if (!config_[key].is_boolean()) fail(key, "must be a boolean");
    return config_[key].get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    if (!config_.contains(key)) return fallback;
    if (!config_[key].is_string()) fail(key, "must be a string");
    return config_[key].get<std::string>();
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    if (!config_.contains(key)) return fallback;
    const json& v = config_[key];
    if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
      fail(key, "must be an array of numbers");
    }
    return v.get<std::vector<double>>();
  }

  [[noreturn]] static void fail(const std::string& key, const std::string& what) {
    throw Error(ErrorCode::InvalidConfig, "config key '" + key + "' " + what);
  }

 private:
  const json& config_;
};

uiloc::LocalizeConfig localize_config(const ConfigReader& r, bool component) {
  uiloc::LocalizeConfig c;
  c.bm25.k1 = r.number("k1", c.bm25.k1);
  c.bm25.b = r.number("b", c.bm25.b);
  c.dense = r.boolean("dense", false);
  const std::string fusion = r.string("fusion", "minmax");
  if (fusion == "minmax") c.fusion.method = uiloc::FusionMethod::MinMax;
  else if (fusion == "rrf") c.fusion.method = uiloc::FusionMethod::Rrf;
  else ConfigReader::fail("fusion", "must be \"minmax\" or \"rrf\"");
  c.fusion.rrf_k = r.number("rrf_k", c.fusion.rrf_k);
  c.fusion_weights = r.numbers("fusion_weights", c.fusion_weights);
  if (c.fusion_weights.size() != 2) ConfigReader::fail("fusion_weights", "must hold two weights");
  if (component) {
    c.alpha = r.number("alpha", c.alpha);
    if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) ConfigReader::fail("alpha", "must lie in [0, 1]");
  }
  return c;
}

// Dense inputs for one issue; lexical-only when the vectors are missing.
void attach_dense(uiloc::LocalizeConfig& c, const IssueReport& issue, const std::optional<EmbeddingStore>& store) {
  c.store = nullptr;
  c.query_vector.reset();
  if (!c.dense || !store) return;
  const std::string key = uiloc::query_embedding_key(issue);
  if (!store->contains(key)) return;
  const auto v = store->at(key);
  c.store = &*store;
  c.query_vector = std::vector<double>(v.begin(), v.end());
}

int first_gold_rank(const Ranking& ranking, const std::set<std::string>& gold) {
  for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
    if (gold.count(ranking.entries[i].doc_id)) return static_cast<int>(i + 1);
  }
  return 0;
}

json ranking_record(const IssueReport& issue, const Ranking& ranking, const std::set<std::string>& gold,
                    std::span<const int> k_values) {
  json top = json::array();
  const std::size_t depth = static_cast<std::size_t>(k_values.empty() ? 10 : k_values.back());
  for (const auto& e : ranking.top(depth).entries) top.push_back(e.doc_id);
  json r = {{"issue", issue.id},
            {"gold", std::vector<std::string>(gold.begin(), gold.end())},
            {"top", top},
            {"rank", first_gold_rank(ranking, gold)},
            {"ap", average_precision(ranking, gold)}};
  for (int k : k_values) r["hits@" + std::to_string(k)] = hits_at_k(ranking, gold, static_cast<std::size_t>(k));
  return r;
}

std::vector<json> run_s2r(const Corpus& corpus, const ConfigReader& r) {
  s2r::AssessConfig cfg;
  cfg.match.tau_high = r.number("tau_high", cfg.match.tau_high);
  cfg.match.tau_match = r.number("tau_match", cfg.match.tau_match);
  cfg.match.delta = r.number("delta", cfg.match.delta);
  cfg.use_gold = r.boolean("use_gold", false);
  std::map<std::string, ExecutionModel> models;
  std::vector<json> records;
  for (const auto& issue : corpus.issues) {
    auto m = models.find(issue.app_id);
    if (m == models.end()) m = models.emplace(issue.app_id, build_model(*corpus.find_app(issue.app_id))).first;
    const auto report = s2r::assess_s2rs(issue, m->second, cfg);
    int counts[3] = {0, 0, 0};
    for (const auto& a : report.annotations) ++counts[static_cast<int>(a.verdict)];
    std::size_t interactions = 0;
    for (const auto& ms : report.missing) interactions += ms.interactions.size();
    records.push_back({{"issue", issue.id},
                       {"steps", report.annotations.size()},
                       {"correct", counts[0]},
                       {"ambiguous", counts[1]},
                       {"vocab_mismatch", counts[2]},
                       {"missing_suggestions", report.missing.size()},
                       {"missing_interactions", interactions},
                       {"final_screen", report.final_screen}});
  }
  return records;
}

std::vector<json> run_uiloc(const Corpus& corpus, const ConfigReader& r, bool component,
                            std::span<const int> k_values) {
  uiloc::LocalizeConfig cfg = localize_config(r, component);
  const auto store = cfg.dense ? corpus.merged_embeddings() : std::nullopt;
  std::vector<json> records;
  for (const auto& issue : corpus.issues) {
    const auto& gold_ids = component ? issue.gold_component_ids : issue.gold_screen_ids;
    if (!gold_ids || gold_ids->empty()) continue;
    attach_dense(cfg, issue, store);
    const App& app = *corpus.find_app(issue.app_id);
    const std::string ob = uiloc::observed_behavior_text(issue);
    Ranking ranking = component ? uiloc::localize_components(ob, app, cfg) : uiloc::localize_screens(ob, app, cfg);
    records.push_back(ranking_record(issue, ranking, {gold_ids->begin(), gold_ids->end()}, k_values));
  }
  return records;
}

std::vector<json> run_code_rerank(const Corpus& corpus, const ConfigReader& r, std::span<const int> k_values) {
  uiloc::LocalizeConfig cfg = localize_config(r, false);
  const double gamma = r.number("gamma", 0.3);
  if (!(gamma >= 0.0 && gamma <= 1.0)) ConfigReader::fail("gamma", "must lie in [0, 1]");
  const auto store = cfg.dense ? corpus.merged_embeddings() : std::nullopt;
  const std::map<std::string, std::vector<std::string>> empty;
  const auto& code_map = corpus.code_map ? *corpus.code_map : empty;
  std::vector<json> records;
  for (const auto& issue : corpus.issues) {
    if (!issue.base_code_ranking || !issue.gold_code_files || issue.gold_code_files->empty()) continue;
    attach_dense(cfg, issue, store);
    Ranking base{issue.id, *issue.base_code_ranking};
    base.sort();
    const Ranking screens = uiloc::localize_screens(uiloc::observed_behavior_text(issue),
                                                    *corpus.find_app(issue.app_id), cfg);
    const Ranking reranked = uiloc::rerank_code_files(base, screens, code_map, gamma);
    const std::set<std::string> gold(issue.gold_code_files->begin(), issue.gold_code_files->end());
    json rec = ranking_record(issue, reranked, gold, k_values);
    const json base_rec = ranking_record(issue, base, gold, k_values);
    rec["base_rank"] = base_rec["rank"];
    rec["base_ap"] = base_rec["ap"];
    for (int k : k_values) rec["base_hits@" + std::to_string(k)] = base_rec["hits@" + std::to_string(k)];
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<json> run_solution(const Corpus& corpus, const ConfigReader& r, std::uint64_t seed) {
  solution::TrainConfig tc;
  const std::string kind = r.string("kind", "LINEAR_TFIDF");
  const auto k = solution::parse_model_kind(kind);
  if (!k) ConfigReader::fail("kind", "unknown model kind '" + kind + "'");
  tc.kind = *k;
  tc.lambda = r.number("lambda", tc.lambda);
  tc.learning_rate = r.number("learning_rate", tc.learning_rate);
  tc.epochs = r.integer("epochs", tc.epochs);
  tc.class_weighting = r.boolean("class_weighting", true);
  tc.threshold = r.number("threshold", tc.threshold);
  tc.seed = seed;
  const int folds = r.integer("folds", 5);
  const bool stratify = r.boolean("stratify", true);
  const int min_df = r.integer("min_df", 1);
  if (tc.lambda < 0.0) ConfigReader::fail("lambda", "must be non-negative");
  if (!(tc.learning_rate > 0.0)) ConfigReader::fail("learning_rate", "must be positive");
  if (tc.epochs < 0) ConfigReader::fail("epochs", "must be non-negative");
  if (!(tc.threshold > 0.0 && tc.threshold < 1.0)) ConfigReader::fail("threshold", "must lie in (0, 1)");
  if (min_df < 1) ConfigReader::fail("min_df", "must be at least 1");

  std::vector<const IssueReport*> issues;
  std::vector<int> issue_labels;
  for (const auto& issue : corpus.issues) {
    bool labeled = false, positive = false;
    for (const auto& c : issue.comments) {
      if (c.is_solution) {
        labeled = true;
        positive = positive || *c.is_solution;
      }
    }
    if (labeled) {
      issues.push_back(&issue);
      issue_labels.push_back(positive ? 1 : 0);
    }
  }
  if (folds < 2) ConfigReader::fail("folds", "must be at least 2");
  const auto split = kfold_split(issue_labels, static_cast<std::size_t>(folds), seed, stratify);
  const auto store = corpus.merged_embeddings();
  const EmbeddingStore* store_ptr = store ? &*store : nullptr;

  std::vector<json> records;
  for (std::size_t f = 0; f < split.size(); ++f) {
    std::vector<const IssueReport*> train_issues, test_issues;
    for (auto i : split[f].train) train_issues.push_back(issues[i]);
    for (auto i : split[f].test) test_issues.push_back(issues[i]);
    const auto vocab = solution::build_vocabulary(train_issues, static_cast<std::size_t>(min_df));
    const auto train_set = solution::make_dataset("corpus", train_issues, vocab, store_ptr);
    const auto test_set = solution::make_dataset("corpus", test_issues, vocab, store_ptr);
    const auto model = solution::train(train_set, tc);
    for (const auto& item : test_set.items) {
      const auto p = solution::predict(model, item.features);
      records.push_back({{"issue", item.issue_id},
                         {"comment", item.comment_id},
                         {"fold", f},
                         {"label", item.label},
                         {"predicted", p.label},
                         {"probability", p.probability}});
    }
  }
  std::sort(records.begin(), records.end(), [](const json& a, const json& b) {
    return std::tie(a["issue"].get_ref<const std::string&>(), a["comment"].get_ref<const std::string&>()) <
           std::tie(b["issue"].get_ref<const std::string&>(), b["comment"].get_ref<const std::string&>());
  });
  return records;
}

double mean_of(std::span<const json> records, const std::string& key) {
  if (records.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : records) sum += r.at(key).get<double>();
  return sum / static_cast<double>(records.size());
}

double mean_reciprocal(std::span<const json> records, const std::string& key) {
  if (records.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : records) {
    const int rank = r.at(key).get<int>();
    if (rank > 0) sum += 1.0 / rank;
  }
  return sum / static_cast<double>(records.size());
}

}  // namespace

std::map<std::string, double> aggregate_records(Pipeline pipeline, std::span<const json> records,
                                                std::span<const int> k_values) {
  std::map<std::string, double> a;
  const double n = static_cast<double>(records.size());
  switch (pipeline) {
    case Pipeline::S2r: {
      double steps = 0, correct = 0, ambiguous = 0, mismatch = 0, suggestions = 0, interactions = 0;
      for (const auto& r : records) {
        steps += r.at("steps").get<double>();
        correct += r.at("correct").get<double>();
        ambiguous += r.at("ambiguous").get<double>();
        mismatch += r.at("vocab_mismatch").get<double>();
        suggestions += r.at("missing_suggestions").get<double>();
        interactions += r.at("missing_interactions").get<double>();
      }
      a["issues"] = n;
      a["steps"] = steps;
      a["correct_rate"] = steps > 0 ? correct / steps : 0.0;
      a["ambiguous_rate"] = steps > 0 ? ambiguous / steps : 0.0;
      a["vocab_mismatch_rate"] = steps > 0 ? mismatch / steps : 0.0;
      a["missing_suggestions"] = suggestions;
      a["missing_interactions"] = interactions;
      break;
    }
    case Pipeline::UilocScreen:
    case Pipeline::UilocComponent:
    case Pipeline::CodeRerank: {
      a["queries"] = n;
      a["mrr"] = mean_reciprocal(records, "rank");
      a["map"] = mean_of(records, "ap");
      for (int k : k_values) a["hits@" + std::to_string(k)] = mean_of(records, "hits@" + std::to_string(k));
      if (pipeline == Pipeline::CodeRerank) {
        a["base_mrr"] = mean_reciprocal(records, "base_rank");
        a["base_map"] = mean_of(records, "base_ap");
        for (int k : k_values) {
          a["base_hits@" + std::to_string(k)] = mean_of(records, "base_hits@" + std::to_string(k));
        }
      }
      break;
    }
    case Pipeline::Solution: {
      std::map<int, std::array<std::size_t, 4>> per_fold;  // tp, fp, fn, tn
      std::array<std::size_t, 4> all{};
      for (const auto& r : records) {
        const int y = r.at("label").get<int>(), p = r.at("predicted").get<int>();
        const std::size_t slot = p == 1 ? (y == 1 ? 0 : 1) : (y == 1 ? 2 : 3);
        ++all[slot];
        ++per_fold[r.at("fold").get<int>()][slot];
      }
      const auto m = solution::Metrics::from_counts(all[0], all[1], all[2], all[3]);
      a["items"] = n;
      a["precision"] = m.precision;
      a["recall"] = m.recall;
      a["f1"] = m.f1;
      a["folds"] = static_cast<double>(per_fold.size());
      double f1_sum = 0.0;
      for (const auto& [fold, c] : per_fold) f1_sum += solution::Metrics::from_counts(c[0], c[1], c[2], c[3]).f1;
      a["fold_f1_mean"] = per_fold.empty() ? 0.0 : f1_sum / static_cast<double>(per_fold.size());
      break;
    }
  }
  return a;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.k_values.empty()) throw Error(ErrorCode::InvalidConfig, "k_values must not be empty");
  for (std::size_t i = 0; i < spec.k_values.size(); ++i) {
    if (spec.k_values[i] < 1 || (i > 0 && spec.k_values[i] <= spec.k_values[i - 1])) {
      throw Error(ErrorCode::InvalidConfig, "k_values must be positive and strictly ascending");
    }
  }
  if (!spec.config.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be an object");
  const ConfigReader reader(spec.config, spec.pipeline);
  const Corpus corpus = load_corpus(spec.corpus);

  ExperimentResult result;
  result.name = spec.name;
  result.pipeline = spec.pipeline;
  result.seed = spec.seed;
  result.k_values = spec.k_values;
  result.corpus_hash = hex64(fnv1a64(serialize_corpus(corpus)));
  const json stamp = {{"pipeline", std::string(to_string(spec.pipeline))},
                      {"config", spec.config},
                      {"seed", spec.seed},
                      {"k_values", spec.k_values}};
  result.config_hash = hex64(fnv1a64(stamp.dump()));

  switch (spec.pipeline) {
    case Pipeline::S2r: result.records = run_s2r(corpus, reader); break;
    case Pipeline::UilocScreen: result.records = run_uiloc(corpus, reader, false, spec.k_values); break;
    case Pipeline::UilocComponent: result.records = run_uiloc(corpus, reader, true, spec.k_values); break;
    case Pipeline::CodeRerank: result.records = run_code_rerank(corpus, reader, spec.k_values); break;
    case Pipeline::Solution: result.records = run_solution(corpus, reader, spec.seed); break;
  }
  result.aggregate = aggregate_records(spec.pipeline, result.records, spec.k_values);
  return result;
}

void write_result(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::string records;
  for (const auto& r : result.records) records += r.dump() + "\n";
  const json agg = {{"format_version", 1},
                    {"experiment", result.name},
                    {"pipeline", std::string(to_string(result.pipeline))},
                    {"seed", result.seed},
                    {"k_values", result.k_values},
                    {"corpus_hash", result.corpus_hash},
                    {"config_hash", result.config_hash},
                    {"metrics", result.aggregate}};
  write_file(dir / "records.jsonl", records);
  write_file(dir / "aggregate.json", agg.dump(2) + "\n");
}

ExperimentResult read_result(const std::filesystem::path& dir) {
  const std::string agg_path = (dir / "aggregate.json").string();
  const std::string rec_path = (dir / "records.jsonl").string();
  const std::string agg_text = read_file(dir / "aggregate.json");
  const std::string rec_text = read_file(dir / "records.jsonl");
  ExperimentResult r;
  try {
    const json a = json::parse(agg_text);
    r.name = a.at("experiment").get<std::string>();
    const auto p = parse_pipeline(a.at("pipeline").get<std::string>());
    if (!p) throw Error(ErrorCode::MalformedFile, agg_path + ": unknown pipeline");
    r.pipeline = *p;
    r.seed = a.at("seed").get<std::uint64_t>();
    r.k_values = a.at("k_values").get<std::vector<int>>();
    r.corpus_hash = a.at("corpus_hash").get<std::string>();
    r.config_hash = a.at("config_hash").get<std::string>();
    r.aggregate = a.at("metrics").get<std::map<std::string, double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedFile, agg_path + ": " + e.what());
  }
  std::istringstream in(rec_text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      r.records.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::MalformedFile, rec_path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return r;
}

std::string format_aggregate(const ExperimentResult& result) {
  std::ostringstream out;
  out << "experiment   " << result.name << "\n";
  out << "pipeline     " << to_string(result.pipeline) << "\n";
  out << "seed         " << result.seed << "\n";
  out << "corpus_hash  " << result.corpus_hash << "\n";
  out << "config_hash  " << result.config_hash << "\n";
  out << "records      " << result.records.size() << "\n\n";
  std::size_t width = 6;
  for (const auto& [k, _] : result.aggregate) width = std::max(width, k.size());
  char buf[64];
  out << "metric" << std::string(width - 6 + 2, ' ') << "value\n";
  for (const auto& [k, v] : result.aggregate) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    out << k << std::string(width - k.size() + 2, ' ') << buf << "\n";
  }
  return out.str();
}

}  // namespace irk::eval
