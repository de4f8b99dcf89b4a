#include "irk/cli.hpp"

#include <cstdio>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "irk/corpus.hpp"
#include "irk/error.hpp"
#include "irk/eval.hpp"
#include "irk/execmodel.hpp"
#include "irk/io.hpp"
#include "irk/s2r.hpp"
#include "irk/solution.hpp"
#include "irk/uiloc.hpp"

namespace irk::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct AssessOptions {
  std::string corpus, issue, steps_file, out = ".", format = "both";
  double tau_high = 0.75, tau_match = 0.5, delta = 0.1;
  bool use_gold = false;
};

struct LocalizeOptions {
  std::string corpus, issue, granularity = "screen", fusion = "minmax", out;
  bool dense = false;
  std::vector<double> fusion_weights = {0.5, 0.5};
  double alpha = 0.7, gamma = 0.3, k1 = 1.2, b = 0.75;
  std::size_t k = 10;
};

struct TrainOptions {
  std::string corpus, model_out, kind = "LINEAR_TFIDF";
  double lambda = 1e-4, learning_rate = 0.5, threshold = 0.5;
  int epochs = 500;
  std::uint64_t seed = 0;
  bool no_class_weighting = false;
  std::size_t min_df = 1;
};

struct PredictOptions {
  std::string corpus, out;
  std::vector<std::string> models, externals;
};

struct EvaluateOptions {
  std::string spec, out = "results", corpus;
};

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedFile:
    case ErrorCode::IoFailure:
    case ErrorCode::UnsupportedFormat: return 2;
    default: return 1;
  }
}

const IssueReport& require_issue(const Corpus& corpus, const std::string& id) {
  const IssueReport* issue = corpus.find_issue(id);
  if (!issue) throw Error(ErrorCode::UnknownIssue, "no issue '" + id + "' in corpus");
  return *issue;
}

int cmd_validate(const std::string& root, std::ostream& out) {
  const Corpus corpus = read_corpus(root);
  const ValidationReport report = validate_corpus(corpus);
  if (report.ok()) {
    out << "OK: " << corpus.apps.size() << " app(s), " << corpus.issues.size() << " issue(s)\n";
    return 0;
  }
  out << report.to_text();
  out << report.violations.size() << " violation(s)\n";
  return 1;
}

int cmd_assess(const AssessOptions& o, std::istream& in, std::ostream& out) {
  const Corpus corpus = load_corpus(o.corpus);
  const IssueReport& issue = require_issue(corpus, o.issue);
  const ExecutionModel model = build_model(*corpus.find_app(issue.app_id));
  s2r::AssessConfig cfg;
  cfg.match = {o.tau_high, o.tau_match, o.delta};
  cfg.use_gold = o.use_gold;

  s2r::QualityReport report;
  if (!o.steps_file.empty()) {
    std::string content;
    if (o.steps_file == "-") {
      content.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    } else {
      content = read_file(o.steps_file);
    }
    report = s2r::assess_steps(issue.id, s2r::parse_steps_json(content, o.steps_file), model, cfg.match);
  } else {
    report = s2r::assess_s2rs(issue, model, cfg);
  }

  std::vector<s2r::ReportFormat> formats;
  if (o.format == "both") formats = {s2r::ReportFormat::Markdown, s2r::ReportFormat::Json};
  else formats = {s2r::parse_report_format(o.format)};

  std::size_t counts[3] = {0, 0, 0};
  for (const auto& a : report.annotations) ++counts[static_cast<int>(a.verdict)];
  out << issue.id << ": " << report.annotations.size() << " step(s) (CORRECT " << counts[0] << ", AMBIGUOUS "
      << counts[1] << ", VOCAB_MISMATCH " << counts[2] << "), " << report.missing.size()
      << " missing-step suggestion(s), final screen " << report.final_screen << "\n";
  for (auto f : formats) {
    const fs::path path =
        fs::path(o.out) / (issue.id + (f == s2r::ReportFormat::Json ? ".report.json" : ".report.md"));
    write_file(path, s2r::render_report(report, f));
    out << "wrote " << path.string() << "\n";
  }
  return 0;
}

int cmd_localize(const LocalizeOptions& o, std::ostream& out, std::ostream& err) {
  const Corpus corpus = load_corpus(o.corpus);
  const IssueReport& issue = require_issue(corpus, o.issue);
  const App& app = *corpus.find_app(issue.app_id);

  uiloc::LocalizeConfig cfg;
  cfg.bm25 = {o.k1, o.b};
  cfg.alpha = o.alpha;
  cfg.fusion_weights = o.fusion_weights;
  cfg.fusion.method = o.fusion == "rrf" ? uiloc::FusionMethod::Rrf : uiloc::FusionMethod::MinMax;
  if (cfg.fusion_weights.size() != 2) {
    throw Error(ErrorCode::WeightMismatch, "--fusion-weights takes exactly two weights (lexical, dense)");
  }
  const auto store = o.dense ? corpus.merged_embeddings() : std::nullopt;
  if (o.dense) {
    const std::string key = uiloc::query_embedding_key(issue);
    if (!store) {
      err << "warning: corpus has no embeddings; using lexical scores only\n";
    } else if (!store->contains(key)) {
      err << "warning: no query vector '" << key << "'; using lexical scores only\n";
    } else {
      const auto v = store->at(key);
      cfg.dense = true;
      cfg.store = &*store;
      cfg.query_vector = std::vector<double>(v.begin(), v.end());
    }
  }

  const std::string ob = uiloc::observed_behavior_text(issue);
  Ranking ranking;
  if (o.granularity == "screen") {
    ranking = uiloc::localize_screens(ob, app, cfg);
  } else if (o.granularity == "component") {
    ranking = uiloc::localize_components(ob, app, cfg);
  } else {
    if (!issue.base_code_ranking) {
      throw Error(ErrorCode::InvalidConfig, "issue '" + issue.id + "' has no base_code_ranking");
    }
    if (!corpus.code_map) err << "warning: corpus has no code_map; base ranking is only normalized\n";
    Ranking base{issue.id, *issue.base_code_ranking};
    base.sort();
    const std::map<std::string, std::vector<std::string>> empty;
    ranking = uiloc::rerank_code_files(base, uiloc::localize_screens(ob, app, cfg),
                                       corpus.code_map ? *corpus.code_map : empty, o.gamma);
  }
  ranking.query_id = issue.id;
  const Ranking top = ranking.top(o.k);

  std::size_t width = 2;
  for (const auto& e : top.entries) width = std::max(width, e.doc_id.size());
  out << "rank  " << "id" << std::string(width - 2 + 2, ' ') << "score\n";
  json entries = json::array();
  for (std::size_t i = 0; i < top.entries.size(); ++i) {
    const auto& e = top.entries[i];
    std::string rank = std::to_string(i + 1);
    out << rank << std::string(6 - std::min<std::size_t>(rank.size(), 5), ' ') << e.doc_id
        << std::string(width - e.doc_id.size() + 2, ' ') << fixed(e.score) << "\n";
    entries.push_back({{"rank", i + 1}, {"id", e.doc_id}, {"score", e.score}});
  }
  if (!o.out.empty()) {
    const json j = {{"format_version", 1}, {"issue", issue.id}, {"granularity", o.granularity}, {"entries", entries}};
    const fs::path path = fs::path(o.out) / (issue.id + "." + o.granularity + ".ranking.json");
    write_file(path, j.dump(2) + "\n");
    out << "wrote " << path.string() << "\n";
  }
  return 0;
}

std::vector<const IssueReport*> all_issues(const Corpus& corpus) {
  std::vector<const IssueReport*> v;
  for (const auto& i : corpus.issues) v.push_back(&i);
  return v;
}

int cmd_train(const TrainOptions& o, std::ostream& out) {
  const Corpus corpus = load_corpus(o.corpus);
  const auto kind = solution::parse_model_kind(o.kind);
  if (!kind) throw Error(ErrorCode::InvalidConfig, "unknown model kind '" + o.kind + "'");
  const auto issues = all_issues(corpus);
  const auto vocab = solution::build_vocabulary(issues, o.min_df);
  const auto store = corpus.merged_embeddings();
  const auto data = solution::make_dataset("corpus", issues, vocab, store ? &*store : nullptr);

  solution::TrainConfig tc;
  tc.kind = *kind;
  tc.lambda = o.lambda;
  tc.learning_rate = o.learning_rate;
  tc.epochs = o.epochs;
  tc.seed = o.seed;
  tc.threshold = o.threshold;
  tc.class_weighting = !o.no_class_weighting;
  const auto model = solution::train(data, tc);
  write_file(o.model_out, solution::serialize_model(model));

  const auto m = solution::evaluate(model, data);
  out << "trained " << solution::to_string(model.kind) << " on " << data.items.size() << " comment(s) ("
      << model.training_meta.n_positive << " positive)\n";
  out << "training precision " << fixed(m.precision, 4) << " recall " << fixed(m.recall, 4) << " f1 "
      << fixed(m.f1, 4) << "\n";
  out << "wrote " << o.model_out << "\n";
  return 0;
}

int cmd_predict(const PredictOptions& o, std::ostream& out) {
  const Corpus corpus = load_corpus(o.corpus);
  std::vector<solution::EnsembleMember> members;
  for (const auto& path : o.models) members.emplace_back(solution::parse_model(read_file(path)));
  for (const auto& path : o.externals) {
    members.emplace_back(solution::ExternalPredictions::parse_tsv(read_file(path), path));
  }
  if (members.empty()) throw Error(ErrorCode::InvalidConfig, "give at least one --model or --external");

  const auto store = corpus.merged_embeddings();
  solution::ExternalPredictions result;
  for (const auto& issue : corpus.issues) {
    for (const auto& c : issue.comments) {
      std::vector<solution::Prediction> votes;
      for (const auto& m : members) {
        solution::LabeledItem item{issue.id, c.id, {}, 0};
        if (const auto* model = std::get_if<solution::ClassifierModel>(&m)) {
          item.features = solution::featurize(c, issue, model->vocabulary, store ? &*store : nullptr);
        }
        votes.push_back(solution::member_predict(m, item));
      }
      double mean = 0.0;
      for (const auto& v : votes) mean += v.probability;
      mean /= static_cast<double>(votes.size());
      const int label = votes.size() == 1 ? votes.front().label : solution::majority_vote(votes);
      result.predictions[{issue.id, c.id}] = {label, votes.size() == 1 ? votes.front().probability : mean};
    }
  }
  const std::string tsv = result.to_tsv();
  if (o.out.empty()) {
    out << tsv;
  } else {
    write_file(o.out, tsv);
    std::size_t positive = 0;
    for (const auto& [_, p] : result.predictions) positive += p.label == 1;
    out << "predicted " << result.predictions.size() << " comment(s), " << positive << " solution-bearing\n";
    out << "wrote " << o.out << "\n";
  }
  return 0;
}

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  const fs::path spec_path(o.spec);
  eval::ExperimentSpec spec = eval::parse_spec(read_file(spec_path), spec_path.parent_path());
  if (!o.corpus.empty()) spec.corpus = o.corpus;
  const auto result = eval::run_experiment(spec);
  const fs::path dir = fs::path(o.out) / result.name;
  eval::write_result(result, dir);
  out << eval::format_aggregate(result);
  out << "wrote " << (dir / "records.jsonl").string() << "\n";
  out << "wrote " << (dir / "aggregate.json").string() << "\n";
  return 0;
}

int cmd_report(const std::string& dir, std::ostream& out, std::ostream& err) {
  const auto result = eval::read_result(dir);
  out << eval::format_aggregate(result);
  const auto recomputed = eval::aggregate_records(result.pipeline, result.records, result.k_values);
  int status = 0;
  for (const auto& [k, v] : recomputed) {
    auto it = result.aggregate.find(k);
    if (it == result.aggregate.end()) {
      err << "error: aggregate lacks metric '" << k << "'\n";
      status = 1;
    } else if (it->second != v) {
      err << "error: metric '" << k << "' stored " << json(it->second).dump() << " but records give "
          << json(v).dump() << "\n";
      status = 1;
    }
  }
  for (const auto& [k, _] : result.aggregate) {
    if (!recomputed.count(k)) {
      err << "error: unexpected metric '" << k << "'\n";
      status = 1;
    }
  }
  return status;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app("Issue-resolution toolkit: S2R assessment, UI localization, solution identification", "irk");
  app.set_config("--config", "", "Read options from a TOML or INI file");
  app.require_subcommand(1);
  app.fallthrough();

  std::string validate_root;
  auto* validate = app.add_subcommand("validate", "Check a corpus for schema and reference violations");
  validate->add_option("corpus", validate_root, "Corpus root directory")->required();

  AssessOptions ao;
  auto* assess = app.add_subcommand("assess", "Assess the steps to reproduce of one issue");
  assess->add_option("corpus", ao.corpus, "Corpus root directory")->required();
  assess->add_option("issue", ao.issue, "Issue id")->required();
  assess->add_option("--steps-file", ao.steps_file, "Use extracted steps from a JSON file ('-' for stdin)");
  assess->add_option("--out", ao.out, "Output directory for report files")->capture_default_str();
  assess->add_option("--format", ao.format, "Report format")
      ->check(CLI::IsMember({"md", "markdown", "json", "both"}))
      ->capture_default_str();
  assess->add_option("--tau-high", ao.tau_high, "Similarity needed for CORRECT")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  assess->add_option("--tau-match", ao.tau_match, "Minimum similarity for a match")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  assess->add_option("--delta", ao.delta, "Margin separating the best candidate from the runner-up")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  assess->add_flag("--use-gold", ao.use_gold, "Use annotated S2R sentences when present");

  LocalizeOptions lo;
  auto* localize = app.add_subcommand("localize", "Rank screens, components or code files for one issue");
  localize->add_option("corpus", lo.corpus, "Corpus root directory")->required();
  localize->add_option("issue", lo.issue, "Issue id")->required();
  localize->add_option("--granularity", lo.granularity, "What to rank")
      ->check(CLI::IsMember({"screen", "component", "code"}))
      ->capture_default_str();
  localize->add_option("--k", lo.k, "Number of entries to emit")->check(CLI::PositiveNumber)->capture_default_str();
  localize->add_flag("--dense", lo.dense, "Fuse lexical scores with embedding similarity");
  localize->add_option("--fusion", lo.fusion, "Score fusion method")
      ->check(CLI::IsMember({"minmax", "rrf"}))
      ->capture_default_str();
  localize->add_option("--fusion-weights", lo.fusion_weights, "Lexical and dense fusion weights")
      ->delimiter(',')
      ->expected(2)
      ->capture_default_str();
  localize->add_option("--alpha", lo.alpha, "Component weight against its parent screen")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  localize->add_option("--gamma", lo.gamma, "Screen-evidence weight for code re-ranking")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  localize->add_option("--k1", lo.k1, "BM25 term saturation")->check(CLI::NonNegativeNumber)->capture_default_str();
  localize->add_option("--b", lo.b, "BM25 length normalization")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  localize->add_option("--out", lo.out, "Also write the ranking as JSON into this directory");

  auto* classify = app.add_subcommand("classify", "Train or apply solution-comment classifiers");
  classify->require_subcommand(1);
  TrainOptions to;
  auto* train = classify->add_subcommand("train", "Train a classifier on every labeled comment");
  train->add_option("corpus", to.corpus, "Corpus root directory")->required();
  train->add_option("--model-out", to.model_out, "Model file to write")->required();
  train->add_option("--kind", to.kind, "Model kind")
      ->check(CLI::IsMember({"LINEAR_TFIDF", "LINEAR_EMBEDDING", "NEAREST_CENTROID_EMBEDDING"}))
      ->capture_default_str();
  train->add_option("--lambda", to.lambda, "L2 regularization strength")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train->add_option("--learning-rate", to.learning_rate, "Initial gradient step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--epochs", to.epochs, "Gradient descent epochs")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train->add_option("--seed", to.seed, "Seed recorded with the model")->capture_default_str();
  train->add_option("--threshold", to.threshold, "Decision threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  train->add_option("--min-df", to.min_df, "Minimum document frequency of vocabulary terms")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_flag("--no-class-weighting", to.no_class_weighting, "Disable inverse-frequency example weights");

  PredictOptions po;
  auto* predict = classify->add_subcommand("predict", "Label every comment; several members vote as an ensemble");
  predict->add_option("corpus", po.corpus, "Corpus root directory")->required();
  predict->add_option("--model", po.models, "Model file (repeatable)");
  predict->add_option("--external", po.externals, "External prediction TSV (repeatable)");
  predict->add_option("--out", po.out, "Write predictions TSV here instead of standard output");

  EvaluateOptions eo;
  auto* evaluate = app.add_subcommand("evaluate", "Run an experiment spec and write result files");
  evaluate->add_option("spec", eo.spec, "Experiment spec (JSON)")->required();
  evaluate->add_option("--out", eo.out, "Results root; files go to <out>/<name>/")->capture_default_str();
  evaluate->add_option("--corpus", eo.corpus, "Override the spec's corpus path");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Print an experiment's aggregates and check them against its records");
  report->add_option("results", report_dir, "Result directory (holding aggregate.json)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(validate_root, out);
    if (assess->parsed()) return cmd_assess(ao, in, out);
    if (localize->parsed()) return cmd_localize(lo, out, err);
    if (train->parsed()) return cmd_train(to, out);
    if (predict->parsed()) return cmd_predict(po, out);
    if (evaluate->parsed()) return cmd_evaluate(eo, out);
    if (report->parsed()) return cmd_report(report_dir, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace irk::cli
