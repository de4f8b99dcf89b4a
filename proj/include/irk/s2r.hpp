#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "irk/corpus.hpp"
#include "irk/execmodel.hpp"
#include "irk/segment.hpp"

namespace irk::s2r {

// One user action parsed from a steps-to-reproduce clause.
struct AtomicStep {
  int sentence_index = 0;
  int ordinal = 0;  // position among the steps of its sentence
  std::string action_verb;
  Action action = Action::Unknown;
  std::vector<std::string> target_phrase;
  std::optional<std::string> input_value;

  bool operator==(const AtomicStep&) const = default;
};

enum class Verdict { Correct, Ambiguous, VocabMismatch };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

struct Candidate {
  std::string interaction_id;
  double similarity = 0.0;

  bool operator==(const Candidate&) const = default;
};

struct StepAnnotation {
  AtomicStep step;
  Verdict verdict = Verdict::VocabMismatch;
  std::vector<Candidate> candidates;  // similarity descending, then id ascending
  std::optional<std::string> chosen;

  bool operator==(const StepAnnotation&) const = default;
};

// Interactions to insert before a reported step. insert_after is the index of
// the preceding annotation in QualityReport::annotations, or nullopt for the
// start of the report.
struct MissingSteps {
  std::optional<int> insert_after;
  std::vector<Interaction> interactions;

  bool operator==(const MissingSteps&) const = default;
};

struct QualityReport {
  std::string issue_id;
  std::vector<StepAnnotation> annotations;
  std::vector<MissingSteps> missing;
  std::string final_screen;
  // Human-readable description of every interaction the report references,
  // keyed by interaction id (e.g. CLICK "Login" S_home -> S_login).
  std::map<std::string, std::string> interaction_labels;

  bool operator==(const QualityReport&) const = default;
};

struct MatchConfig {
  double tau_high = 0.75;
  double tau_match = 0.5;
  double delta = 0.1;
};

struct AssessConfig {
  MatchConfig match;
  // Use the issue's gold s2r_sentences when present.
  bool use_gold = false;
};

// Maps a lowercase verb (or two-word verb such as "go back") to an action.
std::optional<Action> lookup_action_verb(std::string_view verb);
// Whether the sentence starts with an action verb from the lexicon.
bool starts_with_action_verb(std::string_view sentence);

// Sentence is S2R iff it starts with an action verb, or belongs to a list
// whose majority of items start with action verbs.
std::vector<int> identify_s2r_sentences(const IssueReport& issue, bool use_gold = false);

std::vector<AtomicStep> extract_atomic_steps(std::string_view sentence, int sentence_index);

// All steps of an issue, in (sentence_index, ordinal) order.
std::vector<AtomicStep> extract_issue_steps(const IssueReport& issue, bool use_gold = false);

// Throws UNKNOWN_SCREEN when current_screen is not in the model.
StepAnnotation match_step(const AtomicStep& step, const ExecutionModel& model, std::string_view current_screen,
                          const MatchConfig& config = {});

// Verdict as a pure function of the sorted similarity list and thresholds.
Verdict classify_similarities(const std::vector<double>& sorted_desc, const MatchConfig& config);

// Sequential simulation from the launch screen.
QualityReport assess_s2rs(const IssueReport& issue, const ExecutionModel& model, const AssessConfig& config = {});
// Same, with externally extracted steps in place of the rule-based extractor.
QualityReport assess_steps(const std::string& issue_id, const std::vector<AtomicStep>& steps,
                           const ExecutionModel& model, const MatchConfig& config = {});

// External-extractor adapter: a JSON array (or JSON Lines) of
// {"sentence_index", "action", "target_phrase", "input_value"} records.
// Throws MALFORMED_FILE.
std::vector<AtomicStep> parse_steps_json(const std::string& content, const std::string& source_name = "<steps>");

enum class ReportFormat { Markdown, Json };
// Throws UNSUPPORTED_FORMAT for names other than "md"/"markdown"/"json".
ReportFormat parse_report_format(std::string_view name);

std::string render_report(const QualityReport& report, ReportFormat format);
std::string render_report(const QualityReport& report, std::string_view format);
// Inverse of the JSON rendering. Throws MALFORMED_FILE.
QualityReport parse_report_json(const std::string& content);

}  // namespace irk::s2r
