#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "irk/embedding.hpp"
#include "irk/ranking.hpp"

namespace irk {

inline constexpr int kFormatVersion = 1;

enum class ComponentKind { Button, TextField, Label, Checkbox, ListItem, Image, MenuItem, Other };

// User actions. Unknown only appears on extracted steps that could not be
// mapped through the action lexicon; traces never carry it.
enum class Action { Click, LongClick, Type, Swipe, Scroll, Back, Launch, Unknown };

std::string_view to_string(ComponentKind kind);
std::optional<ComponentKind> parse_component_kind(std::string_view s);
std::string_view to_string(Action action);
std::optional<Action> parse_action(std::string_view s);

// True for actions whose interactions carry no target component.
bool is_targetless(Action action);

struct Bounds {
  int left = 0;
  int top = 0;
  int right = 0;
  int bottom = 0;

  bool operator==(const Bounds&) const = default;
};

struct Component {
  std::string id;
  ComponentKind kind = ComponentKind::Other;
  std::string label;        // may be empty (icons)
  std::string description;  // may be empty
  Bounds bounds;
  std::optional<std::string> embedding_key;

  bool operator==(const Component&) const = default;
};

struct Screen {
  std::string id;
  std::string name;
  std::vector<Component> components;
  std::optional<std::string> embedding_key;

  bool operator==(const Screen&) const = default;
};

// One observed event from traces.jsonl. LAUNCH omits source and component.
struct TraceRecord {
  Action action = Action::Launch;
  std::optional<std::string> source;
  std::optional<std::string> component;
  std::string dest;
  std::optional<std::string> input;

  bool operator==(const TraceRecord&) const = default;
};

struct App {
  std::string id;
  std::vector<Screen> screens;
  std::vector<TraceRecord> traces;

  const Screen* find_screen(std::string_view screen_id) const;
  // Searches every screen; returns the component and its owning screen.
  std::pair<const Component*, const Screen*> find_component(std::string_view component_id) const;

  bool operator==(const App&) const = default;
};

struct Comment {
  std::string id;
  std::string author;
  std::int64_t timestamp = 0;  // epoch seconds
  std::string text;
  std::optional<bool> is_solution;

  bool operator==(const Comment&) const = default;
};

struct IssueReport {
  std::string id;
  std::string app_id;
  std::string title;
  std::string body;
  std::vector<Comment> comments;
  // Gold sentence indices into segment_sentences(body).
  std::optional<std::vector<int>> ob_sentences;
  std::optional<std::vector<int>> eb_sentences;
  std::optional<std::vector<int>> s2r_sentences;
  std::optional<std::vector<std::string>> gold_screen_ids;
  std::optional<std::vector<std::string>> gold_component_ids;
  // Code-localization inputs: an external baseline ranking over code files
  // and the files actually changed by the fix.
  std::optional<std::vector<ScoredDoc>> base_code_ranking;
  std::optional<std::vector<std::string>> gold_code_files;

  bool operator==(const IssueReport&) const = default;
};

struct Corpus {
  std::map<std::string, App> apps;
  std::vector<IssueReport> issues;  // sorted by id after load
  std::optional<std::map<std::string, std::vector<std::string>>> code_map;
  // File stem under embeddings/ -> store.
  std::map<std::string, EmbeddingStore> embeddings;

  const App* find_app(std::string_view app_id) const;
  const IssueReport* find_issue(std::string_view issue_id) const;
  // All embedding stores merged into one; nullopt when the corpus has none.
  // Throws DIMENSION_MISMATCH / DUPLICATE_ID when the stores disagree.
  std::optional<EmbeddingStore> merged_embeddings() const;

  bool operator==(const Corpus&) const = default;
};

struct Violation {
  std::string entity;  // e.g. "app:tiny/screen:S1"
  std::string rule;    // e.g. "BOUNDS", "DUPLICATE_ID"
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::size_t count(std::string_view rule) const;
  std::string to_text() const;
};

bool is_valid_id(std::string_view id);

ValidationReport validate_corpus(const Corpus& corpus);

// Reads <root>/apps/<app>/app.json, <root>/apps/<app>/traces.jsonl,
// <root>/issues/<id>.json, optional code_map.json and embeddings/*.emb.
// Throws MALFORMED_FILE (with file:line), DANGLING_REF, DUPLICATE_ID or
// VALIDATION_ERROR, and IO_FAILURE when the root is missing.
Corpus load_corpus(const std::filesystem::path& root);

// Parses every file like load_corpus() but skips cross-reference validation.
// Throws MALFORMED_FILE and IO_FAILURE only.
Corpus read_corpus(const std::filesystem::path& root);

// Canonical form: sorted keys, two-space indent, newline-terminated. Throws
// VALIDATION_ERROR before writing anything when the corpus is invalid, and
// IO_FAILURE when a file cannot be written.
void save_corpus(const Corpus& corpus, const std::filesystem::path& root);

// Canonical single-file serializations; also used for hashing.
std::string serialize_app(const App& app);
std::string serialize_traces(const App& app);
std::string serialize_issue(const IssueReport& issue);
std::string serialize_corpus(const Corpus& corpus);

}  // namespace irk
