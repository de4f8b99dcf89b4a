#include "irk/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "irk/error.hpp"
#include "irk/io.hpp"
#include "irk/segment.hpp"
#include "irk/text.hpp"

namespace irk {

using nlohmann::json;

namespace {

constexpr std::pair<ComponentKind, std::string_view> kKindNames[] = {
    {ComponentKind::Button, "BUTTON"},       {ComponentKind::TextField, "TEXT_FIELD"},
    {ComponentKind::Label, "LABEL"},         {ComponentKind::Checkbox, "CHECKBOX"},
    {ComponentKind::ListItem, "LIST_ITEM"},  {ComponentKind::Image, "IMAGE"},
    {ComponentKind::MenuItem, "MENU_ITEM"},  {ComponentKind::Other, "OTHER"},
};

constexpr std::pair<Action, std::string_view> kActionNames[] = {
    {Action::Click, "CLICK"}, {Action::LongClick, "LONG_CLICK"}, {Action::Type, "TYPE"},
    {Action::Swipe, "SWIPE"}, {Action::Scroll, "SCROLL"},         {Action::Back, "BACK"},
    {Action::Launch, "LAUNCH"}, {Action::Unknown, "UNKNOWN"},
};

// --- reading ---------------------------------------------------------------

std::size_t line_of(const std::string& content, std::size_t byte) {
  byte = std::min(byte, content.size());
  return 1 + static_cast<std::size_t>(std::count(content.begin(), content.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

json parse_json(const std::string& content, const std::string& file, std::size_t base_line = 1) {
  try {
    return json::parse(content);
  } catch (const json::parse_error& e) {
    const std::size_t line = base_line + line_of(content, e.byte == 0 ? 0 : e.byte - 1) - 1;
    throw Error(ErrorCode::MalformedFile, file + ":" + std::to_string(line) + ": " + e.what());
  }
}

// Strict field access over one JSON object; every error names file, line and
// the JSON path of the field.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string file, std::size_t line, std::string path)
      : j_(j), file_(std::move(file)), line_(line), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::MalformedFile,
                file_ + ":" + std::to_string(line_) + ": " + (path_.empty() ? "" : path_ + ": ") + what);
  }

  const json& field(const std::string& key) const {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) fail("missing field '" + key + "'");
    return *it;
  }
  bool has(const std::string& key) const {
    seen_.insert(key);
    auto it = j_.find(key);
    return it != j_.end() && !it->is_null();
  }

  std::string str(const std::string& key) const {
    const json& v = field(key);
    if (!v.is_string()) fail("field '" + key + "' must be a string");
    return v.get<std::string>();
  }
  std::optional<std::string> opt_str(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return str(key);
  }
  std::int64_t integer(const std::string& key) const {
    const json& v = field(key);
    if (!v.is_number_integer()) fail("field '" + key + "' must be an integer");
    return v.get<std::int64_t>();
  }
  double number(const std::string& key) const {
    const json& v = field(key);
    if (!v.is_number()) fail("field '" + key + "' must be a number");
    return v.get<double>();
  }
  std::optional<bool> opt_bool(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    const json& v = field(key);
    if (!v.is_boolean()) fail("field '" + key + "' must be a boolean");
    return v.get<bool>();
  }
  const json& array(const std::string& key) const {
    const json& v = field(key);
    if (!v.is_array()) fail("field '" + key + "' must be an array");
    return v;
  }
  std::optional<std::vector<std::string>> opt_str_list(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    std::vector<std::string> out;
    for (const auto& v : array(key)) {
      if (!v.is_string()) fail("field '" + key + "' must contain strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  }
  std::optional<std::vector<int>> opt_int_list(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    std::vector<int> out;
    for (const auto& v : array(key)) {
      if (!v.is_number_integer()) fail("field '" + key + "' must contain integers");
      out.push_back(v.get<int>());
    }
    return out;
  }
  void version() const {
    const json& v = field("format_version");
    if (!v.is_number_integer() || v.get<int>() != kFormatVersion) {
      fail("unsupported format_version (expected " + std::to_string(kFormatVersion) + ")");
    }
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail("unknown field '" + it.key() + "'");
    }
  }

  ObjectReader child(const json& j, const std::string& sub) const {
    return ObjectReader(j, file_, line_, path_.empty() ? sub : path_ + "." + sub);
  }

 private:
  const json& j_;
  std::string file_;
  std::size_t line_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

Component read_component(const ObjectReader& r) {
  Component c;
  c.id = r.str("id");
  const std::string kind = r.str("kind");
  auto parsed = parse_component_kind(kind);
  if (!parsed) r.fail("unknown component kind '" + kind + "'");
  c.kind = *parsed;
  c.label = r.str("label");
  c.description = r.str("description");
  const json& b = r.array("bounds");
  if (b.size() != 4 || !std::all_of(b.begin(), b.end(), [](const json& v) { return v.is_number_integer(); })) {
    r.fail("bounds must be four integers [left, top, right, bottom]");
  }
  c.bounds = {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
  c.embedding_key = r.opt_str("embedding_key");
  r.finish();
  return c;
}

App read_app(const std::string& content, const std::string& file) {
  const json j = parse_json(content, file);
  ObjectReader r(j, file, 1, "");
  r.version();
  App app;
  app.id = r.str("id");
  std::size_t si = 0;
  for (const auto& sj : r.array("screens")) {
    ObjectReader sr = r.child(sj, "screens[" + std::to_string(si++) + "]");
    Screen s;
    s.id = sr.str("id");
    s.name = sr.str("name");
    std::size_t ci = 0;
    for (const auto& cj : sr.array("components")) {
      s.components.push_back(read_component(sr.child(cj, "components[" + std::to_string(ci++) + "]")));
    }
    s.embedding_key = sr.opt_str("embedding_key");
    sr.finish();
    app.screens.push_back(std::move(s));
  }
  r.finish();
  return app;
}

std::vector<TraceRecord> read_traces(const std::string& content, const std::string& file) {
  std::vector<TraceRecord> out;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const json j = parse_json(line, file, line_no);
    ObjectReader r(j, file, line_no, "");
    // A record holding only format_version is the file header.
    if (j.is_object() && j.size() == 1 && j.contains("format_version")) {
      r.version();
      continue;
    }
    if (r.has("format_version")) r.version();
    TraceRecord rec;
    const std::string action = r.str("action");
    auto parsed = parse_action(action);
    if (!parsed || *parsed == Action::Unknown) r.fail("unknown action '" + action + "'");
    rec.action = *parsed;
    rec.source = r.opt_str("source");
    rec.component = r.opt_str("component");
    rec.dest = r.str("dest");
    rec.input = r.opt_str("input");
    r.finish();
    out.push_back(std::move(rec));
  }
  return out;
}

IssueReport read_issue(const std::string& content, const std::string& file) {
  const json j = parse_json(content, file);
  ObjectReader r(j, file, 1, "");
  r.version();
  IssueReport issue;
  issue.id = r.str("id");
  issue.app_id = r.str("app");
  issue.title = r.str("title");
  issue.body = r.str("body");
  std::size_t ci = 0;
  for (const auto& cj : r.array("comments")) {
    ObjectReader cr = r.child(cj, "comments[" + std::to_string(ci++) + "]");
    Comment c;
    c.id = cr.str("id");
    c.author = cr.str("author");
    c.timestamp = cr.integer("timestamp");
    c.text = cr.str("text");
    c.is_solution = cr.opt_bool("is_solution");
    cr.finish();
    issue.comments.push_back(std::move(c));
  }
  issue.ob_sentences = r.opt_int_list("ob_sentences");
  issue.eb_sentences = r.opt_int_list("eb_sentences");
  issue.s2r_sentences = r.opt_int_list("s2r_sentences");
  issue.gold_screen_ids = r.opt_str_list("gold_screen_ids");
  issue.gold_component_ids = r.opt_str_list("gold_component_ids");
  issue.gold_code_files = r.opt_str_list("gold_code_files");
  if (r.has("base_code_ranking")) {
    std::vector<ScoredDoc> ranking;
    std::size_t i = 0;
    for (const auto& ej : r.array("base_code_ranking")) {
      ObjectReader er = r.child(ej, "base_code_ranking[" + std::to_string(i++) + "]");
      ranking.push_back({er.str("doc"), er.number("score")});
      er.finish();
    }
    issue.base_code_ranking = std::move(ranking);
  }
  r.finish();
  return issue;
}

std::map<std::string, std::vector<std::string>> read_code_map(const std::string& content, const std::string& file) {
  const json j = parse_json(content, file);
  ObjectReader r(j, file, 1, "");
  r.version();
  const json& m = r.field("map");
  if (!m.is_object()) r.fail("field 'map' must be an object");
  std::map<std::string, std::vector<std::string>> out;
  for (auto it = m.begin(); it != m.end(); ++it) {
    if (!it->is_array()) r.fail("map entry '" + it.key() + "' must be an array");
    auto& files = out[it.key()];
    for (const auto& f : *it) {
      if (!f.is_string()) r.fail("map entry '" + it.key() + "' must contain strings");
      files.push_back(f.get<std::string>());
    }
  }
  r.finish();
  return out;
}

// --- writing ---------------------------------------------------------------

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json to_json(const Component& c) {
  json j = {{"id", c.id},
            {"kind", std::string(to_string(c.kind))},
            {"label", c.label},
            {"description", c.description},
            {"bounds", {c.bounds.left, c.bounds.top, c.bounds.right, c.bounds.bottom}}};
  if (c.embedding_key) j["embedding_key"] = *c.embedding_key;
  return j;
}

json to_json(const Screen& s) {
  json comps = json::array();
  for (const auto& c : s.components) comps.push_back(to_json(c));
  json j = {{"id", s.id}, {"name", s.name}, {"components", comps}};
  if (s.embedding_key) j["embedding_key"] = *s.embedding_key;
  return j;
}

json to_json(const TraceRecord& t) {
  json j = {{"action", std::string(to_string(t.action))}, {"dest", t.dest}};
  if (t.source) j["source"] = *t.source;
  if (t.component) j["component"] = *t.component;
  if (t.input) j["input"] = *t.input;
  return j;
}

json to_json(const IssueReport& issue) {
  json comments = json::array();
  for (const auto& c : issue.comments) {
    json cj = {{"id", c.id}, {"author", c.author}, {"timestamp", c.timestamp}, {"text", c.text}};
    if (c.is_solution) cj["is_solution"] = *c.is_solution;
    comments.push_back(std::move(cj));
  }
  json j = {{"format_version", kFormatVersion},
            {"id", issue.id},
            {"app", issue.app_id},
            {"title", issue.title},
            {"body", issue.body},
            {"comments", comments}};
  if (issue.ob_sentences) j["ob_sentences"] = *issue.ob_sentences;
  if (issue.eb_sentences) j["eb_sentences"] = *issue.eb_sentences;
  if (issue.s2r_sentences) j["s2r_sentences"] = *issue.s2r_sentences;
  if (issue.gold_screen_ids) j["gold_screen_ids"] = *issue.gold_screen_ids;
  if (issue.gold_component_ids) j["gold_component_ids"] = *issue.gold_component_ids;
  if (issue.gold_code_files) j["gold_code_files"] = *issue.gold_code_files;
  if (issue.base_code_ranking) {
    json r = json::array();
    for (const auto& e : *issue.base_code_ranking) r.push_back({{"doc", e.doc_id}, {"score", e.score}});
    j["base_code_ranking"] = r;
  }
  return j;
}

// --- validation ------------------------------------------------------------

class Validator {
 public:
  explicit Validator(const Corpus& corpus) : corpus_(corpus) {}

  ValidationReport run() {
    for (const auto& [key, app] : corpus_.apps) check_app(key, app);
    check_embeddings();
    std::set<std::string> issue_ids;
    for (const auto& issue : corpus_.issues) {
      if (!issue_ids.insert(issue.id).second) add("issue:" + issue.id, "DUPLICATE_ID", "issue id repeated");
      check_issue(issue);
    }
    check_code_map();
    return std::move(report_);
  }

 private:
  void add(std::string entity, std::string rule, std::string message) {
    report_.violations.push_back({std::move(entity), std::move(rule), std::move(message)});
  }

  void check_id(const std::string& entity, const std::string& id) {
    if (!is_valid_id(id)) add(entity, "BAD_ID", "id '" + id + "' must match [A-Za-z0-9_.-]+");
  }

  void check_embedding_key(const std::string& entity, const std::optional<std::string>& key) {
    if (!key || corpus_.embeddings.empty()) return;
    for (const auto& [name, store] : corpus_.embeddings) {
      if (store.contains(*key)) return;
    }
    add(entity, "DANGLING_REF", "embedding key '" + *key + "' not found in any embeddings file");
  }

  void check_app(const std::string& key, const App& app) {
    const std::string entity = "app:" + app.id;
    check_id(entity, app.id);
    if (key != app.id) add(entity, "DANGLING_REF", "app stored under key '" + key + "'");

    std::set<std::string> screen_ids;
    std::set<std::string> component_ids;
    for (const auto& s : app.screens) {
      const std::string se = entity + "/screen:" + s.id;
      check_id(se, s.id);
      if (!screen_ids.insert(s.id).second) add(se, "DUPLICATE_ID", "screen id repeated within app");
      check_embedding_key(se, s.embedding_key);
      for (const auto& c : s.components) {
        const std::string ce = entity + "/component:" + c.id;
        check_id(ce, c.id);
        if (!component_ids.insert(c.id).second) add(ce, "DUPLICATE_ID", "component id repeated within app");
        if (c.bounds.left > c.bounds.right || c.bounds.top > c.bounds.bottom) {
          add(ce, "BOUNDS", "bounds must satisfy left <= right and top <= bottom");
        }
        check_embedding_key(ce, c.embedding_key);
      }
    }

    for (std::size_t i = 0; i < app.traces.size(); ++i) {
      const TraceRecord& t = app.traces[i];
      const std::string te = entity + "/trace:" + std::to_string(i + 1);
      if (t.action == Action::Unknown) add(te, "TRACE_SHAPE", "UNKNOWN is not a trace action");
      if (!screen_ids.count(t.dest)) add(te, "DANGLING_REF", "unknown dest screen '" + t.dest + "'");
      if (t.action == Action::Launch) {
        if (t.source || t.component) add(te, "TRACE_SHAPE", "LAUNCH records carry no source or component");
      } else {
        if (!t.source) {
          add(te, "TRACE_SHAPE", "missing source screen");
        } else if (!screen_ids.count(*t.source)) {
          add(te, "DANGLING_REF", "unknown source screen '" + *t.source + "'");
        }
      }
      if (is_targetless(t.action)) {
        if (t.component && t.action != Action::Launch) {
          add(te, "TRACE_SHAPE", std::string(to_string(t.action)) + " records carry no component");
        }
      } else if (!t.component) {
        add(te, "TRACE_SHAPE", std::string(to_string(t.action)) + " requires a component");
      } else if (t.source && screen_ids.count(*t.source)) {
        const Screen* src = app.find_screen(*t.source);
        const bool on_screen = std::any_of(src->components.begin(), src->components.end(),
                                           [&](const Component& c) { return c.id == *t.component; });
        if (!on_screen) {
          add(te, "DANGLING_REF", "component '" + *t.component + "' is not on screen '" + *t.source + "'");
        }
      }
      if (t.input && t.action != Action::Type) add(te, "TRACE_SHAPE", "only TYPE records carry input");
    }
  }

  void check_issue(const IssueReport& issue) {
    const std::string entity = "issue:" + issue.id;
    check_id(entity, issue.id);
    const App* app = corpus_.find_app(issue.app_id);
    if (!app) add(entity, "DANGLING_REF", "unknown app '" + issue.app_id + "'");

    const auto sentences = s2r::segment_sentences(issue.body);
    const auto check_indices = [&](const std::optional<std::vector<int>>& idx, const char* what) {
      if (!idx) return;
      for (int i : *idx) {
        if (i < 0 || static_cast<std::size_t>(i) >= sentences.size()) {
          add(entity, "SENTENCE_INDEX",
              std::string(what) + " index " + std::to_string(i) + " out of range (" +
                  std::to_string(sentences.size()) + " sentences)");
        }
      }
    };
    check_indices(issue.ob_sentences, "ob_sentences");
    check_indices(issue.eb_sentences, "eb_sentences");
    check_indices(issue.s2r_sentences, "s2r_sentences");

    if (app) {
      if (issue.gold_screen_ids) {
        for (const auto& s : *issue.gold_screen_ids) {
          if (!app->find_screen(s)) add(entity, "DANGLING_REF", "gold screen '" + s + "' not in app");
        }
      }
      if (issue.gold_component_ids) {
        for (const auto& c : *issue.gold_component_ids) {
          if (!app->find_component(c).first) add(entity, "DANGLING_REF", "gold component '" + c + "' not in app");
        }
      }
    }

    std::set<std::string> comment_ids;
    for (std::size_t i = 0; i < issue.comments.size(); ++i) {
      const Comment& c = issue.comments[i];
      const std::string ce = entity + "/comment:" + c.id;
      check_id(ce, c.id);
      if (!comment_ids.insert(c.id).second) add(ce, "DUPLICATE_ID", "comment id repeated within issue");
      if (text::trim(c.text).empty()) add(ce, "EMPTY_TEXT", "comment text is empty");
      if (i > 0) {
        const Comment& p = issue.comments[i - 1];
        if (c.timestamp < p.timestamp || (c.timestamp == p.timestamp && c.id < p.id)) {
          add(ce, "COMMENT_ORDER", "comments must be ordered by (timestamp, id)");
        }
      }
    }
  }

  void check_code_map() {
    if (!corpus_.code_map) return;
    for (const auto& [key, files] : *corpus_.code_map) {
      bool found = false;
      for (const auto& [id, app] : corpus_.apps) {
        if (app.find_screen(key) || app.find_component(key).first) found = true;
      }
      if (!found) add("code_map:" + key, "DANGLING_REF", "no screen or component with this id");
    }
  }

  void check_embeddings() {
    std::optional<std::size_t> dim;
    std::set<std::string> keys;
    for (const auto& [name, store] : corpus_.embeddings) {
      const std::string entity = "embeddings:" + name;
      if (dim && store.dim() != *dim) add(entity, "EMBEDDING_DIM", "embedding files disagree on dimension");
      dim = dim.value_or(store.dim());
      for (const auto& [key, vec] : store.vectors()) {
        if (vec.size() != store.dim()) add(entity, "EMBEDDING_DIM", "vector '" + key + "' has wrong length");
        if (!keys.insert(key).second) add(entity, "DUPLICATE_ID", "embedding key '" + key + "' repeated");
      }
    }
  }

  const Corpus& corpus_;
  ValidationReport report_;
};

[[noreturn]] void throw_report(const ValidationReport& report) {
  ErrorCode code = ErrorCode::ValidationError;
  const std::string& rule = report.violations.front().rule;
  if (rule == "DANGLING_REF") code = ErrorCode::DanglingRef;
  if (rule == "DUPLICATE_ID") code = ErrorCode::DuplicateId;
  throw Error(code, report.to_text());
}

}  // namespace

std::string_view to_string(ComponentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "OTHER";
}

std::optional<ComponentKind> parse_component_kind(std::string_view s) {
  for (const auto& [k, name] : kKindNames) {
    if (name == s) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Action action) {
  for (const auto& [a, name] : kActionNames) {
    if (a == action) return name;
  }
  return "UNKNOWN";
}

std::optional<Action> parse_action(std::string_view s) {
  for (const auto& [a, name] : kActionNames) {
    if (name == s) return a;
  }
  return std::nullopt;
}

bool is_targetless(Action action) { return action == Action::Back || action == Action::Launch; }

const Screen* App::find_screen(std::string_view screen_id) const {
  for (const auto& s : screens) {
    if (s.id == screen_id) return &s;
  }
  return nullptr;
}

std::pair<const Component*, const Screen*> App::find_component(std::string_view component_id) const {
  for (const auto& s : screens) {
    for (const auto& c : s.components) {
      if (c.id == component_id) return {&c, &s};
    }
  }
  return {nullptr, nullptr};
}

const App* Corpus::find_app(std::string_view app_id) const {
  auto it = apps.find(std::string(app_id));
  return it == apps.end() ? nullptr : &it->second;
}

const IssueReport* Corpus::find_issue(std::string_view issue_id) const {
  for (const auto& i : issues) {
    if (i.id == issue_id) return &i;
  }
  return nullptr;
}

std::optional<EmbeddingStore> Corpus::merged_embeddings() const {
  if (embeddings.empty()) return std::nullopt;
  EmbeddingStore merged(embeddings.begin()->second.dim());
  for (const auto& [name, store] : embeddings) {
    for (const auto& [key, vec] : store.vectors()) merged.add(key, vec);
  }
  return merged;
}

std::size_t ValidationReport::count(std::string_view rule) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.rule == rule; }));
}

std::string ValidationReport::to_text() const {
  std::string out;
  for (const auto& v : violations) out += v.rule + "\t" + v.entity + "\t" + v.message + "\n";
  return out;
}

bool is_valid_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
  });
}

ValidationReport validate_corpus(const Corpus& corpus) { return Validator(corpus).run(); }

std::string serialize_app(const App& app) {
  json screens = json::array();
  for (const auto& s : app.screens) screens.push_back(to_json(s));
  return dump({{"format_version", kFormatVersion}, {"id", app.id}, {"screens", screens}});
}

std::string serialize_traces(const App& app) {
  std::string out = json{{"format_version", kFormatVersion}}.dump() + "\n";
  for (const auto& t : app.traces) out += to_json(t).dump() + "\n";
  return out;
}

std::string serialize_issue(const IssueReport& issue) { return dump(to_json(issue)); }

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& [id, app] : corpus.apps) out += serialize_app(app) + serialize_traces(app);
  for (const auto& issue : corpus.issues) out += serialize_issue(issue);
  if (corpus.code_map) out += dump({{"format_version", kFormatVersion}, {"map", *corpus.code_map}});
  for (const auto& [name, store] : corpus.embeddings) out += name + "\n" + store.serialize();
  return out;
}

Corpus read_corpus(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw Error(ErrorCode::IoFailure, "corpus root not found: " + root.string());

  Corpus corpus;
  const fs::path apps_dir = root / "apps";
  if (!fs::is_directory(apps_dir)) throw Error(ErrorCode::MalformedFile, apps_dir.string() + ": missing apps directory");
  for (const auto& entry : fs::directory_iterator(apps_dir)) {
    if (!entry.is_directory()) continue;
    const std::string dir_name = entry.path().filename().string();
    const fs::path app_file = entry.path() / "app.json";
    if (!fs::exists(app_file)) throw Error(ErrorCode::MalformedFile, app_file.string() + ": missing app.json");
    App app = read_app(read_file(app_file), app_file.string());
    if (app.id != dir_name) {
      throw Error(ErrorCode::MalformedFile,
                  app_file.string() + ":1: app id '" + app.id + "' does not match directory '" + dir_name + "'");
    }
    const fs::path trace_file = entry.path() / "traces.jsonl";
    if (fs::exists(trace_file)) app.traces = read_traces(read_file(trace_file), trace_file.string());
    corpus.apps.emplace(dir_name, std::move(app));
  }

  const fs::path issues_dir = root / "issues";
  if (fs::is_directory(issues_dir)) {
    for (const auto& entry : fs::directory_iterator(issues_dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
      IssueReport issue = read_issue(read_file(entry.path()), entry.path().string());
      const std::string stem = entry.path().stem().string();
      if (issue.id != stem) {
        throw Error(ErrorCode::MalformedFile,
                    entry.path().string() + ":1: issue id '" + issue.id + "' does not match file name");
      }
      corpus.issues.push_back(std::move(issue));
    }
  }
  std::sort(corpus.issues.begin(), corpus.issues.end(),
            [](const IssueReport& a, const IssueReport& b) { return a.id < b.id; });

  const fs::path code_map_file = root / "code_map.json";
  if (fs::exists(code_map_file)) corpus.code_map = read_code_map(read_file(code_map_file), code_map_file.string());

  const fs::path emb_dir = root / "embeddings";
  if (fs::is_directory(emb_dir)) {
    for (const auto& entry : fs::directory_iterator(emb_dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".emb") continue;
      corpus.embeddings.emplace(entry.path().stem().string(), EmbeddingStore::load(entry.path()));
    }
  }

  return corpus;
}

Corpus load_corpus(const std::filesystem::path& root) {
  Corpus corpus = read_corpus(root);
  const ValidationReport report = validate_corpus(corpus);
  if (!report.ok()) throw_report(report);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& root) {
  const ValidationReport report = validate_corpus(corpus);
  if (!report.ok()) throw Error(ErrorCode::ValidationError, report.to_text());

  // Replace a previously saved corpus entirely; other files in root are left alone.
  std::error_code ec;
  for (const char* managed : {"apps", "issues", "embeddings", "code_map.json"}) {
    std::filesystem::remove_all(root / managed, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot clear " + (root / managed).string() + ": " + ec.message());
  }

  for (const auto& [id, app] : corpus.apps) {
    write_file(root / "apps" / id / "app.json", serialize_app(app));
    write_file(root / "apps" / id / "traces.jsonl", serialize_traces(app));
  }
  for (const auto& issue : corpus.issues) write_file(root / "issues" / (issue.id + ".json"), serialize_issue(issue));
  if (corpus.code_map) {
    write_file(root / "code_map.json", dump({{"format_version", kFormatVersion}, {"map", *corpus.code_map}}));
  }
  for (const auto& [name, store] : corpus.embeddings) write_file(root / "embeddings" / (name + ".emb"), store.serialize());
}

}  // namespace irk
