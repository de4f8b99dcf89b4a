#include "irk/s2r.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "irk/error.hpp"
#include "irk/text.hpp"

namespace irk::s2r {

namespace {

struct VerbEntry {
  std::string_view verb;
  Action action;
};

// Single-word verbs. Two-word forms are handled in read_head().
constexpr std::array<VerbEntry, 20> kVerbs = {{
    {"tap", Action::Click},         {"click", Action::Click},      {"press", Action::Click},
    {"select", Action::Click},      {"choose", Action::Click},     {"touch", Action::Click},
    {"type", Action::Type},         {"enter", Action::Type},       {"input", Action::Type},
    {"swipe", Action::Swipe},       {"scroll", Action::Scroll},    {"open", Action::Launch},
    {"launch", Action::Launch},     {"start", Action::Launch},     {"long-press", Action::LongClick},
    {"longpress", Action::LongClick}, {"long-tap", Action::LongClick}, {"long-click", Action::LongClick},
    {"hold", Action::LongClick},    {"back", Action::Back},
}};

constexpr std::array<std::string_view, 6> kFillers = {"please", "now", "then", "first", "next", "finally"};

bool is_filler(std::string_view w) { return std::find(kFillers.begin(), kFillers.end(), w) != kFillers.end(); }

enum class UnitKind { Word, Quote, Separator };

struct Unit {
  UnitKind kind;
  std::string text;  // lowercased for words, verbatim for quotes
};

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '\'' || c == '/' ||
         (static_cast<unsigned char>(c) & 0x80);
}

// Opening quote at i: returns {quote length, matching closer sequence}.
std::pair<std::size_t, std::string_view> quote_at(std::string_view s, std::size_t i) {
  if (s[i] == '"') return {1, "\""};
  if (s[i] == '\'' && (i == 0 || !std::isalnum(static_cast<unsigned char>(s[i - 1])))) return {1, "'"};
  if (s.substr(i, 3) == "\xE2\x80\x9C") return {3, "\xE2\x80\x9D"};  // “ ”
  if (s.substr(i, 3) == "\xE2\x80\x98") return {3, "\xE2\x80\x99"};  // ‘ ’
  return {0, {}};
}

std::vector<Unit> lex(std::string_view s) {
  std::vector<Unit> units;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (auto [len, closer] = quote_at(s, i); len > 0) {
      // A closing quote must not be followed by an alphanumeric (apostrophes).
      std::size_t j = s.find(closer, i + len);
      while (j != std::string_view::npos && j + closer.size() < s.size() &&
             std::isalnum(static_cast<unsigned char>(s[j + closer.size()]))) {
        j = s.find(closer, j + closer.size());
      }
      if (j != std::string_view::npos) {
        units.push_back({UnitKind::Quote, std::string(s.substr(i + len, j - i - len))});
        i = j + closer.size();
        continue;
      }
    }
    if (c == ',' || c == ';') {
      units.push_back({UnitKind::Separator, std::string(1, c)});
      ++i;
      continue;
    }
    if (is_word_char(c) && c != '\'') {
      std::size_t j = i;
      while (j < s.size() && is_word_char(s[j]) && quote_at(s, j).first == 0) ++j;
      if (j == i) ++j;
      std::string w = text::to_lower(s.substr(i, j - i));
      while (!w.empty() && (w.back() == '-' || w.back() == '\'')) w.pop_back();
      if (!w.empty()) units.push_back({UnitKind::Word, std::move(w)});
      i = j;
      continue;
    }
    ++i;
  }
  return units;
}

struct Head {
  std::string verb;
  std::optional<Action> action;
  std::size_t consumed = 0;  // units consumed, including fillers
};

// Reads the clause head: skips fillers, then recognizes one- or two-word
// action verbs.
Head read_head(const std::vector<Unit>& units, std::size_t begin, std::size_t end) {
  std::size_t i = begin;
  while (i < end && units[i].kind == UnitKind::Word && is_filler(units[i].text)) ++i;
  Head head;
  if (i >= end || units[i].kind != UnitKind::Word) {
    head.consumed = i - begin;
    return head;
  }
  const std::string& w = units[i].text;
  const std::string next = (i + 1 < end && units[i + 1].kind == UnitKind::Word) ? units[i + 1].text : "";
  if ((w == "go" || w == "navigate" || w == "press" || w == "tap") && next == "back") {
    head = {w + " back", Action::Back, i + 2 - begin};
  } else if (w == "long" && (next == "press" || next == "tap" || next == "click")) {
    head = {w + " " + next, Action::LongClick, i + 2 - begin};
  } else {
    head = {w, lookup_action_verb(w), i + 1 - begin};
  }
  return head;
}

bool is_clause_separator(const Unit& u) {
  return u.kind == UnitKind::Separator || (u.kind == UnitKind::Word && (u.text == "and" || u.text == "then"));
}

AtomicStep build_step(const std::vector<Unit>& units, std::size_t begin, std::size_t end, int sentence_index,
                      int ordinal) {
  AtomicStep step;
  step.sentence_index = sentence_index;
  step.ordinal = ordinal;
  const Head head = read_head(units, begin, end);
  std::string rest;
  if (head.action) {
    step.action = *head.action;
    step.action_verb = head.verb;
  } else {
    step.action = Action::Unknown;
    step.action_verb = head.verb;
  }
  const std::size_t body = head.action ? begin + head.consumed : begin;
  for (std::size_t i = body; i < end; ++i) {
    const Unit& u = units[i];
    if (u.kind == UnitKind::Separator) continue;
    if (u.kind == UnitKind::Quote && step.action == Action::Type && !step.input_value) {
      step.input_value = u.text;
      continue;
    }
    rest += ' ';
    rest += u.text;
  }
  step.target_phrase = text::tokenize(rest);

  // "press back" style clauses name the system back button.
  if (step.action == Action::Click && step.target_phrase == std::vector<std::string>{"back"}) {
    step.action = Action::Back;
  }
  // The object of a BACK/LAUNCH verb is a direction or the app itself, never
  // a component.
  if (is_targetless(step.action)) step.target_phrase.clear();
  if (step.action != Action::Unknown && !is_targetless(step.action) && step.target_phrase.empty()) {
    step.action = Action::Unknown;
  }
  return step;
}

bool compatible(Action step, Action interaction) {
  if (step == Action::Unknown) return false;
  if (step == interaction) return true;
  const auto gesture = [](Action a) { return a == Action::Swipe || a == Action::Scroll; };
  return gesture(step) && gesture(interaction);
}

std::string component_label(const ComponentText& c, const std::string& id) {
  if (!c.label.empty()) return c.label;
  if (!c.description.empty()) return c.description;
  return id;
}

std::string describe(const Interaction& it, const ExecutionModel& model) {
  std::string out(to_string(it.action));
  if (it.action == Action::Type && it.input_value) out += " \"" + *it.input_value + "\" into";
  if (it.target_component) {
    const ComponentText* c = model.component(*it.target_component);
    out += " \"" + (c ? component_label(*c, *it.target_component) : *it.target_component) + "\"";
  }
  out += it.source_screen ? " (" + *it.source_screen + " -> " + it.dest_screen + ")" : " (-> " + it.dest_screen + ")";
  return out;
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Correct: return "CORRECT";
    case Verdict::Ambiguous: return "AMBIGUOUS";
    case Verdict::VocabMismatch: return "VOCAB_MISMATCH";
  }
  return "VOCAB_MISMATCH";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  for (Verdict v : {Verdict::Correct, Verdict::Ambiguous, Verdict::VocabMismatch}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<Action> lookup_action_verb(std::string_view verb) {
  for (const auto& e : kVerbs) {
    if (e.verb == verb) return e.action;
  }
  return std::nullopt;
}

bool starts_with_action_verb(std::string_view sentence) {
  const auto units = lex(sentence);
  return read_head(units, 0, units.size()).action.has_value();
}

std::vector<int> identify_s2r_sentences(const IssueReport& issue, bool use_gold) {
  if (use_gold && issue.s2r_sentences) {
    std::vector<int> gold = *issue.s2r_sentences;
    std::sort(gold.begin(), gold.end());
    gold.erase(std::unique(gold.begin(), gold.end()), gold.end());
    return gold;
  }
  const auto spans = segment_sentences(issue.body);
  std::vector<bool> verb_led(spans.size());
  std::map<int, std::pair<int, int>> list_votes;  // list id -> (verb-led items, items)
  for (std::size_t i = 0; i < spans.size(); ++i) {
    verb_led[i] = starts_with_action_verb(std::string_view(issue.body).substr(spans[i].begin, spans[i].end - spans[i].begin));
    if (spans[i].is_list_item()) {
      auto& [hits, total] = list_votes[spans[i].list_id];
      hits += verb_led[i] ? 1 : 0;
      total += 1;
    }
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    bool s2r = verb_led[i];
    if (!s2r && spans[i].is_list_item()) {
      const auto& [hits, total] = list_votes[spans[i].list_id];
      s2r = 2 * hits > total;
    }
    if (s2r) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<AtomicStep> extract_atomic_steps(std::string_view sentence, int sentence_index) {
  const auto units = lex(sentence);

  // Candidate clause boundaries at separators; a clause whose head is not an
  // action verb is folded back into the clause before it.
  std::vector<std::pair<std::size_t, std::size_t>> clauses;
  std::size_t start = 0;
  const auto close = [&](std::size_t end) {
    if (end <= start) return;
    const bool verb_head = read_head(units, start, end).action.has_value();
    if (!clauses.empty() && !verb_head) {
      clauses.back().second = end;
    } else {
      clauses.emplace_back(start, end);
    }
  };
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (is_clause_separator(units[i])) {
      close(i);
      start = i + 1;
    }
  }
  close(units.size());

  std::vector<AtomicStep> steps;
  int ordinal = 0;
  for (const auto& [b, e] : clauses) {
    // Skip clauses that are only separators/fillers.
    bool has_content = false;
    for (std::size_t i = b; i < e; ++i) has_content |= !is_clause_separator(units[i]);
    if (!has_content) continue;
    steps.push_back(build_step(units, b, e, sentence_index, ordinal++));
  }
  if (steps.empty() && !text::trim(sentence).empty()) {
    AtomicStep unknown;
    unknown.sentence_index = sentence_index;
    unknown.target_phrase = text::tokenize(sentence);
    steps.push_back(std::move(unknown));
  }
  return steps;
}

std::vector<AtomicStep> extract_issue_steps(const IssueReport& issue, bool use_gold) {
  const auto spans = segment_sentences(issue.body);
  std::vector<AtomicStep> steps;
  for (int idx : identify_s2r_sentences(issue, use_gold)) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= spans.size()) continue;
    const auto& sp = spans[static_cast<std::size_t>(idx)];
    auto sentence_steps = extract_atomic_steps(std::string_view(issue.body).substr(sp.begin, sp.end - sp.begin), idx);
    steps.insert(steps.end(), sentence_steps.begin(), sentence_steps.end());
  }
  return steps;
}

Verdict classify_similarities(const std::vector<double>& sorted_desc, const MatchConfig& config) {
  const double best = sorted_desc.empty() ? 0.0 : sorted_desc.front();
  if (best < config.tau_match) return Verdict::VocabMismatch;
  const auto near = std::count_if(sorted_desc.begin(), sorted_desc.end(), [&](double s) {
    return s >= config.tau_match && best - s <= config.delta;
  });
  if (near >= 2) return Verdict::Ambiguous;
  const double second = sorted_desc.size() > 1 ? sorted_desc[1] : 0.0;
  if (best >= config.tau_high && best - second > config.delta) return Verdict::Correct;
  return Verdict::Ambiguous;
}

StepAnnotation match_step(const AtomicStep& step, const ExecutionModel& model, std::string_view current_screen,
                          const MatchConfig& config) {
  const auto local = model.outgoing(current_screen);  // throws UNKNOWN_SCREEN

  const auto similarity = [&](const Interaction& it) {
    std::vector<std::string> tokens;
    if (it.target_component) {
      if (const ComponentText* c = model.component(*it.target_component)) {
        tokens = text::tokenize(c->label + " " + c->description);
      }
    }
    if (step.target_phrase.empty() && tokens.empty() && is_targetless(it.action)) return 1.0;
    return text::token_set_f1(step.target_phrase, tokens);
  };
  const auto score_pool = [&](auto&& pool) {
    std::vector<Candidate> out;
    for (const Interaction& it : pool) {
      if (!compatible(step.action, it.action)) continue;
      const double s = similarity(it);
      if (s > 0.0) out.push_back({it.id, s});
    }
    std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
      if (a.similarity != b.similarity) return a.similarity > b.similarity;
      return a.interaction_id < b.interaction_id;
    });
    return out;
  };

  StepAnnotation ann;
  ann.step = step;
  ann.candidates = score_pool(local);
  if (ann.candidates.empty() || ann.candidates.front().similarity < config.tau_match) {
    ann.candidates = score_pool(model.interactions());
  }
  std::vector<double> scores;
  for (const auto& c : ann.candidates) scores.push_back(c.similarity);
  ann.verdict = classify_similarities(scores, config);
  if (ann.verdict != Verdict::VocabMismatch) ann.chosen = ann.candidates.front().interaction_id;
  return ann;
}

QualityReport assess_steps(const std::string& issue_id, const std::vector<AtomicStep>& steps,
                           const ExecutionModel& model, const MatchConfig& config) {
  QualityReport report;
  report.issue_id = issue_id;
  std::string current = model.launch_screen();

  for (const auto& step : steps) {
    StepAnnotation ann = match_step(step, model, current, config);
    for (const auto& c : ann.candidates) {
      report.interaction_labels.emplace(c.interaction_id, describe(*model.find(c.interaction_id), model));
    }
    if (ann.chosen) {
      const Interaction& chosen = *model.find(*ann.chosen);
      if (chosen.source_screen && *chosen.source_screen != current) {
        try {
          auto path = shortest_interaction_path(model, current, *chosen.source_screen);
          const int n = static_cast<int>(report.annotations.size());
          for (const auto& it : path) report.interaction_labels.emplace(it.id, describe(it, model));
          report.missing.push_back({n == 0 ? std::nullopt : std::optional<int>(n - 1), std::move(path)});
        } catch (const Error& e) {
          // The chosen interaction cannot be reached from the simulated
          // screen: no bridge to suggest, but the step still moves state.
          if (e.code() != ErrorCode::Unreachable) throw;
        }
      }
      current = chosen.dest_screen;
    }
    report.annotations.push_back(std::move(ann));
  }
  report.final_screen = current;
  return report;
}

QualityReport assess_s2rs(const IssueReport& issue, const ExecutionModel& model, const AssessConfig& config) {
  return assess_steps(issue.id, extract_issue_steps(issue, config.use_gold), model, config.match);
}

}  // namespace irk::s2r
