#include <algorithm>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "irk/error.hpp"
#include "irk/s2r.hpp"
#include "irk/text.hpp"

namespace irk::s2r {

using nlohmann::json;

namespace {

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string cell(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out += c;
  }
  return out;
}

std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

json interaction_to_json(const Interaction& it) {
  json j = {{"id", it.id}, {"action", std::string(to_string(it.action))}, {"dest", it.dest_screen}};
  if (it.source_screen) j["source"] = *it.source_screen;
  if (it.target_component) j["component"] = *it.target_component;
  if (it.input_value) j["input"] = *it.input_value;
  return j;
}

json step_to_json(const AtomicStep& s) {
  json j = {{"sentence_index", s.sentence_index},
            {"ordinal", s.ordinal},
            {"action_verb", s.action_verb},
            {"action", std::string(to_string(s.action))},
            {"target_phrase", s.target_phrase}};
  if (s.input_value) j["input_value"] = *s.input_value;
  return j;
}

std::string render_json(const QualityReport& r) {
  json annotations = json::array();
  for (const auto& a : r.annotations) {
    json cands = json::array();
    for (const auto& c : a.candidates) cands.push_back({{"interaction", c.interaction_id}, {"similarity", c.similarity}});
    json aj = {{"step", step_to_json(a.step)}, {"verdict", std::string(to_string(a.verdict))}, {"candidates", cands}};
    if (a.chosen) aj["chosen"] = *a.chosen;
    annotations.push_back(std::move(aj));
  }
  json missing = json::array();
  for (const auto& m : r.missing) {
    json its = json::array();
    for (const auto& it : m.interactions) its.push_back(interaction_to_json(it));
    missing.push_back({{"insert_after", m.insert_after ? json(*m.insert_after) : json("START")}, {"interactions", its}});
  }
  json j = {{"issue_id", r.issue_id},
            {"final_screen", r.final_screen},
            {"annotations", annotations},
            {"missing", missing},
            {"interaction_labels", r.interaction_labels}};
  return j.dump(2) + "\n";
}

std::string render_markdown(const QualityReport& r) {
  std::ostringstream out;
  out << "# S2R quality report: " << r.issue_id << "\n";
  if (r.annotations.empty() && r.missing.empty()) return out.str();

  std::size_t counts[3] = {0, 0, 0};
  for (const auto& a : r.annotations) ++counts[static_cast<int>(a.verdict)];
  out << "\n";
  out << "Steps: " << r.annotations.size() << " (CORRECT " << counts[0] << ", AMBIGUOUS " << counts[1]
      << ", VOCAB_MISMATCH " << counts[2] << ")\n";
  out << "Missing-step suggestions: " << r.missing.size() << "\n";
  out << "Final screen: " << r.final_screen << "\n";

  const auto label = [&](const std::string& id) {
    auto it = r.interaction_labels.find(id);
    return it == r.interaction_labels.end() ? id : id + " " + it->second;
  };

  out << "\n## Steps\n\n";
  out << "| # | Sentence | Verb | Action | Target | Input | Verdict | Chosen | Candidates |\n";
  out << "|---|---|---|---|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < r.annotations.size(); ++i) {
    const auto& a = r.annotations[i];
    std::vector<std::string> cands;
    for (const auto& c : a.candidates) cands.push_back(c.interaction_id + " (" + fixed3(c.similarity) + ")");
    out << "| " << i << " | " << a.step.sentence_index << "." << a.step.ordinal << " | " << cell(a.step.action_verb)
        << " | " << to_string(a.step.action) << " | " << cell(join(a.step.target_phrase, " ")) << " | "
        << cell(a.step.input_value.value_or("")) << " | " << to_string(a.verdict) << " | "
        << cell(a.chosen ? label(*a.chosen) : "") << " | " << cell(join(cands, ", ")) << " |\n";
  }

  if (!r.missing.empty()) {
    out << "\n## Missing steps\n\n";
    for (const auto& m : r.missing) {
      out << "- " << (m.insert_after ? "after step " + std::to_string(*m.insert_after) : std::string("at start"))
          << ":\n";
      for (const auto& it : m.interactions) out << "  - " << label(it.id) << "\n";
    }
  }
  return out.str();
}

[[noreturn]] void bad(const std::string& source, const std::string& what) {
  throw Error(ErrorCode::MalformedFile, source + ": " + what);
}

template <typename T>
T get(const json& j, const char* key, const std::string& source) {
  auto it = j.find(key);
  if (it == j.end()) bad(source, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    bad(source, std::string("field '") + key + "' has the wrong type");
  }
}

Action action_field(const json& j, const char* key, const std::string& source) {
  const auto name = get<std::string>(j, key, source);
  auto a = parse_action(name);
  if (!a) bad(source, "unknown action '" + name + "'");
  return *a;
}

AtomicStep step_from_json(const json& j, const std::string& source) {
  if (!j.is_object()) bad(source, "step must be an object");
  AtomicStep s;
  s.sentence_index = get<int>(j, "sentence_index", source);
  s.action = action_field(j, "action", source);
  if (j.contains("ordinal")) s.ordinal = get<int>(j, "ordinal", source);
  s.action_verb = j.contains("action_verb") ? get<std::string>(j, "action_verb", source)
                                            : text::to_lower(to_string(s.action));
  if (j.contains("target_phrase")) {
    for (const auto& phrase : get<std::vector<std::string>>(j, "target_phrase", source)) {
      for (auto& t : text::tokenize(phrase)) s.target_phrase.push_back(std::move(t));
    }
  }
  if (j.contains("input_value") && !j["input_value"].is_null()) s.input_value = get<std::string>(j, "input_value", source);
  return s;
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  if (name == "md" || name == "markdown") return ReportFormat::Markdown;
  if (name == "json") return ReportFormat::Json;
  throw Error(ErrorCode::UnsupportedFormat, "report format '" + std::string(name) + "'");
}

std::string render_report(const QualityReport& report, ReportFormat format) {
  return format == ReportFormat::Json ? render_json(report) : render_markdown(report);
}

std::string render_report(const QualityReport& report, std::string_view format) {
  return render_report(report, parse_report_format(format));
}

QualityReport parse_report_json(const std::string& content) {
  const std::string src = "<report>";
  json j;
  try {
    j = json::parse(content);
  } catch (const json::parse_error& e) {
    bad(src, e.what());
  }
  if (!j.is_object()) bad(src, "report must be an object");
  QualityReport r;
  r.issue_id = get<std::string>(j, "issue_id", src);
  r.final_screen = get<std::string>(j, "final_screen", src);
  r.interaction_labels = get<std::map<std::string, std::string>>(j, "interaction_labels", src);
  for (const auto& aj : get<json>(j, "annotations", src)) {
    StepAnnotation a;
    const json step = get<json>(aj, "step", src);
    a.step = step_from_json(step, src);
    a.step.ordinal = get<int>(step, "ordinal", src);
    a.step.action_verb = get<std::string>(step, "action_verb", src);
    a.step.target_phrase = get<std::vector<std::string>>(step, "target_phrase", src);
    const auto verdict = get<std::string>(aj, "verdict", src);
    auto v = parse_verdict(verdict);
    if (!v) bad(src, "unknown verdict '" + verdict + "'");
    a.verdict = *v;
    for (const auto& cj : get<json>(aj, "candidates", src)) {
      a.candidates.push_back({get<std::string>(cj, "interaction", src), get<double>(cj, "similarity", src)});
    }
    if (aj.contains("chosen")) a.chosen = get<std::string>(aj, "chosen", src);
    r.annotations.push_back(std::move(a));
  }
  for (const auto& mj : get<json>(j, "missing", src)) {
    MissingSteps m;
    const json& after = mj.at("insert_after");
    if (after.is_number_integer()) {
      m.insert_after = after.get<int>();
    } else if (after != "START") {
      bad(src, "insert_after must be an integer or \"START\"");
    }
    for (const auto& ij : get<json>(mj, "interactions", src)) {
      Interaction it;
      it.id = get<std::string>(ij, "id", src);
      it.action = action_field(ij, "action", src);
      it.dest_screen = get<std::string>(ij, "dest", src);
      if (ij.contains("source")) it.source_screen = get<std::string>(ij, "source", src);
      if (ij.contains("component")) it.target_component = get<std::string>(ij, "component", src);
      if (ij.contains("input")) it.input_value = get<std::string>(ij, "input", src);
      m.interactions.push_back(std::move(it));
    }
    r.missing.push_back(std::move(m));
  }
  return r;
}

std::vector<AtomicStep> parse_steps_json(const std::string& content, const std::string& source_name) {
  std::vector<json> records;
  const std::string trimmed(text::trim(content));
  if (!trimmed.empty() && trimmed.front() == '[') {
    try {
      for (auto& r : json::parse(trimmed)) records.push_back(std::move(r));
    } catch (const json::parse_error& e) {
      bad(source_name, e.what());
    }
  } else {
    std::istringstream in(content);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (text::trim(line).empty()) continue;
      try {
        records.push_back(json::parse(line));
      } catch (const json::parse_error& e) {
        bad(source_name + ":" + std::to_string(n), e.what());
      }
    }
  }

  std::vector<AtomicStep> steps;
  std::map<int, int> next_ordinal;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json& r = records[i];
    AtomicStep s = step_from_json(r, source_name + "[" + std::to_string(i) + "]");
    if (!r.contains("ordinal")) s.ordinal = next_ordinal[s.sentence_index];
    next_ordinal[s.sentence_index] = std::max(next_ordinal[s.sentence_index], s.ordinal + 1);
    steps.push_back(std::move(s));
  }
  std::stable_sort(steps.begin(), steps.end(), [](const AtomicStep& a, const AtomicStep& b) {
    return std::tie(a.sentence_index, a.ordinal) < std::tie(b.sentence_index, b.ordinal);
  });
  return steps;
}

}  // namespace irk::s2r
