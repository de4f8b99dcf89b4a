#include "irk/segment.hpp"

#include <cctype>

namespace irk::s2r {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

// Length of a list marker (including trailing whitespace) at text[pos], or 0.
std::size_t list_marker_length(std::string_view line, std::size_t pos) {
  std::size_t i = pos;
  if (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size() || (line[i] != '.' && line[i] != ')')) return 0;
    ++i;
  } else if (i < line.size() && (line[i] == '-' || line[i] == '*')) {
    ++i;
  } else if (line.substr(i, 3) == "\xE2\x80\xA2") {  // bullet
    i += 3;
  } else {
    return 0;
  }
  if (i < line.size() && !is_space(line[i])) return 0;
  while (i < line.size() && is_space(line[i])) ++i;
  return i - pos;
}

void push_trimmed(std::string_view text, std::size_t b, std::size_t e, int list_id,
                  std::vector<SentenceSpan>& out) {
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  if (e > b) out.push_back({b, e, list_id});
}

}  // namespace

std::vector<SentenceSpan> segment_sentences(std::string_view text) {
  std::vector<SentenceSpan> out;
  int next_list_id = 0;
  int current_list = -1;

  std::size_t line_begin = 0;
  while (line_begin <= text.size()) {
    std::size_t line_end = text.find('\n', line_begin);
    if (line_end == std::string_view::npos) line_end = text.size();
    const std::string_view line = text.substr(line_begin, line_end - line_begin);

    std::size_t lead = 0;
    while (lead < line.size() && is_space(line[lead])) ++lead;

    if (lead == line.size()) {
      // Blank lines do not interrupt a list.
    } else {
      const std::size_t marker = list_marker_length(line, lead);
      int list_id = -1;
      std::size_t content = lead;
      if (marker > 0) {
        if (current_list < 0) current_list = next_list_id++;
        list_id = current_list;
        content = lead + marker;
      } else {
        current_list = -1;
      }

      std::size_t start = content;
      std::size_t i = content;
      while (i < line.size()) {
        if (is_terminator(line[i])) {
          std::size_t j = i;
          while (j < line.size() && is_terminator(line[j])) ++j;
          if (j == line.size() || is_space(line[j])) {
            push_trimmed(text, line_begin + start, line_begin + j, list_id, out);
            start = j;
          }
          i = j;
        } else {
          ++i;
        }
      }
      push_trimmed(text, line_begin + start, line_begin + line.size(), list_id, out);
    }

    if (line_end == text.size()) break;
    line_begin = line_end + 1;
  }
  return out;
}

std::vector<std::string> sentence_texts(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& s : segment_sentences(text)) out.emplace_back(text.substr(s.begin, s.end - s.begin));
  return out;
}

}  // namespace irk::s2r
