#include "irk/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace irk::text {

namespace {

constexpr std::array<std::string_view, 35> kStopwords = {
    "a",   "an",   "the",   "and",  "or",    "but",  "if",   "then", "of",
    "at",  "by",   "for",   "with", "in",    "on",   "to",   "from", "into",
    "onto", "is",  "are",   "was",  "were",  "be",   "it",   "its",  "this",
    "that", "these", "those", "as", "so",    "my",   "me",   "there",
};

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }

// Splits one alphanumeric run at camelCase boundaries: "saveFile" -> save|File,
// "HTMLParser" -> HTML|Parser. Digits stay attached to the preceding letters.
void split_camel(std::string_view run, std::vector<std::string>& out) {
  std::size_t start = 0;
  for (std::size_t i = 1; i < run.size(); ++i) {
    const char prev = run[i - 1];
    const char cur = run[i];
    bool boundary = false;
    if (is_upper(cur) && (is_lower(prev) || std::isdigit(static_cast<unsigned char>(prev)))) {
      boundary = true;
    } else if (is_upper(prev) && is_upper(cur) && i + 1 < run.size() && is_lower(run[i + 1])) {
      boundary = true;
    }
    if (boundary) {
      out.push_back(to_lower(run.substr(start, i - start)));
      start = i;
    }
  }
  out.push_back(to_lower(run.substr(start)));
}

}  // namespace

std::span<const std::string_view> stopwords() { return kStopwords; }

bool is_stopword(std::string_view lowered) {
  return std::find(kStopwords.begin(), kStopwords.end(), lowered) != kStopwords.end();
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> raw_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_alnum(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && is_alnum(text[j])) ++j;
    if (j > i) split_camel(text.substr(i, j - i), out);
    i = j;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out = raw_tokens(text);
  std::erase_if(out, [](const std::string& t) { return t.size() < 2 || is_stopword(t); });
  return out;
}

double token_set_f1(std::span<const std::string> a, std::span<const std::string> b) {
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  if (sa.empty() || sb.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(sa.size());
  const double recall = static_cast<double>(common) / static_cast<double>(sb.size());
  return 2.0 * precision * recall / (precision + recall);
}

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return !std::isspace(static_cast<unsigned char>(c)); };
  const auto b = std::find_if(s.begin(), s.end(), not_space);
  const auto e = std::find_if(s.rbegin(), s.rend(), not_space).base();
  if (b >= e) return {};
  return s.substr(static_cast<std::size_t>(b - s.begin()), static_cast<std::size_t>(e - b));
}

}  // namespace irk::text
