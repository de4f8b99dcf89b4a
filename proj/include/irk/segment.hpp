#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace irk::s2r {

// Byte range [begin, end) into the segmented text. List markers ("1.", "2)",
// "-", "*") are outside the span. list_id groups consecutive list items and is
// -1 for prose sentences.
struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  int list_id = -1;

  bool is_list_item() const noexcept { return list_id >= 0; }
  bool operator==(const SentenceSpan&) const = default;
};

// Splits on sentence terminators (. ! ? followed by whitespace or end of
// line), on every newline, and after list markers at the start of a line.
// Gold sentence indices in the corpus are defined against this function.
std::vector<SentenceSpan> segment_sentences(std::string_view text);

std::vector<std::string> sentence_texts(std::string_view text);

}  // namespace irk::s2r
