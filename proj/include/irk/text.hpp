#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace irk::text {

// The built-in English stopword list (35 words). Shared by the UI tokenizer
// and the step extractor; no stemming is applied anywhere.
std::span<const std::string_view> stopwords();
bool is_stopword(std::string_view lowered);

std::string to_lower(std::string_view s);

// Lowercases, splits on non-alphanumerics, splits camelCase and snake_case,
// then drops stopwords and single-character tokens.
std::vector<std::string> tokenize(std::string_view text);

// Same splitting as tokenize() but keeps stopwords and short tokens.
std::vector<std::string> raw_tokens(std::string_view text);

// Token-set F1 between two token lists (duplicates ignored). Returns 0 when
// either set is empty.
double token_set_f1(std::span<const std::string> a, std::span<const std::string> b);

std::string_view trim(std::string_view s);

}  // namespace irk::text
