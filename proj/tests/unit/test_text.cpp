#include <doctest.h>

#include <random>

#include "irk/text.hpp"

using irk::text::token_set_f1;
using irk::text::tokenize;
using Tokens = std::vector<std::string>;

TEST_CASE("tokenize splits camelCase") { CHECK(tokenize("LoginButton") == Tokens{"login", "button"}); }

TEST_CASE("tokenize drops stopwords in any case") { CHECK(tokenize("the The THE").empty()); }

TEST_CASE("tokenize splits snake_case and keeps digits attached") {
  CHECK(tokenize("saveFile_v2 crash!") == Tokens{"save", "file", "v2", "crash"});
}

TEST_CASE("tokenize drops single characters") { CHECK(tokenize("a b cd 1 x9") == Tokens{"cd", "x9"}); }

TEST_CASE("acronym followed by a word splits before the word") {
  CHECK(tokenize("HTTPServer error") == Tokens{"http", "server", "error"});
}

TEST_CASE("stopword list has 35 entries") { CHECK(irk::text::stopwords().size() == 35); }

TEST_CASE("raw_tokens keeps stopwords and short tokens") {
  CHECK(irk::text::raw_tokens("Tap a Button") == Tokens{"tap", "a", "button"});
}

TEST_CASE("token-set F1") {
  const Tokens save{"save"}, draft{"save", "draft"}, none;
  CHECK(token_set_f1(save, draft) == doctest::Approx(2.0 / 3.0));
  CHECK(token_set_f1(draft, draft) == 1.0);
  CHECK(token_set_f1(save, Tokens{"open"}) == 0.0);
  CHECK(token_set_f1(none, draft) == 0.0);
  CHECK(token_set_f1(Tokens{"a", "a", "b"}, Tokens{"a", "b"}) == 1.0);
}

TEST_CASE("token-set F1 is symmetric and bounded") {
  std::mt19937_64 rng(7);
  const Tokens vocab{"aa", "bb", "cc", "dd", "ee"};
  for (int trial = 0; trial < 200; ++trial) {
    Tokens a, b;
    for (int i = 0; i < 3; ++i) {
      if (rng() % 2) a.push_back(vocab[rng() % vocab.size()]);
      if (rng() % 2) b.push_back(vocab[rng() % vocab.size()]);
    }
    const double f = token_set_f1(a, b);
    CHECK(f == token_set_f1(b, a));
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }
}

TEST_CASE("trim") {
  CHECK(irk::text::trim("  x y \n") == "x y");
  CHECK(irk::text::trim(" \t ").empty());
}
