#pragma once

#include <string>
#include <vector>

namespace irk {

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

// Ordered (doc_id, score) list. Invariant once sorted: scores non-increasing,
// ties by doc_id ascending, doc_ids unique.
struct Ranking {
  std::string query_id;
  std::vector<ScoredDoc> entries;

  void sort();
  std::vector<std::string> doc_ids() const;
  // 1-based rank of doc_id, 0 when absent.
  std::size_t rank_of(const std::string& doc_id) const;
  Ranking top(std::size_t n) const;

  bool operator==(const Ranking&) const = default;
};

// Min-max normalization over the ranking's own scores; a constant (or
// single-entry) ranking maps every score to 0.5.
Ranking min_max_normalized(const Ranking& r);

}  // namespace irk
