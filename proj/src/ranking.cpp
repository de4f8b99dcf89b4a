#include "irk/ranking.hpp"

#include <algorithm>

namespace irk {

void Ranking::sort() {
  std::sort(entries.begin(), entries.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
}

std::vector<std::string> Ranking::doc_ids() const {
  std::vector<std::string> ids;
  ids.reserve(entries.size());
  for (const auto& e : entries) ids.push_back(e.doc_id);
  return ids;
}

std::size_t Ranking::rank_of(const std::string& doc_id) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].doc_id == doc_id) return i + 1;
  }
  return 0;
}

Ranking Ranking::top(std::size_t n) const {
  Ranking out{query_id, {}};
  out.entries.assign(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(std::min(n, entries.size())));
  return out;
}

Ranking min_max_normalized(const Ranking& r) {
  Ranking out = r;
  if (r.entries.empty()) return out;
  auto [lo, hi] = std::minmax_element(r.entries.begin(), r.entries.end(),
                                      [](const ScoredDoc& a, const ScoredDoc& b) { return a.score < b.score; });
  const double min = lo->score;
  const double range = hi->score - min;
  for (auto& e : out.entries) e.score = range > 0.0 ? (e.score - min) / range : 0.5;
  return out;
}

}  // namespace irk
