#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace irk {

// Dense vectors produced outside this toolkit, keyed by the corpus'
// embedding_key fields. Text format:
//
//   IRK-EMB 1 <dim> <count>
//   <key>\t<v1> <v2> ... <vdim>
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  bool contains(const std::string& key) const { return vectors_.count(key) != 0; }

  // Throws DIMENSION_MISMATCH on wrong length, DUPLICATE_ID on a repeated key.
  void add(const std::string& key, std::vector<double> vector);
  // Throws MISSING_KEY.
  std::span<const double> at(const std::string& key) const;

  const std::map<std::string, std::vector<double>>& vectors() const noexcept { return vectors_; }

  // Throws MALFORMED_FILE with the offending line number.
  static EmbeddingStore parse(const std::string& content, const std::string& source_name = "<emb>");
  static EmbeddingStore load(const std::filesystem::path& path);
  // Keys sorted, shortest round-trip float formatting.
  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

  bool operator==(const EmbeddingStore&) const = default;

 private:
  std::size_t dim_ = 0;
  std::map<std::string, std::vector<double>> vectors_;
};

// Cosine similarity accumulated in double precision; 0 when either vector has
// zero norm. Throws DIMENSION_MISMATCH on length mismatch.
double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace irk
