#include "irk/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "irk/error.hpp"
#include "irk/text.hpp"

namespace irk {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

[[noreturn]] void malformed(const std::string& source, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::MalformedFile, source + ":" + std::to_string(line) + ": " + what);
}

std::size_t parse_size(std::string_view token, const std::string& source, std::size_t line) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    malformed(source, line, "expected an integer, got '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::size_t dim) : dim_(dim) {}

void EmbeddingStore::add(const std::string& key, std::vector<double> vector) {
  if (vector.size() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "vector '" + key + "' has " +
                                                  std::to_string(vector.size()) + " entries, expected " +
                                                  std::to_string(dim_));
  }
  if (!vectors_.emplace(key, std::move(vector)).second) {
    throw Error(ErrorCode::DuplicateId, "embedding key '" + key + "' repeated");
  }
}

std::span<const double> EmbeddingStore::at(const std::string& key) const {
  auto it = vectors_.find(key);
  if (it == vectors_.end()) throw Error(ErrorCode::MissingKey, "no embedding for key '" + key + "'");
  return it->second;
}

EmbeddingStore EmbeddingStore::parse(const std::string& content, const std::string& source_name) {
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) malformed(source_name, 1, "missing header");
  ++line_no;
  std::istringstream header(line);
  std::string magic, version, dim_tok, count_tok, extra;
  header >> magic >> version >> dim_tok >> count_tok;
  if (magic != "IRK-EMB" || version != "1" || count_tok.empty() || (header >> extra)) {
    malformed(source_name, line_no, "expected header 'IRK-EMB 1 <dim> <count>'");
  }
  const std::size_t dim = parse_size(dim_tok, source_name, line_no);
  const std::size_t count = parse_size(count_tok, source_name, line_no);
  if (dim == 0) malformed(source_name, line_no, "dimension must be positive");

  EmbeddingStore store(dim);
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) malformed(source_name, line_no, "expected '<key>\\t<values>'");
    std::string key = line.substr(0, tab);
    std::vector<double> values;
    values.reserve(dim);
    std::string_view rest(line);
    rest.remove_prefix(tab + 1);
    while (!rest.empty()) {
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      if (rest.empty()) break;
      auto end = rest.find(' ');
      std::string_view tok = rest.substr(0, end);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        malformed(source_name, line_no, "bad number '" + std::string(tok) + "'");
      }
      values.push_back(v);
      rest.remove_prefix(tok.size());
    }
    if (values.size() != dim) {
      malformed(source_name, line_no,
                "vector '" + key + "' has " + std::to_string(values.size()) + " entries, expected " +
                    std::to_string(dim));
    }
    if (store.contains(key)) malformed(source_name, line_no, "duplicate key '" + key + "'");
    store.vectors_.emplace(std::move(key), std::move(values));
  }
  if (store.size() != count) {
    malformed(source_name, line_no,
              "header declares " + std::to_string(count) + " vectors, found " + std::to_string(store.size()));
  }
  return store;
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

std::string EmbeddingStore::serialize() const {
  std::string out = "IRK-EMB 1 " + std::to_string(dim_) + " " + std::to_string(vectors_.size()) + "\n";
  for (const auto& [key, vec] : vectors_) {
    out += key;
    out += '\t';
    for (std::size_t i = 0; i < vec.size(); ++i) {
      if (i) out += ' ';
      out += format_double(vec[i]);
    }
    out += '\n';
  }
  return out;
}

void EmbeddingStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << serialize();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "vectors of length " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace irk
