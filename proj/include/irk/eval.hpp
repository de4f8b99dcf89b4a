#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "irk/ranking.hpp"

namespace irk::eval {

// --- ranking metrics -----------------------------------------------------------

// 1 iff a gold id is among the first k entries. Throws INVALID_CONFIG for k < 1.
int hits_at_k(const Ranking& ranking, const std::set<std::string>& gold, std::size_t k);

// 1/rank of the first gold entry, 0 when no gold id is ranked.
double reciprocal_rank(const Ranking& ranking, const std::set<std::string>& gold);

// Mean of precision@rank over the gold hits, divided by |gold|.
double average_precision(const Ranking& ranking, const std::set<std::string>& gold);

struct RankedQuery {
  Ranking ranking;
  std::set<std::string> gold;
};

// Throw INVALID_CONFIG when queries is empty.
double mrr(std::span<const RankedQuery> queries);
double mean_average_precision(std::span<const RankedQuery> queries);

// --- seeded splitting ----------------------------------------------------------

// state <- a * state + c (mod 2^64); draws use the high bits.
class Lcg64 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

  explicit Lcg64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // (next() >> 33) % bound
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

// Fisher-Yates from the last position down: swap(v[i], v[below(i + 1)]).
void shuffle(std::vector<std::size_t>& v, std::uint64_t seed);

struct Fold {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// Shuffled indices dealt round-robin into k test folds. Throws INVALID_CONFIG
// for k < 2 and TOO_FEW_ITEMS when n < k.
std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

// Stratified: positives (label 1) of the shuffled order are dealt first, and
// negatives continue from the fold where positives stopped.
std::vector<Fold> kfold_split(std::span<const int> labels, std::size_t k, std::uint64_t seed, bool stratify = true);

// --- experiments ---------------------------------------------------------------

enum class Pipeline { S2r, UilocScreen, UilocComponent, Solution, CodeRerank };

std::string_view to_string(Pipeline p);
std::optional<Pipeline> parse_pipeline(std::string_view s);

struct ExperimentSpec {
  std::string name;
  Pipeline pipeline = Pipeline::UilocScreen;
  std::filesystem::path corpus;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<int> k_values = {1, 3, 5, 10};
};

// JSON spec file: {"name", "pipeline", "corpus", "config", "seed", "k_values"}.
// A relative corpus path is resolved against base_dir. Throws MALFORMED_FILE
// naming the offending field.
ExperimentSpec parse_spec(const std::string& content, const std::filesystem::path& base_dir = {});

// Config keys accepted by each pipeline.
std::vector<std::string> config_keys(Pipeline p);

struct ExperimentResult {
  std::string name;
  Pipeline pipeline = Pipeline::UilocScreen;
  std::uint64_t seed = 0;
  std::vector<int> k_values;
  std::string corpus_hash;
  std::string config_hash;
  std::vector<nlohmann::json> records;  // ordered by item id
  std::map<std::string, double> aggregate;
};

// Throws INVALID_CONFIG (unknown config key, bad value, k_values not positive
// ascending) and propagates corpus and pipeline errors.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Aggregates as a pure function of the records.
std::map<std::string, double> aggregate_records(Pipeline pipeline, std::span<const nlohmann::json> records,
                                                std::span<const int> k_values);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

// <dir>/records.jsonl and <dir>/aggregate.json. Throws IO_FAILURE.
void write_result(const ExperimentResult& result, const std::filesystem::path& dir);
// Throws IO_FAILURE, MALFORMED_FILE.
ExperimentResult read_result(const std::filesystem::path& dir);

// Human-readable aggregate table.
std::string format_aggregate(const ExperimentResult& result);

}  // namespace irk::eval
