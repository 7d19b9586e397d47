#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hammer/corpus_io.hpp"
#include "hammer/diversity.hpp"

namespace hammer::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

struct RunConfig {
  std::string command;  // order | score | partition | validate | sim-cache

  std::filesystem::path corpus;
  std::filesystem::path embeddings;
  std::filesystem::path sim_cache;
  std::filesystem::path order_in;
  std::filesystem::path order_out = "order.json";
  std::filesystem::path corpus_out;
  std::filesystem::path out_dir = "stages";
  std::filesystem::path out;
  std::filesystem::path report;
  std::filesystem::path csv;
  CorpusFields fields;

  std::size_t eta = 3;
  std::optional<std::size_t> restarts;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  double p = 0.5;
  std::size_t m = 2;
  std::vector<double> ratios;
  std::size_t k = 1;
  std::optional<std::size_t> trials;
  Metric metric = Metric::dcscore;

  bool cycle = false;
  bool exact = false;
  bool random = false;
  bool case_sensitive = false;
  bool timestamp = false;
};

// Throws InvalidArgument for any out-of-range numeric setting.
void check_config(const RunConfig& config);

int cmd_order(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_score(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_partition(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sim_cache(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses `args` (without the program name), dispatches, and maps errors to
// exit codes: 0 ok, 1 validation failure, 2 usage/config, 3 I/O or format.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hammer::cli
