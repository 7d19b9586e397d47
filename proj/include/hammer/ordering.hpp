#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hammer/similarity_matrix.hpp"

namespace hammer {

// A visiting order over the nodes of a similarity graph plus the provenance
// needed to regenerate it.
struct CuriosityOrder {
  std::vector<std::size_t> path;
  double weight = 0.0;
  std::string generator;  // "eta-ghs", "exact-enumerate", "exact-dp", "random"
  std::size_t eta = 0;
  std::size_t restarts = 0;
  std::uint64_t seed = 0;
  bool cycle = false;
  // False when weight is a 0 placeholder (random order built without a matrix).
  bool weight_computed = true;
  // eta_ghs only: the weight reached by each restart, in restart order.
  std::vector<double> restart_weights;
};

// Sum of M[path[k]][path[k+1]] over the n-1 consecutive pairs; `closed` adds
// the edge from the last node back to the first.
double path_weight(std::span<const std::size_t> path, const SimilarityMatrix& m, bool closed = false);

enum class ExactMode {
  automatic,            // enumerate up to kEnumerateAutoLimit, DP beyond
  enumerate,            // n <= kEnumerateLimit
  dynamic_programming,  // n <= kDynamicProgrammingLimit
};

inline constexpr std::size_t kEnumerateLimit = 12;
inline constexpr std::size_t kEnumerateAutoLimit = 9;
inline constexpr std::size_t kDynamicProgrammingLimit = 18;

// Globally minimal open Hamiltonian path. Among paths within 1e-12 of the
// optimum the lexicographically smallest is returned; on a symmetric matrix
// that path always has first <= last.
CuriosityOrder exact_min_path(const SimilarityMatrix& m, ExactMode mode = ExactMode::automatic);

inline std::size_t default_restarts(std::size_t n) {
  return std::max<std::size_t>(1, std::min<std::size_t>(n / 2, 64));
}

struct GhsOptions {
  std::size_t eta = 3;
  std::optional<std::size_t> restarts;  // default_restarts(n) when unset
  std::uint64_t seed = 42;
  std::optional<std::size_t> forced_start;
  bool cycle = false;
  unsigned threads = 0;
};

// Randomized greedy search for a low-similarity Hamiltonian path.
//
// Each restart r draws its start node from make_engine(seed, r), then extends
// the path by choosing uniformly among the eta unvisited nodes least similar
// to the current endpoint (ties ordered by index). The lowest-weight path over
// all restarts is returned, the earliest restart winning ties, so the result
// does not depend on how restarts are spread over threads.
CuriosityOrder eta_ghs(const SimilarityMatrix& m, const GhsOptions& options = {});

// Uniform permutation of {0, ..., n-1} via Fisher-Yates on make_engine(seed).
// The weight is computed when a matrix is given.
CuriosityOrder random_order(std::size_t n, std::uint64_t seed, const SimilarityMatrix* m = nullptr);

enum class SubsetMode { greedy, exact };

inline constexpr std::uint64_t kExactSubsetBudget = 1'000'000;

// Sum of M[i][j] over ordered pairs i != j drawn from `subset`.
double pairwise_similarity_sum(const SimilarityMatrix& m, std::span<const std::size_t> subset);

// Size-`size` subset with low pairwise similarity, returned sorted.
//
// Greedy: for size >= 2 start from the pair with the smallest off-diagonal
// entry, then repeatedly add the node with the smallest total similarity to
// the chosen set; size 1 picks the node with the smallest row sum. Exact:
// enumerates all C(n, size) subsets (budget kExactSubsetBudget) and returns the
// lexicographically first minimizer of pairwise_similarity_sum.
std::vector<std::size_t> select_diverse_subset(const SimilarityMatrix& m, std::size_t size,
                                               SubsetMode mode = SubsetMode::greedy);

struct StagePartition {
  std::vector<std::vector<std::size_t>> stages;

  std::size_t k() const noexcept { return stages.size(); }
};

// Contiguous cut of `path` into k blocks; the first n % k blocks get one extra.
StagePartition partition_stages(std::span<const std::size_t> path, std::size_t k);

inline constexpr std::size_t kExactStagesLimit = 20;

// Stage i is an exact max-diversity subset of whatever earlier stages left,
// with the same sizes as partition_stages. For validation at n <= 20.
StagePartition partition_stages_exact(const SimilarityMatrix& m, std::size_t k);

}  // namespace hammer
