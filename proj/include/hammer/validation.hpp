#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hammer/corpus_io.hpp"
#include "hammer/random.hpp"
#include "hammer/similarity_matrix.hpp"

namespace hammer {

// The 5-sample worked example matrix (samples x1..x5 -> indices 0..4).
SimilarityMatrix example3_matrix();

// The two orders compared in the worked prefix table, and its reference rows
// (p = 1, prefixes of size 1..5).
inline constexpr std::array<std::size_t, 5> kTableOrderStar = {1, 2, 4, 3, 0};         // x2 x3 x5 x4 x1
inline constexpr std::array<std::size_t, 5> kTableOrderAlternative = {0, 1, 4, 3, 2};  // x1 x2 x5 x4 x3
inline constexpr std::array<double, 5> kTableDcscoreStar = {1.00, 3.43, 5.59, 6.78, 8.35};
inline constexpr std::array<double, 5> kTableDcscoreAlternative = {1.00, 2.49, 3.96, 5.24, 8.35};
inline constexpr double kTableTolerance = 0.01;
inline constexpr double kExample3MinimumWeight = -0.5;

// Gaussian directions normalized to the unit sphere.
EmbeddingMatrix random_unit_vectors(std::size_t n, std::size_t d, Engine& engine);
SimilarityMatrix random_cosine_matrix(std::size_t n, std::size_t d, std::uint64_t seed);

inline constexpr std::size_t kValidationDim = 16;

// Spearman rank correlation with average ranks for ties; NaN when either
// side is constant.
double spearman(std::span<const double> a, std::span<const double> b);

struct ValidationReport {
  std::string check_name;
  std::size_t trials = 0;
  std::size_t agreements = 0;
  std::vector<Json> violations;
  Json statistics = Json::object();
  std::vector<std::string> notes;
  // Hard assertions that failed. `passed` is false iff this is non-zero.
  std::size_t hard_failures = 0;

  bool passed() const noexcept { return hard_failures == 0; }
};

Json to_json(const ValidationReport& report);

// --- max-dcscore subset vs min pairwise-similarity subset -------------------

struct SubsetAgreement {
  std::vector<std::size_t> argmin_similarity;
  std::vector<std::size_t> argmax_dcscore;
  bool agree = false;
  bool degenerate = false;  // every subset ties on both criteria
  std::size_t subsets = 0;
  double rank_correlation = 0.0;  // Spearman(-pairwise sum, dcscore); NaN if undefined
};

inline constexpr std::uint64_t kTheorem3Budget = 100'000;

SubsetAgreement compare_subset_optimizers(const SimilarityMatrix& m, std::size_t size);
// Replays one randomized trial from its recorded seed.
SubsetAgreement theorem3_trial(std::size_t n, std::size_t size, std::uint64_t trial_seed);

// Agreement is reported only. A trial whose rank correlation is defined and
// not positive counts as a hard failure.
ValidationReport check_theorem3(std::size_t n, std::size_t size, std::size_t trials, std::uint64_t seed,
                                unsigned threads = 0);

// --- single-edge monotonicity of the softmax trace ----------------------------

struct EdgeTrial {
  std::uint64_t trial_seed = 0;
  std::size_t n = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  double epsilon = 0.0;
  double before = 0.0;
  double after = 0.0;

  bool decreased() const noexcept { return after < before; }
};

// Raises M(i, j) and M(j, i) by epsilon and returns the raw dcscore before
// and after. Requires i != j and M(i, j) + epsilon <= 1.
EdgeTrial perturb_edge(const SimilarityMatrix& m, std::size_t i, std::size_t j, double epsilon);
EdgeTrial edge_monotonicity_trial(std::uint64_t trial_seed);
ValidationReport check_edge_monotonicity(std::size_t trials, std::uint64_t seed, unsigned threads = 0);

// --- worked example -----------------------------------------------------------

ValidationReport check_example3(double tolerance = 1e-9, std::size_t ghs_seeds = 100);

// --- heuristic vs exact -------------------------------------------------------

struct GapInstance {
  std::uint64_t trial_seed = 0;
  std::size_t n = 0;
  double exact = 0.0;
  double heuristic = 0.0;
  double random_mean = 0.0;
  double worst = 0.0;  // max over all permutations, only filled for n <= 9

  double gap() const noexcept { return heuristic - exact; }
};

inline constexpr std::size_t kGapRandomPermutations = 100;

GapInstance gap_trial(std::size_t n, std::size_t eta, std::uint64_t trial_seed);

// Hard failures: any negative gap beyond 1e-9, or a heuristic above the worst
// permutation where that is enumerated.
ValidationReport gap_study(std::span<const std::size_t> sizes, std::size_t trials, std::size_t eta,
                           std::uint64_t seed, unsigned threads = 0);

}  // namespace hammer
