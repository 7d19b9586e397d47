#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hammer/corpus_io.hpp"
#include "hammer/similarity.hpp"
#include "hammer/similarity_matrix.hpp"

namespace hammer {

struct DiversityParams {
  double p = 0.5;     // size-adjustment exponent
  std::size_t m = 2;  // gram length for the n-gram metric
};

enum class Metric { dcscore, ngram };

std::string to_string(Metric metric);
Metric metric_from_string(const std::string& name);

struct DiversityReport {
  Metric metric = Metric::dcscore;
  double raw = 0.0;
  double adjusted = 0.0;  // n^p * raw
  std::size_t n = 0;
  DiversityParams params;
};

Json to_json(const DiversityReport& report);

// Row-wise softmax of `m`, each row shifted by its maximum before
// exponentiation. Row-major n x n.
std::vector<double> row_softmax(const SimilarityMatrix& m);

// Trace of the row-wise softmax of the similarity matrix. Large when every
// sample's self-similarity dominates its row.
DiversityReport dcscore(const SimilarityMatrix& m, double p = 0.5);

// Distinct grams over total grams across all samples; n is the sample count.
DiversityReport ngram_diversity(const GramBag& bag, double p = 0.5);

struct PrefixPoint {
  double ratio = 0.0;
  DiversityReport report;
};

// Size of the prefix taken for `ratio` of n items: ceil(ratio * n), at least 1.
std::size_t prefix_size(double ratio, std::size_t n);

// dcscore of the first prefix_size(r, n) nodes of `path`, one point per ratio.
std::vector<PrefixPoint> prefix_curve(std::span<const std::size_t> path, const SimilarityMatrix& m, double p,
                                      std::span<const double> ratios);

// VC-style uniform deviation bound rho = C sqrt((d ln(n/d) + ln(1/delta)) / n).
struct BoundParams {
  double d = 1.0;
  double n = 1.0;
  double delta = 0.05;
  double C = 1.0;
};

double generalization_bound(const BoundParams& b);
// Tolerance under which a subset's near-optimal policies keep the optimum.
inline double induced_tolerance(const BoundParams& b) { return 2.0 * generalization_bound(b); }
// Excess-risk bound for any policy inside that tolerance.
inline double excess_risk_bound(const BoundParams& b) { return 3.0 * generalization_bound(b); }

}  // namespace hammer
