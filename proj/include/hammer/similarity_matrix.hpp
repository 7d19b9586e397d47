#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hammer {

// Dense symmetric n x n cosine-similarity matrix with a unit diagonal; the
// weighted complete graph that orderings walk over. Immutable once built.
class SimilarityMatrix {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;
  static constexpr double kRangeTolerance = 1e-9;

  SimilarityMatrix() = default;

  // Validates symmetry, diagonal and range; throws InvalidArgument naming the
  // offending entry.
  static SimilarityMatrix from_values(std::size_t n, std::vector<double> values);

  std::size_t size() const noexcept { return n_; }
  bool empty() const noexcept { return n_ == 0; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * n_, n_};
  }
  std::span<const double> values() const noexcept { return values_; }

  // Principal submatrix on `indices`, in the given order.
  SimilarityMatrix submatrix(std::span<const std::size_t> indices) const;

  friend bool operator==(const SimilarityMatrix&, const SimilarityMatrix&) = default;

 private:
  SimilarityMatrix(std::size_t n, std::vector<double> values) : n_(n), values_(std::move(values)) {}

  std::size_t n_ = 0;
  std::vector<double> values_;
};

}  // namespace hammer
