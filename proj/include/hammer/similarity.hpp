#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hammer/corpus_io.hpp"
#include "hammer/similarity_matrix.hpp"

namespace hammer {

// <u, v> / (|u| |v|), accumulated in double and clamped to [-1, 1].
// Throws InvalidArgument on dimension mismatch or a norm <= 1e-12.
double cosine(std::span<const double> u, std::span<const double> v);
double cosine(std::span<const float> u, std::span<const float> v);

// Pairwise cosine over the rows of `e`, diagonal pinned to 1. Rows are
// computed in parallel; each entry is a pure function of its two rows, so the
// result is bit-identical for every thread count.
SimilarityMatrix build_similarity_matrix(const EmbeddingMatrix& e, unsigned threads = 0);

// Dense matrices above this many rows take more than ~3 GB at 64-bit.
inline constexpr std::size_t kLargeSimilarityRows = 20000;

struct TokenizeOptions {
  bool lowercase = true;
};

// Splits on Unicode whitespace. Lowercasing covers ASCII only; other code
// points pass through byte-for-byte.
std::vector<std::string> tokenize(std::string_view text, const TokenizeOptions& options = {});

// Per-sample multisets of m-token windows. Grams are stored as their tokens
// joined by a single space.
struct GramBag {
  std::size_t m = 0;
  std::vector<std::vector<std::string>> grams;

  std::size_t samples() const noexcept { return grams.size(); }
  std::size_t total(std::size_t sample) const noexcept { return grams[sample].size(); }
  std::size_t total() const noexcept;
  std::size_t distinct() const;
};

GramBag extract_grams(std::span<const std::string> texts, std::size_t m, const TokenizeOptions& options = {});
GramBag extract_grams(const Corpus& corpus, std::size_t m, const TokenizeOptions& options = {});

}  // namespace hammer
