#include "hammer/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "hammer/error.hpp"
#include "hammer/parallel.hpp"

namespace hammer {

// ---------------------------------------------------------------------------
// SimilarityMatrix

SimilarityMatrix SimilarityMatrix::from_values(std::size_t n, std::vector<double> values) {
  if (n == 0) throw InvalidArgument("similarity matrix must be non-empty");
  if (values.size() != n * n)
    throw InvalidArgument("similarity matrix expects " + std::to_string(n * n) + " values, got " +
                          std::to_string(values.size()));
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i * n + i] != 1.0)
      throw InvalidArgument("similarity diagonal at " + std::to_string(i) + " is not 1");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = values[i * n + j];
      const auto where = "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
      if (!std::isfinite(v) || v < -1.0 - kRangeTolerance || v > 1.0 + kRangeTolerance)
        throw InvalidArgument("similarity entry " + where + " outside [-1, 1]");
      if (j > i && std::abs(v - values[j * n + i]) > kSymmetryTolerance)
        throw InvalidArgument("similarity matrix is not symmetric at " + where);
    }
  }
  return SimilarityMatrix(n, std::move(values));
}

SimilarityMatrix SimilarityMatrix::submatrix(std::span<const std::size_t> indices) const {
  const std::size_t k = indices.size();
  std::vector<double> out(k * k);
  for (std::size_t a = 0; a < k; ++a) {
    if (indices[a] >= n_) throw InvalidArgument("submatrix index " + std::to_string(indices[a]) + " out of range");
    for (std::size_t b = 0; b < k; ++b) out[a * k + b] = (*this)(indices[a], indices[b]);
  }
  return SimilarityMatrix(k, std::move(out));
}

// ---------------------------------------------------------------------------
// Cosine

namespace {

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size())
    throw InvalidArgument("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()) + ")");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double a = u[k], b = v[k];
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  const double nu = std::sqrt(uu), nv = std::sqrt(vv);
  if (nu <= 1e-12 || nv <= 1e-12) throw InvalidArgument("cosine: zero-norm vector");
  return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }
double cosine(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }

SimilarityMatrix build_similarity_matrix(const EmbeddingMatrix& e, unsigned threads) {
  const std::size_t n = e.rows();
  if (n == 0) throw InvalidArgument("build_similarity_matrix: empty embedding matrix");
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (float x : e.row(i)) s += static_cast<double>(x) * x;
    norms[i] = std::sqrt(s);
  }
  std::vector<double> values(n * n, 0.0);
  // Row i fills the upper triangle (i, j > i); the mirror is copied afterwards
  // so both halves hold the identical double.
  parallel_for(n, threads, [&](std::size_t i) {
    const auto ri = e.row(i);
    values[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto rj = e.row(j);
      double dot = 0.0;
      for (std::size_t k = 0; k < ri.size(); ++k) dot += static_cast<double>(ri[k]) * rj[k];
      values[i * n + j] = std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) values[i * n + j] = values[j * n + i];
  return SimilarityMatrix::from_values(n, std::move(values));
}

// ---------------------------------------------------------------------------
// Tokens and grams

namespace {

// Length of the whitespace code point starting at s[i], or 0.
std::size_t whitespace_at(std::string_view s, std::size_t i) {
  const auto byte = [&](std::size_t k) { return i + k < s.size() ? static_cast<unsigned char>(s[i + k]) : 0u; };
  const unsigned c0 = byte(0);
  if (c0 == ' ' || (c0 >= 0x09 && c0 <= 0x0D)) return 1;
  if (c0 == 0xC2 && (byte(1) == 0x85 || byte(1) == 0xA0)) return 2;  // NEL, NBSP
  if (c0 == 0xE1 && byte(1) == 0x9A && byte(2) == 0x80) return 3;    // U+1680
  if (c0 == 0xE2 && byte(1) == 0x80) {
    const unsigned c2 = byte(2);
    if ((c2 >= 0x80 && c2 <= 0x8A) || c2 == 0xA8 || c2 == 0xA9 || c2 == 0xAF) return 3;
  }
  if (c0 == 0xE2 && byte(1) == 0x81 && byte(2) == 0x9F) return 3;  // U+205F
  if (c0 == 0xE3 && byte(1) == 0x80 && byte(2) == 0x80) return 3;  // U+3000
  return 0;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenizeOptions& options) {
  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t i = 0; i < text.size();) {
    if (const std::size_t w = whitespace_at(text, i); w > 0) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
      i += w;
      continue;
    }
    char c = text[i++];
    if (options.lowercase && c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    current.push_back(c);
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t GramBag::total() const noexcept {
  std::size_t t = 0;
  for (const auto& g : grams) t += g.size();
  return t;
}

std::size_t GramBag::distinct() const {
  std::unordered_set<std::string_view> seen;
  for (const auto& g : grams)
    for (const auto& gram : g) seen.insert(gram);
  return seen.size();
}

GramBag extract_grams(std::span<const std::string> texts, std::size_t m, const TokenizeOptions& options) {
  if (m < 1) throw InvalidArgument("gram length m must be >= 1");
  GramBag bag;
  bag.m = m;
  bag.grams.reserve(texts.size());
  for (const auto& text : texts) {
    const auto tokens = tokenize(text, options);
    std::vector<std::string> grams;
    if (tokens.size() >= m) {
      grams.reserve(tokens.size() - m + 1);
      for (std::size_t s = 0; s + m <= tokens.size(); ++s) {
        std::string gram = tokens[s];
        for (std::size_t k = 1; k < m; ++k) {
          gram += ' ';
          gram += tokens[s + k];
        }
        grams.push_back(std::move(gram));
      }
    }
    bag.grams.push_back(std::move(grams));
  }
  return bag;
}

GramBag extract_grams(const Corpus& corpus, std::size_t m, const TokenizeOptions& options) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& s : corpus.samples) texts.push_back(s.text);
  return extract_grams(texts, m, options);
}

}  // namespace hammer
