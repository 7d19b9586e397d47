#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hammer/similarity_matrix.hpp"

namespace hammer {

using Json = nlohmann::ordered_json;

struct Sample {
  std::string id;
  std::string text;
  // The source record exactly as read (key order preserved). Empty for
  // samples built in code; saving then emits {"id", <text field>}.
  Json payload;
};

struct Corpus {
  std::vector<Sample> samples;

  std::size_t size() const noexcept { return samples.size(); }
};

// Which JSON fields carry the id and the text. The first text field present
// on a record wins.
struct CorpusFields {
  std::string id_field = "id";
  std::vector<std::string> text_fields = {"problem", "text"};
};

Corpus load_corpus(const std::filesystem::path& path, const CorpusFields& fields = {});
void save_corpus(const Corpus& corpus, const std::filesystem::path& path,
                 const CorpusFields& fields = {});

// n x d row-major float32 embeddings. Every entry is finite and every row has
// Euclidean norm above kMinNorm.
class EmbeddingMatrix {
 public:
  static constexpr double kMinNorm = 1e-12;

  EmbeddingMatrix() = default;
  static EmbeddingMatrix from_values(std::size_t n, std::size_t d, std::vector<float> values);

  std::size_t rows() const noexcept { return n_; }
  std::size_t cols() const noexcept { return d_; }
  std::span<const float> row(std::size_t i) const noexcept { return {values_.data() + i * d_, d_}; }
  std::span<const float> values() const noexcept { return values_; }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  EmbeddingMatrix(std::size_t n, std::size_t d, std::vector<float> values)
      : n_(n), d_(d), values_(std::move(values)) {}

  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<float> values_;
};

// HAMEMB01: "HAMEMB01", u32 n, u32 d, n*d f32, all little-endian, row-major.
std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& e);
EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingMatrix& e, const std::filesystem::path& path);

// HAMSIM01: "HAMSIM01", u32 n, n*n f32. Values are narrowed to float32 on
// write; the diagonal stays exactly 1.
std::vector<std::uint8_t> encode_similarity(const SimilarityMatrix& m);
SimilarityMatrix decode_similarity(std::span<const std::uint8_t> bytes);
SimilarityMatrix read_similarity_cache(const std::filesystem::path& path);
void write_similarity_cache(const SimilarityMatrix& m, const std::filesystem::path& path);

struct OrderFile {
  static constexpr double kWeightTolerance = 1e-9;

  std::vector<std::size_t> indices;
  double weight = 0.0;
  Json metadata = Json::object();

  friend bool operator==(const OrderFile&, const OrderFile&) = default;
};

Json order_to_json(const OrderFile& order);
OrderFile order_from_json(const Json& j);
// Reading checks the permutation invariant; when a matrix is supplied the
// stored weight is also checked against the recomputed path weight.
OrderFile read_order_file(const std::filesystem::path& path,
                          const SimilarityMatrix* similarity = nullptr);
void write_order_file(const OrderFile& order, const std::filesystem::path& path);

// Throws InvalidArgument unless `indices` is a bijection on {0, ..., n-1}.
void require_permutation(std::span<const std::size_t> indices, std::size_t n);
std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> indices);

Corpus apply_order(const Corpus& corpus, std::span<const std::size_t> indices);
inline Corpus apply_order(const Corpus& corpus, const OrderFile& order) {
  return apply_order(corpus, order.indices);
}

// Replaces `path` with `bytes` via a sibling temporary and rename, so a
// failed write never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace hammer
