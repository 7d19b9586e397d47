#include "hammer/corpus_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>

#include "hammer/error.hpp"
#include "hammer/ordering.hpp"

namespace hammer {
namespace {

constexpr char kEmbeddingMagic[8] = {'H', 'A', 'M', 'E', 'M', 'B', '0', '1'};
constexpr char kSimilarityMagic[8] = {'H', 'A', 'M', 'S', 'I', 'M', '0', '1'};

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[offset + b]) << (8 * b);
  return v;
}

void put_f32(std::vector<std::uint8_t>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

float get_f32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return std::bit_cast<float>(get_u32(bytes, offset));
}

bool has_magic(std::span<const std::uint8_t> bytes, const char (&magic)[8]) {
  return bytes.size() >= 8 && std::memcmp(bytes.data(), magic, 8) == 0;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFu) throw InvalidArgument(std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

// ---------------------------------------------------------------------------
// Files

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("short write: " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot replace " + path.string());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------------------
// Corpus

Corpus load_corpus(const std::filesystem::path& path, const CorpusFields& fields) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus " + path.string());

  Corpus corpus;
  std::unordered_map<std::string, std::size_t> seen;  // id -> line
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw FormatError("corpus line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
    }
    if (!record.is_object())
      throw FormatError("corpus line " + std::to_string(line_no) + ": expected a JSON object");

    const std::string* text = nullptr;
    for (const auto& field : fields.text_fields) {
      auto it = record.find(field);
      if (it != record.end() && it->is_string()) {
        text = it->get_ptr<const std::string*>();
        break;
      }
    }
    if (text == nullptr)
      throw FormatError("corpus line " + std::to_string(line_no) + ": no text field");
    if (is_blank(*text))
      throw FormatError("corpus line " + std::to_string(line_no) + ": empty text");

    std::string id;
    if (auto it = record.find(fields.id_field); it != record.end()) {
      if (it->is_string())
        id = it->get<std::string>();
      else if (it->is_number_integer())
        id = std::to_string(it->get<long long>());
      else
        throw FormatError("corpus line " + std::to_string(line_no) + ": id must be a string or integer");
    } else {
      id = "row-" + std::to_string(corpus.samples.size());
    }
    if (auto [it, inserted] = seen.emplace(id, line_no); !inserted)
      throw FormatError("duplicate id \"" + id + "\" on line " + std::to_string(line_no) +
                        " (first seen on line " + std::to_string(it->second) + ")");

    corpus.samples.push_back(Sample{std::move(id), *text, std::move(record)});
  }
  if (in.bad()) throw IoError("read failed: " + path.string());
  if (corpus.samples.empty()) throw FormatError("corpus " + path.string() + " is empty");
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path, const CorpusFields& fields) {
  std::string out;
  const std::string& text_field = fields.text_fields.empty() ? std::string("text") : fields.text_fields.front();
  for (const auto& s : corpus.samples) {
    if (s.payload.is_object() && !s.payload.empty()) {
      out += s.payload.dump();
    } else {
      Json record = Json::object();
      record[fields.id_field] = s.id;
      record[text_field] = s.text;
      out += record.dump();
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Embeddings

EmbeddingMatrix EmbeddingMatrix::from_values(std::size_t n, std::size_t d, std::vector<float> values) {
  if (n == 0 || d == 0) throw InvalidArgument("embedding matrix must have n >= 1 and d >= 1");
  if (values.size() != n * d)
    throw InvalidArgument("embedding matrix expects " + std::to_string(n * d) + " values, got " +
                          std::to_string(values.size()));
  for (std::size_t i = 0; i < n; ++i) {
    double norm2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const float v = values[i * d + j];
      if (!std::isfinite(v))
        throw InvalidArgument("non-finite embedding value at row " + std::to_string(i) + ", column " +
                              std::to_string(j));
      norm2 += static_cast<double>(v) * v;
    }
    if (std::sqrt(norm2) <= kMinNorm) throw InvalidArgument("zero-norm embedding at row " + std::to_string(i));
  }
  return EmbeddingMatrix(n, d, std::move(values));
}

std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& e) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + 4 * e.values().size());
  for (char c : kEmbeddingMagic) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, checked_u32(e.rows(), "n"));
  put_u32(out, checked_u32(e.cols(), "d"));
  for (float v : e.values()) put_f32(out, v);
  return out;
}

EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes) {
  if (!has_magic(bytes, kEmbeddingMagic)) throw FormatError("unrecognized format");
  if (bytes.size() < 16) throw FormatError("truncated file");
  const std::size_t n = get_u32(bytes, 8);
  const std::size_t d = get_u32(bytes, 12);
  if (bytes.size() != 16 + 4 * n * d) throw FormatError("truncated file");
  std::vector<float> values(n * d);
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = get_f32(bytes, 16 + 4 * k);
  try {
    return EmbeddingMatrix::from_values(n, d, std::move(values));
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(read_file_bytes(path));
}

void write_embeddings(const EmbeddingMatrix& e, const std::filesystem::path& path) {
  write_file_atomic(path, encode_embeddings(e));
}

// ---------------------------------------------------------------------------
// Similarity cache

std::vector<std::uint8_t> encode_similarity(const SimilarityMatrix& m) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + 4 * m.values().size());
  for (char c : kSimilarityMagic) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, checked_u32(m.size(), "n"));
  for (double v : m.values()) put_f32(out, static_cast<float>(v));
  return out;
}

SimilarityMatrix decode_similarity(std::span<const std::uint8_t> bytes) {
  if (!has_magic(bytes, kSimilarityMagic)) throw FormatError("unrecognized format");
  if (bytes.size() < 12) throw FormatError("truncated file");
  const std::size_t n = get_u32(bytes, 8);
  if (bytes.size() != 12 + 4 * n * n) throw FormatError("truncated file");
  std::vector<double> values(n * n);
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = get_f32(bytes, 12 + 4 * k);
  try {
    return SimilarityMatrix::from_values(n, std::move(values));
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
}

SimilarityMatrix read_similarity_cache(const std::filesystem::path& path) {
  return decode_similarity(read_file_bytes(path));
}

void write_similarity_cache(const SimilarityMatrix& m, const std::filesystem::path& path) {
  write_file_atomic(path, encode_similarity(m));
}

// ---------------------------------------------------------------------------
// Orders

void require_permutation(std::span<const std::size_t> indices, std::size_t n) {
  if (indices.size() != n)
    throw InvalidArgument("order has " + std::to_string(indices.size()) + " indices, expected " +
                          std::to_string(n));
  std::vector<bool> hit(n, false);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t v = indices[k];
    if (v >= n) throw InvalidArgument("order index " + std::to_string(v) + " out of range at position " + std::to_string(k));
    if (hit[v]) throw InvalidArgument("order is not a permutation: index " + std::to_string(v) + " repeats at position " + std::to_string(k));
    hit[v] = true;
  }
}

std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> indices) {
  require_permutation(indices, indices.size());
  std::vector<std::size_t> inv(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) inv[indices[k]] = k;
  return inv;
}

Json order_to_json(const OrderFile& order) {
  Json j = Json::object();
  j["indices"] = order.indices;
  j["weight"] = order.weight;
  j["metadata"] = order.metadata.is_null() ? Json::object() : order.metadata;
  return j;
}

OrderFile order_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("order file must be a JSON object");
  OrderFile order;
  try {
    order.indices = j.at("indices").get<std::vector<std::size_t>>();
    const auto& w = j.at("weight");
    if (!w.is_number()) throw FormatError("order weight must be a number");
    order.weight = w.get<double>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("order file: ") + e.what());
  }
  if (auto it = j.find("metadata"); it != j.end()) order.metadata = *it;
  try {
    require_permutation(order.indices, order.indices.size());
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return order;
}

OrderFile read_order_file(const std::filesystem::path& path, const SimilarityMatrix* similarity) {
  const auto bytes = read_file_bytes(path);
  Json j;
  try {
    j = Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    throw FormatError("order file " + path.string() + ": " + e.what());
  }
  OrderFile order = order_from_json(j);
  if (similarity != nullptr) {
    if (similarity->size() != order.indices.size())
      throw InvalidArgument("order length " + std::to_string(order.indices.size()) +
                            " does not match similarity size " + std::to_string(similarity->size()));
    const bool closed = order.metadata.is_object() && order.metadata.value("cycle", false);
    const double recomputed = path_weight(order.indices, *similarity, closed);
    if (std::abs(recomputed - order.weight) > OrderFile::kWeightTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "order weight " << order.weight << " disagrees with recomputed " << recomputed;
      throw FormatError(msg.str());
    }
  }
  return order;
}

void write_order_file(const OrderFile& order, const std::filesystem::path& path) {
  require_permutation(order.indices, order.indices.size());
  write_file_atomic(path, order_to_json(order).dump(2) + "\n");
}

Corpus apply_order(const Corpus& corpus, std::span<const std::size_t> indices) {
  require_permutation(indices, corpus.size());
  Corpus out;
  out.samples.reserve(indices.size());
  for (std::size_t k : indices) out.samples.push_back(corpus.samples[k]);
  return out;
}

}  // namespace hammer
