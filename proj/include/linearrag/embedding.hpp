#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linearrag/trigraph.hpp"

namespace linearrag {

inline constexpr double kNormTolerance = 1e-4;

/// Row-major block of L2-normalized float32 vectors of one dimension.
class VectorMatrix {
 public:
  VectorMatrix() = default;
  explicit VectorMatrix(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
  std::span<const float> row(std::size_t r) const noexcept {
    return {values_.data() + r * dim_, dim_};
  }
  std::span<const float> data() const noexcept { return values_; }

  /// Throws Error(dim_mismatch) or Error(encoding) when the row is not unit length.
  void append(std::span<const float> vector);
  void reserve(std::size_t rows) { values_.reserve(rows * dim_); }

  friend bool operator==(const VectorMatrix&, const VectorMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<float> values_;
};

struct EncoderContract {
  std::string id = "hash";
  std::size_t dim = 256;
  std::uint64_t seed = 7;
  /// For "external": JSONL lookup table of {text, vector}.
  std::filesystem::path vectors_path;

  bool deterministic() const noexcept { return true; }
  EmbedderInfo info() const { return {id, dim, seed}; }

  friend bool operator==(const EncoderContract&, const EncoderContract&) = default;
};

class Encoder {
 public:
  virtual ~Encoder() = default;

  /// Writes one unit-length vector of contract().dim floats.
  virtual void encode_into(std::string_view text, std::span<float> out) const = 0;

  std::vector<float> encode(std::string_view text) const;
  const EncoderContract& contract() const noexcept { return contract_; }

 protected:
  explicit Encoder(EncoderContract contract) : contract_(std::move(contract)) {}

 private:
  EncoderContract contract_;
};

/// "hash" (deterministic bag-of-words test encoder) or "external" (lookup
/// table). Throws Error(config) for unknown ids, Error(encoding) when an
/// external table cannot be loaded.
std::unique_ptr<Encoder> make_encoder(const EncoderContract& contract);

/// FNV-1a-64 over (seed as 8 little-endian bytes || bytes), splitmix64 finalizer.
std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed) noexcept;

/// Tokens split at whitespace and punctuation, NFC + case folded.
std::vector<std::string> hash_tokens(std::string_view text);

/// Signed feature hashing of the token bag, L2-normalized. An all-zero
/// accumulation maps to the basis vector at hash(text) mod dim. dim >= 8.
std::vector<float> hash_encode(std::string_view text, std::size_t dim, std::uint64_t seed);

VectorMatrix encode_batch(std::span<const std::string> texts, const Encoder& encoder);

/// Dot product of unit vectors; throws Error(dim_mismatch).
double cosine(std::span<const float> a, std::span<const float> b);

struct EmbeddingStore {
  std::string encoder_id;
  std::size_t dim = 0;
  VectorMatrix entities;
  VectorMatrix sentences;
  VectorMatrix passages;

  friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;
};

/// Entities are encoded from their canonical key, sentences and passages from their text.
EmbeddingStore build_store(const TriGraph& graph, const Encoder& encoder);

/// Encodes only the rows `graph` has beyond the store's current row counts.
void extend_store(EmbeddingStore& store, const TriGraph& graph, const Encoder& encoder);

/// Throws Error(consistency) when row counts disagree with the graph.
void check_store(const EmbeddingStore& store, const TriGraph& graph);

/// Binary vector file: "LRAGVEC\0", u32 version, u32 dim, u64 rows,
/// u32 id length, id bytes, then rows*dim float32, all little-endian.
void write_vectors(const std::filesystem::path& path, const VectorMatrix& vectors,
                   std::string_view encoder_id);
VectorMatrix read_vectors(const std::filesystem::path& path, std::string* encoder_id = nullptr);

void save_store(const EmbeddingStore& store, const std::filesystem::path& dir);
EmbeddingStore load_store(const std::filesystem::path& dir);

}  // namespace linearrag
