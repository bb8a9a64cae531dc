#include "linearrag/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <unordered_map>

#include "linearrag/error.hpp"
#include "linearrag/kernels.hpp"
#include "unicode_text.hpp"

namespace linearrag {
namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'L', 'R', 'A', 'G', 'V', 'E', 'C', '\0'};
constexpr std::uint32_t kVectorFileVersion = 1;

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

template <typename T>
T to_little(T value) noexcept {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
  }
  return value;
}

template <typename T>
void put(std::ostream& out, T value) {
  value = to_little(value);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const fs::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw Error(ErrorCode::consistency, "truncated vector file " + path.string());
  return to_little(value);
}

class HashEncoder final : public Encoder {
 public:
  explicit HashEncoder(EncoderContract contract) : Encoder(std::move(contract)) {
    if (this->contract().dim < 8) throw Error(ErrorCode::config, "hash encoder needs dim >= 8");
  }

  void encode_into(std::string_view text, std::span<float> out) const override {
    const auto v = hash_encode(text, contract().dim, contract().seed);
    std::copy(v.begin(), v.end(), out.begin());
  }
};

class LookupEncoder final : public Encoder {
 public:
  explicit LookupEncoder(EncoderContract contract) : Encoder(std::move(contract)) {
    const auto& path = this->contract().vectors_path;
    std::ifstream in(path);
    if (path.empty() || !in)
      throw Error(ErrorCode::encoding,
                  "encoder '" + this->contract().id + "' unavailable: cannot read '" + path.string() + "'");
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        auto values = j.at("vector").get<std::vector<float>>();
        if (values.size() != this->contract().dim)
          throw Error(ErrorCode::dim_mismatch, "external vector has dim " + std::to_string(values.size()));
        double norm = 0.0;
        for (float x : values) norm += static_cast<double>(x) * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) throw Error(ErrorCode::encoding, "external vector is all zero");
        for (float& x : values) x = static_cast<float>(x / norm);
        table_.insert_or_assign(j.at("text").get<std::string>(), std::move(values));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::encoding, "encoder '" + this->contract().id + "': " + e.what());
      }
    }
  }

  void encode_into(std::string_view text, std::span<float> out) const override {
    auto it = table_.find(std::string(text));
    if (it == table_.end())
      throw Error(ErrorCode::encoding,
                  "encoder '" + contract().id + "' has no vector for \"" + std::string(text) + "\"");
    std::copy(it->second.begin(), it->second.end(), out.begin());
  }

 private:
  std::unordered_map<std::string, std::vector<float>> table_;
};

void append_encoded(VectorMatrix& into, std::string_view text, const Encoder& encoder,
                    std::vector<float>& scratch) {
  encoder.encode_into(text, scratch);
  into.append(scratch);
}

}  // namespace

void VectorMatrix::append(std::span<const float> vector) {
  if (vector.size() != dim_)
    throw Error(ErrorCode::dim_mismatch,
                "vector of dim " + std::to_string(vector.size()) + " into store of dim " + std::to_string(dim_));
  double norm = 0.0;
  for (float x : vector) norm += static_cast<double>(x) * x;
  if (std::fabs(std::sqrt(norm) - 1.0) > kNormTolerance)
    throw Error(ErrorCode::encoding, "vector is not unit length (norm " + std::to_string(std::sqrt(norm)) + ")");
  values_.insert(values_.end(), vector.begin(), vector.end());
}

std::vector<float> Encoder::encode(std::string_view text) const {
  std::vector<float> out(contract_.dim);
  encode_into(text, out);
  return out;
}

std::unique_ptr<Encoder> make_encoder(const EncoderContract& contract) {
  if (contract.id == "hash") return std::make_unique<HashEncoder>(contract);
  if (contract.id == "external") return std::make_unique<LookupEncoder>(contract);
  throw Error(ErrorCode::config, "unknown encoder '" + contract.id + "'");
}

std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001B3ull;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>((seed >> (8 * i)) & 0xFF));
  for (char c : bytes) mix(static_cast<unsigned char>(c));
  return splitmix_finalize(h);
}

std::vector<std::string> hash_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t start = std::string_view::npos;
  for (const auto& cp : text::decode(text)) {
    const bool separator = text::is_space(cp.value) || text::is_punct(cp.value);
    if (separator) {
      if (start != std::string_view::npos) tokens.push_back(text::fold_case(text.substr(start, cp.begin - start)));
      start = std::string_view::npos;
    } else if (start == std::string_view::npos) {
      start = cp.begin;
    }
  }
  if (start != std::string_view::npos) tokens.push_back(text::fold_case(text.substr(start)));
  return tokens;
}

std::vector<float> hash_encode(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim < 8) throw Error(ErrorCode::config, "hash encoder needs dim >= 8");
  std::vector<double> acc(dim, 0.0);
  for (const auto& token : hash_tokens(text)) {
    const std::uint64_t z = hash_bytes(token, seed);
    acc[z % dim] += (z >> 63) ? -1.0 : 1.0;
  }
  double norm = 0.0;
  for (double x : acc) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    acc.assign(dim, 0.0);
    acc[hash_bytes(text, seed) % dim] = 1.0;
    norm = 1.0;
  }
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / norm);
  return out;
}

VectorMatrix encode_batch(std::span<const std::string> texts, const Encoder& encoder) {
  VectorMatrix out(encoder.contract().dim);
  out.reserve(texts.size());
  std::vector<float> scratch(encoder.contract().dim);
  for (const auto& text : texts) append_encoded(out, text, encoder, scratch);
  return out;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::dim_mismatch,
                "cosine of dim " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  return kernels::dot(a, b);
}

EmbeddingStore build_store(const TriGraph& graph, const Encoder& encoder) {
  EmbeddingStore store;
  store.encoder_id = encoder.contract().id;
  store.dim = encoder.contract().dim;
  store.entities = VectorMatrix(store.dim);
  store.sentences = VectorMatrix(store.dim);
  store.passages = VectorMatrix(store.dim);
  extend_store(store, graph, encoder);
  return store;
}

void extend_store(EmbeddingStore& store, const TriGraph& graph, const Encoder& encoder) {
  if (encoder.contract().dim != store.dim || encoder.contract().id != store.encoder_id)
    throw Error(ErrorCode::consistency, "encoder does not match the existing store");
  if (store.entities.rows() > graph.n_entities() || store.sentences.rows() > graph.n_sentences() ||
      store.passages.rows() > graph.n_passages())
    throw Error(ErrorCode::consistency, "store has more rows than the graph");
  std::vector<float> scratch(store.dim);
  store.entities.reserve(graph.n_entities());
  for (std::size_t e = store.entities.rows(); e < graph.n_entities(); ++e)
    append_encoded(store.entities, graph.entities[static_cast<EntityId>(e)].canonical, encoder, scratch);
  store.sentences.reserve(graph.n_sentences());
  for (std::size_t s = store.sentences.rows(); s < graph.n_sentences(); ++s)
    append_encoded(store.sentences, graph.corpus.sentences[s].text, encoder, scratch);
  store.passages.reserve(graph.n_passages());
  for (std::size_t p = store.passages.rows(); p < graph.n_passages(); ++p)
    append_encoded(store.passages, graph.corpus.passages[p].text, encoder, scratch);
}

void check_store(const EmbeddingStore& store, const TriGraph& graph) {
  if (store.entities.rows() != graph.n_entities() || store.sentences.rows() != graph.n_sentences() ||
      store.passages.rows() != graph.n_passages())
    throw Error(ErrorCode::consistency,
                "embedding store rows (" + std::to_string(store.entities.rows()) + ", " +
                    std::to_string(store.sentences.rows()) + ", " + std::to_string(store.passages.rows()) +
                    ") do not match graph nodes (" + std::to_string(graph.n_entities()) + ", " +
                    std::to_string(graph.n_sentences()) + ", " + std::to_string(graph.n_passages()) + ")");
  if (store.entities.dim() != store.dim || store.sentences.dim() != store.dim || store.passages.dim() != store.dim)
    throw Error(ErrorCode::consistency, "embedding store blocks disagree on dim");
}

void write_vectors(const fs::path& path, const VectorMatrix& vectors, std::string_view encoder_id) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVectorFileVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(vectors.dim()));
  put<std::uint64_t>(out, vectors.rows());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(encoder_id.size()));
  out.write(encoder_id.data(), static_cast<std::streamsize>(encoder_id.size()));
  if constexpr (std::endian::native == std::endian::little) {
    const auto data = vectors.data();
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(float)));
  } else {
    for (float x : vectors.data()) put<float>(out, x);
  }
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

VectorMatrix read_vectors(const fs::path& path, std::string* encoder_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error(ErrorCode::consistency, path.string() + " is not a vector file");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVectorFileVersion)
    throw Error(ErrorCode::version_mismatch, "vector file version " + std::to_string(version));
  const auto dim = get<std::uint32_t>(in, path);
  const auto rows = get<std::uint64_t>(in, path);
  const auto id_length = get<std::uint32_t>(in, path);
  std::string id(id_length, '\0');
  if (!in.read(id.data(), id_length)) throw Error(ErrorCode::consistency, "truncated vector file " + path.string());
  if (encoder_id) *encoder_id = id;
  VectorMatrix out(dim);
  out.reserve(rows);
  std::vector<float> row(dim);
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (auto& x : row) x = get<float>(in, path);
    out.append(row);
  }
  if (in.peek() != std::ifstream::traits_type::eof())
    throw Error(ErrorCode::consistency, "trailing bytes in " + path.string());
  return out;
}

void save_store(const EmbeddingStore& store, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string());
  write_vectors(dir / "entities.vec", store.entities, store.encoder_id);
  write_vectors(dir / "sentences.vec", store.sentences, store.encoder_id);
  write_vectors(dir / "passages.vec", store.passages, store.encoder_id);
}

EmbeddingStore load_store(const fs::path& dir) {
  EmbeddingStore store;
  std::string ids[3];
  store.entities = read_vectors(dir / "entities.vec", &ids[0]);
  store.sentences = read_vectors(dir / "sentences.vec", &ids[1]);
  store.passages = read_vectors(dir / "passages.vec", &ids[2]);
  if (ids[0] != ids[1] || ids[1] != ids[2])
    throw Error(ErrorCode::consistency, "vector files were produced by different encoders");
  store.encoder_id = ids[0];
  store.dim = store.entities.dim();
  if (store.sentences.dim() != store.dim || store.passages.dim() != store.dim)
    throw Error(ErrorCode::consistency, "vector files disagree on dim");
  return store;
}

}  // namespace linearrag
