#include "linearrag/index.hpp"

#include <system_error>

#include "linearrag/error.hpp"

namespace linearrag {

namespace fs = std::filesystem;

Index build_index(const Corpus& corpus, const Extractor& extractor, const Encoder& encoder) {
  Index index;
  index.graph = build(corpus, extractor);
  index.store = build_store(index.graph, encoder);
  index.embedder = encoder.contract().info();
  return index;
}

void add_to_index(Index& index, const Corpus& slice, const Extractor& extractor,
                  const Encoder& encoder) {
  require_encoder(index, encoder);
  const auto& have = index.graph.extractor;
  if (extractor.contract().id != have.id || extractor.contract().stopwords != have.stopwords)
    throw Error(ErrorCode::config, "extractor contract differs from the one the index was built with");
  index.graph = add_passages(std::move(index.graph), slice, extractor);
  extend_store(index.store, index.graph, encoder);
}

void save_index(const Index& index, const fs::path& dir) {
  check_store(index.store, index.graph);
  save(index.graph, dir, index.embedder);
  save_store(index.store, dir);
}

Index load_index(const fs::path& dir) {
  const Manifest manifest = read_manifest(dir);
  if (!manifest.embedder)
    throw Error(ErrorCode::consistency, "manifest records no embedder; vectors cannot be trusted");
  Index index;
  index.graph = load(dir);
  index.store = load_store(dir);
  index.embedder = *manifest.embedder;
  if (index.store.encoder_id != index.embedder.id || index.store.dim != index.embedder.dim)
    throw Error(ErrorCode::consistency, "vector files disagree with the manifest embedder");
  check_store(index.store, index.graph);
  return index;
}

void require_encoder(const Index& index, const Encoder& encoder) {
  const EmbedderInfo info = encoder.contract().info();
  if (info != index.embedder)
    throw Error(ErrorCode::config, "encoder " + info.id + "/" + std::to_string(info.dim) + "/" +
                                       std::to_string(info.seed) + " does not match index encoder " +
                                       index.embedder.id + "/" + std::to_string(index.embedder.dim) +
                                       "/" + std::to_string(index.embedder.seed));
}

std::uintmax_t index_bytes(const fs::path& dir) {
  std::error_code ec;
  std::uintmax_t total = 0;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file(ec)) total += entry.file_size(ec);
  }
  if (ec) throw Error(ErrorCode::io, "cannot scan " + dir.string());
  return total;
}

}  // namespace linearrag
