#pragma once

#include <cstdint>
#include <filesystem>

#include "linearrag/embedding.hpp"
#include "linearrag/trigraph.hpp"

namespace linearrag {

/// A built graph together with the vectors of all its nodes.
struct Index {
  TriGraph graph;
  EmbeddingStore store;
  EmbedderInfo embedder;

  friend bool operator==(const Index&, const Index&) = default;
};

Index build_index(const Corpus& corpus, const Extractor& extractor, const Encoder& encoder);

/// Incremental update: links and encodes only the new slice.
void add_to_index(Index& index, const Corpus& slice, const Extractor& extractor,
                  const Encoder& encoder);

void save_index(const Index& index, const std::filesystem::path& dir);

/// Loads and cross-checks graph, manifest and vector files.
Index load_index(const std::filesystem::path& dir);

/// Throws Error(config) when `encoder` is not the one the index was built with.
void require_encoder(const Index& index, const Encoder& encoder);

/// Total size of the regular files in an index directory.
std::uintmax_t index_bytes(const std::filesystem::path& dir);

}  // namespace linearrag
