#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "linearrag/corpus.hpp"
#include "linearrag/extraction.hpp"
#include "linearrag/sparse.hpp"

namespace linearrag {

inline constexpr int kIndexFormatVersion = 1;

/// The passage/sentence/entity graph: node registries plus the binary
/// contain (passage x entity) and mention (sentence x entity) matrices.
struct TriGraph {
  Corpus corpus;
  EntityRegistry entities;
  SparseBinaryMatrix contain;
  SparseBinaryMatrix mention;
  /// Mention count per contain entry, parallel to contain.col_indices().
  std::vector<std::uint32_t> occurrence;
  ExtractorContract extractor;

  std::size_t n_passages() const noexcept { return corpus.passages.size(); }
  std::size_t n_sentences() const noexcept { return corpus.sentences.size(); }
  std::size_t n_entities() const noexcept { return entities.size(); }
  const std::string& corpus_digest() const noexcept { return corpus.source_digest; }

  PassageId sentence_owner(SentenceId s) const { return corpus.sentences.at(s).passage_id; }
  /// Number of mentions of `e` in passage `p`; 0 when the passage does not contain it.
  std::uint32_t occurrence_of(PassageId p, EntityId e) const noexcept;

  friend bool operator==(const TriGraph&, const TriGraph&) = default;
};

/// Builds the graph for a corpus whose ids start at 0.
TriGraph build(const Corpus& corpus, const Extractor& extractor);

/// Extends the graph with passages whose ids continue the existing dense
/// range. Only the new slice is segmented, extracted and linked; the result
/// equals build() over the concatenated corpus. Throws Error(consistency) on
/// id or doc_key collisions.
TriGraph add_passages(TriGraph graph, const Corpus& slice, const Extractor& extractor);

/// Verifies the cross-matrix invariants (contain derivable from mention and
/// sentence ownership, occurrence counts). Throws Error(consistency).
void check_invariants(const TriGraph& graph);

struct EmbedderInfo {
  std::string id;
  std::size_t dim = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const EmbedderInfo&, const EmbedderInfo&) = default;
};

struct Manifest {
  int format_version = kIndexFormatVersion;
  std::string corpus_digest;
  std::size_t n_passages = 0;
  std::size_t n_sentences = 0;
  std::size_t n_entities = 0;
  std::size_t contain_nnz = 0;
  std::size_t mention_nnz = 0;
  ExtractorContract extractor;
  std::optional<EmbedderInfo> embedder;
};

/// Writes manifest.json, passages.jsonl, sentences.jsonl, entities.tsv,
/// contain.coo, mention.coo and occurrence.tsv into `dir` (created if needed).
void save(const TriGraph& graph, const std::filesystem::path& dir,
          const std::optional<EmbedderInfo>& embedder = std::nullopt);

/// Throws Error(version_mismatch), Error(digest_mismatch) or
/// Error(consistency) for the corresponding defects; Error(io) if unreadable.
TriGraph load(const std::filesystem::path& dir);

Manifest read_manifest(const std::filesystem::path& dir);

}  // namespace linearrag
