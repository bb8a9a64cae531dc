#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace linearrag {

using PassageId = std::uint32_t;
using SentenceId = std::uint32_t;
using EntityId = std::uint32_t;

/// Half-open byte range [begin, end).
struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const ByteSpan&, const ByteSpan&) = default;
};

/// Sentences longer than this are hard-split at the last whitespace before the limit.
inline constexpr std::size_t kMaxSentenceBytes = 8192;

struct Passage {
  PassageId id = 0;
  std::string doc_key;
  std::optional<std::string> title;
  /// Indexed text. When a title is present it is prefixed as "title: body".
  std::string text;
  SentenceId first_sentence = 0;
  std::uint32_t sentence_count = 0;

  friend bool operator==(const Passage&, const Passage&) = default;
};

struct Sentence {
  SentenceId id = 0;
  PassageId passage_id = 0;
  ByteSpan span;  // into the owning passage's text
  std::string text;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

/// A raw input record before segmentation.
struct PassageRecord {
  std::optional<std::string> doc_key;
  std::optional<std::string> title;
  std::string text;
};

struct Corpus {
  std::vector<Passage> passages;
  std::vector<Sentence> sentences;
  /// Chained SHA-256 over the passage records, hex encoded. Empty for an empty corpus.
  std::string source_digest;

  bool empty() const noexcept { return passages.empty(); }
  PassageId first_passage_id() const noexcept { return passages.empty() ? 0 : passages.front().id; }
  SentenceId first_sentence_id() const noexcept {
    return sentences.empty() ? 0 : sentences.front().id;
  }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

enum class InputFormat { jsonl };

struct IngestOptions {
  /// Ids continue a dense range when ingesting a delta for an existing index.
  PassageId first_passage_id = 0;
  SentenceId first_sentence_id = 0;
  /// Digest of the corpus this slice extends (empty for a fresh corpus).
  std::string previous_digest;
  /// A delta slice may legitimately be empty.
  bool allow_empty = false;
};

struct IngestResult {
  Corpus corpus;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

/// Reads line-delimited records {doc_key?, title?, text}. Malformed lines are
/// skipped with a warning; an unreadable file or zero valid passages throws.
IngestResult ingest(const std::filesystem::path& path, InputFormat format = InputFormat::jsonl,
                    const IngestOptions& options = {});
IngestResult ingest(std::istream& in, const IngestOptions& options = {});

/// Builds a corpus from already-parsed records. Records with empty text throw.
Corpus make_corpus(const std::vector<PassageRecord>& records, const IngestOptions& options = {});

/// Splits at '.', '!' or '?' followed by whitespace or end of text. Spans are
/// trimmed of whitespace, empty spans dropped, overlong spans hard-split.
std::vector<ByteSpan> segment_sentences(std::string_view passage_text);

/// Next link of the digest chain for one passage record.
std::string chain_digest(std::string_view previous, const Passage& passage);

/// Serializes the raw records back to the corpus input format.
void write_corpus_jsonl(std::ostream& out, const std::vector<PassageRecord>& records);

}  // namespace linearrag
