#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "linearrag/corpus.hpp"

namespace linearrag {

struct EntityMention {
  SentenceId sentence_id = 0;
  std::string surface;
  ByteSpan span;  // into the sentence text

  friend bool operator==(const EntityMention&, const EntityMention&) = default;
};

const std::vector<std::string>& default_stopwords();

/// Strategy id plus parameters. "caps-run" is the built-in heuristic;
/// "external" reads a precomputed mention file.
struct ExtractorContract {
  std::string id = "caps-run";
  std::vector<std::string> stopwords = default_stopwords();
  std::filesystem::path mentions_path;

  friend bool operator==(const ExtractorContract&, const ExtractorContract&) = default;
};

class Extractor {
 public:
  virtual ~Extractor() = default;

  /// Non-overlapping mentions in left-to-right order. Deterministic.
  virtual std::vector<EntityMention> extract(const Sentence& sentence) const = 0;

  const ExtractorContract& contract() const noexcept { return contract_; }

 protected:
  explicit Extractor(ExtractorContract contract) : contract_(std::move(contract)) {}

 private:
  ExtractorContract contract_;
};

/// Throws Error(config) for an unknown strategy id.
std::unique_ptr<Extractor> make_extractor(const ExtractorContract& contract);

/// The caps-run rule applied to raw sentence text (sentence_id is left 0).
std::vector<EntityMention> caps_run_mentions(std::string_view sentence_text,
                                             const std::vector<std::string>& stopwords);

/// extract_mentions for a bare sentence string. Throws Error(config) for unknown
/// ids and for "external", which needs sentence ids.
std::vector<EntityMention> extract_mentions(std::string_view sentence_text,
                                            const ExtractorContract& contract);

/// Case-folded, NFC, whitespace collapsed, surrounding punctuation stripped.
/// An empty result means the mention is dropped.
std::string canonicalize(std::string_view surface);

struct EntityRecord {
  EntityId id = 0;
  std::string canonical;
  std::set<std::string> surfaces;
  PassageId first_seen_passage = 0;

  friend bool operator==(const EntityRecord&, const EntityRecord&) = default;
};

/// Append-only registry; ids follow first occurrence of the canonical key.
class EntityRegistry {
 public:
  std::optional<EntityId> find(std::string_view canonical) const;
  EntityId intern(const std::string& canonical, const std::string& surface, PassageId passage);

  /// Restores a persisted record; ids must arrive densely in order.
  void restore(EntityRecord record);

  const std::vector<EntityRecord>& records() const noexcept { return records_; }
  const EntityRecord& operator[](EntityId id) const { return records_.at(id); }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  friend bool operator==(const EntityRegistry& a, const EntityRegistry& b) {
    return a.records_ == b.records_;
  }

 private:
  std::vector<EntityRecord> records_;
  std::unordered_map<std::string, EntityId> by_canonical_;
};

struct PassageEntityCount {
  PassageId passage_id = 0;
  EntityId entity_id = 0;
  std::uint32_t count = 0;

  friend bool operator==(const PassageEntityCount&, const PassageEntityCount&) = default;
};

struct IncidenceFacts {
  /// Sorted, unique (sentence, entity) pairs.
  std::vector<std::pair<SentenceId, EntityId>> sentence_entity;
  /// Sorted by (passage, entity); count is the number of mentions.
  std::vector<PassageEntityCount> passage_entity;
};

/// Extends `registry` with the mentions (which must be in corpus order) and
/// returns the incidence facts for the sentences of `corpus`.
IncidenceFacts build_entity_registry(std::span<const EntityMention> mentions,
                                     const Corpus& corpus, EntityRegistry& registry);

std::pair<EntityRegistry, IncidenceFacts> build_entity_registry(
    std::span<const EntityMention> mentions, const Corpus& corpus);

/// Runs the extractor over every sentence of the corpus in order.
std::vector<EntityMention> extract_corpus(const Corpus& corpus, const Extractor& extractor);

}  // namespace linearrag
