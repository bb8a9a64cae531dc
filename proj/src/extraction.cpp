#include "linearrag/extraction.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <json.hpp>
#include <spdlog/spdlog.h>
#include <unordered_set>

#include "linearrag/error.hpp"
#include "unicode_text.hpp"

namespace linearrag {
namespace {

using StopSet = std::unordered_set<std::string>;

StopSet fold_stopwords(const std::vector<std::string>& stopwords) {
  StopSet out;
  for (const auto& word : stopwords) out.insert(text::fold_case(word));
  return out;
}

struct Token {
  ByteSpan core;
  bool leading_punct = false;
  bool trailing_punct = false;
  bool capitalized = false;
  std::size_t core_chars = 0;
};

bool is_apostrophe(char32_t cp) noexcept { return cp == U'\'' || cp == U'’'; }

std::vector<Token> tokenize(std::string_view sentence) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = sentence.size();
  while (i < n) {
    while (i < n && text::is_ascii_space(sentence[i])) ++i;
    if (i >= n) break;
    std::size_t j = i;
    while (j < n && !text::is_ascii_space(sentence[j])) ++j;
    auto cps = text::decode(sentence.substr(i, j - i));
    std::size_t lo = 0;
    std::size_t hi = cps.size();
    while (lo < hi && text::is_punct(cps[lo].value)) ++lo;
    while (hi > lo && text::is_punct(cps[hi - 1].value)) --hi;
    Token token;
    token.leading_punct = lo > 0;
    token.trailing_punct = hi < cps.size();
    if (hi - lo > 2 && cps[hi - 1].value == U's' && is_apostrophe(cps[hi - 2].value)) {
      hi -= 2;
      token.trailing_punct = true;
    }
    if (lo < hi) {
      token.core = {i + cps[lo].begin, i + cps[hi - 1].end};
      token.capitalized = text::is_upper_initial(cps[lo].value);
      token.core_chars = hi - lo;
    } else {
      token.core = {j, j};
    }
    tokens.push_back(token);
    i = j;
  }
  return tokens;
}

std::vector<EntityMention> caps_run(std::string_view sentence, const StopSet& stopwords) {
  const auto tokens = tokenize(sentence);
  std::vector<std::vector<std::size_t>> runs;
  std::vector<std::size_t> current;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const Token& token = tokens[k];
    if (token.capitalized && !current.empty() && !tokens[current.back()].trailing_punct &&
        !token.leading_punct) {
      current.push_back(k);
      continue;
    }
    if (!current.empty()) runs.push_back(std::move(current));
    current.clear();
    if (token.capitalized) current.push_back(k);
  }
  if (!current.empty()) runs.push_back(std::move(current));

  std::vector<EntityMention> mentions;
  for (const auto& run : runs) {
    std::size_t first = 0;
    while (first < run.size()) {
      const ByteSpan core = tokens[run[first]].core;
      if (!stopwords.contains(text::fold_case(sentence.substr(core.begin, core.size())))) break;
      ++first;
    }
    if (first == run.size()) continue;
    if (run.size() - first == 1 && tokens[run[first]].core_chars < 2) continue;
    const ByteSpan span{tokens[run[first]].core.begin, tokens[run.back()].core.end};
    mentions.push_back(EntityMention{0, std::string(sentence.substr(span.begin, span.size())), span});
  }
  return mentions;
}

class CapsRunExtractor final : public Extractor {
 public:
  explicit CapsRunExtractor(ExtractorContract contract)
      : Extractor(std::move(contract)), stopwords_(fold_stopwords(this->contract().stopwords)) {}

  std::vector<EntityMention> extract(const Sentence& sentence) const override {
    auto mentions = caps_run(sentence.text, stopwords_);
    for (auto& mention : mentions) mention.sentence_id = sentence.id;
    return mentions;
  }

 private:
  StopSet stopwords_;
};

class ExternalExtractor final : public Extractor {
 public:
  explicit ExternalExtractor(ExtractorContract contract) : Extractor(std::move(contract)) {
    const auto& path = this->contract().mentions_path;
    if (path.empty()) throw Error(ErrorCode::config, "external extractor needs mentions_path");
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot read mention file " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        EntityMention mention;
        mention.sentence_id = j.at("sentence_id").get<SentenceId>();
        mention.surface = j.at("surface").get<std::string>();
        mention.span = {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
        by_sentence_[mention.sentence_id].push_back(std::move(mention));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse,
                    path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    for (auto& [sid, list] : by_sentence_) {
      std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
        return a.span.begin < b.span.begin;
      });
    }
  }

  std::vector<EntityMention> extract(const Sentence& sentence) const override {
    auto it = by_sentence_.find(sentence.id);
    if (it == by_sentence_.end()) return {};
    std::vector<EntityMention> out;
    std::size_t last_end = 0;
    for (const auto& mention : it->second) {
      const ByteSpan span = mention.span;
      if (span.begin >= span.end || span.end > sentence.text.size() ||
          sentence.text.compare(span.begin, span.size(), mention.surface) != 0)
        throw Error(ErrorCode::parse, "external mention '" + mention.surface +
                                          "' does not match sentence " +
                                          std::to_string(sentence.id));
      if (!out.empty() && span.begin < last_end) {
        spdlog::warn("overlapping external mention '{}' in sentence {} dropped", mention.surface,
                     sentence.id);
        continue;
      }
      out.push_back(mention);
      last_end = span.end;
    }
    return out;
  }

 private:
  std::map<SentenceId, std::vector<EntityMention>> by_sentence_;
};

bool strip_char(char32_t cp) noexcept { return text::is_punct(cp) || text::is_space(cp); }

}  // namespace

const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words = {
      "a",       "an",      "the",    "and",     "or",      "but",     "nor",     "so",
      "yet",     "if",      "then",   "than",    "as",      "at",      "by",      "for",
      "from",    "in",      "into",   "of",      "on",      "onto",    "to",      "with",
      "without", "within",  "about",  "after",   "before",  "during",  "since",   "until",
      "while",   "when",    "where",  "which",   "who",     "whom",    "whose",   "what",
      "why",     "how",     "that",   "this",    "these",   "those",   "there",   "here",
      "it",      "its",     "he",     "him",     "his",     "she",     "her",     "hers",
      "they",    "them",    "their",  "we",      "us",      "our",     "you",     "your",
      "i",       "me",      "my",     "is",      "are",     "was",     "were",    "be",
      "been",    "being",   "has",    "have",    "had",     "do",      "does",    "did",
      "not",     "no",      "yes",    "all",     "any",     "both",    "each",    "few",
      "many",    "most",    "some",   "such",    "also",    "however", "although", "though",
      "because", "once",    "only",   "other",   "another"};
  return words;
}

std::unique_ptr<Extractor> make_extractor(const ExtractorContract& contract) {
  if (contract.id == "caps-run") return std::make_unique<CapsRunExtractor>(contract);
  if (contract.id == "external") return std::make_unique<ExternalExtractor>(contract);
  throw Error(ErrorCode::config, "unknown extractor strategy '" + contract.id + "'");
}

std::vector<EntityMention> caps_run_mentions(std::string_view sentence_text,
                                             const std::vector<std::string>& stopwords) {
  return caps_run(sentence_text, fold_stopwords(stopwords));
}

std::vector<EntityMention> extract_mentions(std::string_view sentence_text,
                                            const ExtractorContract& contract) {
  if (contract.id == "caps-run") return caps_run_mentions(sentence_text, contract.stopwords);
  if (contract.id == "external")
    throw Error(ErrorCode::config, "external extractor requires sentence ids");
  throw Error(ErrorCode::config, "unknown extractor strategy '" + contract.id + "'");
}

std::string canonicalize(std::string_view surface) {
  const std::string folded = text::fold_case(surface);
  const auto cps = text::decode(folded);
  std::size_t lo = 0;
  std::size_t hi = cps.size();
  while (lo < hi && strip_char(cps[lo].value)) ++lo;
  while (hi > lo && strip_char(cps[hi - 1].value)) --hi;
  std::string out;
  out.reserve(folded.size());
  bool pending_space = false;
  for (std::size_t k = lo; k < hi; ++k) {
    if (text::is_space(cps[k].value)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(folded, cps[k].begin, cps[k].end - cps[k].begin);
  }
  return out;
}

std::optional<EntityId> EntityRegistry::find(std::string_view canonical) const {
  auto it = by_canonical_.find(std::string(canonical));
  if (it == by_canonical_.end()) return std::nullopt;
  return it->second;
}

EntityId EntityRegistry::intern(const std::string& canonical, const std::string& surface,
                                PassageId passage) {
  auto [it, inserted] = by_canonical_.try_emplace(canonical, static_cast<EntityId>(records_.size()));
  if (inserted) records_.push_back(EntityRecord{it->second, canonical, {}, passage});
  records_[it->second].surfaces.insert(surface);
  return it->second;
}

void EntityRegistry::restore(EntityRecord record) {
  if (record.id != records_.size())
    throw Error(ErrorCode::consistency, "entity ids are not dense at " + std::to_string(record.id));
  if (!by_canonical_.try_emplace(record.canonical, record.id).second)
    throw Error(ErrorCode::consistency, "duplicate canonical key '" + record.canonical + "'");
  records_.push_back(std::move(record));
}

IncidenceFacts build_entity_registry(std::span<const EntityMention> mentions,
                                     const Corpus& corpus, EntityRegistry& registry) {
  IncidenceFacts facts;
  const SentenceId first = corpus.first_sentence_id();
  const std::size_t n_sentences = corpus.sentences.size();

  std::map<EntityId, std::uint32_t> passage_counts;
  std::optional<PassageId> current_passage;
  auto flush = [&] {
    for (const auto& [entity, count] : passage_counts)
      facts.passage_entity.push_back({*current_passage, entity, count});
    passage_counts.clear();
  };

  SentenceId previous_sentence = first;
  std::size_t sentence_block_begin = 0;
  for (const EntityMention& mention : mentions) {
    if (mention.sentence_id < first || mention.sentence_id - first >= n_sentences)
      throw Error(ErrorCode::consistency,
                  "mention references unknown sentence " + std::to_string(mention.sentence_id));
    if (mention.sentence_id < previous_sentence)
      throw Error(ErrorCode::consistency, "mentions are not in corpus order");
    if (mention.sentence_id != previous_sentence) sentence_block_begin = facts.sentence_entity.size();
    previous_sentence = mention.sentence_id;

    const std::string key = canonicalize(mention.surface);
    if (key.empty()) continue;
    const Sentence& sentence = corpus.sentences[mention.sentence_id - first];
    const EntityId entity = registry.intern(key, mention.surface, sentence.passage_id);

    if (current_passage != sentence.passage_id) {
      if (current_passage) flush();
      current_passage = sentence.passage_id;
    }
    ++passage_counts[entity];

    const auto block = std::span(facts.sentence_entity).subspan(sentence_block_begin);
    const std::pair<SentenceId, EntityId> pair{mention.sentence_id, entity};
    if (std::find(block.begin(), block.end(), pair) == block.end())
      facts.sentence_entity.push_back(pair);
  }
  if (current_passage) flush();
  std::sort(facts.sentence_entity.begin(), facts.sentence_entity.end());
  return facts;
}

std::pair<EntityRegistry, IncidenceFacts> build_entity_registry(
    std::span<const EntityMention> mentions, const Corpus& corpus) {
  EntityRegistry registry;
  auto facts = build_entity_registry(mentions, corpus, registry);
  return {std::move(registry), std::move(facts)};
}

std::vector<EntityMention> extract_corpus(const Corpus& corpus, const Extractor& extractor) {
  std::vector<EntityMention> mentions;
  for (const Sentence& sentence : corpus.sentences) {
    auto found = extractor.extract(sentence);
    std::move(found.begin(), found.end(), std::back_inserter(mentions));
  }
  return mentions;
}

}  // namespace linearrag
