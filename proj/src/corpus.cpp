#include "linearrag/corpus.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <unordered_set>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "linearrag/error.hpp"
#include "unicode_text.hpp"

namespace linearrag {
namespace {

using text::is_ascii_space;

bool is_terminal(char c) noexcept { return c == '.' || c == '!' || c == '?'; }

bool is_continuation_byte(char c) noexcept {
  return (static_cast<unsigned char>(c) & 0xC0u) == 0x80u;
}

void trim(std::string_view text, ByteSpan& span) {
  while (span.begin < span.end && is_ascii_space(text[span.begin])) ++span.begin;
  while (span.end > span.begin && is_ascii_space(text[span.end - 1])) --span.end;
}

void push_bounded(std::string_view text, ByteSpan span, std::vector<ByteSpan>& out) {
  trim(text, span);
  while (span.size() > kMaxSentenceBytes) {
    std::size_t cut = span.begin + kMaxSentenceBytes;
    std::size_t ws = cut;
    while (ws > span.begin && !is_ascii_space(text[ws])) --ws;
    if (ws > span.begin) {
      cut = ws;
    } else {
      while (cut > span.begin && is_continuation_byte(text[cut])) --cut;
      if (cut == span.begin) cut = span.begin + kMaxSentenceBytes;
    }
    ByteSpan head{span.begin, cut};
    trim(text, head);
    if (head.size() > 0) out.push_back(head);
    span.begin = cut;
    trim(text, span);
  }
  if (span.size() > 0) out.push_back(span);
}

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1)
    throw Error(ErrorCode::config, "SHA-256 unavailable");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

bool blank(std::string_view s) {
  for (char c : s)
    if (!is_ascii_space(c)) return false;
  return true;
}

std::optional<std::string> optional_string(const nlohmann::json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw std::invalid_argument(std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

}  // namespace

std::vector<ByteSpan> segment_sentences(std::string_view passage_text) {
  std::vector<ByteSpan> out;
  std::size_t start = 0;
  const std::size_t n = passage_text.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (is_terminal(passage_text[i]) && (i + 1 == n || is_ascii_space(passage_text[i + 1]))) {
      push_bounded(passage_text, {start, i + 1}, out);
      start = i + 1;
    }
  }
  if (start < n) push_bounded(passage_text, {start, n}, out);
  return out;
}

std::string chain_digest(std::string_view previous, const Passage& passage) {
  std::string buffer;
  buffer.reserve(previous.size() + passage.doc_key.size() + passage.text.size() + 16);
  buffer.append(previous);
  buffer.push_back('\0');
  buffer.append(passage.doc_key);
  buffer.push_back('\x1f');
  if (passage.title) {
    buffer.push_back('T');
    buffer.append(*passage.title);
  }
  buffer.push_back('\x1f');
  buffer.append(passage.text);
  return sha256_hex(buffer);
}

Corpus make_corpus(const std::vector<PassageRecord>& records, const IngestOptions& options) {
  Corpus corpus;
  corpus.source_digest = options.previous_digest;
  corpus.passages.reserve(records.size());
  PassageId pid = options.first_passage_id;
  SentenceId sid = options.first_sentence_id;
  for (const auto& record : records) {
    if (blank(record.text)) throw Error(ErrorCode::parse, "passage text is empty");
    Passage passage;
    passage.id = pid;
    passage.doc_key = record.doc_key ? *record.doc_key : "passage-" + std::to_string(pid);
    passage.title = record.title;
    passage.text = (record.title && !record.title->empty()) ? *record.title + ": " + record.text
                                                            : record.text;
    passage.first_sentence = sid;
    for (const ByteSpan& span : segment_sentences(passage.text)) {
      corpus.sentences.push_back(
          Sentence{sid++, pid, span, passage.text.substr(span.begin, span.size())});
      ++passage.sentence_count;
    }
    corpus.source_digest = chain_digest(corpus.source_digest, passage);
    corpus.passages.push_back(std::move(passage));
    ++pid;
  }
  return corpus;
}

IngestResult ingest(std::istream& in, const IngestOptions& options) {
  IngestResult result;
  std::vector<PassageRecord> records;
  std::unordered_set<std::string> keys;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto warn = [&](const std::string& why) {
      ++result.skipped;
      result.warnings.push_back("line " + std::to_string(line_no) + ": " + why);
      spdlog::warn("corpus line {} skipped: {}", line_no, why);
    };
    try {
      const auto record = nlohmann::json::parse(line);
      if (!record.is_object()) {
        warn("record is not an object");
        continue;
      }
      const auto text_field = optional_string(record, "text");
      if (!text_field) {
        warn("missing text field");
        continue;
      }
      if (blank(*text_field)) {
        warn("empty text");
        continue;
      }
      PassageRecord parsed{optional_string(record, "doc_key"), optional_string(record, "title"),
                           *text_field};
      const PassageId id = options.first_passage_id + static_cast<PassageId>(records.size());
      const std::string key = parsed.doc_key ? *parsed.doc_key : "passage-" + std::to_string(id);
      if (!keys.insert(key).second) {
        warn("duplicate doc_key '" + key + "'");
        continue;
      }
      records.push_back(std::move(parsed));
    } catch (const nlohmann::json::exception& e) {
      warn(std::string("malformed record: ") + e.what());
    } catch (const std::invalid_argument& e) {
      warn(e.what());
    }
  }
  if (records.empty() && !options.allow_empty)
    throw Error(ErrorCode::empty_corpus, "no valid passages in input");
  result.corpus = make_corpus(records, options);
  return result;
}

IngestResult ingest(const std::filesystem::path& path, InputFormat format,
                    const IngestOptions& options) {
  if (format != InputFormat::jsonl) throw Error(ErrorCode::config, "unsupported corpus format");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read corpus file " + path.string());
  return ingest(in, options);
}

void write_corpus_jsonl(std::ostream& out, const std::vector<PassageRecord>& records) {
  for (const auto& record : records) {
    nlohmann::ordered_json j;
    if (record.doc_key) j["doc_key"] = *record.doc_key;
    if (record.title) j["title"] = *record.title;
    j["text"] = record.text;
    out << j.dump() << '\n';
  }
}

}  // namespace linearrag
