#include "linearrag/trigraph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <spdlog/spdlog.h>
#include <unordered_set>

#include "json_io.hpp"
#include "linearrag/error.hpp"

namespace linearrag {
namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using Index = SparseBinaryMatrix::Index;

/// Segments were already produced by ingestion; this links the slice's
/// sentences into `graph`, which must already hold the slice's nodes.
void link_slice(TriGraph& graph, const Corpus& slice, const Extractor& extractor) {
  const auto mentions = extract_corpus(slice, extractor);
  const IncidenceFacts facts = build_entity_registry(mentions, slice, graph.entities);
  const std::size_t n_entities = graph.entities.size();

  std::vector<std::vector<Index>> sentence_rows(slice.sentences.size());
  const SentenceId first_sentence = slice.first_sentence_id();
  for (const auto& [s, e] : facts.sentence_entity) sentence_rows[s - first_sentence].push_back(e);

  std::vector<std::vector<Index>> passage_rows(slice.passages.size());
  const PassageId first_passage = slice.first_passage_id();
  for (const auto& fact : facts.passage_entity) {
    passage_rows[fact.passage_id - first_passage].push_back(fact.entity_id);
    graph.occurrence.push_back(fact.count);
  }
  graph.mention.append_rows(sentence_rows, n_entities);
  graph.contain.append_rows(passage_rows, n_entities);
  if (graph.occurrence.size() != graph.contain.nnz())
    throw Error(ErrorCode::consistency, "occurrence counts out of step with contain matrix");
}

void append_nodes(Corpus& into, const Corpus& slice) {
  for (const Passage& p : slice.passages) {
    into.source_digest = chain_digest(into.source_digest, p);
    into.passages.push_back(p);
  }
  into.sentences.insert(into.sentences.end(), slice.sentences.begin(), slice.sentences.end());
}

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\x1f': out += "\\u"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    switch (s[++i]) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case 'u': out.push_back('\x1f'); break;
      default: out.push_back(s[i]);
    }
  }
  return out;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::uint64_t parse_uint(std::string_view field, const std::string& where) {
  std::uint64_t value = 0;
  if (field.empty()) throw Error(ErrorCode::consistency, where + ": empty number");
  for (char c : field) {
    if (c < '0' || c > '9') throw Error(ErrorCode::consistency, where + ": bad number '" + std::string(field) + "'");
    value = value * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return value;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  return in;
}

void write_coo(const fs::path& path, const SparseBinaryMatrix& m) {
  auto out = open_out(path);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (Index c : m.row(r)) out << r << '\t' << c << '\n';
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

/// Rebuilds CSR from sorted coordinate lines; the expected nnz comes from the manifest.
SparseBinaryMatrix read_coo(const fs::path& path, std::size_t rows, std::size_t cols,
                            std::size_t expected_nnz) {
  auto in = open_in(path);
  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<Index> indices;
  indices.reserve(expected_nnz);
  std::string line;
  std::size_t line_no = 0;
  std::size_t last_row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    const auto parts = split(line, '\t');
    if (parts.size() != 2) throw Error(ErrorCode::consistency, where + ": expected row<TAB>col");
    const auto r = parse_uint(parts[0], where);
    const auto c = parse_uint(parts[1], where);
    if (r >= rows || c >= cols) throw Error(ErrorCode::consistency, where + ": coordinate out of range");
    if (r < last_row) throw Error(ErrorCode::consistency, where + ": rows not sorted");
    last_row = r;
    ++offsets[r + 1];
    indices.push_back(static_cast<Index>(c));
  }
  if (indices.size() != expected_nnz)
    throw Error(ErrorCode::consistency,
                "csr prefix mismatch in " + path.filename().string() + ": manifest declares " +
                    std::to_string(expected_nnz) + " entries, file has " +
                    std::to_string(indices.size()));
  for (std::size_t r = 0; r < rows; ++r) offsets[r + 1] += offsets[r];
  return SparseBinaryMatrix::from_csr(rows, cols, std::move(offsets), std::move(indices));
}

ExtractorContract extractor_from_json(const json& j) {
  ExtractorContract contract;
  contract.id = j.at("id").get<std::string>();
  contract.stopwords = j.at("stopwords").get<std::vector<std::string>>();
  if (auto it = j.find("mentions_path"); it != j.end()) contract.mentions_path = it->get<std::string>();
  return contract;
}

}  // namespace

std::uint32_t TriGraph::occurrence_of(PassageId p, EntityId e) const noexcept {
  const std::size_t pos = contain.find(p, e);
  return pos == contain.nnz() ? 0 : occurrence[pos];
}

TriGraph build(const Corpus& corpus, const Extractor& extractor) {
  if (corpus.empty()) throw Error(ErrorCode::empty_corpus, "cannot build a graph from an empty corpus");
  if (corpus.first_passage_id() != 0 || corpus.first_sentence_id() != 0)
    throw Error(ErrorCode::consistency, "a fresh build needs ids starting at 0");
  TriGraph graph;
  graph.extractor = extractor.contract();
  graph.corpus = corpus;
  link_slice(graph, corpus, extractor);
  if (graph.entities.empty()) spdlog::warn("extraction produced no entities; graph has no edges");
  return graph;
}

TriGraph add_passages(TriGraph graph, const Corpus& slice, const Extractor& extractor) {
  if (slice.empty()) return graph;
  if (slice.first_passage_id() != graph.n_passages() ||
      slice.first_sentence_id() != graph.n_sentences())
    throw Error(ErrorCode::consistency,
                "new passages must continue the id range at passage " +
                    std::to_string(graph.n_passages()) + ", sentence " +
                    std::to_string(graph.n_sentences()));
  std::unordered_set<std::string_view> keys;
  for (const Passage& p : graph.corpus.passages) keys.insert(p.doc_key);
  for (const Passage& p : slice.passages)
    if (!keys.insert(p.doc_key).second)
      throw Error(ErrorCode::consistency, "doc_key '" + p.doc_key + "' already indexed");
  append_nodes(graph.corpus, slice);
  link_slice(graph, slice, extractor);
  return graph;
}

void check_invariants(const TriGraph& graph) {
  graph.contain.validate();
  graph.mention.validate();
  if (graph.contain.rows() != graph.n_passages() || graph.mention.rows() != graph.n_sentences() ||
      graph.contain.cols() != graph.n_entities() || graph.mention.cols() != graph.n_entities())
    throw Error(ErrorCode::consistency, "matrix shapes disagree with node counts");
  if (graph.occurrence.size() != graph.contain.nnz())
    throw Error(ErrorCode::consistency, "occurrence table does not match contain entries");
  std::vector<SparseBinaryMatrix::Entry> derived;
  derived.reserve(graph.mention.nnz());
  for (std::size_t s = 0; s < graph.n_sentences(); ++s)
    for (Index e : graph.mention.row(s)) derived.emplace_back(graph.corpus.sentences[s].passage_id, e);
  const auto expected =
      SparseBinaryMatrix::from_entries(graph.n_passages(), graph.n_entities(), std::move(derived));
  if (!(expected == graph.contain))
    throw Error(ErrorCode::consistency, "contain matrix is not derivable from mention matrix");
  for (std::uint32_t count : graph.occurrence)
    if (count == 0) throw Error(ErrorCode::consistency, "zero occurrence count on a contain entry");
}

void save(const TriGraph& graph, const fs::path& dir, const std::optional<EmbedderInfo>& embedder) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());

  {
    auto out = open_out(dir / "passages.jsonl");
    for (const Passage& p : graph.corpus.passages) {
      ordered_json j;
      j["id"] = p.id;
      j["doc_key"] = p.doc_key;
      if (p.title) j["title"] = *p.title;
      j["text"] = p.text;
      out << j.dump() << '\n';
    }
  }
  {
    auto out = open_out(dir / "sentences.jsonl");
    for (const Sentence& s : graph.corpus.sentences) {
      ordered_json j;
      j["id"] = s.id;
      j["passage_id"] = s.passage_id;
      j["start"] = s.span.begin;
      j["end"] = s.span.end;
      out << j.dump() << '\n';
    }
  }
  {
    auto out = open_out(dir / "entities.tsv");
    for (const EntityRecord& r : graph.entities.records()) {
      out << r.id << '\t' << escape_field(r.canonical) << '\t';
      bool first = true;
      for (const auto& surface : r.surfaces) {
        if (!first) out << '\x1f';
        out << escape_field(surface);
        first = false;
      }
      out << '\n';
    }
  }
  write_coo(dir / "contain.coo", graph.contain);
  write_coo(dir / "mention.coo", graph.mention);
  {
    auto out = open_out(dir / "occurrence.tsv");
    std::size_t k = 0;
    for (std::size_t p = 0; p < graph.n_passages(); ++p)
      for (Index e : graph.contain.row(p)) out << p << '\t' << e << '\t' << graph.occurrence[k++] << '\n';
  }
  ordered_json manifest;
  manifest["format_version"] = kIndexFormatVersion;
  manifest["corpus_digest"] = graph.corpus_digest();
  manifest["n_passages"] = graph.n_passages();
  manifest["n_sentences"] = graph.n_sentences();
  manifest["n_entities"] = graph.n_entities();
  manifest["contain_nnz"] = graph.contain.nnz();
  manifest["mention_nnz"] = graph.mention.nnz();
  manifest["extractor"] = extractor_to_json(graph.extractor);
  manifest["embedder"] = embedder ? embedder_to_json(*embedder) : ordered_json(nullptr);
  auto out = open_out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, "write failed for manifest");
}

Manifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  if (!fs::exists(path)) throw Error(ErrorCode::io, "no manifest.json in " + dir.string());
  auto in = open_in(path);
  Manifest m;
  try {
    const json j = json::parse(in);
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kIndexFormatVersion)
      throw Error(ErrorCode::version_mismatch,
                  "index format version " + std::to_string(m.format_version) +
                      " is not supported (expected " + std::to_string(kIndexFormatVersion) + ")");
    m.corpus_digest = j.at("corpus_digest").get<std::string>();
    m.n_passages = j.at("n_passages").get<std::size_t>();
    m.n_sentences = j.at("n_sentences").get<std::size_t>();
    m.n_entities = j.at("n_entities").get<std::size_t>();
    m.contain_nnz = j.at("contain_nnz").get<std::size_t>();
    m.mention_nnz = j.at("mention_nnz").get<std::size_t>();
    m.extractor = extractor_from_json(j.at("extractor"));
    if (const auto& e = j.at("embedder"); !e.is_null())
      m.embedder = EmbedderInfo{e.at("id").get<std::string>(), e.at("dim").get<std::size_t>(),
                                e.at("seed").get<std::uint64_t>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::consistency, std::string("malformed manifest: ") + e.what());
  }
  return m;
}

TriGraph load(const fs::path& dir) {
  const Manifest manifest = read_manifest(dir);
  TriGraph graph;
  graph.extractor = manifest.extractor;
  Corpus& corpus = graph.corpus;

  try {
    auto in = open_in(dir / "passages.jsonl");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      Passage p;
      p.id = j.at("id").get<PassageId>();
      if (p.id != corpus.passages.size()) throw Error(ErrorCode::consistency, "passage ids are not dense");
      p.doc_key = j.at("doc_key").get<std::string>();
      if (auto it = j.find("title"); it != j.end()) p.title = it->get<std::string>();
      p.text = j.at("text").get<std::string>();
      corpus.source_digest = chain_digest(corpus.source_digest, p);
      corpus.passages.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::consistency, std::string("malformed passages.jsonl: ") + e.what());
  }
  if (corpus.passages.size() != manifest.n_passages)
    throw Error(ErrorCode::consistency, "passage count differs from manifest");
  if (corpus.source_digest != manifest.corpus_digest)
    throw Error(ErrorCode::digest_mismatch, "corpus digest does not match manifest");

  try {
    auto in = open_in(dir / "sentences.jsonl");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      Sentence s;
      s.id = j.at("id").get<SentenceId>();
      s.passage_id = j.at("passage_id").get<PassageId>();
      s.span = {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
      if (s.id != corpus.sentences.size() || s.passage_id >= corpus.passages.size())
        throw Error(ErrorCode::consistency, "sentence record " + std::to_string(s.id) + " is invalid");
      Passage& owner = corpus.passages[s.passage_id];
      if (s.span.begin > s.span.end || s.span.end > owner.text.size())
        throw Error(ErrorCode::consistency, "sentence span outside passage text");
      if (owner.sentence_count == 0) owner.first_sentence = s.id;
      else if (owner.first_sentence + owner.sentence_count != s.id)
        throw Error(ErrorCode::consistency, "sentences of a passage are not contiguous");
      ++owner.sentence_count;
      s.text = owner.text.substr(s.span.begin, s.span.size());
      corpus.sentences.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::consistency, std::string("malformed sentences.jsonl: ") + e.what());
  }
  if (corpus.sentences.size() != manifest.n_sentences)
    throw Error(ErrorCode::consistency, "sentence count differs from manifest");
  graph.contain = read_coo(dir / "contain.coo", manifest.n_passages, manifest.n_entities, manifest.contain_nnz);
  graph.mention = read_coo(dir / "mention.coo", manifest.n_sentences, manifest.n_entities, manifest.mention_nnz);

  std::vector<PassageId> first_seen(manifest.n_entities, 0);
  std::vector<bool> seen(manifest.n_entities, false);
  for (std::size_t p = 0; p < graph.contain.rows(); ++p)
    for (Index e : graph.contain.row(p))
      if (!seen[e]) {
        seen[e] = true;
        first_seen[e] = static_cast<PassageId>(p);
      }
  {
    auto in = open_in(dir / "entities.tsv");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto parts = split(line, '\t');
      if (parts.size() != 3) throw Error(ErrorCode::consistency, "entities.tsv: expected 3 fields");
      EntityRecord record;
      record.id = static_cast<EntityId>(parse_uint(parts[0], "entities.tsv"));
      record.canonical = unescape_field(parts[1]);
      for (auto surface : split(parts[2], '\x1f'))
        if (!surface.empty()) record.surfaces.insert(unescape_field(surface));
      if (record.id >= manifest.n_entities) throw Error(ErrorCode::consistency, "entity id out of range");
      record.first_seen_passage = first_seen[record.id];
      graph.entities.restore(std::move(record));
    }
  }
  if (graph.entities.size() != manifest.n_entities)
    throw Error(ErrorCode::consistency, "entity count differs from manifest");

  {
    auto in = open_in(dir / "occurrence.tsv");
    std::string line;
    std::size_t k = 0;
    graph.occurrence.assign(graph.contain.nnz(), 0);
    const auto offsets = graph.contain.row_offsets();
    const auto cols = graph.contain.col_indices();
    std::size_t row = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto parts = split(line, '\t');
      if (parts.size() != 3) throw Error(ErrorCode::consistency, "occurrence.tsv: expected 3 fields");
      if (k >= cols.size()) throw Error(ErrorCode::consistency, "occurrence.tsv has extra rows");
      while (offsets[row + 1] <= k) ++row;
      if (parse_uint(parts[0], "occurrence.tsv") != row || parse_uint(parts[1], "occurrence.tsv") != cols[k])
        throw Error(ErrorCode::consistency, "occurrence.tsv disagrees with contain.coo at row " + std::to_string(k + 1));
      graph.occurrence[k++] = static_cast<std::uint32_t>(parse_uint(parts[2], "occurrence.tsv"));
    }
    if (k != cols.size()) throw Error(ErrorCode::consistency, "occurrence.tsv is truncated");
  }
  check_invariants(graph);
  return graph;
}

}  // namespace linearrag
