#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "linearrag/embedding.hpp"
#include "linearrag/extraction.hpp"
#include "linearrag/retrieval.hpp"

namespace linearrag {

struct QaExample {
  std::string question;
  std::string answer;
  std::vector<std::string> gold_keys;

  friend bool operator==(const QaExample&, const QaExample&) = default;
};

/// Line-delimited {question, answer, gold_keys}. Blank lines are skipped;
/// anything else malformed throws Error(parse) naming the line.
std::vector<QaExample> load_qa(const std::filesystem::path& path);
std::vector<QaExample> read_qa(std::istream& in);
void write_qa_jsonl(std::ostream& out, const std::vector<QaExample>& examples);

struct ExampleResult {
  std::string question;
  std::vector<std::string> retrieved;  // doc_keys in rank order
  bool contain = false;
  double recall = 0.0;
  std::size_t hops = 0;
  bool fallback_used = false;
  double retrieval_ms = 0.0;
};

struct EvalReport {
  std::size_t n_examples = 0;
  std::size_t k = 0;
  double contain_at_k = 0.0;
  double recall_at_k = 0.0;
  double mean_hops = 0.0;
  double mean_retrieval_ms = 0.0;
  /// Gold keys that name no passage in the index, in first-seen order.
  std::vector<std::string> unresolved_gold_keys;
  std::vector<ExampleResult> examples;
};

/// Throws Error(config) for an empty example list.
EvalReport evaluate(const Retriever& retriever, const std::vector<QaExample>& examples,
                    const RetrievalConfig& cfg);

nlohmann::ordered_json to_json(const EvalReport& report);
void write_eval_csv(std::ostream& out, const EvalReport& report);
/// e.g. "n=12 contain_at_5=1.000 recall_at_5=0.958 mean_hops=1.50 mean_retrieval_ms=0.210 unresolved=0"
std::string summary_line(const EvalReport& report);

/// Templates: "qa" and "context-only". Each passage is prefixed by "[doc_key] ".
/// Throws Error(config) for unknown ids.
std::string assemble_prompt(std::string_view query, const RankedPassages& ranked,
                            const TriGraph& graph, std::string_view template_id);

struct BenchOptions {
  std::vector<std::size_t> sizes;
  std::size_t avg_sentences = 4;
  std::size_t entity_pool = 200;
  std::uint64_t seed = 1;
  /// Each size is indexed this many times; the fastest run is reported.
  std::size_t repeats = 3;
  ExtractorContract extractor;
  EncoderContract encoder;
  RetrievalConfig retrieval;
  /// Scratch directory for persisted indices; a temporary one when empty.
  std::filesystem::path work_dir;
};

struct BenchRow {
  std::size_t n_passages = 0;
  std::size_t n_sentences = 0;
  std::size_t n_entities = 0;
  std::size_t n_queries = 0;
  double index_seconds = 0.0;
  double mean_query_seconds = 0.0;
  std::uintmax_t index_bytes = 0;
};

struct BenchReport {
  std::vector<std::size_t> sizes;
  std::vector<BenchRow> rows;
  /// index_seconds[i + 1] / index_seconds[i]
  std::vector<double> doubling_ratios;
  /// index_bytes[i + 1] / index_bytes[i]
  std::vector<double> bytes_ratios;
};

/// Throws Error(config) unless there are >= 2 strictly increasing sizes.
BenchReport bench_scaling(const BenchOptions& options);

nlohmann::ordered_json to_json(const BenchReport& report);
void write_bench_csv(std::ostream& out, const BenchReport& report);
std::string summary_line(const BenchReport& report);

}  // namespace linearrag
