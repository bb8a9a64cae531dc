#include "linearrag/evalbench.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <unistd.h>

#include <spdlog/spdlog.h>

#include "linearrag/error.hpp"
#include "linearrag/index.hpp"
#include "linearrag/synthetic.hpp"
#include "unicode_text.hpp"

namespace linearrag {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::vector<QaExample> read_qa(std::istream& in) {
  std::vector<QaExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "qa line " + std::to_string(lineno) + ": ";
    try {
      const json j = json::parse(line);
      QaExample ex;
      for (const auto& [key, v] : j.items()) {
        if (key == "question") ex.question = v.get<std::string>();
        else if (key == "answer") ex.answer = v.get<std::string>();
        else if (key == "gold_keys") ex.gold_keys = v.get<std::vector<std::string>>();
        else throw Error(ErrorCode::parse, where + "unknown key '" + key + "'");
      }
      if (ex.question.empty()) throw Error(ErrorCode::parse, where + "empty question");
      if (ex.answer.empty()) throw Error(ErrorCode::parse, where + "empty answer");
      if (ex.gold_keys.empty()) throw Error(ErrorCode::parse, where + "empty gold_keys");
      out.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::parse, where + e.what());
    }
  }
  return out;
}

std::vector<QaExample> load_qa(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  return read_qa(in);
}

void write_qa_jsonl(std::ostream& out, const std::vector<QaExample>& examples) {
  for (const auto& ex : examples) {
    ordered_json j;
    j["question"] = ex.question;
    j["answer"] = ex.answer;
    j["gold_keys"] = ex.gold_keys;
    out << j.dump() << '\n';
  }
}

EvalReport evaluate(const Retriever& retriever, const std::vector<QaExample>& examples,
                    const RetrievalConfig& cfg) {
  if (examples.empty()) throw Error(ErrorCode::config, "no QA examples to evaluate");
  cfg.validate();
  const TriGraph& graph = retriever.graph();
  std::unordered_map<std::string, PassageId> by_key;
  for (const auto& p : graph.corpus.passages) by_key.emplace(p.doc_key, p.id);

  EvalReport report;
  report.n_examples = examples.size();
  report.k = cfg.top_k;
  std::unordered_set<std::string> unresolved_seen;
  double hops = 0.0, ms = 0.0, contain = 0.0, recall = 0.0;
  for (const auto& ex : examples) {
    for (const auto& key : ex.gold_keys)
      if (!by_key.count(key) && unresolved_seen.insert(key).second)
        report.unresolved_gold_keys.push_back(key);

    const auto t0 = Clock::now();
    const RankedPassages ranked = retriever.retrieve(ex.question, cfg);
    const double elapsed_ms = seconds_since(t0) * 1e3;

    ExampleResult row;
    row.question = ex.question;
    row.hops = ranked.hops_used;
    row.fallback_used = ranked.fallback_used;
    row.retrieval_ms = elapsed_ms;
    std::string context;
    std::unordered_set<std::string> got;
    for (const auto& item : ranked.items) {
      const auto& passage = graph.corpus.passages[item.passage_id];
      row.retrieved.push_back(passage.doc_key);
      got.insert(passage.doc_key);
      context += passage.text;
      context += '\n';
    }
    row.contain = text::fold_case(context).find(text::fold_case(ex.answer)) != std::string::npos;
    std::size_t found = 0;
    for (const auto& key : ex.gold_keys) found += got.count(key);
    row.recall = static_cast<double>(found) / static_cast<double>(ex.gold_keys.size());

    contain += row.contain ? 1.0 : 0.0;
    recall += row.recall;
    hops += static_cast<double>(row.hops);
    ms += elapsed_ms;
    report.examples.push_back(std::move(row));
  }
  const double n = static_cast<double>(examples.size());
  report.contain_at_k = contain / n;
  report.recall_at_k = recall / n;
  report.mean_hops = hops / n;
  report.mean_retrieval_ms = ms / n;
  if (!report.unresolved_gold_keys.empty())
    spdlog::warn("{} gold keys do not resolve to indexed passages", report.unresolved_gold_keys.size());
  return report;
}

ordered_json to_json(const EvalReport& report) {
  ordered_json j;
  j["n_examples"] = report.n_examples;
  j["k"] = report.k;
  j["contain_at_k"] = report.contain_at_k;
  j["recall_at_k"] = report.recall_at_k;
  j["mean_hops"] = report.mean_hops;
  j["mean_retrieval_ms"] = report.mean_retrieval_ms;
  j["unresolved_gold_keys"] = report.unresolved_gold_keys;
  j["examples"] = ordered_json::array();
  for (const auto& row : report.examples) {
    ordered_json r;
    r["question"] = row.question;
    r["retrieved"] = row.retrieved;
    r["contain"] = row.contain;
    r["recall"] = row.recall;
    r["hops"] = row.hops;
    r["fallback_used"] = row.fallback_used;
    r["retrieval_ms"] = row.retrieval_ms;
    j["examples"].push_back(std::move(r));
  }
  return j;
}

void write_eval_csv(std::ostream& out, const EvalReport& report) {
  out << "question,contain,recall,hops,fallback_used,retrieval_ms,retrieved\n";
  for (const auto& row : report.examples) {
    std::string keys;
    for (const auto& k : row.retrieved) keys += (keys.empty() ? "" : ";") + k;
    out << csv_field(row.question) << ',' << (row.contain ? 1 : 0) << ',' << fixed(row.recall, 6)
        << ',' << row.hops << ',' << (row.fallback_used ? 1 : 0) << ','
        << fixed(row.retrieval_ms, 6) << ',' << csv_field(keys) << '\n';
  }
}

std::string summary_line(const EvalReport& report) {
  const std::string k = std::to_string(report.k);
  return "n=" + std::to_string(report.n_examples) + " contain_at_" + k + "=" +
         fixed(report.contain_at_k, 3) + " recall_at_" + k + "=" + fixed(report.recall_at_k, 3) +
         " mean_hops=" + fixed(report.mean_hops, 2) +
         " mean_retrieval_ms=" + fixed(report.mean_retrieval_ms, 3) +
         " unresolved=" + std::to_string(report.unresolved_gold_keys.size());
}

std::string assemble_prompt(std::string_view query, const RankedPassages& ranked,
                            const TriGraph& graph, std::string_view template_id) {
  std::string context;
  for (const auto& item : ranked.items) {
    const auto& p = graph.corpus.passages.at(item.passage_id);
    context += "[" + p.doc_key + "] " + p.text + "\n";
  }
  if (template_id == "context-only") return "Context:\n" + context;
  if (template_id == "qa")
    return "Answer the question using only the context below.\n\nContext:\n" + context +
           "\nQuestion: " + std::string(query) + "\nAnswer:";
  throw Error(ErrorCode::config, "unknown prompt template '" + std::string(template_id) + "'");
}

BenchReport bench_scaling(const BenchOptions& options) {
  if (options.sizes.size() < 2) throw Error(ErrorCode::config, "bench needs at least two sizes");
  for (std::size_t i = 0; i < options.sizes.size(); ++i) {
    if (options.sizes[i] == 0 || (i && options.sizes[i] <= options.sizes[i - 1]))
      throw Error(ErrorCode::config, "bench sizes must be positive and strictly increasing");
  }
  if (options.repeats == 0) throw Error(ErrorCode::config, "bench repeats must be >= 1");
  options.retrieval.validate();

  const auto extractor = make_extractor(options.extractor);
  const auto encoder = make_encoder(options.encoder);

  fs::path work = options.work_dir;
  const bool own_dir = work.empty();
  if (own_dir)
    work = fs::temp_directory_path() / ("linearrag-bench-" + std::to_string(::getpid()));
  fs::create_directories(work);

  BenchReport report;
  report.sizes = options.sizes;
  for (const std::size_t n : options.sizes) {
    SyntheticParams params{n, options.avg_sentences, options.entity_pool, options.seed};
    const SyntheticCorpus synth = generate_synthetic_corpus(params);
    const fs::path dir = work / ("n" + std::to_string(n));

    BenchRow row;
    row.n_passages = n;
    row.index_seconds = -1.0;
    Index index;
    for (std::size_t r = 0; r < options.repeats; ++r) {
      fs::remove_all(dir);
      const auto t0 = Clock::now();
      Index built = build_index(make_corpus(synth.records), *extractor, *encoder);
      save_index(built, dir);
      const double elapsed = seconds_since(t0);
      if (row.index_seconds < 0.0 || elapsed < row.index_seconds) row.index_seconds = elapsed;
      index = std::move(built);
    }
    row.n_sentences = index.graph.n_sentences();
    row.n_entities = index.graph.n_entities();
    row.index_bytes = index_bytes(dir);

    std::vector<std::string> queries;
    for (const auto& ex : synth.qa) queries.push_back(ex.question);
    if (queries.empty())
      for (std::size_t s = 0; s < std::min<std::size_t>(10, index.graph.n_sentences()); ++s)
        queries.push_back(index.graph.corpus.sentences[s].text);
    const Retriever retriever(index.graph, index.store, *encoder);
    const auto t0 = Clock::now();
    for (const auto& q : queries) (void)retriever.retrieve(q, options.retrieval);
    row.n_queries = queries.size();
    row.mean_query_seconds = queries.empty() ? 0.0 : seconds_since(t0) / static_cast<double>(queries.size());
    spdlog::info("bench n={} index={:.3f}s bytes={} query={:.6f}s", n, row.index_seconds,
                 row.index_bytes, row.mean_query_seconds);
    report.rows.push_back(row);
  }
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const auto& a = report.rows[i - 1];
    const auto& b = report.rows[i];
    report.doubling_ratios.push_back(a.index_seconds > 0.0 ? b.index_seconds / a.index_seconds : 0.0);
    report.bytes_ratios.push_back(a.index_bytes ? static_cast<double>(b.index_bytes) /
                                                      static_cast<double>(a.index_bytes)
                                                : 0.0);
  }
  if (own_dir) {
    std::error_code ec;
    fs::remove_all(work, ec);
  }
  return report;
}

ordered_json to_json(const BenchReport& report) {
  ordered_json j;
  j["sizes"] = report.sizes;
  auto& rows = j["rows"] = ordered_json::array();
  for (const auto& r : report.rows) {
    ordered_json o;
    o["n_passages"] = r.n_passages;
    o["n_sentences"] = r.n_sentences;
    o["n_entities"] = r.n_entities;
    o["n_queries"] = r.n_queries;
    o["index_seconds"] = r.index_seconds;
    o["mean_query_seconds"] = r.mean_query_seconds;
    o["index_bytes"] = r.index_bytes;
    rows.push_back(std::move(o));
  }
  j["doubling_ratios"] = report.doubling_ratios;
  j["bytes_ratios"] = report.bytes_ratios;
  return j;
}

void write_bench_csv(std::ostream& out, const BenchReport& report) {
  out << "n_passages,n_sentences,n_entities,n_queries,index_seconds,mean_query_seconds,index_bytes\n";
  for (const auto& r : report.rows)
    out << r.n_passages << ',' << r.n_sentences << ',' << r.n_entities << ',' << r.n_queries << ','
        << fixed(r.index_seconds, 6) << ',' << fixed(r.mean_query_seconds, 9) << ','
        << r.index_bytes << '\n';
}

std::string summary_line(const BenchReport& report) {
  std::string s = "sizes=";
  for (std::size_t i = 0; i < report.sizes.size(); ++i)
    s += (i ? "," : "") + std::to_string(report.sizes[i]);
  s += " doubling_ratios=";
  for (std::size_t i = 0; i < report.doubling_ratios.size(); ++i)
    s += (i ? "," : "") + fixed(report.doubling_ratios[i], 3);
  s += " bytes_ratios=";
  for (std::size_t i = 0; i < report.bytes_ratios.size(); ++i)
    s += (i ? "," : "") + fixed(report.bytes_ratios[i], 3);
  return s;
}

}  // namespace linearrag
