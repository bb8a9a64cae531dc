#include "linearrag/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "linearrag/app_config.hpp"
#include "linearrag/evalbench.hpp"
#include "linearrag/index.hpp"
#include "linearrag/protocol.hpp"
#include "linearrag/synthetic.hpp"

namespace linearrag {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::config:
    case ErrorCode::empty_seed:
      return 1;
    case ErrorCode::io:
    case ErrorCode::parse:
    case ErrorCode::empty_corpus:
    case ErrorCode::encoding:
      return 2;
    case ErrorCode::consistency:
    case ErrorCode::dim_mismatch:
    case ErrorCode::version_mismatch:
    case ErrorCode::digest_mismatch:
      return 3;
  }
  return 1;
}

namespace {

struct Options {
  std::string config_path;
  std::string corpus;
  std::string index_dir;

  bool force = false;
  std::string add_path;

  std::string query;
  std::string request_path;
  std::optional<std::size_t> k;
  bool json = false;
  std::string prompt_template;

  std::string qa_path;
  std::string out_path;
  std::string table_path;

  std::string sizes = "500,1000,2000,4000";
  std::optional<std::uint64_t> seed;
  std::size_t repeats = 3;
  std::size_t avg_sentences = 4;
  std::size_t entity_pool = 200;
  std::string work_dir;

  std::size_t passages = 100;
  std::string qa_out;
};

struct Context {
  Options opt;
  AppConfig config;
  std::ostream& out;
  std::ostream& err;
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

fs::path need_path(const std::optional<fs::path>& p, const char* what) {
  if (!p) throw Error(ErrorCode::config, std::string(what) + " is required (flag or config file)");
  return *p;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::io, "cannot write " + path.string());
  f << content;
  if (!f) throw Error(ErrorCode::io, "write failed for " + path.string());
}

void print_counts(const Context& ctx, const Index& index, double seconds) {
  const auto& g = index.graph;
  ctx.out << "passages=" << g.n_passages() << " sentences=" << g.n_sentences()
          << " entities=" << g.n_entities() << " contain_nnz=" << g.contain.nnz()
          << " mention_nnz=" << g.mention.nnz() << " seconds=" << fixed(seconds, 3) << '\n';
}

void log_warnings(const IngestResult& r) {
  for (const auto& w : r.warnings) spdlog::warn("{}", w);
  if (r.skipped) spdlog::warn("skipped {} malformed records", r.skipped);
}

bool has_index(const fs::path& dir) { return fs::exists(dir / "manifest.json"); }

int cmd_index(Context& ctx) {
  const fs::path dir = need_path(ctx.config.index_dir, "index_dir");
  const auto extractor = make_extractor(ctx.config.extractor);
  const auto t0 = Clock::now();

  if (!ctx.opt.add_path.empty()) {
    if (!has_index(dir)) throw Error(ErrorCode::io, "no index at " + dir.string() + " to extend");
    Index index = load_index(dir);
    EncoderContract contract = ctx.config.encoder;
    if (!ctx.config.encoder_set) {
      contract.id = index.embedder.id;
      contract.dim = index.embedder.dim;
      contract.seed = index.embedder.seed;
    }
    const auto encoder = make_encoder(contract);
    IngestOptions io;
    io.first_passage_id = static_cast<PassageId>(index.graph.n_passages());
    io.first_sentence_id = static_cast<SentenceId>(index.graph.n_sentences());
    io.previous_digest = index.graph.corpus_digest();
    io.allow_empty = true;
    const IngestResult delta = ingest(ctx.opt.add_path, InputFormat::jsonl, io);
    log_warnings(delta);
    add_to_index(index, delta.corpus, *extractor, *encoder);
    const fs::path staging = dir.string() + ".staging";
    fs::remove_all(staging);
    save_index(index, staging);
    fs::remove_all(dir);
    fs::rename(staging, dir);
    ctx.out << "added=" << delta.corpus.passages.size() << ' ';
    print_counts(ctx, index, std::chrono::duration<double>(Clock::now() - t0).count());
    return 0;
  }

  if (has_index(dir) && !ctx.opt.force) {
    ctx.err << "refusing to overwrite existing index at " << dir.string() << " (use --force)\n";
    return 1;
  }
  const auto encoder = make_encoder(ctx.config.encoder);
  const IngestResult ingested = ingest(need_path(ctx.config.corpus_path, "corpus_path"));
  log_warnings(ingested);
  const Index index = build_index(ingested.corpus, *extractor, *encoder);
  if (fs::exists(dir)) {
    for (const char* name : {"manifest.json", "passages.jsonl", "sentences.jsonl", "entities.tsv",
                             "contain.coo", "mention.coo", "occurrence.tsv", "entities.vec",
                             "sentences.vec", "passages.vec"})
      fs::remove(dir / name);
  }
  save_index(index, dir);
  print_counts(ctx, index, std::chrono::duration<double>(Clock::now() - t0).count());
  return 0;
}

struct Loaded {
  Index index;
  std::unique_ptr<Encoder> encoder;
};

Loaded open_index(const Context& ctx) {
  const fs::path dir = need_path(ctx.config.index_dir, "index_dir");
  if (!has_index(dir)) throw Error(ErrorCode::io, "no index at " + dir.string());
  Loaded l{load_index(dir), nullptr};
  EncoderContract contract = ctx.config.encoder;
  if (!ctx.config.encoder_set) {
    contract.id = l.index.embedder.id;
    contract.dim = l.index.embedder.dim;
    contract.seed = l.index.embedder.seed;
  }
  l.encoder = make_encoder(contract);
  require_encoder(l.index, *l.encoder);
  return l;
}

int cmd_query(Context& ctx) {
  QueryRequest request;
  if (!ctx.opt.request_path.empty()) {
    std::ifstream f(ctx.opt.request_path);
    if (!f) throw Error(ErrorCode::io, "cannot read " + ctx.opt.request_path);
    std::stringstream ss;
    ss << f.rdbuf();
    request = parse_query_request(ss.str());
    if (!ctx.opt.query.empty()) throw Error(ErrorCode::config, "give either a query or --request");
  } else {
    if (ctx.opt.query.empty()) throw Error(ErrorCode::config, "query text is required");
    request.query = ctx.opt.query;
  }
  if (ctx.opt.k) request.k = *ctx.opt.k;
  const RetrievalConfig cfg = request.resolve(ctx.config.retrieval);

  const Loaded l = open_index(ctx);
  const Retriever retriever(l.index.graph, l.index.store, *l.encoder);
  const RankedPassages ranked = retriever.retrieve(request.query, cfg);
  const QueryResponse response = make_response(ranked, l.index.graph);

  if (!ctx.opt.prompt_template.empty()) {
    ctx.out << assemble_prompt(request.query, ranked, l.index.graph, ctx.opt.prompt_template) << '\n';
    return 0;
  }
  if (ctx.opt.json) {
    ctx.out << to_json(response).dump() << '\n';
    return 0;
  }
  if (ranked.empty_result) ctx.out << "(no entity activated; empty result)\n";
  for (std::size_t i = 0; i < response.items.size(); ++i) {
    const auto& item = response.items[i];
    ctx.out << (i + 1) << '\t' << fixed(item.score, 6) << '\t' << item.doc_key << '\t';
    for (std::size_t e = 0; e < item.contributing_entities.size(); ++e)
      ctx.out << (e ? "; " : "") << item.contributing_entities[e];
    ctx.out << '\n';
  }
  ctx.out << "hops_used=" << response.hops_used
          << " fallback_used=" << (response.fallback_used ? "true" : "false") << '\n';
  return 0;
}

int cmd_eval(Context& ctx) {
  const auto examples = load_qa(ctx.opt.qa_path);
  RetrievalConfig cfg = ctx.config.retrieval;
  if (ctx.opt.k) cfg.top_k = *ctx.opt.k;
  cfg.validate();
  const Loaded l = open_index(ctx);
  const Retriever retriever(l.index.graph, l.index.store, *l.encoder);
  const EvalReport report = evaluate(retriever, examples, cfg);
  if (!ctx.opt.out_path.empty()) write_file(ctx.opt.out_path, to_json(report).dump(2) + "\n");
  if (!ctx.opt.table_path.empty()) {
    std::ostringstream csv;
    write_eval_csv(csv, report);
    write_file(ctx.opt.table_path, csv.str());
  }
  for (const auto& key : report.unresolved_gold_keys)
    ctx.err << "unresolved gold key: " << key << '\n';
  ctx.out << summary_line(report) << '\n';
  return 0;
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
  std::vector<std::size_t> sizes;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      sizes.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::config, "bad --sizes entry '" + item + "'");
    }
  }
  return sizes;
}

int cmd_bench(Context& ctx) {
  BenchOptions b;
  b.sizes = parse_sizes(ctx.opt.sizes);
  b.seed = ctx.opt.seed.value_or(1);
  b.repeats = ctx.opt.repeats;
  b.avg_sentences = ctx.opt.avg_sentences;
  b.entity_pool = ctx.opt.entity_pool;
  b.extractor = ctx.config.extractor;
  b.encoder = ctx.config.encoder;
  b.retrieval = ctx.config.retrieval;
  b.work_dir = ctx.opt.work_dir;
  const BenchReport report = bench_scaling(b);
  if (!ctx.opt.out_path.empty()) write_file(ctx.opt.out_path, to_json(report).dump(2) + "\n");
  if (!ctx.opt.table_path.empty()) {
    std::ostringstream csv;
    write_bench_csv(csv, report);
    write_file(ctx.opt.table_path, csv.str());
  }
  ctx.out << summary_line(report) << '\n';
  return 0;
}

int cmd_inspect(Context& ctx) {
  const fs::path dir = need_path(ctx.config.index_dir, "index_dir");
  (void)read_manifest(dir);  // validates version
  std::ifstream f(dir / "manifest.json", std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot read manifest in " + dir.string());
  ctx.out << f.rdbuf();
  return 0;
}

int cmd_generate(Context& ctx) {
  SyntheticParams p;
  p.n_passages = ctx.opt.passages;
  p.avg_sentences = ctx.opt.avg_sentences;
  p.entity_pool = ctx.opt.entity_pool;
  p.seed = ctx.opt.seed.value_or(1);
  const SyntheticCorpus synth = generate_synthetic_corpus(p);
  const fs::path corpus = need_path(ctx.config.corpus_path, "corpus_path");
  std::ostringstream c;
  write_corpus_jsonl(c, synth.records);
  write_file(corpus, c.str());
  if (!ctx.opt.qa_out.empty()) {
    std::ostringstream q;
    write_qa_jsonl(q, synth.qa);
    write_file(ctx.opt.qa_out, q.str());
  }
  ctx.out << "passages=" << synth.records.size() << " questions=" << synth.qa.size() << '\n';
  return 0;
}

/// Routes logging to `err` for the duration of one command.
class LoggerScope {
 public:
  explicit LoggerScope(std::ostream& err)
      : previous_(spdlog::default_logger()), level_(spdlog::get_level()) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    sink->set_pattern("[%l] %v");
    spdlog::set_default_logger(std::make_shared<spdlog::logger>("linearrag", sink));
  }
  ~LoggerScope() {
    spdlog::set_default_logger(previous_);
    spdlog::set_level(level_);
  }
  LoggerScope(const LoggerScope&) = delete;
  LoggerScope& operator=(const LoggerScope&) = delete;

 private:
  std::shared_ptr<spdlog::logger> previous_;
  spdlog::level::level_enum level_;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context ctx{{}, {}, out, err};
  Options& o = ctx.opt;

  CLI::App app{"LinearRAG retrieval engine"};
  app.require_subcommand(1);
  app.add_option("--config", o.config_path, "JSON configuration file");
  app.add_option("--corpus", o.corpus, "Corpus JSONL (overrides corpus_path)");
  app.add_option("--index", o.index_dir, "Index directory (overrides index_dir)");

  auto* index = app.add_subcommand("index", "Build or extend an index");
  index->add_flag("--force", o.force, "Overwrite an existing index");
  index->add_option("--add", o.add_path, "Append the passages of this JSONL file");

  auto* query = app.add_subcommand("query", "Retrieve passages for a question");
  query->add_option("text", o.query, "Question text");
  query->add_option("--request", o.request_path, "Query request JSON file");
  query->add_option("--k", o.k, "Number of passages")->check(CLI::PositiveNumber);
  query->add_flag("--json", o.json, "Print the structured response");
  query->add_option("--prompt", o.prompt_template, "Print a prompt (qa | context-only) instead");

  auto* eval = app.add_subcommand("eval", "Evaluate against a QA fixture");
  eval->add_option("--qa", o.qa_path, "QA JSONL file")->required();
  eval->add_option("--k", o.k, "Number of passages")->check(CLI::PositiveNumber);
  eval->add_option("--out", o.out_path, "JSON report path");
  eval->add_option("--table", o.table_path, "CSV table path");

  auto* bench = app.add_subcommand("bench", "Scaling benchmark on synthetic corpora");
  bench->add_option("--sizes", o.sizes, "Comma-separated corpus sizes");
  bench->add_option("--seed", o.seed, "Generator seed");
  bench->add_option("--repeats", o.repeats, "Index runs per size (fastest kept)");
  bench->add_option("--avg-sentences", o.avg_sentences, "Sentences per passage");
  bench->add_option("--entity-pool", o.entity_pool, "Filler entity names");
  bench->add_option("--work-dir", o.work_dir, "Scratch directory");
  bench->add_option("--out", o.out_path, "JSON report path");
  bench->add_option("--table", o.table_path, "CSV table path");

  auto* inspect = app.add_subcommand("inspect", "Print the index manifest");

  auto* generate = app.add_subcommand("generate", "Write a synthetic corpus and QA file");
  generate->add_option("--passages", o.passages, "Number of passages");
  generate->add_option("--seed", o.seed, "Generator seed");
  generate->add_option("--avg-sentences", o.avg_sentences, "Sentences per passage");
  generate->add_option("--entity-pool", o.entity_pool, "Filler entity names");
  generate->add_option("--qa-out", o.qa_out, "QA JSONL output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  LoggerScope logging(err);
  try {
    if (!o.config_path.empty()) ctx.config = load_app_config(o.config_path);
    if (!o.corpus.empty()) ctx.config.corpus_path = o.corpus;
    if (!o.index_dir.empty()) ctx.config.index_dir = o.index_dir;
    apply_log_level(ctx.config);

    if (index->parsed()) return cmd_index(ctx);
    if (query->parsed()) return cmd_query(ctx);
    if (eval->parsed()) return cmd_eval(ctx);
    if (bench->parsed()) return cmd_bench(ctx);
    if (inspect->parsed()) return cmd_inspect(ctx);
    if (generate->parsed()) return cmd_generate(ctx);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace linearrag
