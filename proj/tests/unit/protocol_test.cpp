#include <cstdlib>
#include <fstream>
#include <limits>

#include "gtest/gtest.h"

#include "linearrag/app_config.hpp"
#include "linearrag/error.hpp"
#include "linearrag/protocol.hpp"
#include "test_support.hpp"

using namespace linearrag;
using nlohmann::json;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::io;
}

}  // namespace

TEST(RetrievalJson, RoundTripAndOverlay) {
  RetrievalConfig c;
  c.delta = std::numeric_limits<double>::infinity();
  c.top_k = 9;
  c.fallback = Fallback::empty;
  const auto j = to_json(c);
  EXPECT_EQ(j.at("delta"), "inf");
  EXPECT_EQ(retrieval_config_from_json(json::parse(j.dump())), c);

  RetrievalConfig base;
  base.lambda = 0.3;
  const auto over = retrieval_config_from_json(json{{"max_hops", 2}}, base);
  EXPECT_EQ(over.max_hops, 2u);
  EXPECT_DOUBLE_EQ(over.lambda, 0.3);
}

TEST(RetrievalJson, Strictness) {
  EXPECT_EQ(code_of([] { retrieval_config_from_json(json{{"alpha", 1}}); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { retrieval_config_from_json(json{{"top_k", -1}}); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { retrieval_config_from_json(json{{"top_k", 1.5}}); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { retrieval_config_from_json(json{{"damping", "high"}}); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { retrieval_config_from_json(json{{"damping", 1.2}}); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { retrieval_config_from_json(json{{"fallback", "none"}}); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { retrieval_config_from_json(json::array()); }), ErrorCode::config);
}

TEST(QueryRequestTest, ParsesAndResolves) {
  const auto req = parse_query_request(R"({"query":"Who?","k":3,"overrides":{"max_hops":1}})");
  EXPECT_EQ(req.query, "Who?");
  EXPECT_EQ(req.k, std::optional<std::size_t>(3));
  RetrievalConfig base;
  base.top_k = 7;
  const auto cfg = req.resolve(base);
  EXPECT_EQ(cfg.top_k, 3u);
  EXPECT_EQ(cfg.max_hops, 1u);
  EXPECT_DOUBLE_EQ(cfg.delta, base.delta);

  const auto bare = parse_query_request(R"({"query":"x"})");
  EXPECT_FALSE(bare.k);
  EXPECT_EQ(bare.resolve(base).top_k, 7u);
  EXPECT_EQ(query_request_from_json(json::parse(to_json(req).dump())), req);
}

TEST(QueryRequestTest, Errors) {
  EXPECT_EQ(code_of([] { parse_query_request("{"); }), ErrorCode::parse);
  EXPECT_EQ(code_of([] { parse_query_request(R"({"k":3})"); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { parse_query_request(R"({"query":"x","k":0})"); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { parse_query_request(R"({"query":"x","extra":1})"); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { parse_query_request(R"({"query":"x","overrides":{"bogus":1}})"); }),
            ErrorCode::config);
  EXPECT_EQ(code_of([] { parse_query_request(R"({"query":7})"); }), ErrorCode::config);
}

TEST(QueryResponseTest, BuiltFromRankingAndRoundTrips) {
  const TriGraph g = testsupport::graph_of({"Alder met Birch.", "Cedar waits."});
  RankedPassages ranked;
  ranked.items = {{1, 0.75, {2}}, {0, 0.25, {1, 0}}};
  ranked.hops_used = 2;
  const auto resp = make_response(ranked, g);
  ASSERT_EQ(resp.items.size(), 2u);
  EXPECT_EQ(resp.items[0].doc_key, "passage-1");
  EXPECT_EQ(resp.items[0].contributing_entities, (std::vector<std::string>{"cedar"}));
  EXPECT_EQ(resp.items[1].contributing_entities, (std::vector<std::string>{"birch", "alder"}));
  EXPECT_EQ(resp.hops_used, 2u);
  EXPECT_FALSE(resp.fallback_used);

  const auto j = to_json(resp);
  EXPECT_EQ(j.dump(),
            R"({"items":[{"passage_id":1,"doc_key":"passage-1","score":0.75,"contributing_entities":["cedar"]},)"
            R"({"passage_id":0,"doc_key":"passage-0","score":0.25,"contributing_entities":["birch","alder"]}],)"
            R"("hops_used":2,"fallback_used":false})");
  EXPECT_EQ(query_response_from_json(json::parse(j.dump())), resp);

  auto extra = json::parse(j.dump());
  extra["note"] = 1;
  EXPECT_EQ(code_of([&] { query_response_from_json(extra); }), ErrorCode::parse);
  auto missing = json::parse(j.dump());
  missing["items"][0].erase("score");
  EXPECT_EQ(code_of([&] { query_response_from_json(missing); }), ErrorCode::parse);
}

TEST(AppConfigTest, DefaultsAndRelativePaths) {
  const auto cfg = app_config_from_json(json::object(), "/base");
  EXPECT_FALSE(cfg.corpus_path);
  EXPECT_FALSE(cfg.encoder_set);
  EXPECT_EQ(cfg.log_level, "warn");
  EXPECT_EQ(cfg.retrieval, RetrievalConfig{});

  const auto j = json::parse(R"({
    "corpus_path": "data/c.jsonl", "index_dir": "/abs/idx",
    "extractor": {"id": "caps-run", "stopwords": ["the"]},
    "encoder": {"id": "hash", "dim": 32, "seed": 5},
    "retrieval": {"delta": 0.5},
    "log_level": "info"})");
  const auto full = app_config_from_json(j, "/base");
  EXPECT_EQ(*full.corpus_path, std::filesystem::path("/base/data/c.jsonl"));
  EXPECT_EQ(*full.index_dir, std::filesystem::path("/abs/idx"));
  EXPECT_EQ(full.extractor.stopwords, (std::vector<std::string>{"the"}));
  EXPECT_TRUE(full.encoder_set);
  EXPECT_EQ(full.encoder.dim, 32u);
  EXPECT_EQ(full.encoder.seed, 5u);
  EXPECT_DOUBLE_EQ(full.retrieval.delta, 0.5);
  EXPECT_EQ(full.log_level, "info");

  const auto again = app_config_from_json(json::parse(to_json(full).dump()), "/elsewhere");
  EXPECT_EQ(again.corpus_path, full.corpus_path);
  EXPECT_EQ(again.retrieval, full.retrieval);
  EXPECT_EQ(again.encoder.dim, 32u);
}

TEST(AppConfigTest, Strictness) {
  auto code = [](const char* text) { return code_of([&] { app_config_from_json(json::parse(text)); }); };
  EXPECT_EQ(code(R"({"corpus":"x"})"), ErrorCode::config);
  EXPECT_EQ(code(R"({"encoder":{"dims":3}})"), ErrorCode::config);
  EXPECT_EQ(code(R"({"encoder":{"dim":0}})"), ErrorCode::config);
  EXPECT_EQ(code(R"({"encoder":{"id":"bert"}})"), ErrorCode::config);
  EXPECT_EQ(code(R"({"extractor":{"id":"spacy"}})"), ErrorCode::config);
  EXPECT_EQ(code(R"({"extractor":{"stopwords":"the"}})"), ErrorCode::config);
  EXPECT_EQ(code(R"({"log_level":"loud"})"), ErrorCode::config);
  EXPECT_EQ(code(R"({"retrieval":{"top_k":0}})"), ErrorCode::config);
  EXPECT_EQ(code(R"([])"), ErrorCode::config);
}

TEST(AppConfigTest, FileLoading) {
  testsupport::TempDir dir;
  EXPECT_EQ(code_of([&] { load_app_config(dir / "none.json"); }), ErrorCode::io);
  {
    std::ofstream(dir / "bad.json") << "{ nope";
    std::ofstream(dir / "ok.json") << R"({"corpus_path":"c.jsonl"})";
  }
  EXPECT_EQ(code_of([&] { load_app_config(dir / "bad.json"); }), ErrorCode::parse);
  EXPECT_EQ(*load_app_config(dir / "ok.json").corpus_path, dir / "c.jsonl");
}

TEST(AppConfigTest, EnvironmentOverridesLogLevel) {
  AppConfig cfg;
  cfg.log_level = "info";
  ::setenv("LINEARRAG_LOG", "error", 1);
  apply_log_level(cfg);
  EXPECT_EQ(cfg.log_level, "error");
  ::setenv("LINEARRAG_LOG", "chatty", 1);
  EXPECT_EQ(code_of([&] { apply_log_level(cfg); }), ErrorCode::config);
  ::unsetenv("LINEARRAG_LOG");
  cfg.log_level = "warn";
  apply_log_level(cfg);
  EXPECT_EQ(cfg.log_level, "warn");
}
