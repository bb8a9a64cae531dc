#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "gtest/gtest.h"

#include "linearrag/error.hpp"
#include "linearrag/protocol.hpp"
#include "linearrag/retrieval.hpp"
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
  return ErrorCode::config;
}

std::vector<PassageRecord> records_from(const json& passages) {
  std::vector<PassageRecord> out;
  for (const auto& p : passages) {
    PassageRecord r;
    r.doc_key = p.at("doc_key").get<std::string>();
    if (p.contains("title")) r.title = p.at("title").get<std::string>();
    r.text = p.at("text").get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

void expect_all_near(const std::vector<double>& got, const json& want, double tol, const char* what) {
  const auto w = want.get<std::vector<double>>();
  ASSERT_EQ(got.size(), w.size()) << what;
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(got[i], w[i], tol) << what << " @" << i;
}

RetrievalConfig tight(RetrievalConfig cfg = {}) {
  cfg.ppr_tol = 1e-13;
  cfg.ppr_max_iters = 20000;
  return cfg;
}

struct ChainFixture : ::testing::Test {
  json fx = testsupport::read_json(testsupport::data_path("chain_fixture.json"));
  std::unique_ptr<Extractor> extractor = make_extractor({});
  std::unique_ptr<Encoder> encoder =
      make_encoder({"hash", fx.at("dim").get<std::size_t>(), fx.at("seed").get<std::uint64_t>(), {}});
  TriGraph graph = build(make_corpus(records_from(fx.at("passages"))), *extractor);
  EmbeddingStore store = build_store(graph, *encoder);
  Retriever retriever{graph, store, *encoder};

  RetrievalConfig cfg() const {
    RetrievalConfig c = retrieval_config_from_json(fx.at("config"));
    return tight(c);
  }
};

}  // namespace

TEST(Config, DefaultsAndValidation) {
  const RetrievalConfig c;
  EXPECT_DOUBLE_EQ(c.entity_sim_threshold, 0.5);
  EXPECT_DOUBLE_EQ(c.delta, 4.0);
  EXPECT_DOUBLE_EQ(c.damping, 0.85);
  EXPECT_DOUBLE_EQ(c.lambda, 0.05);
  EXPECT_EQ(c.top_k, 5u);
  c.validate();
  RetrievalConfig bad;
  bad.damping = 1.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::config);
  bad = {};
  bad.top_k = 0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::config);
  bad = {};
  bad.delta = -1;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::config);
  bad = {};
  bad.delta = std::numeric_limits<double>::infinity();
  bad.validate();
  EXPECT_GT(RetrievalConfig::dense_only().entity_sim_threshold, 1.0);
}

TEST(InitialActivation, MasksAtThreshold) {
  QuerySimilarities sims{{0.9, 0.5, 0.2, 0.51}, {0.1}, {}};
  const auto s = initial_activation(sims, {});
  EXPECT_EQ(s.activation, (std::vector<double>{0.9, 0.0, 0.0, 0.51}));
  EXPECT_EQ(s.frontier, (std::vector<EntityId>{0, 3}));
  EXPECT_EQ(s.hop, 0u);
  EXPECT_EQ(s.trace[0].hop, 0);
  EXPECT_EQ(s.trace[1].hop, -1);

  QuerySimilarities low{{0.5, 0.1, -0.3}, {}, {}};
  const auto z = initial_activation(low, {});
  EXPECT_EQ(z.activation, (std::vector<double>{0, 0, 0}));
  EXPECT_TRUE(z.frontier.empty());
}

TEST_F(ChainFixture, SimilaritiesMatchOracle) {
  const auto sims = retriever.similarities(fx.at("query").get<std::string>());
  expect_all_near(sims.sentences, fx.at("sentence_sims"), 1e-6, "sentences");
  expect_all_near(sims.entities, fx.at("entity_sims"), 1e-6, "entities");
  expect_all_near(sims.passages, fx.at("passage_sims"), 1e-6, "passages");
  std::vector<std::string> names;
  for (const auto& r : graph.entities.records()) names.push_back(r.canonical);
  EXPECT_EQ(names, fx.at("entities").get<std::vector<std::string>>());
}

TEST_F(ChainFixture, ActivationPerHopCap) {
  const auto query = fx.at("query").get<std::string>();
  const auto& snaps = fx.at("activation_by_hop_cap");
  for (std::size_t cap = 0; cap < snaps.size(); ++cap) {
    RetrievalConfig c = cfg();
    c.max_hops = cap;
    const auto state = retriever.activate(query, c);
    expect_all_near(state.activation, snaps[cap], 1e-6, "activation");
    EXPECT_LE(state.hop, cap);
  }
  const auto final_state = retriever.activate(query, cfg());
  EXPECT_EQ(final_state.hop, fx.at("hops").get<std::size_t>());
}

TEST_F(ChainFixture, SeedsAndImportanceMatchOracle) {
  const auto query = fx.at("query").get<std::string>();
  const auto c = cfg();
  const auto sims = retriever.similarities(query);
  const auto state = activate(sims, graph, c);
  const auto seeds = passage_seed_scores(state, graph, sims.passages, {}, c);
  expect_all_near(seeds, fx.at("passage_seeds"), 1e-6, "seeds");
  const auto pr = ppr(graph.contain, state.activation, seeds, c);
  expect_all_near(pr.importance, fx.at("importance"), 1e-6, "importance");
}

TEST_F(ChainFixture, TwoHopChainTerminatesAtHopTwo) {
  const auto& two = fx.at("two_hop");
  const TriGraph g = build(make_corpus(records_from(two.at("passages"))), *extractor);
  const EmbeddingStore st = build_store(g, *encoder);
  const Retriever r(g, st, *encoder);
  const auto query = fx.at("query").get<std::string>();
  RetrievalConfig c;
  c.delta = 0.0;
  const auto& caps = two.at("by_hop_cap");
  for (std::size_t cap = 0; cap < caps.size(); ++cap) {
    c.max_hops = cap;
    const auto s = r.activate(query, c);
    expect_all_near(s.activation, caps[cap].at("activation"), 1e-6, "two-hop");
    EXPECT_EQ(s.hop, caps[cap].at("hops").get<std::size_t>());
  }
  c.max_hops = 4;
  const auto s = r.activate(query, c);
  EXPECT_EQ(s.hop, 2u);
  // path products: a_B = sigma_0 a_A, a_C = sigma_1 a_B
  const auto sims = r.similarities(query);
  EXPECT_DOUBLE_EQ(s.activation[1], sims.sentences[0] * s.activation[0]);
  EXPECT_DOUBLE_EQ(s.activation[2], sims.sentences[1] * s.activation[1]);
  EXPECT_EQ(s.trace[1].hop, 1);
  EXPECT_EQ(s.trace[1].sentence, std::optional<SentenceId>(0));
  EXPECT_EQ(s.trace[2].hop, 2);
  EXPECT_EQ(s.trace[2].sentence, std::optional<SentenceId>(1));
  EXPECT_EQ(s.trace[3].hop, -1);
}

TEST(Propagate, InfiniteDeltaIsPureTermination) {
  const TriGraph g = testsupport::graph_of({"Alder met Birch.", "Birch met Cedar."});
  QuerySimilarities sims{{0.9, 0.0, 0.0}, {0.8, 0.7}, {0.0, 0.0}};
  RetrievalConfig c;
  c.delta = std::numeric_limits<double>::infinity();
  const auto init = initial_activation(sims, c);
  const auto next = propagate(init, g, c);
  EXPECT_EQ(next.activation, init.activation);
  EXPECT_TRUE(next.frontier.empty());
  EXPECT_EQ(next.hop, 0u);
  const auto done = activate(sims, g, c);
  EXPECT_EQ(done.activation, init.activation);
  EXPECT_EQ(done.hop, 0u);
}

TEST(Propagate, SingleSentenceOneTermSum) {
  const TriGraph g = testsupport::graph_of({"Alder met Birch."});
  ActivationState s;
  s.activation = {0.7, 0.0};
  s.sentence_relevance = {0.3};
  s.frontier = {0};
  s.trace.resize(2);
  RetrievalConfig c;
  c.delta = 0.0;
  const auto next = propagate(s, g, c);
  EXPECT_EQ(next.activation[1], 0.3 * 0.7);
  EXPECT_EQ(next.activation[0], 0.7);
  EXPECT_EQ(next.frontier, (std::vector<EntityId>{1}));
  EXPECT_EQ(next.hop, 1u);
}

TEST(Propagate, EmptyFrontierIsNoOp) {
  const TriGraph g = testsupport::graph_of({"Alder met Birch."});
  ActivationState s;
  s.activation = {0.0, 0.0};
  s.sentence_relevance = {0.3};
  s.trace.resize(2);
  EXPECT_EQ(propagate(s, g, {}), s);
}

TEST(Activate, ZeroHopsEqualsInitial) {
  const TriGraph g = testsupport::graph_of({"Alder met Birch.", "Birch met Cedar."});
  QuerySimilarities sims{{0.9, 0.0, 0.0}, {0.8, 0.7}, {0.0, 0.0}};
  RetrievalConfig c;
  c.delta = 0;
  c.max_hops = 0;
  auto init = initial_activation(sims, c);
  auto out = activate(sims, g, c);
  init.frontier.clear();
  EXPECT_EQ(out, init);
}

TEST(Seeds, ClosedForms) {
  const TriGraph g = testsupport::graph_of({"Alder is here.", "nothing here."});
  ActivationState s;
  s.activation = {1.0};
  RetrievalConfig c;
  c.lambda = 0.0;
  const std::vector<double> sims{0.4, 0.9};
  const auto seeds = passage_seed_scores(s, g, sims, {}, c);
  EXPECT_DOUBLE_EQ(seeds[0], std::log(1.0 + std::log(2.0)));
  EXPECT_NEAR(seeds[0], 0.5266, 1e-4);
  EXPECT_EQ(seeds[1], 0.0);

  c.lambda = 0.05;
  c.passage_weight = 2.0;
  const std::vector<double> neg{-0.4, 0.9};
  const auto mixed = passage_seed_scores(s, g, neg, EntityLevels{{2.0}}, c);
  EXPECT_DOUBLE_EQ(mixed[0], 2.0 * std::log(1.0 + std::log(2.0) / 2.0));
  EXPECT_DOUBLE_EQ(mixed[1], 2.0 * 0.05 * 0.9);

  EXPECT_EQ(code_of([&] { passage_seed_scores(s, g, sims, EntityLevels{{0.5}}, c); }), ErrorCode::config);
}

TEST(Ppr, TwoNodeClosedForm) {
  const auto contain = SparseBinaryMatrix::from_entries(1, 1, {{0, 0}});
  const double d = 0.85;
  const auto r = ppr(contain, std::vector<double>{0.0}, std::vector<double>{1.0}, tight());
  EXPECT_NEAR(r.importance[0], 1.0 / (1.0 + d), 1e-8);
  EXPECT_NEAR(r.importance[1], d / (1.0 + d), 1e-8);
}

TEST(Ppr, VanishingDampingReturnsReset) {
  const auto contain = testsupport::random_bipartite(4, 4, 3, 0.5);
  RetrievalConfig c = tight();
  c.damping = 1e-9;
  const std::vector<double> ps{1, 2, 0, 1}, es{0, 3, 1};
  const auto r = ppr(contain, es, ps, c);
  const std::vector<double> want{1 / 8.0, 2 / 8.0, 0, 1 / 8.0, 0, 3 / 8.0, 1 / 8.0};
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(r.importance[i], want[i], 1e-8);
}

TEST(Ppr, SixNodeMatchesDenseSolve) {
  // passages 0..2, entities 0..2; entity 2 and passage 2 isolated from each other
  const auto contain = SparseBinaryMatrix::from_entries(3, 3, {{0, 0}, {0, 1}, {1, 1}, {2, 2}});
  const std::vector<double> ps{0.3, 0.0, 0.2}, es{0.5, 0.1, 0.0};
  const auto r = ppr(contain, es, ps, tight());
  const Eigen::VectorXd want = testsupport::dense_ppr(contain, ps, es, 0.85);
  for (Eigen::Index i = 0; i < want.size(); ++i)
    EXPECT_NEAR(r.importance[static_cast<std::size_t>(i)], want(i), 1e-8);
}

TEST(Ppr, IsolatedNodeKeepsResetMass) {
  const auto contain = SparseBinaryMatrix::from_entries(2, 1, {{0, 0}});
  const std::vector<double> ps{0.0, 1.0}, es{1.0};
  const auto r = ppr(contain, es, ps, tight());
  EXPECT_NEAR(r.importance[1], 0.15 * 0.5, 1e-12);
}

TEST(Ppr, SeedErrors) {
  const auto contain = SparseBinaryMatrix::from_entries(1, 1, {{0, 0}});
  EXPECT_EQ(code_of([&] { ppr(contain, std::vector<double>{0.0}, std::vector<double>{0.0}, {}); }),
            ErrorCode::empty_seed);
  EXPECT_EQ(code_of([&] { ppr(contain, std::vector<double>{-1.0}, std::vector<double>{2.0}, {}); }),
            ErrorCode::config);
  EXPECT_EQ(code_of([&] { ppr(contain, std::vector<double>{1.0, 1.0}, std::vector<double>{2.0}, {}); }),
            ErrorCode::dim_mismatch);
}

TEST(Ppr, ResidualsNonIncreasingOnConnectedGraph) {
  const auto contain = SparseBinaryMatrix::from_entries(
      3, 3, {{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 2}, {2, 0}});
  const auto r = ppr(contain, std::vector<double>{1, 0, 0}, std::vector<double>{0, 0, 2}, tight());
  ASSERT_GT(r.residuals.size(), 3u);
  for (std::size_t i = 2; i < r.residuals.size(); ++i)
    EXPECT_LE(r.residuals[i], r.residuals[i - 1] * (1 + 1e-9) + 1e-15);
  double total = 0;
  for (double v : r.importance) total += v;
  EXPECT_NEAR(total, 1.0, 1e-9);  // no dangling nodes, no leakage
}

TEST(Rank, TiesByIdAndTruncation) {
  const std::vector<double> scores{0.2, 0.5, 0.2, 0.5, 0.1};
  EXPECT_EQ(rank_passages(scores, 3), (std::vector<PassageId>{1, 3, 0}));
  EXPECT_EQ(rank_passages(scores, 10), (std::vector<PassageId>{1, 3, 0, 2, 4}));
  EXPECT_TRUE(rank_passages({}, 3).empty());
}

TEST_F(ChainFixture, FallbackModes) {
  RetrievalConfig c = RetrievalConfig::dense_only();
  c.top_k = 10;
  const auto out = retriever.retrieve("Alder relates", c);
  EXPECT_TRUE(out.fallback_used);
  const auto sims = retriever.similarities("Alder relates");
  ASSERT_EQ(out.items.size(), graph.n_passages());
  const auto order = rank_passages(sims.passages, 10);
  for (std::size_t i = 0; i < order.size(); ++i) {
    EXPECT_EQ(out.items[i].passage_id, order[i]);
    EXPECT_EQ(out.items[i].score, sims.passages[order[i]]);
  }
  c.fallback = Fallback::empty;
  const auto empty = retriever.retrieve("Alder relates", c);
  EXPECT_TRUE(empty.empty_result);
  EXPECT_TRUE(empty.items.empty());
}

TEST_F(ChainFixture, RetrieveIsDeterministicAndThreadSafe) {
  const auto c = cfg();
  const auto first = retriever.retrieve("Alder relates", c);
  ASSERT_FALSE(first.fallback_used);
  ASSERT_EQ(first.items.size(), 4u);
  EXPECT_EQ(first.items[0].passage_id, 2u);
  const auto state = retriever.activate("Alder relates", c);
  EXPECT_EQ(first.items[0].contributing, (std::vector<EntityId>{0, 2}));
  for (const auto& item : first.items)
    for (std::size_t i = 1; i < item.contributing.size(); ++i)
      EXPECT_GE(state.activation[item.contributing[i - 1]], state.activation[item.contributing[i]]);
  std::vector<RankedPassages> results(4);
  std::vector<std::thread> threads;
  for (auto& slot : results) threads.emplace_back([&] { slot = retriever.retrieve("Alder relates", c); });
  for (auto& t : threads) t.join();
  for (const auto& r : results) EXPECT_EQ(r, first);
}

TEST(MultiHopSuite, RankingsMatchExhaustiveScoring) {
  const json config = testsupport::read_json(testsupport::data_path("multihop_config.json"));
  const json expected = testsupport::read_json(testsupport::data_path("multihop_expected.json"));
  const auto cfg = retrieval_config_from_json(config.at("retrieval"));
  const auto enc = make_encoder({"hash", config.at("encoder").at("dim").get<std::size_t>(),
                                 config.at("encoder").at("seed").get<std::uint64_t>(), {}});
  const auto ex = make_extractor({});
  const auto corpus = ingest(testsupport::data_path("multihop_corpus.jsonl")).corpus;
  const TriGraph g = build(corpus, *ex);
  const EmbeddingStore st = build_store(g, *enc);
  const Retriever r(g, st, *enc);
  for (const auto& q : expected.at("questions")) {
    const auto question = q.at("question").get<std::string>();
    const auto full = r.retrieve(question, cfg);
    const auto dense = r.retrieve(question, RetrievalConfig::dense_only(cfg));
    std::vector<std::string> got_full, got_dense;
    for (const auto& it : full.items) got_full.push_back(g.corpus.passages[it.passage_id].doc_key);
    for (const auto& it : dense.items) got_dense.push_back(g.corpus.passages[it.passage_id].doc_key);
    EXPECT_EQ(got_full, q.at("full_top").get<std::vector<std::string>>()) << question;
    EXPECT_EQ(got_dense, q.at("dense_top").get<std::vector<std::string>>()) << question;
    EXPECT_EQ(full.hops_used, q.at("hops").get<std::size_t>()) << question;
  }
}
