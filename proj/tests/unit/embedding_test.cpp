#include <cmath>
#include <fstream>

#include "gtest/gtest.h"

#include "linearrag/embedding.hpp"
#include "linearrag/error.hpp"
#include "linearrag/synthetic.hpp"
#include "test_support.hpp"

using namespace linearrag;
namespace fs = std::filesystem;

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

}  // namespace

TEST(HashEncoder, MatchesGoldenVectors) {
  const auto golden = testsupport::read_json(testsupport::data_path("hash_golden.json"));
  for (const auto& c : golden.at("cases")) {
    const auto text = c.at("text").get<std::string>();
    const auto v = hash_encode(text, c.at("dim").get<std::size_t>(), c.at("seed").get<std::uint64_t>());
    const auto want = c.at("vector").get<std::vector<float>>();
    ASSERT_EQ(v.size(), want.size()) << text;
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_FLOAT_EQ(v[i], want[i]) << text << " @" << i;
  }
  EXPECT_EQ(hash_bytes("paris", 42), golden.at("bucket_hashes").at("paris@42").get<std::uint64_t>());
  EXPECT_EQ(hash_bytes("", 0), golden.at("bucket_hashes").at("empty@0").get<std::uint64_t>());
}

TEST(HashEncoder, UnitNormAndDeterministic) {
  for (const char* text : {"", "...", "a", "Some longer text with Many words, and punctuation!"}) {
    const auto v = hash_encode(text, 128, 7);
    double n = 0;
    for (float x : v) n += static_cast<double>(x) * x;
    EXPECT_NEAR(std::sqrt(n), 1.0, 1e-6) << text;
    EXPECT_EQ(v, hash_encode(text, 128, 7));
  }
}

TEST(HashEncoder, WordOrderAndCaseDoNotMatter) {
  EXPECT_EQ(hash_encode("Paris is big.", 64, 1), hash_encode("big IS paris", 64, 1));
  EXPECT_EQ(hash_tokens("Hello, World!"), (std::vector<std::string>{"hello", "world"}));
}

TEST(HashEncoder, CosineOfOverlappingBags) {
  const auto a = hash_encode("paris big", 256, 7);
  const auto b = hash_encode("paris small", 256, 7);
  const auto c = hash_encode("rome small", 256, 7);
  EXPECT_NEAR(cosine(a, b), 0.5, 1e-6);
  EXPECT_NEAR(cosine(a, c), 0.0, 1e-7);
  EXPECT_NEAR(cosine(a, a), 1.0, 1e-6);
}

TEST(HashEncoder, CosineLengthMismatchThrows) {
  const auto a = hash_encode("x", 16, 1), b = hash_encode("x", 32, 1);
  EXPECT_EQ(code_of([&] { cosine(a, b); }), ErrorCode::dim_mismatch);
}

TEST(Encoder, Factory) {
  EncoderContract c;
  c.id = "bogus";
  EXPECT_EQ(code_of([&] { make_encoder(c); }), ErrorCode::config);
  c.id = "hash";
  c.dim = 4;
  EXPECT_EQ(code_of([&] { make_encoder(c); }), ErrorCode::config);
  c.dim = 32;
  const auto enc = make_encoder(c);
  EXPECT_EQ(enc->encode("Paris"), hash_encode("Paris", 32, c.seed));
}

TEST(Encoder, ExternalLookupTable) {
  testsupport::TempDir tmp;
  {
    std::ofstream f(tmp / "vec.jsonl");
    f << "{\"text\":\"alpha\",\"vector\":[3,4]}\n{\"text\":\"beta\",\"vector\":[0,2]}\n";
  }
  EncoderContract c;
  c.id = "external";
  c.dim = 2;
  c.vectors_path = tmp / "vec.jsonl";
  const auto enc = make_encoder(c);
  const auto v = enc->encode("alpha");
  EXPECT_FLOAT_EQ(v[0], 0.6f);
  EXPECT_FLOAT_EQ(v[1], 0.8f);
  EXPECT_EQ(code_of([&] { enc->encode("gamma"); }), ErrorCode::encoding);
  c.dim = 3;
  EXPECT_EQ(code_of([&] { make_encoder(c); }), ErrorCode::dim_mismatch);
}

TEST(VectorMatrix, AppendChecksShapeAndNorm) {
  VectorMatrix m(2);
  const std::vector<float> ok{0.6f, 0.8f}, longer{1.0f, 0.0f, 0.0f}, unnormed{1.0f, 1.0f};
  m.append(ok);
  EXPECT_EQ(m.rows(), 1u);
  EXPECT_EQ(code_of([&] { m.append(longer); }), ErrorCode::dim_mismatch);
  EXPECT_EQ(code_of([&] { m.append(unnormed); }), ErrorCode::encoding);
}

TEST(VectorFile, RoundTripAndDefects) {
  testsupport::TempDir tmp;
  VectorMatrix m(8);
  for (const char* t : {"one", "two", "three"}) m.append(hash_encode(t, 8, 5));
  write_vectors(tmp / "x.vec", m, "hash");
  std::string id;
  EXPECT_EQ(read_vectors(tmp / "x.vec", &id), m);
  EXPECT_EQ(id, "hash");

  const std::string bytes = testsupport::read_file(tmp / "x.vec");
  EXPECT_EQ(bytes.substr(0, 8), std::string("LRAGVEC\0", 8));
  EXPECT_EQ(bytes.size(), 8u + 4 + 4 + 8 + 4 + 4 + 3 * 8 * 4);

  std::ofstream(tmp / "short.vec", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  EXPECT_EQ(code_of([&] { read_vectors(tmp / "short.vec"); }), ErrorCode::consistency);
  std::ofstream(tmp / "long.vec", std::ios::binary) << bytes << "junk";
  EXPECT_EQ(code_of([&] { read_vectors(tmp / "long.vec"); }), ErrorCode::consistency);
  EXPECT_EQ(code_of([&] { read_vectors(tmp / "none.vec"); }), ErrorCode::io);
}

TEST(Store, BuildExtendAndCheck) {
  const auto synth = generate_synthetic_corpus({15, 3, 6, 2});
  const auto ex = make_extractor({});
  const auto enc = make_encoder({"hash", 32, 7, {}});
  const TriGraph full = build(synth.corpus(), *ex);
  const EmbeddingStore store = build_store(full, *enc);
  check_store(store, full);
  EXPECT_EQ(store.entities.rows(), full.n_entities());
  const auto v = enc->encode(full.entities[0].canonical);
  EXPECT_EQ(std::vector<float>(store.entities.row(0).begin(), store.entities.row(0).end()), v);

  const std::vector<PassageRecord> head(synth.records.begin(), synth.records.begin() + 6);
  const TriGraph partial = build(make_corpus(head), *ex);
  EmbeddingStore grown = build_store(partial, *enc);
  EXPECT_EQ(code_of([&] { check_store(grown, full); }), ErrorCode::consistency);
  extend_store(grown, full, *enc);
  EXPECT_EQ(grown, store);

  testsupport::TempDir tmp;
  save_store(store, tmp.path());
  EXPECT_EQ(load_store(tmp.path()), store);
}
