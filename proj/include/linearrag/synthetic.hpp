#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "linearrag/corpus.hpp"
#include "linearrag/evalbench.hpp"

namespace linearrag {

/// xorshift64* (shifts 12, 25, 27; multiplier 0x2545F4914F6CDD1D). A zero
/// seed is replaced by 0x9E3779B97F4A7C15 since zero is a fixed point.
class XorShift64Star {
 public:
  explicit XorShift64Star(std::uint64_t seed) noexcept;
  std::uint64_t next() noexcept;
  /// Value in [0, bound); plain modulo reduction.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t state_;
};

struct SyntheticParams {
  std::size_t n_passages = 100;
  std::size_t avg_sentences = 4;
  /// Names available to filler sentences. Chain entities are minted separately.
  std::size_t entity_pool = 50;
  std::uint64_t seed = 1;
};

struct PlantedChain {
  std::string head, bridge, tail;
  std::size_t first_passage = 0;   // mentions head and bridge
  std::size_t second_passage = 0;  // mentions bridge and tail
};

struct SyntheticCorpus {
  std::vector<PassageRecord> records;
  std::vector<QaExample> qa;
  std::vector<PlantedChain> chains;

  Corpus corpus() const { return make_corpus(records); }
};

/// One chain per five passages, planted at passages 5c and 5c + 3. Throws
/// Error(config) when entity_pool < 3 or any count is zero.
SyntheticCorpus generate_synthetic_corpus(const SyntheticParams& params);

}  // namespace linearrag
