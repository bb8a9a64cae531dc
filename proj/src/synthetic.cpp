#include "linearrag/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>
#include <string_view>

#include "linearrag/error.hpp"
#include "linearrag/extraction.hpp"

namespace linearrag {

XorShift64Star::XorShift64Star(std::uint64_t seed) noexcept
    : state_(seed == 0 ? 0x9E3779B97F4A7C15ULL : seed) {}

std::uint64_t XorShift64Star::next() noexcept {
  std::uint64_t x = state_;
  x ^= x >> 12;
  x ^= x << 25;
  x ^= x >> 27;
  state_ = x;
  return x * 0x2545F4914F6CDD1DULL;
}

std::uint64_t XorShift64Star::below(std::uint64_t bound) noexcept {
  return bound == 0 ? 0 : next() % bound;
}

namespace {

constexpr std::array<std::string_view, 14> kOnsets{"b", "d", "f", "g", "k", "l", "m",
                                                   "n", "p", "r", "s", "t", "v", "z"};
constexpr std::array<std::string_view, 5> kVowels{"a", "e", "i", "o", "u"};
constexpr std::array<std::string_view, 6> kCodas{"n", "r", "l", "s", "k", "m"};

constexpr std::array<std::string_view, 6> kFiller{
    "{0} met {1} near the old harbor.",
    "{0} wrote a long letter to {1} about the harvest.",
    "{0} repaired the northern bridge while {1} watched.",
    "{0} visited the market with {1} last spring.",
    "{0} studied coastal maps for many years.",
    "{0} sold wool and grain to {1} every autumn.",
};

std::string mint_name(XorShift64Star& rng, std::size_t syllables) {
  std::string name;
  for (std::size_t i = 0; i < syllables; ++i) {
    name += kOnsets[rng.below(kOnsets.size())];
    name += kVowels[rng.below(kVowels.size())];
  }
  name += kCodas[rng.below(kCodas.size())];
  name[0] = static_cast<char>(name[0] - 'a' + 'A');
  return name;
}

/// Distinct names; `taken` guards against collisions across pools.
std::vector<std::string> mint_names(XorShift64Star& rng, std::size_t count, std::size_t syllables,
                                    std::set<std::string>& taken) {
  const auto& stop = default_stopwords();
  std::vector<std::string> out;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > count * 1000 + 1000) {
      ++syllables;  // namespace exhausted at this length
      attempts = 0;
    }
    std::string name = mint_name(rng, syllables);
    std::string lower = name;
    lower[0] = static_cast<char>(lower[0] - 'A' + 'a');
    if (std::find(stop.begin(), stop.end(), lower) != stop.end()) continue;
    if (!taken.insert(lower).second) continue;
    out.push_back(std::move(name));
  }
  return out;
}

std::string fill(std::string_view tmpl, const std::string& a, const std::string& b) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
      out += tmpl[i + 1] == '0' ? a : b;
      i += 2;
    } else {
      out += tmpl[i];
    }
  }
  return out;
}

std::string doc_key(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "syn-%06zu", i);
  return buf;
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticParams& params) {
  if (params.entity_pool < 3)
    throw Error(ErrorCode::config, "entity_pool must be >= 3 to plant a 2-hop chain");
  if (params.n_passages == 0 || params.avg_sentences == 0)
    throw Error(ErrorCode::config, "n_passages and avg_sentences must be positive");

  XorShift64Star rng(params.seed);
  const std::size_t n_chains = params.n_passages / 5;
  std::set<std::string> taken;
  const auto pool = mint_names(rng, params.entity_pool, 2, taken);
  const auto chain_names = mint_names(rng, n_chains * 3, 3, taken);

  SyntheticCorpus out;
  out.records.resize(params.n_passages);
  for (std::size_t c = 0; c < n_chains; ++c) {
    out.chains.push_back({chain_names[3 * c], chain_names[3 * c + 1], chain_names[3 * c + 2],
                          5 * c, 5 * c + 3});
  }

  const std::size_t lo = params.avg_sentences > 1 ? params.avg_sentences - 1 : 1;
  const std::size_t hi = params.avg_sentences + 1;
  for (std::size_t p = 0; p < params.n_passages; ++p) {
    auto& rec = out.records[p];
    rec.doc_key = doc_key(p);
    std::vector<std::string> sentences;
    const bool planted = (p % 5 == 0 || p % 5 == 3) && p / 5 < n_chains;
    std::size_t n = lo + rng.below(hi - lo + 1);
    if (planted && n > 1) --n;  // the chain sentence fills the last slot
    for (std::size_t s = 0; s < n; ++s) {
      const auto tmpl = kFiller[rng.below(kFiller.size())];
      const auto& x = pool[rng.below(pool.size())];
      auto y = pool[rng.below(pool.size())];
      if (y == x) y = pool[(std::find(pool.begin(), pool.end(), x) - pool.begin() + 1) % pool.size()];
      sentences.push_back(fill(tmpl, x, y));
    }
    if (p % 5 == 0 && p / 5 < n_chains) {
      const auto& ch = out.chains[p / 5];
      sentences.insert(sentences.begin() + static_cast<std::ptrdiff_t>(rng.below(sentences.size() + 1)),
                       ch.head + " trained " + ch.bridge + " as an apprentice.");
    } else if (p % 5 == 3 && p / 5 < n_chains) {
      const auto& ch = out.chains[p / 5];
      sentences.insert(sentences.begin() + static_cast<std::ptrdiff_t>(rng.below(sentences.size() + 1)),
                       ch.bridge + " later founded " + ch.tail + ".");
    }
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      if (s) rec.text += ' ';
      rec.text += sentences[s];
    }
  }
  for (const auto& ch : out.chains) {
    out.qa.push_back({"What did the apprentice of " + ch.head + " found?", ch.tail,
                      {*out.records[ch.first_passage].doc_key,
                       *out.records[ch.second_passage].doc_key}});
  }
  return out;
}

}  // namespace linearrag
