#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linearrag/embedding.hpp"
#include "linearrag/trigraph.hpp"

namespace linearrag {

enum class Fallback { dense, empty };

struct RetrievalConfig {
  double entity_sim_threshold = 0.5;
  /// Pruning threshold on newly propagated entity mass.
  double delta = 4.0;
  std::size_t max_hops = 4;
  double damping = 0.85;
  double lambda = 0.05;
  double passage_weight = 1.0;
  std::size_t top_k = 5;
  double ppr_tol = 1e-8;
  std::size_t ppr_max_iters = 100;
  Fallback fallback = Fallback::dense;

  /// Throws Error(config) if any field is out of range.
  void validate() const;

  /// No entity can pass the threshold, so retrieval reduces to cosine ranking.
  static RetrievalConfig dense_only(RetrievalConfig base);
  static RetrievalConfig dense_only();

  friend bool operator==(const RetrievalConfig&, const RetrievalConfig&) = default;
};

struct ActivationTrace {
  /// Hop at which the entity first became active; -1 while inactive.
  int hop = -1;
  /// Sentence that carried the largest share of mass into the entity (none for query seeds).
  std::optional<SentenceId> sentence;

  friend bool operator==(const ActivationTrace&, const ActivationTrace&) = default;
};

struct ActivationState {
  std::vector<double> activation;          // per entity
  std::vector<double> sentence_relevance;  // per sentence, cosine to the query
  std::size_t hop = 0;
  std::vector<EntityId> frontier;  // sorted
  std::vector<ActivationTrace> trace;

  std::vector<EntityId> active_entities() const;

  friend bool operator==(const ActivationState&, const ActivationState&) = default;
};

/// Per-entity divisor in the passage seed. Empty means 1 for every entity.
struct EntityLevels {
  std::vector<double> levels;

  double level(EntityId e) const noexcept { return levels.empty() ? 1.0 : levels[e]; }
  /// Throws Error(config) unless empty or sized to n_entities with every level >= 1.
  void validate(std::size_t n_entities) const;
};

struct RankedItem {
  PassageId passage_id = 0;
  double score = 0.0;
  /// Activated entities contained in the passage, strongest first.
  std::vector<EntityId> contributing;

  friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

struct RankedPassages {
  std::vector<RankedItem> items;
  std::string query;
  std::size_t hops_used = 0;
  bool fallback_used = false;
  /// Set when no entity activated and the fallback is `empty`.
  bool empty_result = false;

  friend bool operator==(const RankedPassages&, const RankedPassages&) = default;
};

/// Query-vs-node similarities computed once per query.
struct QuerySimilarities {
  std::vector<double> entities;
  std::vector<double> sentences;
  std::vector<double> passages;
};

QuerySimilarities score_query(std::span<const float> query, const EmbeddingStore& store);

/// a[e] = sim if sim > threshold else 0; sigma = sentence similarities; hop 0.
ActivationState initial_activation(const QuerySimilarities& sims, const RetrievalConfig& cfg);

/// One bridging hop from the frontier through the sentence-entity graph.
/// Entities whose incoming mass is <= delta are pruned and left untouched.
/// A hop that admits nothing clears the frontier without advancing `hop`.
/// An empty frontier is a no-op.
ActivationState propagate(ActivationState state, const TriGraph& graph, const RetrievalConfig& cfg);

/// initial_activation followed by propagate until the frontier empties or
/// max_hops is reached.
ActivationState activate(const QuerySimilarities& sims, const TriGraph& graph,
                         const RetrievalConfig& cfg);

/// Hybrid passage seeds: (lambda * max(sim, 0) + ln(1 + sum_e a_e ln(1 + N_e) / L_e)) * W_p.
std::vector<double> passage_seed_scores(const ActivationState& state, const TriGraph& graph,
                                        std::span<const double> passage_similarity,
                                        const EntityLevels& levels, const RetrievalConfig& cfg);

struct PprResult {
  /// Passages first, then entities.
  std::vector<double> importance;
  std::size_t iterations = 0;
  /// l1 norm of successive differences, one per iteration.
  std::vector<double> residuals;
};

/// Personalized PageRank on the undirected passage-entity graph given by
/// `contain`, restarting to the l1-normalized concatenated seeds. Throws
/// Error(empty_seed) when all seeds are zero, Error(config) on negative seeds.
PprResult ppr(const SparseBinaryMatrix& contain, std::span<const double> entity_seeds,
              std::span<const double> passage_seeds, const RetrievalConfig& cfg);

/// Sort by score descending, ties by ascending passage id, truncate to k.
std::vector<PassageId> rank_passages(std::span<const double> passage_scores, std::size_t k);

/// Bundles the read-only index pieces a query needs. Safe to share across threads.
class Retriever {
 public:
  /// Throws Error(consistency) when store and graph disagree.
  Retriever(const TriGraph& graph, const EmbeddingStore& store, const Encoder& encoder,
            EntityLevels levels = {});

  QuerySimilarities similarities(std::string_view query) const;
  ActivationState activate(std::string_view query, const RetrievalConfig& cfg) const;
  RankedPassages retrieve(std::string_view query, const RetrievalConfig& cfg) const;

  const TriGraph& graph() const noexcept { return graph_; }

 private:
  const TriGraph& graph_;
  const EmbeddingStore& store_;
  const Encoder& encoder_;
  EntityLevels levels_;
};

}  // namespace linearrag
