#include "linearrag/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "linearrag/error.hpp"
#include "linearrag/kernels.hpp"

namespace linearrag {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::config, what);
}

std::vector<double> dot_all(const VectorMatrix& rows, std::span<const float> query) {
  std::vector<double> out(rows.rows());
  if (!out.empty()) kernels::dot_rows(rows.data(), rows.dim(), query, out);
  return out;
}

}  // namespace

void RetrievalConfig::validate() const {
  require(std::isfinite(entity_sim_threshold), "entity_sim_threshold must be finite");
  require(!std::isnan(delta) && delta >= 0.0, "delta must be >= 0");
  require(std::isfinite(damping) && damping > 0.0 && damping < 1.0,
          "damping must lie in (0, 1)");
  require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
  require(std::isfinite(passage_weight) && passage_weight >= 0.0,
          "passage_weight must be >= 0");
  require(top_k >= 1, "top_k must be >= 1");
  require(std::isfinite(ppr_tol) && ppr_tol > 0.0, "ppr_tol must be > 0");
  require(ppr_max_iters >= 1, "ppr_max_iters must be >= 1");
}

RetrievalConfig RetrievalConfig::dense_only(RetrievalConfig base) {
  // cosine never exceeds 1
  base.entity_sim_threshold = 2.0;
  return base;
}

RetrievalConfig RetrievalConfig::dense_only() { return dense_only(RetrievalConfig{}); }

std::vector<EntityId> ActivationState::active_entities() const {
  std::vector<EntityId> out;
  for (std::size_t e = 0; e < activation.size(); ++e)
    if (activation[e] > 0.0) out.push_back(static_cast<EntityId>(e));
  return out;
}

void EntityLevels::validate(std::size_t n_entities) const {
  if (levels.empty()) return;
  require(levels.size() == n_entities, "entity levels must cover every entity");
  for (double l : levels) require(std::isfinite(l) && l >= 1.0, "entity levels must be >= 1");
}

QuerySimilarities score_query(std::span<const float> query, const EmbeddingStore& store) {
  if (query.size() != store.dim)
    throw Error(ErrorCode::dim_mismatch, "query vector has dim " + std::to_string(query.size()) +
                                             ", store has " + std::to_string(store.dim));
  QuerySimilarities sims;
  sims.entities = dot_all(store.entities, query);
  sims.sentences = dot_all(store.sentences, query);
  sims.passages = dot_all(store.passages, query);
  return sims;
}

ActivationState initial_activation(const QuerySimilarities& sims, const RetrievalConfig& cfg) {
  ActivationState state;
  state.activation.resize(sims.entities.size(), 0.0);
  state.trace.resize(sims.entities.size());
  state.sentence_relevance = sims.sentences;
  for (std::size_t e = 0; e < sims.entities.size(); ++e) {
    if (sims.entities[e] > cfg.entity_sim_threshold && sims.entities[e] > 0.0) {
      state.activation[e] = sims.entities[e];
      state.frontier.push_back(static_cast<EntityId>(e));
      state.trace[e].hop = 0;
    }
  }
  return state;
}

ActivationState propagate(ActivationState state, const TriGraph& graph,
                          const RetrievalConfig& cfg) {
  if (state.frontier.empty()) return state;
  const std::size_t n_entities = graph.n_entities();
  const std::size_t n_sentences = graph.n_sentences();
  if (state.activation.size() != n_entities || state.sentence_relevance.size() != n_sentences)
    throw Error(ErrorCode::dim_mismatch, "activation state does not match the graph");
  if (state.trace.size() != n_entities) state.trace.resize(n_entities);

  std::vector<char> in_frontier(n_entities, 0);
  for (EntityId e : state.frontier) in_frontier.at(e) = 1;

  const auto& a = state.activation;
  std::vector<double> mass(n_entities, 0.0);
  std::vector<double> best_share(n_entities, -1.0);
  std::vector<SentenceId> best_sentence(n_entities, 0);

  for (std::size_t s = 0; s < n_sentences; ++s) {
    auto row = graph.mention.row(s);
    bool touched = false;
    double strongest = 0.0;
    for (auto e : row) {
      if (!in_frontier[e]) continue;
      strongest = touched ? std::max(strongest, a[e]) : a[e];
      touched = true;
    }
    if (!touched) continue;
    const double u = state.sentence_relevance[s] * strongest;
    for (auto e : row) {
      mass[e] += u;
      if (u > best_share[e]) {
        best_share[e] = u;
        best_sentence[e] = static_cast<SentenceId>(s);
      }
    }
  }

  // Entities whose incoming mass does not clear delta are pruned and keep their value.
  std::vector<EntityId> next;
  for (std::size_t e = 0; e < n_entities; ++e)
    if (mass[e] > cfg.delta && mass[e] > a[e]) next.push_back(static_cast<EntityId>(e));

  state.frontier = next;
  if (next.empty()) return state;

  ++state.hop;
  for (EntityId e : next) {
    if (state.activation[e] <= 0.0) {
      state.trace[e].hop = static_cast<int>(state.hop);
      state.trace[e].sentence = best_sentence[e];
    }
    state.activation[e] = mass[e];
  }
  return state;
}

ActivationState activate(const QuerySimilarities& sims, const TriGraph& graph,
                         const RetrievalConfig& cfg) {
  cfg.validate();
  if (sims.entities.size() != graph.n_entities() || sims.sentences.size() != graph.n_sentences())
    throw Error(ErrorCode::dim_mismatch, "similarities do not match the graph");
  ActivationState state = initial_activation(sims, cfg);
  while (!state.frontier.empty() && state.hop < cfg.max_hops)
    state = propagate(std::move(state), graph, cfg);
  state.frontier.clear();
  return state;
}

std::vector<double> passage_seed_scores(const ActivationState& state, const TriGraph& graph,
                                        std::span<const double> passage_similarity,
                                        const EntityLevels& levels, const RetrievalConfig& cfg) {
  const std::size_t n_passages = graph.n_passages();
  if (passage_similarity.size() != n_passages || state.activation.size() != graph.n_entities())
    throw Error(ErrorCode::dim_mismatch, "seed inputs do not match the graph");
  levels.validate(graph.n_entities());

  const auto offsets = graph.contain.row_offsets();
  const auto cols = graph.contain.col_indices();
  std::vector<double> seeds(n_passages, 0.0);
  for (std::size_t p = 0; p < n_passages; ++p) {
    double total = 0.0;
    for (std::size_t k = offsets[p]; k < offsets[p + 1]; ++k) {
      const auto e = cols[k];
      const double ae = state.activation[e];
      if (ae <= 0.0) continue;
      total += ae * std::log1p(static_cast<double>(graph.occurrence[k])) / levels.level(e);
    }
    seeds[p] =
        (cfg.lambda * std::max(passage_similarity[p], 0.0) + std::log1p(total)) *
        cfg.passage_weight;
  }
  return seeds;
}

PprResult ppr(const SparseBinaryMatrix& contain, std::span<const double> entity_seeds,
              std::span<const double> passage_seeds, const RetrievalConfig& cfg) {
  cfg.validate();
  const std::size_t n_passages = contain.rows();
  const std::size_t n_entities = contain.cols();
  if (entity_seeds.size() != n_entities || passage_seeds.size() != n_passages)
    throw Error(ErrorCode::dim_mismatch, "seed vectors do not match the graph");

  const std::size_t n = n_passages + n_entities;
  std::vector<double> reset(n);
  std::copy(passage_seeds.begin(), passage_seeds.end(), reset.begin());
  std::copy(entity_seeds.begin(), entity_seeds.end(), reset.begin() + n_passages);
  double total = 0.0;
  for (double v : reset) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::config, "seeds must be finite and >= 0");
    total += v;
  }
  if (total <= 0.0) throw Error(ErrorCode::empty_seed, "all seeds are zero");
  for (double& v : reset) v /= total;

  std::vector<double> inv_degree(n, 0.0);
  for (std::size_t p = 0; p < n_passages; ++p) {
    const auto d = contain.row(p).size();
    if (d) inv_degree[p] = 1.0 / static_cast<double>(d);
  }
  const auto col_counts = contain.column_counts();
  for (std::size_t e = 0; e < n_entities; ++e)
    if (col_counts[e]) inv_degree[n_passages + e] = 1.0 / static_cast<double>(col_counts[e]);

  PprResult result;
  std::vector<double> current = reset;
  std::vector<double> scaled(n), spread(n), next(n);
  const auto offsets = contain.row_offsets();
  const auto cols = contain.col_indices();
  for (std::size_t it = 0; it < cfg.ppr_max_iters; ++it) {
    kernels::multiply(current, inv_degree, scaled);
    std::fill(spread.begin(), spread.end(), 0.0);
    for (std::size_t p = 0; p < n_passages; ++p) {
      double into_p = 0.0;
      for (std::size_t k = offsets[p]; k < offsets[p + 1]; ++k) {
        const std::size_t node = n_passages + cols[k];
        into_p += scaled[node];
        spread[node] += scaled[p];
      }
      spread[p] = into_p;
    }
    kernels::damped_combine(reset, spread, cfg.damping, next);
    const double residual = kernels::l1_distance(next, current);
    current.swap(next);
    result.residuals.push_back(residual);
    result.iterations = it + 1;
    if (residual < cfg.ppr_tol) break;
  }
  result.importance = std::move(current);
  return result;
}

std::vector<PassageId> rank_passages(std::span<const double> passage_scores, std::size_t k) {
  std::vector<PassageId> order(passage_scores.size());
  std::iota(order.begin(), order.end(), PassageId{0});
  const auto better = [&](PassageId x, PassageId y) {
    if (passage_scores[x] != passage_scores[y]) return passage_scores[x] > passage_scores[y];
    return x < y;
  };
  const std::size_t keep = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    better);
  order.resize(keep);
  return order;
}

Retriever::Retriever(const TriGraph& graph, const EmbeddingStore& store, const Encoder& encoder,
                     EntityLevels levels)
    : graph_(graph), store_(store), encoder_(encoder), levels_(std::move(levels)) {
  check_store(store_, graph_);
  if (encoder_.contract().dim != store_.dim)
    throw Error(ErrorCode::dim_mismatch, "encoder dim " + std::to_string(encoder_.contract().dim) +
                                             " does not match index dim " +
                                             std::to_string(store_.dim));
  levels_.validate(graph_.n_entities());
}

QuerySimilarities Retriever::similarities(std::string_view query) const {
  const auto q = encoder_.encode(query);
  return score_query(q, store_);
}

ActivationState Retriever::activate(std::string_view query, const RetrievalConfig& cfg) const {
  return linearrag::activate(similarities(query), graph_, cfg);
}

RankedPassages Retriever::retrieve(std::string_view query, const RetrievalConfig& cfg) const {
  cfg.validate();
  const QuerySimilarities sims = similarities(query);
  const ActivationState state = linearrag::activate(sims, graph_, cfg);

  RankedPassages out;
  out.query = std::string(query);
  out.hops_used = state.hop;

  const auto active = state.active_entities();
  if (active.empty()) {
    if (cfg.fallback == Fallback::empty) {
      out.empty_result = true;
      return out;
    }
    out.fallback_used = true;
    for (PassageId p : rank_passages(sims.passages, cfg.top_k))
      out.items.push_back({p, sims.passages[p], {}});
    return out;
  }

  const auto seeds = passage_seed_scores(state, graph_, sims.passages, levels_, cfg);
  const auto pr = ppr(graph_.contain, state.activation, seeds, cfg);
  const std::span<const double> passage_scores(pr.importance.data(), graph_.n_passages());
  for (PassageId p : rank_passages(passage_scores, cfg.top_k)) {
    RankedItem item{p, passage_scores[p], {}};
    for (auto e : graph_.contain.row(p))
      if (state.activation[e] > 0.0) item.contributing.push_back(e);
    std::sort(item.contributing.begin(), item.contributing.end(), [&](EntityId x, EntityId y) {
      if (state.activation[x] != state.activation[y])
        return state.activation[x] > state.activation[y];
      return x < y;
    });
    out.items.push_back(std::move(item));
  }
  return out;
}

}  // namespace linearrag
