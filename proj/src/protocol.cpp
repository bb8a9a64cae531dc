#include "linearrag/protocol.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "linearrag/error.hpp"

namespace linearrag {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::config, what); }

double number(const json& v, const std::string& key) {
  if (v.is_string() && key == "delta" && (v == "inf" || v == "+inf"))
    return std::numeric_limits<double>::infinity();
  if (!v.is_number()) bad("'" + key + "' must be a number");
  return v.get<double>();
}

std::size_t count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) bad("'" + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

}  // namespace

RetrievalConfig retrieval_config_from_json(const json& j, RetrievalConfig cfg) {
  if (!j.is_object()) bad("retrieval settings must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "entity_sim_threshold") cfg.entity_sim_threshold = number(v, key);
    else if (key == "delta") cfg.delta = number(v, key);
    else if (key == "max_hops") cfg.max_hops = count(v, key);
    else if (key == "damping") cfg.damping = number(v, key);
    else if (key == "lambda") cfg.lambda = number(v, key);
    else if (key == "passage_weight") cfg.passage_weight = number(v, key);
    else if (key == "top_k") cfg.top_k = count(v, key);
    else if (key == "ppr_tol") cfg.ppr_tol = number(v, key);
    else if (key == "ppr_max_iters") cfg.ppr_max_iters = count(v, key);
    else if (key == "fallback") {
      if (v == "dense") cfg.fallback = Fallback::dense;
      else if (v == "empty") cfg.fallback = Fallback::empty;
      else bad("'fallback' must be \"dense\" or \"empty\"");
    } else {
      bad("unknown retrieval key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ordered_json to_json(const RetrievalConfig& cfg) {
  ordered_json j;
  j["entity_sim_threshold"] = cfg.entity_sim_threshold;
  if (std::isinf(cfg.delta)) j["delta"] = "inf";
  else j["delta"] = cfg.delta;
  j["max_hops"] = cfg.max_hops;
  j["damping"] = cfg.damping;
  j["lambda"] = cfg.lambda;
  j["passage_weight"] = cfg.passage_weight;
  j["top_k"] = cfg.top_k;
  j["ppr_tol"] = cfg.ppr_tol;
  j["ppr_max_iters"] = cfg.ppr_max_iters;
  j["fallback"] = cfg.fallback == Fallback::dense ? "dense" : "empty";
  return j;
}

RetrievalConfig QueryRequest::resolve(const RetrievalConfig& base) const {
  RetrievalConfig cfg = retrieval_config_from_json(overrides, base);
  if (k) cfg.top_k = *k;
  cfg.validate();
  return cfg;
}

QueryRequest query_request_from_json(const json& j) {
  if (!j.is_object()) bad("query request must be an object");
  QueryRequest req;
  bool has_query = false;
  for (const auto& [key, v] : j.items()) {
    if (key == "query") {
      if (!v.is_string()) bad("'query' must be a string");
      req.query = v.get<std::string>();
      has_query = true;
    } else if (key == "k") {
      req.k = count(v, key);
      if (*req.k == 0) bad("'k' must be >= 1");
    } else if (key == "overrides") {
      if (!v.is_object()) bad("'overrides' must be an object");
      retrieval_config_from_json(v);  // reject bad keys early
      req.overrides = v;
    } else {
      bad("unknown query request key '" + key + "'");
    }
  }
  if (!has_query) bad("query request needs 'query'");
  return req;
}

QueryRequest parse_query_request(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("query request: ") + e.what());
  }
  return query_request_from_json(j);
}

ordered_json to_json(const QueryRequest& request) {
  ordered_json j;
  j["query"] = request.query;
  if (request.k) j["k"] = *request.k;
  if (!request.overrides.empty()) j["overrides"] = request.overrides;
  return j;
}

QueryResponse make_response(const RankedPassages& ranked, const TriGraph& graph) {
  QueryResponse out;
  out.hops_used = ranked.hops_used;
  out.fallback_used = ranked.fallback_used;
  for (const auto& item : ranked.items) {
    ResponseItem r;
    r.passage_id = item.passage_id;
    r.doc_key = graph.corpus.passages.at(item.passage_id).doc_key;
    r.score = item.score;
    for (EntityId e : item.contributing) r.contributing_entities.push_back(graph.entities[e].canonical);
    out.items.push_back(std::move(r));
  }
  return out;
}

ordered_json to_json(const QueryResponse& response) {
  ordered_json j;
  j["items"] = ordered_json::array();
  for (const auto& item : response.items) {
    ordered_json r;
    r["passage_id"] = item.passage_id;
    r["doc_key"] = item.doc_key;
    r["score"] = item.score;
    r["contributing_entities"] = item.contributing_entities;
    j["items"].push_back(std::move(r));
  }
  j["hops_used"] = response.hops_used;
  j["fallback_used"] = response.fallback_used;
  return j;
}

QueryResponse query_response_from_json(const json& j) {
  QueryResponse out;
  try {
    if (!j.is_object() || j.size() != 3) throw Error(ErrorCode::parse, "response must have items, hops_used, fallback_used");
    for (const auto& r : j.at("items")) {
      if (r.size() != 4) throw Error(ErrorCode::parse, "response item has unexpected keys");
      ResponseItem item;
      item.passage_id = r.at("passage_id").get<PassageId>();
      item.doc_key = r.at("doc_key").get<std::string>();
      item.score = r.at("score").get<double>();
      item.contributing_entities = r.at("contributing_entities").get<std::vector<std::string>>();
      out.items.push_back(std::move(item));
    }
    out.hops_used = j.at("hops_used").get<std::size_t>();
    out.fallback_used = j.at("fallback_used").get<bool>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("query response: ") + e.what());
  }
  return out;
}

}  // namespace linearrag
