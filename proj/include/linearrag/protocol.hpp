#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "linearrag/retrieval.hpp"

namespace linearrag {

/// Overlays the keys present in `j` onto `base`. Unknown keys, wrong types
/// and out-of-range values throw Error(config).
RetrievalConfig retrieval_config_from_json(const nlohmann::json& j, RetrievalConfig base = {});
nlohmann::ordered_json to_json(const RetrievalConfig& cfg);

struct QueryRequest {
  std::string query;
  std::optional<std::size_t> k;
  /// Partial RetrievalConfig; an empty object when absent.
  nlohmann::json overrides = nlohmann::json::object();

  /// base with overrides applied, then k.
  RetrievalConfig resolve(const RetrievalConfig& base) const;

  friend bool operator==(const QueryRequest&, const QueryRequest&) = default;
};

/// Strict: throws Error(parse) for malformed JSON, Error(config) for bad fields.
QueryRequest parse_query_request(std::string_view text);
QueryRequest query_request_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const QueryRequest& request);

struct ResponseItem {
  PassageId passage_id = 0;
  std::string doc_key;
  double score = 0.0;
  std::vector<std::string> contributing_entities;

  friend bool operator==(const ResponseItem&, const ResponseItem&) = default;
};

struct QueryResponse {
  std::vector<ResponseItem> items;
  std::size_t hops_used = 0;
  bool fallback_used = false;

  friend bool operator==(const QueryResponse&, const QueryResponse&) = default;
};

QueryResponse make_response(const RankedPassages& ranked, const TriGraph& graph);
nlohmann::ordered_json to_json(const QueryResponse& response);
/// Strict inverse of to_json; throws Error(parse).
QueryResponse query_response_from_json(const nlohmann::json& j);

}  // namespace linearrag
