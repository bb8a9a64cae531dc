#pragma once

#include <json.hpp>

#include "linearrag/extraction.hpp"
#include "linearrag/trigraph.hpp"

namespace linearrag {

inline nlohmann::ordered_json extractor_to_json(const ExtractorContract& contract) {
  nlohmann::ordered_json j;
  j["id"] = contract.id;
  j["stopwords"] = contract.stopwords;
  if (!contract.mentions_path.empty()) j["mentions_path"] = contract.mentions_path.string();
  return j;
}

inline nlohmann::ordered_json embedder_to_json(const EmbedderInfo& info) {
  nlohmann::ordered_json j;
  j["id"] = info.id;
  j["dim"] = info.dim;
  j["seed"] = info.seed;
  return j;
}

}  // namespace linearrag
