#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "linearrag/embedding.hpp"
#include "linearrag/extraction.hpp"
#include "linearrag/retrieval.hpp"

namespace linearrag {

struct AppConfig {
  std::optional<std::filesystem::path> corpus_path;
  std::optional<std::filesystem::path> index_dir;
  ExtractorContract extractor;
  EncoderContract encoder;
  RetrievalConfig retrieval;
  std::string log_level = "warn";
  /// Whether the encoder block was given explicitly (otherwise an index's own encoder is used).
  bool encoder_set = false;
};

/// Strict parse; relative paths resolve against `base_dir`. Unknown keys,
/// wrong types and invalid values throw Error(config).
AppConfig app_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Throws Error(io) when unreadable, Error(parse) on malformed JSON.
AppConfig load_app_config(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const AppConfig& config);

/// Applies LINEARRAG_LOG (if set) over the configured level, then configures spdlog.
void apply_log_level(AppConfig& config);

}  // namespace linearrag
