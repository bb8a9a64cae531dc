#include "linearrag/app_config.hpp"

#include <cstdlib>
#include <fstream>

#include <spdlog/spdlog.h>

#include "linearrag/error.hpp"
#include "linearrag/protocol.hpp"

namespace linearrag {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::config, what); }

const json& object(const json& v, const std::string& key) {
  if (!v.is_object()) bad("'" + key + "' must be an object");
  return v;
}

std::string string(const json& v, const std::string& key) {
  if (!v.is_string()) bad("'" + key + "' must be a string");
  return v.get<std::string>();
}

fs::path resolve(const json& v, const std::string& key, const fs::path& base) {
  fs::path p = string(v, key);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

bool known_level(const std::string& level) {
  return spdlog::level::from_str(level) != spdlog::level::off || level == "off";
}

}  // namespace

AppConfig app_config_from_json(const json& j, const fs::path& base) {
  AppConfig cfg;
  object(j, "config");
  for (const auto& [key, v] : j.items()) {
    if (key == "corpus_path") {
      cfg.corpus_path = resolve(v, key, base);
    } else if (key == "index_dir") {
      cfg.index_dir = resolve(v, key, base);
    } else if (key == "extractor") {
      for (const auto& [k, x] : object(v, key).items()) {
        if (k == "id") cfg.extractor.id = string(x, k);
        else if (k == "stopwords") {
          if (!x.is_array()) bad("'stopwords' must be an array of strings");
          cfg.extractor.stopwords.clear();
          for (const auto& w : x) cfg.extractor.stopwords.push_back(string(w, "stopwords"));
        } else if (k == "mentions_path") cfg.extractor.mentions_path = resolve(x, k, base);
        else bad("unknown extractor key '" + k + "'");
      }
    } else if (key == "encoder") {
      cfg.encoder_set = true;
      for (const auto& [k, x] : object(v, key).items()) {
        if (k == "id") cfg.encoder.id = string(x, k);
        else if (k == "dim") {
          if (!x.is_number_unsigned() || x.get<std::size_t>() == 0) bad("'dim' must be a positive integer");
          cfg.encoder.dim = x.get<std::size_t>();
        } else if (k == "seed") {
          if (!x.is_number_unsigned()) bad("'seed' must be a non-negative integer");
          cfg.encoder.seed = x.get<std::uint64_t>();
        } else if (k == "vectors_path") cfg.encoder.vectors_path = resolve(x, k, base);
        else bad("unknown encoder key '" + k + "'");
      }
    } else if (key == "retrieval") {
      cfg.retrieval = retrieval_config_from_json(v, cfg.retrieval);
    } else if (key == "log_level") {
      cfg.log_level = string(v, key);
      if (!known_level(cfg.log_level)) bad("unknown log_level '" + cfg.log_level + "'");
    } else {
      bad("unknown config key '" + key + "'");
    }
  }
  if (cfg.extractor.id != "caps-run" && cfg.extractor.id != "external")
    bad("unknown extractor id '" + cfg.extractor.id + "'");
  if (cfg.encoder.id != "hash" && cfg.encoder.id != "external")
    bad("unknown encoder id '" + cfg.encoder.id + "'");
  return cfg;
}

AppConfig load_app_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, "config " + path.string() + ": " + e.what());
  }
  return app_config_from_json(j, path.parent_path());
}

ordered_json to_json(const AppConfig& config) {
  ordered_json j;
  if (config.corpus_path) j["corpus_path"] = config.corpus_path->string();
  if (config.index_dir) j["index_dir"] = config.index_dir->string();
  ordered_json ex;
  ex["id"] = config.extractor.id;
  ex["stopwords"] = config.extractor.stopwords;
  if (!config.extractor.mentions_path.empty()) ex["mentions_path"] = config.extractor.mentions_path.string();
  j["extractor"] = ex;
  ordered_json en;
  en["id"] = config.encoder.id;
  en["dim"] = config.encoder.dim;
  en["seed"] = config.encoder.seed;
  if (!config.encoder.vectors_path.empty()) en["vectors_path"] = config.encoder.vectors_path.string();
  j["encoder"] = en;
  j["retrieval"] = to_json(config.retrieval);
  j["log_level"] = config.log_level;
  return j;
}

void apply_log_level(AppConfig& config) {
  if (const char* env = std::getenv("LINEARRAG_LOG"); env && *env) {
    if (!known_level(env)) bad(std::string("unknown LINEARRAG_LOG level '") + env + "'");
    config.log_level = env;
  }
  spdlog::set_level(spdlog::level::from_str(config.log_level));
}

}  // namespace linearrag
