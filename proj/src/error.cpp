#include "linearrag/error.hpp"

namespace linearrag {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
    case ErrorCode::empty_corpus: return "empty-corpus";
    case ErrorCode::config: return "config";
    case ErrorCode::encoding: return "encoding";
    case ErrorCode::dim_mismatch: return "dim-mismatch";
    case ErrorCode::consistency: return "consistency";
    case ErrorCode::version_mismatch: return "version-mismatch";
    case ErrorCode::digest_mismatch: return "digest-mismatch";
    case ErrorCode::empty_seed: return "empty-seed";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace linearrag
