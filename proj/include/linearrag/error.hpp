#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace linearrag {

enum class ErrorCode {
  io,
  parse,
  empty_corpus,
  config,
  encoding,
  dim_mismatch,
  consistency,
  version_mismatch,
  digest_mismatch,
  empty_seed,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace linearrag
