#pragma once

// UTF-8 helpers over ICU: code point iteration, character classes, and the
// NFC + full case folding used for entity keys and hash-encoder tokens.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace linearrag::text {

struct CodePoint {
  char32_t value;
  std::size_t begin;  // byte offset
  std::size_t end;
};

inline bool is_ascii_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::vector<CodePoint> decode(std::string_view utf8);

bool is_punct(char32_t cp) noexcept;
bool is_space(char32_t cp) noexcept;
bool is_upper_initial(char32_t cp) noexcept;  // Lu or Lt

/// NFC(fold(NFC(s))).
std::string fold_case(std::string_view utf8);

}  // namespace linearrag::text
