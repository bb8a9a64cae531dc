#include "unicode_text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "linearrag/error.hpp"

namespace linearrag::text {
namespace {

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* instance = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || instance == nullptr)
    throw Error(ErrorCode::config, "ICU NFC normalizer unavailable");
  return *instance;
}

icu::UnicodeString normalize(const icu::UnicodeString& in) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = nfc().normalize(in, status);
  if (U_FAILURE(status)) throw Error(ErrorCode::encoding, "NFC normalization failed");
  return out;
}

}  // namespace

std::vector<CodePoint> decode(std::string_view utf8) {
  std::vector<CodePoint> out;
  out.reserve(utf8.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t begin = i;
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) c = 0xFFFD;
    out.push_back({static_cast<char32_t>(c), static_cast<std::size_t>(begin),
                   static_cast<std::size_t>(i)});
  }
  return out;
}

bool is_punct(char32_t cp) noexcept { return u_ispunct(static_cast<UChar32>(cp)) != 0; }

bool is_space(char32_t cp) noexcept { return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0; }

bool is_upper_initial(char32_t cp) noexcept {
  const auto type = u_charType(static_cast<UChar32>(cp));
  return type == U_UPPERCASE_LETTER || type == U_TITLECASE_LETTER;
}

std::string fold_case(std::string_view utf8) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  s = normalize(s);
  s.foldCase(U_FOLD_CASE_DEFAULT);
  s = normalize(s);
  std::string out;
  s.toUTF8String(out);
  return out;
}

}  // namespace linearrag::text
