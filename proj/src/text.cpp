#include "moralbench/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uscript.h>
#include <unicode/utf8.h>

#include "moralbench/error.hpp"

namespace moralbench::text {
namespace {

struct CodePoint {
  char32_t value;
  std::size_t begin;
  std::size_t end;
};

std::vector<CodePoint> decode(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto length = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t begin = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) {
      throw ValidationError("invalid UTF-8 at byte " + std::to_string(begin));
    }
    out.push_back({static_cast<char32_t>(c), static_cast<std::size_t>(begin),
                   static_cast<std::size_t>(i)});
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool error = false;
  U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(cp), error);
  (void)error;
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
}

bool is_word_char(char32_t cp) { return u_isalnum(static_cast<UChar32>(cp)) != 0; }

bool is_mark(char32_t cp) {
  return (U_GET_GC_MASK(static_cast<UChar32>(cp)) & U_GC_M_MASK) != 0;
}

bool is_space(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0; }

char32_t fold_latin(char32_t cp) {
  UErrorCode status = U_ZERO_ERROR;
  if (uscript_getScript(static_cast<UChar32>(cp), &status) == USCRIPT_LATIN) {
    return static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp)));
  }
  return cp;
}

bool is_cjk_terminal(char32_t cp) { return cp == U'。' || cp == U'！' || cp == U'？'; }

bool is_terminal(char32_t cp) {
  return cp == U'.' || cp == U'!' || cp == U'?' || is_cjk_terminal(cp);
}

bool is_closing(char32_t cp) {
  switch (cp) {
    case U'"':
    case U'\'':
    case U')':
    case U']':
    case U'”':  // ”
    case U'’':  // ’
    case U'»':  // »
    case U'」':  // 」
    case U'』':  // 』
    case U'）':  // ）
      return true;
    default:
      return false;
  }
}

std::string nfc(std::string_view s) {
  // Validate first so malformed input is reported rather than replaced.
  decode(s);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw ResourceError("ICU NFC normalizer unavailable");
  }
  const auto source = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  if (normalizer->isNormalized(source, status) && U_SUCCESS(status)) {
    return std::string(s);
  }
  status = U_ZERO_ERROR;
  const icu::UnicodeString normalized = normalizer->normalize(source, status);
  if (U_FAILURE(status)) {
    throw ValidationError("text could not be NFC-normalized");
  }
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

}  // namespace

bool is_cjk(char32_t cp) {
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(static_cast<UChar32>(cp), &status);
  return script == USCRIPT_HAN || script == USCRIPT_HIRAGANA || script == USCRIPT_KATAKANA;
}

std::string trim(std::string_view s) {
  const auto cps = decode(s);
  std::size_t first = 0;
  std::size_t last = cps.size();
  while (first < last && is_space(cps[first].value)) ++first;
  while (last > first && is_space(cps[last - 1].value)) --last;
  if (first == last) return {};
  return std::string(s.substr(cps[first].begin, cps[last - 1].end - cps[first].begin));
}

std::string normalize(std::string_view text) { return trim(nfc(text)); }

std::vector<TokenSpan> tokenize_spans(std::string_view raw) {
  const std::string text = normalize(raw);
  std::vector<TokenSpan> out;
  bool pending_break = false;
  bool in_word = false;
  for (const CodePoint& cp : decode(text)) {
    if (is_word_char(cp.value) && is_cjk(cp.value)) {
      TokenSpan span{{}, cp.begin, cp.end, pending_break};
      append_utf8(span.token, cp.value);
      out.push_back(std::move(span));
      pending_break = false;
      in_word = false;
    } else if (is_word_char(cp.value) || (in_word && is_mark(cp.value))) {
      if (!in_word) {
        out.push_back({{}, cp.begin, cp.end, pending_break});
        pending_break = false;
        in_word = true;
      }
      append_utf8(out.back().token, fold_latin(cp.value));
      out.back().end = cp.end;
    } else {
      in_word = false;
      if (!is_space(cp.value)) pending_break = true;
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text, std::string_view /*lang*/) {
  std::vector<std::string> out;
  for (auto& span : tokenize_spans(text)) out.push_back(std::move(span.token));
  return out;
}

std::vector<std::string> split_sentences(std::string_view raw) {
  const std::string text = nfc(raw);
  const auto cps = decode(text);
  std::vector<std::string> out;
  auto emit = [&](std::size_t from, std::size_t to) {
    std::string piece = trim(std::string_view(text).substr(from, to - from));
    if (!piece.empty()) out.push_back(std::move(piece));
  };
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!is_terminal(cps[i].value)) {
      ++i;
      continue;
    }
    bool cjk_terminal = false;
    while (i < cps.size() && is_terminal(cps[i].value)) {
      cjk_terminal = cjk_terminal || is_cjk_terminal(cps[i].value);
      ++i;
    }
    while (i < cps.size() && is_closing(cps[i].value)) ++i;
    if (cjk_terminal || i == cps.size() || is_space(cps[i].value)) {
      const std::size_t end = i == cps.size() ? text.size() : cps[i].begin;
      emit(start, end);
      start = end;
    }
  }
  if (start < text.size()) emit(start, text.size());
  return out;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  bool prev_cjk = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto cps = decode(tokens[i]);
    const bool cjk = cps.size() == 1 && is_cjk(cps[0].value);
    if (i > 0 && !(cjk && prev_cjk)) out.push_back(' ');
    out += tokens[i];
    prev_cjk = cjk;
  }
  return out;
}

}  // namespace moralbench::text
