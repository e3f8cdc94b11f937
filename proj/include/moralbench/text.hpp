#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace moralbench::text {

/// NFC-normalizes UTF-8 text and strips leading/trailing whitespace.
/// Invalid UTF-8 sequences raise ValidationError.
std::string normalize(std::string_view text);

/// Word tokens: runs of letters/digits (combining marks attach to the run),
/// one token per CJK character, punctuation dropped, Latin script lowercased.
/// The result does not depend on `lang`; the tag is accepted so callers can
/// keep one code path per language.
std::vector<std::string> tokenize(std::string_view text, std::string_view lang = "en");

struct TokenSpan {
  std::string token;
  std::size_t begin = 0;  // byte offsets into the NFC-normalized input
  std::size_t end = 0;
  bool break_before = false;  // punctuation between this token and the previous one
};

/// Same tokens as `tokenize`, with byte spans into normalize(text) and
/// punctuation break markers.
std::vector<TokenSpan> tokenize_spans(std::string_view text);

/// Splits on . ! ? followed by whitespace or end of text, and on 。！？
/// unconditionally. Closing quotes and brackets stay with the preceding
/// sentence. Sentences are whitespace-trimmed; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// Joins tokens with single spaces, except between two CJK tokens.
/// tokenize(join_tokens(t)) == t for any tokenize output t.
std::string join_tokens(std::span<const std::string> tokens);

bool is_cjk(char32_t cp);

std::string trim(std::string_view s);

}  // namespace moralbench::text
