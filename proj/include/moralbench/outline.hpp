#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "moralbench/corpus.hpp"
#include "moralbench/resources.hpp"

namespace moralbench {

struct Phrase {
  std::vector<std::string> tokens;
  double score = 0;
  std::optional<std::size_t> first_pos;  // token offset of first occurrence in the source

  bool operator==(const Phrase&) const = default;
};

struct Outline {
  std::vector<Phrase> phrases;  // descending score
  std::string source_id;
  std::vector<std::size_t> ground_truth_order;  // phrase indices by ascending first_pos
  bool empty_flag = false;                      // source yielded no candidates

  bool operator==(const Outline&) const = default;
};

/// RAKE over a token sequence. Candidates are maximal stopword-free runs,
/// also cut wherever `breaks[i]` is set (punctuation before token i), and
/// chunked greedily into pieces of at most `max_phrase_len` tokens. Word score
/// is degree / frequency; phrase score is the sum of its word scores. Each
/// distinct token sequence is reported once at its first occurrence, sorted by
/// descending score with ties by earlier position.
std::vector<Phrase> rake_extract(const std::vector<std::string>& tokens, const StopwordSet& stopwords,
                                 std::size_t max_phrase_len, const std::vector<bool>& breaks = {});

struct OutlineParams {
  std::size_t max_phrases = 8;
  std::size_t max_words = 8;
};

/// RAKE over the story, then drops phrases contained (as contiguous token
/// runs) in a longer kept phrase, then keeps the top `max_phrases` by score.
/// Punctuation breaks are used when the pair's tokens are the built-in
/// tokenization of its story.
Outline build_outline(const StoryMoralPair& pair, const StopwordSet& stopwords, const OutlineParams& params = {});

/// Fills ground_truth_order from the phrases' first positions.
void order_by_position(Outline& outline);

/// First entry of story_sentences; ValidationError when there is none.
const std::string& first_sentence(const StoryMoralPair& pair);

/// True if `needle` occurs as a contiguous run inside `haystack`.
bool contains_run(const std::vector<std::string>& haystack, const std::vector<std::string>& needle);

/// Offset of the first occurrence of `needle` in `haystack`.
std::optional<std::size_t> find_run(const std::vector<std::string>& haystack, const std::vector<std::string>& needle);

}  // namespace moralbench
