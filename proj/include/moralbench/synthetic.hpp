#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "moralbench/corpus.hpp"

namespace moralbench::synthetic {

/// Pseudo-word for (theme, index): unique per pair, ASCII letters ending in
/// 'n', so no built-in tokenizer, stopword or lemmatizer rule touches it.
std::string word(std::size_t theme, std::size_t index);

/// Value words used as the last moral token; every one has an entry in
/// value_antonyms().
const std::vector<std::string>& value_words();

/// TSV antonym lexicon covering value_words() plus "strength\tweakness".
std::string value_antonyms();

struct CorpusSpec {
  std::size_t pairs = 200;
  std::size_t themes = 4;
  std::size_t theme_vocab = 30;
  std::size_t min_sentences = 3;
  std::size_t max_sentences = 6;
  std::size_t moral_story_words = 3;  // moral content words copied from the story
  bool value_word = true;             // end each moral with "is <value word>"
  std::uint64_t seed = 1;
};

/// Story/moral pairs where each pair belongs to one theme. Stories are built
/// from function-word templates filled with theme words; morals reuse
/// `moral_story_words` distinct words of their own story.
Corpus corpus(const CorpusSpec& spec);

/// The theme a generated pair belongs to (parsed from its id "t<theme>-<n>").
std::size_t theme_of(const std::string& id);

/// Bag-of-words documents; document d is drawn from theme d mod `themes`,
/// words uniform over the theme vocabulary, or weighted 1/(rank+1) with `zipf`.
std::vector<std::vector<std::string>> topic_docs(std::size_t themes, std::size_t theme_vocab, std::size_t docs,
                                                 std::size_t doc_len, std::uint64_t seed, bool zipf = false);

}  // namespace moralbench::synthetic
