#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace moralbench {

using StopwordSet = std::unordered_set<std::string>;

/// One lowercase token per line; '#' starts a comment.
StopwordSet load_stopwords(const std::filesystem::path& path);
StopwordSet parse_stopwords(std::string_view content);

/// Word/antonym pairs with symmetric closure. Each word maps to its sorted,
/// de-duplicated antonyms.
class AntonymLexicon {
 public:
  AntonymLexicon() = default;

  /// Adds a <-> b. Both sides must tokenize to exactly one token.
  void add(std::string_view a, std::string_view b);

  const std::vector<std::string>* find(std::string_view word) const;
  bool contains(std::string_view a, std::string_view b) const;
  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }

 private:
  std::unordered_map<std::string, std::vector<std::string>> map_;
};

/// TSV "word<TAB>antonym".
AntonymLexicon load_antonyms(const std::filesystem::path& path);
AntonymLexicon parse_antonyms(std::string_view content);

enum class PosTag { Noun, Verb, Adjective, Adverb, Closed };

std::optional<PosTag> parse_pos_tag(std::string_view tag);

using PosLexicon = std::unordered_map<std::string, PosTag>;

/// TSV "word<TAB>tag", tags N, V, ADJ, ADV, CLOSED.
PosLexicon load_pos_lexicon(const std::filesystem::path& path);
PosLexicon parse_pos_lexicon(std::string_view content);

/// English suffix-rule lemmatizer with an exception table consulted first.
/// Non-Latin tokens pass through unchanged.
class Lemmatizer {
 public:
  Lemmatizer() = default;
  explicit Lemmatizer(std::unordered_map<std::string, std::string> exceptions)
      : exceptions_(std::move(exceptions)) {}

  /// `tag` narrows the rule set: nouns get plural rules, verbs get plural,
  /// -ing and -ed rules, adjectives/adverbs are left alone. Unknown words
  /// (no tag) get the verb rule set.
  std::string lemma(std::string_view word, std::optional<PosTag> tag = std::nullopt) const;

 private:
  std::unordered_map<std::string, std::string> exceptions_;
};

/// TSV "form<TAB>lemma".
Lemmatizer load_lemmatizer(const std::filesystem::path& exceptions_path);
Lemmatizer parse_lemmatizer(std::string_view content);

/// Everything read from a `--resources` directory:
///   stopwords.txt, antonyms.tsv, pos.tsv, lemma_exceptions.tsv
struct Resources {
  StopwordSet stopwords;
  AntonymLexicon antonyms;
  PosLexicon pos;
  Lemmatizer lemmatizer;
};

/// Missing files raise ResourceError naming the file.
Resources load_resources(const std::filesystem::path& dir);

}  // namespace moralbench
