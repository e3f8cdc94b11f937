#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace moralbench {

struct StoryMoralPair {
  std::string id;
  std::string story;  // NFC-normalized, trimmed
  std::string moral;
  std::string lang;
  std::vector<std::string> story_tokens;
  std::vector<std::string> moral_tokens;
  std::vector<std::string> story_sentences;

  bool operator==(const StoryMoralPair&) const = default;
};

enum class Split { Train, Val, Test };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

/// Builds a validated pair from raw fields, tokenizing and sentence-splitting
/// any field not supplied. Throws ValidationError for empty story/moral.
StoryMoralPair make_pair(std::string id, std::string_view story, std::string_view moral,
                         std::string lang = "en");

class Corpus {
 public:
  Corpus() = default;
  /// Throws ValidationError on duplicate ids.
  explicit Corpus(std::vector<StoryMoralPair> pairs);

  const std::vector<StoryMoralPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  const StoryMoralPair* find(std::string_view id) const;
  const StoryMoralPair& at(std::string_view id) const;

  /// id -> split; empty before split_corpus.
  const std::map<std::string, Split>& split_of() const { return split_of_; }
  bool is_split() const { return !split_of_.empty(); }

  /// Throws ValidationError if a key is not a pair id.
  Corpus with_splits(std::map<std::string, Split> split_of) const;

  /// Pairs assigned to `s`, in corpus order. Only ids of that split are kept
  /// in the returned corpus's split map.
  Corpus subset(Split s) const;

  bool operator==(const Corpus&) const = default;

 private:
  std::vector<StoryMoralPair> pairs_;
  std::map<std::string, std::size_t> by_id_;
  std::map<std::string, Split> split_of_;
};

struct CorpusStats {
  std::size_t n_examples = 0;
  double avg_story_words = 0;
  double avg_moral_words = 0;
  double avg_story_sents = 0;
  double avg_moral_sents = 0;
  std::size_t story_vocab = 0;
  std::size_t moral_vocab = 0;
};

/// Validates and tokenizes a corpus JSONL stream. Errors name the 1-based line
/// and the offending field or id. Blank lines are skipped.
Corpus read_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

/// Writes one record per pair including the token and sentence fields, so a
/// re-read reproduces the corpus exactly.
void write_corpus(std::ostream& out, const Corpus& corpus);

std::map<std::string, Split> read_splits(std::istream& in);
std::map<std::string, Split> load_splits(const std::filesystem::path& path);
void write_splits(std::ostream& out, const Corpus& corpus);

/// Seeded partition into train/val/test. Ids are sorted, permuted with the
/// seed, and cut into sizes given by largest-remainder rounding of the ratios.
Corpus split_corpus(const Corpus& corpus, std::array<std::uint32_t, 3> ratios, std::uint64_t seed);

/// Largest-remainder apportionment of n items over the ratios; ties in the
/// remainder go to the earlier slot.
std::array<std::size_t, 3> split_sizes(std::size_t n, std::array<std::uint32_t, 3> ratios);

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace moralbench
