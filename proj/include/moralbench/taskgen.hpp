#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "moralbench/corpus.hpp"
#include "moralbench/outline.hpp"
#include "moralbench/resources.hpp"
#include "moralbench/topics.hpp"

namespace moralbench {

struct MoCptRecord {
  std::string id;
  std::string story;
  std::vector<std::string> candidates;  // gold plus n_neg negatives, shuffled
  std::size_t label = 0;
  std::vector<std::size_t> neg_topic_ids;  // topics of the negatives, in candidate order
  std::size_t gold_topic = 0;

  bool operator==(const MoCptRecord&) const = default;
};

struct MoPrefRecord {
  std::string id;
  std::string story;
  std::vector<std::string> candidates;  // gold and its antonym-flipped twin
  std::size_t label = 0;
  std::size_t flipped_token_pos = 0;
  std::pair<std::string, std::string> antonym_used;

  bool operator==(const MoPrefRecord&) const = default;
};

struct St2MoRecord {
  std::string id;
  std::string story;
  std::string moral;

  bool operator==(const St2MoRecord&) const = default;
};

struct Mo2StRecord {
  std::string id;
  std::string moral;
  std::string first_sentence;
  Outline outline;
  std::string target_story;

  bool operator==(const Mo2StRecord&) const = default;
};

enum class FaithLabel { Matched, Mismatched };
enum class Corruption { None, StoryReplaced, MoralReplaced };

struct FaithPairRecord {
  std::string id;
  std::string story;
  std::string moral;
  FaithLabel label = FaithLabel::Matched;
  Corruption corruption = Corruption::None;
  std::string story_source;  // id of the example the story came from
  std::string moral_source;

  bool operator==(const FaithPairRecord&) const = default;
};

/// Examples a builder could not turn into records, with the reason.
struct SkipLog {
  std::vector<std::pair<std::string, std::string>> entries;
  void add(std::string id, std::string reason) { entries.emplace_back(std::move(id), std::move(reason)); }
};

inline constexpr std::string_view kInsufficientNegatives = "insufficient topic-disjoint negatives";
inline constexpr std::string_view kUnassignableGold = "gold moral unassignable";

/// For each pair: n_neg distinct morals drawn uniformly without replacement
/// from `pool` among those whose assigned topic differs from the gold moral's,
/// then the candidates are shuffled. Each record uses its own RNG stream
/// keyed by (seed, id).
std::vector<MoCptRecord> build_mocpt(const Corpus& split, const Corpus& pool, const TopicModel& model,
                                     std::size_t n_neg, std::uint64_t seed, SkipLog* skipped = nullptr);

/// Flips one moral token with a lexicon antonym (uniform over eligible
/// positions, and over antonyms when a word has several). Morals without an
/// eligible token are dropped and logged.
std::vector<MoPrefRecord> build_mopref(const Corpus& split, const AntonymLexicon& antonyms, std::uint64_t seed,
                                       SkipLog* skipped = nullptr);

std::vector<St2MoRecord> build_st2mo(const Corpus& split);

/// Stories with no outline candidates are kept with an empty outline and logged.
std::vector<Mo2StRecord> build_mo2st(const Corpus& split, const StopwordSet& stopwords,
                                     const OutlineParams& params = {}, SkipLog* flagged = nullptr);

/// Every pair as a matched record, plus floor(neg_ratio * N) mismatched
/// records. Mismatch j corrupts example j mod N by swapping in the story or
/// the moral (coin flip) of a different, uniformly drawn example.
std::vector<FaithPairRecord> build_faithfulness_data(const Corpus& split, double neg_ratio, std::uint64_t seed);

/// The moral with token `position` replaced by `replacement`, rewriting the
/// original text in place when the tokens are the built-in tokenization.
std::string substitute_token(const StoryMoralPair& pair, std::size_t position, const std::string& replacement);

void write_jsonl(std::ostream& out, const std::vector<MoCptRecord>& records);
void write_jsonl(std::ostream& out, const std::vector<MoPrefRecord>& records);
void write_jsonl(std::ostream& out, const std::vector<St2MoRecord>& records);
void write_jsonl(std::ostream& out, const std::vector<Mo2StRecord>& records);
void write_jsonl(std::ostream& out, const std::vector<FaithPairRecord>& records);

/// Multiple-choice records (MoCpt or MoPref JSONL) for evaluation.
struct ChoiceRecord {
  std::string id;
  std::string story;
  std::vector<std::string> candidates;
  std::size_t label = 0;
};
std::vector<ChoiceRecord> read_choice_records(std::istream& in);
std::vector<ChoiceRecord> to_choice_records(const std::vector<MoCptRecord>& records);
std::vector<ChoiceRecord> to_choice_records(const std::vector<MoPrefRecord>& records);

std::vector<St2MoRecord> read_st2mo(std::istream& in);
/// Outline phrases are re-tokenized; positions restore the ground-truth order.
std::vector<Mo2StRecord> read_mo2st(std::istream& in);

}  // namespace moralbench
