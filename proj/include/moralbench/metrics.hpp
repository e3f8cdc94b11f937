#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moralbench/outline.hpp"

namespace moralbench {

using Tokens = std::vector<std::string>;

struct GenerationItem {
  std::string id;
  Tokens hypothesis;
  std::optional<Tokens> reference;
  std::optional<Outline> outline;
};

struct GenerationBatch {
  std::vector<GenerationItem> items;
};

/// Metric name -> value, plus the settings used to compute them. Values other
/// than lengths are on a 0-100 scale.
struct MetricReport {
  std::map<std::string, double> values;
  std::map<std::string, std::string> settings;
  std::size_t item_count = 0;
};

inline constexpr double kBleuEpsilon = 1e-9;

/// Corpus-level BLEU up to order n: geometric mean of clipped i-gram
/// precisions (zero match counts replaced by epsilon) times the brevity
/// penalty, scaled to [0, 100].
double bleu_n(const GenerationBatch& batch, std::size_t n);

/// Distinct n-grams over all n-gram occurrences, pooled across texts, x100.
/// Throws ValidationError "no n-grams" when every text is shorter than n.
double distinct_n(const std::vector<Tokens>& texts, std::size_t n);

/// Percentage of texts containing some n-gram at least twice.
double repetition_n(const std::vector<Tokens>& texts, std::size_t n);

/// Length of the longest common subsequence.
std::size_t lcs_length(const Tokens& a, const Tokens& b);

/// Mean LCS recall of the outline phrases against the story, x100.
double coverage(const Tokens& story, const Outline& outline);

struct OrderResult {
  double score = 0;
  std::size_t located = 0;
  std::size_t pairs = 0;
  std::size_t inversions = 0;
  bool unlocatable = false;  // fewer than two phrases located; score is 0
};

/// Where each phrase sits in the story: the offset of the phrase-length
/// window with the largest LCS against the phrase (earliest on ties), or
/// nullopt when that LCS is zero.
std::vector<std::optional<std::size_t>> locate_phrases(const Tokens& story, const Outline& outline);

/// 100 * (1 - inversions / pairs) over located phrase pairs, relative to the
/// outline's ground-truth order. Requires at least two phrases.
OrderResult order_score(const Tokens& story, const Outline& outline);

/// Percentage of gold ids whose prediction matches; missing predictions are wrong.
double accuracy(const std::map<std::string, std::size_t>& predictions,
                const std::map<std::string, std::size_t>& gold);

double avg_length(const std::vector<Tokens>& texts);

}  // namespace moralbench
