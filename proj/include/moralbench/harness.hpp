#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "moralbench/corpus.hpp"
#include "moralbench/metrics.hpp"
#include "moralbench/resources.hpp"
#include "moralbench/retrieval.hpp"
#include "moralbench/taskgen.hpp"

namespace moralbench {

/// Non-neural stand-in for a multiple-choice model: softmax over dot products
/// of the story embedding with each candidate embedding.
struct CandidateScorer {
  const EmbeddingProvider* provider = nullptr;
  bool use_retrieval = false;
  std::size_t m = 10;
  double temperature = 1.0;
};

/// Inputs needed when the scorer augments the story with retrieved concepts.
struct RetrievalContext {
  const StoryIndex* index = nullptr;
  const Resources* resources = nullptr;
  const Corpus* source = nullptr;  // corpus whose ids the index refers to
};

/// softmax(scores / temperature), shifted by the max score.
std::vector<double> softmax(const std::vector<double>& scores, double temperature = 1.0);

/// Probability over candidates. With retrieval, the story side is
/// embed(story tokens ⊕ [SEP] ⊕ concepts); candidates are embedded alone.
/// `story_id` is used for self-exclusion when the story is indexed.
std::vector<double> score_candidates(const CandidateScorer& scorer, const std::string& story_id,
                                     const Tokens& story, const std::vector<Tokens>& candidates,
                                     const std::optional<RetrievalContext>& context = std::nullopt);

/// Uniform seeded choice in [0, n).
std::size_t random_chooser(std::size_t n_candidates, std::uint64_t seed);

struct Decision {
  std::string id;
  std::size_t predicted = 0;
  std::size_t gold = 0;
  std::vector<double> probabilities;  // empty for choosers that do not score
};

struct UnderstandingReport {
  MetricReport metrics;  // "accuracy"
  std::vector<Decision> decisions;
};

/// Picks a candidate index for a record. Probability-producing choosers
/// return the distribution; the prediction is its arg-max (lowest index wins).
using Chooser = std::function<Decision(const ChoiceRecord&)>;

Chooser gold_chooser();
/// Record-level seeded stream, so the outcome does not depend on record order.
Chooser random_record_chooser(std::uint64_t seed);
/// Scores by embedding; the story is re-tokenized from the record (the
/// record id is used for self-exclusion when it is indexed).
Chooser embedding_chooser(const CandidateScorer& scorer, std::optional<RetrievalContext> context = std::nullopt);

UnderstandingReport evaluate_understanding(const std::vector<ChoiceRecord>& dataset, const Chooser& chooser);

struct GenerationSettings {
  std::string lang = "en";
  std::optional<std::size_t> ngram_n;  // defaults: 2 for st2mo, 4 for mo2st
};

using GenerationDataset = std::variant<std::vector<St2MoRecord>, std::vector<Mo2StRecord>>;

/// The task follows from the dataset type.
/// St2Mo: bleu1, bleu2, repetition2, distinct2, length (references: morals).
/// Mo2St: bleu1, bleu2, repetition4, distinct4, coverage, order, length
/// (references: target stories). Coverage and order are averaged over items
/// whose outline supports them. Throws ValidationError listing ids missing on
/// either side.
MetricReport evaluate_generation(const std::map<std::string, std::string>& hypotheses,
                                 const GenerationDataset& dataset, const GenerationSettings& settings = {});

/// JSONL {"id","text"}.
std::map<std::string, std::string> read_hypotheses(std::istream& in);
/// JSONL {"id","prediction":int}.
std::map<std::string, std::size_t> read_predictions(std::istream& in);

}  // namespace moralbench
