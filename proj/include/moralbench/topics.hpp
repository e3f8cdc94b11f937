#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace moralbench {

using TokenDocs = std::vector<std::vector<std::string>>;

struct LdaParams {
  std::optional<double> alpha;  // symmetric doc-topic prior; 50 / B when unset
  double eta = 0.01;            // topic-word prior
  std::size_t iters = 500;      // Gibbs sweeps
  std::size_t fold_in_iters = 50;  // sweeps when folding in a held-out doc

  double alpha_for(std::size_t topics) const { return alpha.value_or(50.0 / static_cast<double>(topics)); }
};

/// A fitted topic model. Topic indices are 0-based throughout.
class TopicModel {
 public:
  TopicModel() = default;
  /// Rows of `beta` are normalized on construction.
  TopicModel(std::vector<std::string> vocab, std::vector<std::vector<double>> beta, double alpha,
             std::uint64_t seed, std::vector<std::vector<double>> doc_topics = {},
             std::size_t fold_in_iters = 50);

  std::size_t num_topics() const { return beta_.size(); }
  std::size_t vocab_size() const { return vocab_.size(); }
  const std::vector<std::string>& vocab() const { return vocab_; }
  const std::vector<std::vector<double>>& beta() const { return beta_; }
  const std::vector<std::vector<double>>& doc_topics() const { return doc_topics_; }
  double alpha() const { return alpha_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t fold_in_iters() const { return fold_in_iters_; }
  std::optional<std::size_t> index_of(const std::string& token) const;

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<double>> beta_;
  std::vector<std::vector<double>> doc_topics_;
  double alpha_ = 0;
  std::uint64_t seed_ = 0;
  std::size_t fold_in_iters_ = 50;
};

/// Collapsed Gibbs LDA. The vocabulary is sorted lexicographically; beta row b
/// is the smoothed topic-word estimate (n_bv + eta) / (n_b + V * eta) from the
/// final sample, doc_topics likewise (n_db + alpha) / (n_d + B * alpha).
/// Empty documents are allowed individually; all-empty input is an error.
TopicModel fit_lda(const TokenDocs& docs, std::size_t num_topics, const LdaParams& params, std::uint64_t seed);

/// Mass of the k largest entries of row `topic` over the row sum.
double specificity(const TopicModel& model, std::size_t topic, std::size_t k);

/// The k highest-weight tokens of a topic, descending; ties by vocab index.
std::vector<std::string> top_words(const TopicModel& model, std::size_t topic, std::size_t k);

struct SpecificityReport {
  std::vector<double> scores;
  std::size_t k = 0;
  double threshold = 0;
  std::vector<bool> pass;

  bool all_pass() const;
  double min_score() const;
};

SpecificityReport specificity_report(const TopicModel& model, std::size_t k, double threshold);

struct TopicSelection {
  std::size_t num_topics = 0;
  TopicModel model;
  SpecificityReport report;
  bool converged = false;  // false: no B in range passed; best min-specificity returned
};

/// Fits B = b_min..b_max in order and returns the first model whose topics
/// all reach specificity >= threshold at top-k. Topic counts are fitted
/// concurrently; the choice is made in ascending order.
TopicSelection select_topic_count(const TokenDocs& docs, std::size_t b_min, std::size_t b_max, std::size_t k,
                                  double threshold, const LdaParams& params, std::uint64_t seed);

/// Arg-max of the folded-in doc-topic posterior (Gibbs with beta held fixed,
/// seeded from the model seed and the document). OOV tokens are ignored; a
/// document without in-vocabulary tokens throws ValidationError "unassignable".
std::size_t assign_topic(const TopicModel& model, const std::vector<std::string>& doc);

/// The posterior mean of theta estimated by fold-in sampling.
std::vector<double> fold_in(const TopicModel& model, const std::vector<std::string>& doc);

/// {"B","vocab","beta","alpha","seed"}
void write_model(std::ostream& out, const TopicModel& model);
TopicModel read_model(std::istream& in);
TopicModel load_model(const std::filesystem::path& path);

}  // namespace moralbench
