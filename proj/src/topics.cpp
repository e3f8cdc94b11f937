#include "moralbench/topics.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "moralbench/error.hpp"
#include "moralbench/rng.hpp"

namespace moralbench {
namespace {

void check_topic(const TopicModel& model, std::size_t topic) {
  if (topic >= model.num_topics()) {
    throw ValidationError("topic index " + std::to_string(topic) + " out of range [0, " +
                          std::to_string(model.num_topics()) + ")");
  }
}

void check_k(const TopicModel& model, std::size_t k) {
  if (k < 1 || k > model.vocab_size()) {
    throw ValidationError("k=" + std::to_string(k) + " out of range [1, " + std::to_string(model.vocab_size()) +
                          "]");
  }
}

// Vocab indices of a row ordered by descending weight, ties by ascending index.
std::vector<std::size_t> ranked(const std::vector<double>& row) {
  std::vector<std::size_t> order(row.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
  return order;
}

std::size_t sample(Rng& rng, const std::vector<double>& weights, double total) {
  double u = rng.uniform() * total;
  for (std::size_t b = 0; b + 1 < weights.size(); ++b) {
    u -= weights[b];
    if (u < 0) return b;
  }
  return weights.size() - 1;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

TopicModel::TopicModel(std::vector<std::string> vocab, std::vector<std::vector<double>> beta, double alpha,
                       std::uint64_t seed, std::vector<std::vector<double>> doc_topics, std::size_t fold_in_iters)
    : vocab_(std::move(vocab)),
      beta_(std::move(beta)),
      doc_topics_(std::move(doc_topics)),
      alpha_(alpha),
      seed_(seed),
      fold_in_iters_(fold_in_iters) {
  if (beta_.empty() || vocab_.empty()) throw ValidationError("topic model needs B >= 1 and V >= 1");
  for (std::size_t v = 0; v < vocab_.size(); ++v) {
    if (!index_.emplace(vocab_[v], v).second) throw ValidationError("duplicate vocab entry \"" + vocab_[v] + "\"");
  }
  for (auto& row : beta_) {
    if (row.size() != vocab_.size()) throw ValidationError("beta row length differs from vocab size");
    double sum = 0;
    for (double w : row) {
      if (!(w >= 0)) throw ValidationError("beta entries must be nonnegative");
      sum += w;
    }
    if (sum <= 0) throw ValidationError("beta row sums to zero");
    for (double& w : row) w /= sum;
  }
  if (!(alpha_ > 0)) throw ValidationError("alpha must be positive");
}

std::optional<std::size_t> TopicModel::index_of(const std::string& token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TopicModel fit_lda(const TokenDocs& docs, std::size_t num_topics, const LdaParams& params, std::uint64_t seed) {
  if (docs.empty()) throw ValidationError("fit_lda: no documents");
  if (num_topics < 1) throw ValidationError("fit_lda: B must be >= 1");
  if (params.iters < 1) throw ValidationError("fit_lda: iters must be >= 1");
  if (!(params.eta > 0)) throw ValidationError("fit_lda: eta must be positive");
  const double alpha = params.alpha_for(num_topics);
  if (!(alpha > 0)) throw ValidationError("fit_lda: alpha must be positive");

  std::vector<std::string> vocab;
  for (const auto& doc : docs) vocab.insert(vocab.end(), doc.begin(), doc.end());
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  if (vocab.empty()) throw ValidationError("fit_lda: all documents are empty");
  const std::size_t V = vocab.size();
  const std::size_t B = num_topics;

  std::vector<std::vector<std::size_t>> words(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& token : docs[d]) {
      words[d].push_back(static_cast<std::size_t>(std::lower_bound(vocab.begin(), vocab.end(), token) - vocab.begin()));
    }
  }

  Rng rng(seed);
  std::vector<std::vector<std::size_t>> z(docs.size());
  std::vector<std::vector<std::size_t>> doc_counts(docs.size(), std::vector<std::size_t>(B, 0));
  std::vector<std::vector<std::size_t>> topic_word(B, std::vector<std::size_t>(V, 0));
  std::vector<std::size_t> topic_total(B, 0);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (std::size_t w : words[d]) {
      const std::size_t t = rng.index(B);
      z[d].push_back(t);
      ++doc_counts[d][t];
      ++topic_word[t][w];
      ++topic_total[t];
    }
  }

  const double v_eta = static_cast<double>(V) * params.eta;
  std::vector<double> weights(B);
  for (std::size_t iter = 0; iter < params.iters; ++iter) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const std::size_t w = words[d][i];
        std::size_t t = z[d][i];
        --doc_counts[d][t];
        --topic_word[t][w];
        --topic_total[t];
        double total = 0;
        for (std::size_t b = 0; b < B; ++b) {
          weights[b] = (static_cast<double>(doc_counts[d][b]) + alpha) *
                       (static_cast<double>(topic_word[b][w]) + params.eta) /
                       (static_cast<double>(topic_total[b]) + v_eta);
          total += weights[b];
        }
        t = sample(rng, weights, total);
        z[d][i] = t;
        ++doc_counts[d][t];
        ++topic_word[t][w];
        ++topic_total[t];
      }
    }
  }

  std::vector<std::vector<double>> beta(B, std::vector<double>(V));
  for (std::size_t b = 0; b < B; ++b) {
    const double denom = static_cast<double>(topic_total[b]) + v_eta;
    for (std::size_t v = 0; v < V; ++v) beta[b][v] = (static_cast<double>(topic_word[b][v]) + params.eta) / denom;
  }
  std::vector<std::vector<double>> doc_topics(docs.size(), std::vector<double>(B));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const double denom = static_cast<double>(words[d].size()) + static_cast<double>(B) * alpha;
    for (std::size_t b = 0; b < B; ++b) doc_topics[d][b] = (static_cast<double>(doc_counts[d][b]) + alpha) / denom;
  }
  return TopicModel(std::move(vocab), std::move(beta), alpha, seed, std::move(doc_topics), params.fold_in_iters);
}

double specificity(const TopicModel& model, std::size_t topic, std::size_t k) {
  check_topic(model, topic);
  check_k(model, k);
  const auto& row = model.beta()[topic];
  const auto order = ranked(row);
  double top = 0;
  for (std::size_t i = 0; i < k; ++i) top += row[order[i]];
  const double total = std::accumulate(row.begin(), row.end(), 0.0);
  if (k == row.size()) return 1.0;
  return std::min(1.0, top / total);
}

std::vector<std::string> top_words(const TopicModel& model, std::size_t topic, std::size_t k) {
  check_topic(model, topic);
  check_k(model, k);
  const auto order = ranked(model.beta()[topic]);
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(model.vocab()[order[i]]);
  return out;
}

bool SpecificityReport::all_pass() const { return std::all_of(pass.begin(), pass.end(), [](bool p) { return p; }); }

double SpecificityReport::min_score() const { return *std::min_element(scores.begin(), scores.end()); }

SpecificityReport specificity_report(const TopicModel& model, std::size_t k, double threshold) {
  SpecificityReport report;
  report.k = k;
  report.threshold = threshold;
  for (std::size_t b = 0; b < model.num_topics(); ++b) {
    report.scores.push_back(specificity(model, b, k));
    report.pass.push_back(report.scores.back() >= threshold);
  }
  return report;
}

TopicSelection select_topic_count(const TokenDocs& docs, std::size_t b_min, std::size_t b_max, std::size_t k,
                                  double threshold, const LdaParams& params, std::uint64_t seed) {
  if (b_min < 1 || b_min > b_max) throw ValidationError("select_topic_count: need 1 <= B_min <= B_max");
  if (!(threshold >= 0 && threshold <= 1)) throw ValidationError("select_topic_count: h must lie in [0, 1]");

  const std::size_t batch = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  std::optional<TopicSelection> best;
  for (std::size_t start = b_min; start <= b_max; start += batch) {
    const std::size_t stop = std::min(b_max, start + batch - 1);
    std::vector<std::future<TopicModel>> pending;
    for (std::size_t b = start; b <= stop; ++b) {
      pending.push_back(std::async(std::launch::async, [&docs, &params, b, seed] {
        return fit_lda(docs, b, params, seed);
      }));
    }
    std::vector<TopicModel> models;
    for (auto& f : pending) models.push_back(f.get());
    for (std::size_t i = 0; i < models.size(); ++i) {
      SpecificityReport report = specificity_report(models[i], k, threshold);
      if (report.all_pass()) {
        return TopicSelection{start + i, std::move(models[i]), std::move(report), true};
      }
      if (!best || report.min_score() > best->report.min_score()) {
        best = TopicSelection{start + i, std::move(models[i]), std::move(report), false};
      }
    }
  }
  return std::move(*best);
}

std::vector<double> fold_in(const TopicModel& model, const std::vector<std::string>& doc) {
  const std::size_t B = model.num_topics();
  std::vector<std::size_t> words;
  std::string key;
  for (const auto& token : doc) {
    if (auto v = model.index_of(token)) {
      words.push_back(*v);
      key += token;
      key.push_back('\x1f');
    }
  }
  if (words.empty()) throw ValidationError("unassignable: document has no in-vocabulary tokens");

  const auto& beta = model.beta();
  const double alpha = model.alpha();
  std::vector<std::size_t> z(words.size());
  std::vector<std::size_t> counts(B, 0);
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t b = 1; b < B; ++b) {
      if (beta[b][words[i]] > beta[best][words[i]]) best = b;
    }
    z[i] = best;
    ++counts[best];
  }

  Rng rng = Rng::stream(model.seed(), key);
  const std::size_t sweeps = std::max<std::size_t>(2, model.fold_in_iters());
  const std::size_t burn_in = sweeps / 2;
  std::vector<double> accumulated(B, 0.0);
  std::vector<double> weights(B);
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      --counts[z[i]];
      double total = 0;
      for (std::size_t b = 0; b < B; ++b) {
        weights[b] = beta[b][words[i]] * (static_cast<double>(counts[b]) + alpha);
        total += weights[b];
      }
      z[i] = sample(rng, weights, total);
      ++counts[z[i]];
    }
    if (sweep >= burn_in) {
      for (std::size_t b = 0; b < B; ++b) accumulated[b] += static_cast<double>(counts[b]);
    }
  }
  const double kept = static_cast<double>(sweeps - burn_in);
  const double denom = static_cast<double>(words.size()) + static_cast<double>(B) * alpha;
  std::vector<double> theta(B);
  for (std::size_t b = 0; b < B; ++b) theta[b] = (accumulated[b] / kept + alpha) / denom;
  return theta;
}

std::size_t assign_topic(const TopicModel& model, const std::vector<std::string>& doc) {
  return argmax(fold_in(model, doc));
}

void write_model(std::ostream& out, const TopicModel& model) {
  const nlohmann::json j = {{"B", model.num_topics()},
                            {"vocab", model.vocab()},
                            {"beta", model.beta()},
                            {"alpha", model.alpha()},
                            {"seed", model.seed()}};
  out << j.dump() << '\n';
}

TopicModel read_model(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
    const auto B = j.at("B").get<std::size_t>();
    auto beta = j.at("beta").get<std::vector<std::vector<double>>>();
    if (beta.size() != B) throw ValidationError("model file: B does not match beta rows");
    return TopicModel(j.at("vocab").get<std::vector<std::string>>(), std::move(beta), j.at("alpha").get<double>(),
                      j.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  }
}

TopicModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open model file " + path.string());
  return read_model(in);
}

}  // namespace moralbench
