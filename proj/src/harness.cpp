#include "moralbench/harness.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <set>

#include <nlohmann/json.hpp>

#include "moralbench/error.hpp"
#include "moralbench/rng.hpp"
#include "moralbench/text.hpp"

namespace moralbench {
namespace {

using nlohmann::json;

std::size_t argmax_lowest(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

template <typename Record>
void check_ids(const std::map<std::string, std::string>& hypotheses, const std::vector<Record>& dataset) {
  std::set<std::string> dataset_ids;
  std::vector<std::string> missing;
  for (const auto& r : dataset) {
    if (!dataset_ids.insert(r.id).second) throw ValidationError("duplicate dataset id \"" + r.id + "\"");
    if (!hypotheses.contains(r.id)) missing.push_back(r.id);
  }
  std::vector<std::string> unknown;
  for (const auto& [id, _] : hypotheses) {
    if (!dataset_ids.contains(id)) unknown.push_back(id);
  }
  if (missing.empty() && unknown.empty()) return;
  auto list = [](const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) out += (out.empty() ? "" : ", ") + id;
    return out;
  };
  std::string message = "hypothesis/dataset id mismatch";
  if (!missing.empty()) message += "; missing hypotheses: " + list(missing);
  if (!unknown.empty()) message += "; unknown ids: " + list(unknown);
  throw ValidationError(message);
}

std::string format_count(std::size_t n) { return std::to_string(n); }

MetricReport evaluate_st2mo(const std::map<std::string, std::string>& hypotheses,
                            const std::vector<St2MoRecord>& dataset, const GenerationSettings& settings) {
  check_ids(hypotheses, dataset);
  if (dataset.empty()) throw ValidationError("evaluate_generation: empty dataset");
  const std::size_t n = settings.ngram_n.value_or(2);
  GenerationBatch batch;
  std::vector<Tokens> texts;
  for (const auto& r : dataset) {
    Tokens hyp = text::tokenize(hypotheses.at(r.id), settings.lang);
    texts.push_back(hyp);
    batch.items.push_back({r.id, std::move(hyp), text::tokenize(r.moral, settings.lang), std::nullopt});
  }
  MetricReport report;
  report.item_count = dataset.size();
  report.values["bleu1"] = bleu_n(batch, 1);
  report.values["bleu2"] = bleu_n(batch, 2);
  report.values["repetition" + std::to_string(n)] = repetition_n(texts, n);
  report.values["distinct" + std::to_string(n)] = distinct_n(texts, n);
  report.values["length"] = avg_length(texts);
  report.settings = {{"task", "st2mo"}, {"n", std::to_string(n)}, {"bleu", "corpus-level, epsilon 1e-9"}};
  return report;
}

MetricReport evaluate_mo2st(const std::map<std::string, std::string>& hypotheses,
                            const std::vector<Mo2StRecord>& dataset, const GenerationSettings& settings) {
  check_ids(hypotheses, dataset);
  if (dataset.empty()) throw ValidationError("evaluate_generation: empty dataset");
  const std::size_t n = settings.ngram_n.value_or(4);
  GenerationBatch batch;
  std::vector<Tokens> texts;
  double coverage_sum = 0;
  std::size_t coverage_items = 0;
  double order_sum = 0;
  std::size_t order_items = 0;
  std::size_t unlocatable = 0;
  for (const auto& r : dataset) {
    Tokens hyp = text::tokenize(hypotheses.at(r.id), settings.lang);
    if (!r.outline.phrases.empty()) {
      coverage_sum += coverage(hyp, r.outline);
      ++coverage_items;
    }
    if (r.outline.phrases.size() >= 2) {
      const OrderResult order = order_score(hyp, r.outline);
      order_sum += order.score;
      ++order_items;
      if (order.unlocatable) ++unlocatable;
    }
    texts.push_back(hyp);
    batch.items.push_back({r.id, std::move(hyp), text::tokenize(r.target_story, settings.lang), r.outline});
  }
  MetricReport report;
  report.item_count = dataset.size();
  report.values["bleu1"] = bleu_n(batch, 1);
  report.values["bleu2"] = bleu_n(batch, 2);
  report.values["repetition" + std::to_string(n)] = repetition_n(texts, n);
  report.values["distinct" + std::to_string(n)] = distinct_n(texts, n);
  if (coverage_items > 0) report.values["coverage"] = coverage_sum / static_cast<double>(coverage_items);
  if (order_items > 0) report.values["order"] = order_sum / static_cast<double>(order_items);
  report.values["length"] = avg_length(texts);
  report.settings = {{"task", "mo2st"},
                     {"n", std::to_string(n)},
                     {"bleu", "corpus-level, epsilon 1e-9"},
                     {"coverage_items", format_count(coverage_items)},
                     {"order_items", format_count(order_items)},
                     {"order_unlocatable", format_count(unlocatable)}};
  return report;
}

}  // namespace

std::vector<double> softmax(const std::vector<double>& scores, double temperature) {
  if (!(temperature > 0)) throw ValidationError("temperature must be positive");
  if (scores.empty()) return {};
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double sum = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp((scores[i] - top) / temperature);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

std::vector<double> score_candidates(const CandidateScorer& scorer, const std::string& story_id, const Tokens& story,
                                     const std::vector<Tokens>& candidates,
                                     const std::optional<RetrievalContext>& context) {
  if (scorer.provider == nullptr) throw ValidationError("score_candidates: scorer has no embedding provider");
  if (candidates.size() < 2) throw ValidationError("score_candidates: need at least two candidates");
  Vector story_vec;
  if (scorer.use_retrieval) {
    if (!context || context->index == nullptr || context->resources == nullptr || context->source == nullptr) {
      throw ValidationError("score_candidates: retrieval enabled without index/resources/source");
    }
    StoryMoralPair query;
    query.id = story_id;
    query.story_tokens = story;
    const Augmentation aug =
        augment_story(query, *context->index, *scorer.provider, scorer.m, *context->resources, *context->source);
    story_vec = scorer.provider->embed(aug.combined());
  } else {
    story_vec = scorer.provider->embed(story_id, story);
  }
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const auto& c : candidates) scores.push_back(dot(story_vec, scorer.provider->embed(c)));
  return softmax(scores, scorer.temperature);
}

std::size_t random_chooser(std::size_t n_candidates, std::uint64_t seed) {
  if (n_candidates == 0) throw ValidationError("random_chooser: no candidates");
  Rng rng(seed);
  return rng.index(n_candidates);
}

Chooser gold_chooser() {
  return [](const ChoiceRecord& r) { return Decision{r.id, r.label, r.label, {}}; };
}

Chooser random_record_chooser(std::uint64_t seed) {
  return [seed](const ChoiceRecord& r) {
    Rng rng = Rng::stream(seed, r.id);
    return Decision{r.id, rng.index(r.candidates.size()), r.label, {}};
  };
}

Chooser embedding_chooser(const CandidateScorer& scorer, std::optional<RetrievalContext> context) {
  return [scorer, context](const ChoiceRecord& r) {
    std::vector<Tokens> candidates;
    for (const auto& c : r.candidates) candidates.push_back(text::tokenize(c));
    auto probs = score_candidates(scorer, r.id, text::tokenize(r.story), candidates, context);
    const std::size_t predicted = argmax_lowest(probs);
    return Decision{r.id, predicted, r.label, std::move(probs)};
  };
}

UnderstandingReport evaluate_understanding(const std::vector<ChoiceRecord>& dataset, const Chooser& chooser) {
  if (dataset.empty()) throw ValidationError("evaluate_understanding: empty dataset");
  UnderstandingReport report;
  std::map<std::string, std::size_t> predictions;
  std::map<std::string, std::size_t> gold;
  for (const auto& record : dataset) {
    Decision d = chooser(record);
    if (d.predicted >= record.candidates.size()) {
      throw ValidationError("chooser picked index " + std::to_string(d.predicted) + " for \"" + record.id + "\"");
    }
    if (!gold.emplace(record.id, record.label).second) {
      throw ValidationError("duplicate record id \"" + record.id + "\"");
    }
    predictions.emplace(record.id, d.predicted);
    report.decisions.push_back(std::move(d));
  }
  report.metrics.values["accuracy"] = accuracy(predictions, gold);
  report.metrics.item_count = dataset.size();
  return report;
}

MetricReport evaluate_generation(const std::map<std::string, std::string>& hypotheses,
                                 const GenerationDataset& dataset, const GenerationSettings& settings) {
  if (const auto* st2mo = std::get_if<std::vector<St2MoRecord>>(&dataset)) {
    return evaluate_st2mo(hypotheses, *st2mo, settings);
  }
  return evaluate_mo2st(hypotheses, std::get<std::vector<Mo2StRecord>>(dataset), settings);
}

std::map<std::string, std::string> read_hypotheses(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      auto id = j.at("id").get<std::string>();
      if (!out.emplace(id, j.at("text").get<std::string>()).second) {
        throw ValidationError("duplicate id \"" + id + "\"");
      }
    } catch (const json::exception& e) {
      throw ValidationError("hypotheses line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::map<std::string, std::size_t> read_predictions(std::istream& in) {
  std::map<std::string, std::size_t> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      auto id = j.at("id").get<std::string>();
      if (!out.emplace(id, j.at("prediction").get<std::size_t>()).second) {
        throw ValidationError("duplicate id \"" + id + "\"");
      }
    } catch (const json::exception& e) {
      throw ValidationError("predictions line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace moralbench
