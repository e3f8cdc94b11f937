#include "moralbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "moralbench/error.hpp"

namespace moralbench {
namespace {

std::string ngram_key(const Tokens& tokens, std::size_t begin, std::size_t n) {
  std::string key;
  for (std::size_t i = begin; i < begin + n; ++i) {
    key += tokens[i];
    key.push_back('\x1f');
  }
  return key;
}

std::unordered_map<std::string, std::size_t> ngram_counts(const Tokens& tokens, std::size_t n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[ngram_key(tokens, i, n)];
  return counts;
}

void require_order(std::size_t n) {
  if (n < 1) throw ValidationError("n-gram order must be >= 1");
}

// Counts pairs i < j with values[i] > values[j].
std::size_t count_inversions(std::vector<std::size_t> values) {
  std::size_t inversions = 0;
  std::vector<std::size_t> scratch(values.size());
  for (std::size_t width = 1; width < values.size(); width *= 2) {
    for (std::size_t lo = 0; lo < values.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, values.size());
      const std::size_t hi = std::min(lo + 2 * width, values.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (values[j] < values[i]) {
          inversions += mid - i;
          scratch[k++] = values[j++];
        } else {
          scratch[k++] = values[i++];
        }
      }
      while (i < mid) scratch[k++] = values[i++];
      while (j < hi) scratch[k++] = values[j++];
    }
    std::swap(values, scratch);
  }
  return inversions;
}

}  // namespace

double bleu_n(const GenerationBatch& batch, std::size_t n) {
  require_order(n);
  if (batch.items.empty()) throw ValidationError("bleu_n: empty hypothesis set");
  std::vector<double> matched(n, 0.0);
  std::vector<double> total(n, 0.0);
  double hyp_len = 0;
  double ref_len = 0;
  for (const auto& item : batch.items) {
    if (!item.reference) throw ValidationError("bleu_n: item \"" + item.id + "\" has no reference");
    hyp_len += static_cast<double>(item.hypothesis.size());
    ref_len += static_cast<double>(item.reference->size());
    for (std::size_t order = 1; order <= n; ++order) {
      const auto hyp = ngram_counts(item.hypothesis, order);
      const auto ref = ngram_counts(*item.reference, order);
      for (const auto& [gram, count] : hyp) {
        total[order - 1] += static_cast<double>(count);
        if (const auto it = ref.find(gram); it != ref.end()) {
          matched[order - 1] += static_cast<double>(std::min(count, it->second));
        }
      }
    }
  }
  if (hyp_len == 0) return 0.0;
  double log_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double hits = matched[i] > 0 ? matched[i] : kBleuEpsilon;
    const double denom = total[i] > 0 ? total[i] : 1.0;
    log_sum += std::log(hits / denom);
  }
  const double brevity = hyp_len >= ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
  return 100.0 * brevity * std::exp(log_sum / static_cast<double>(n));
}

double distinct_n(const std::vector<Tokens>& texts, std::size_t n) {
  require_order(n);
  std::unordered_set<std::string> distinct;
  std::size_t total = 0;
  for (const auto& t : texts) {
    if (t.size() < n) continue;
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
      distinct.insert(ngram_key(t, i, n));
      ++total;
    }
  }
  if (total == 0) throw ValidationError("distinct_n: no n-grams");
  return 100.0 * static_cast<double>(distinct.size()) / static_cast<double>(total);
}

double repetition_n(const std::vector<Tokens>& texts, std::size_t n) {
  require_order(n);
  if (texts.empty()) throw ValidationError("repetition_n: empty text list");
  std::size_t repeating = 0;
  for (const auto& t : texts) {
    const auto counts = ngram_counts(t, n);
    if (std::any_of(counts.begin(), counts.end(), [](const auto& kv) { return kv.second >= 2; })) ++repeating;
  }
  return 100.0 * static_cast<double>(repeating) / static_cast<double>(texts.size());
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  const Tokens& shorter = a.size() <= b.size() ? a : b;
  const Tokens& longer = a.size() <= b.size() ? b : a;
  std::vector<std::size_t> row(shorter.size() + 1, 0);
  for (const auto& x : longer) {
    std::size_t diagonal = 0;
    for (std::size_t j = 1; j <= shorter.size(); ++j) {
      const std::size_t above = row[j];
      row[j] = x == shorter[j - 1] ? diagonal + 1 : std::max(row[j], row[j - 1]);
      diagonal = above;
    }
  }
  return row.back();
}

double coverage(const Tokens& story, const Outline& outline) {
  if (outline.phrases.empty()) throw ValidationError("coverage: empty outline");
  double sum = 0;
  for (const auto& phrase : outline.phrases) {
    sum += static_cast<double>(lcs_length(phrase.tokens, story)) / static_cast<double>(phrase.tokens.size());
  }
  return 100.0 * sum / static_cast<double>(outline.phrases.size());
}

std::vector<std::optional<std::size_t>> locate_phrases(const Tokens& story, const Outline& outline) {
  std::vector<std::optional<std::size_t>> positions;
  positions.reserve(outline.phrases.size());
  for (const auto& phrase : outline.phrases) {
    const std::size_t width = std::min(phrase.tokens.size(), story.size());
    std::size_t best_lcs = 0;
    std::size_t best_offset = 0;
    for (std::size_t offset = 0; offset + width <= story.size() && width > 0; ++offset) {
      const Tokens window(story.begin() + static_cast<std::ptrdiff_t>(offset),
                          story.begin() + static_cast<std::ptrdiff_t>(offset + width));
      const std::size_t l = lcs_length(phrase.tokens, window);
      if (l > best_lcs) {
        best_lcs = l;
        best_offset = offset;
        if (l == phrase.tokens.size()) break;
      }
    }
    positions.push_back(best_lcs > 0 ? std::optional<std::size_t>(best_offset) : std::nullopt);
  }
  return positions;
}

OrderResult order_score(const Tokens& story, const Outline& outline) {
  if (outline.phrases.size() < 2) throw ValidationError("order_score: outline needs at least two phrases");
  if (outline.ground_truth_order.size() != outline.phrases.size()) {
    throw ValidationError("order_score: ground-truth order does not cover the outline");
  }
  const auto positions = locate_phrases(story, outline);
  std::vector<std::size_t> located_in_truth_order;
  for (std::size_t phrase : outline.ground_truth_order) {
    if (phrase >= positions.size()) throw ValidationError("order_score: bad ground-truth order");
    if (positions[phrase]) located_in_truth_order.push_back(*positions[phrase]);
  }
  OrderResult result;
  result.located = located_in_truth_order.size();
  if (result.located < 2) {
    result.unlocatable = true;
    return result;
  }
  result.pairs = result.located * (result.located - 1) / 2;
  result.inversions = count_inversions(std::move(located_in_truth_order));
  result.score = 100.0 * (1.0 - static_cast<double>(result.inversions) / static_cast<double>(result.pairs));
  return result;
}

double accuracy(const std::map<std::string, std::size_t>& predictions,
                const std::map<std::string, std::size_t>& gold) {
  if (gold.empty()) throw ValidationError("accuracy: empty gold set");
  std::size_t correct = 0;
  for (const auto& [id, predicted] : predictions) {
    const auto it = gold.find(id);
    if (it == gold.end()) throw ValidationError("accuracy: prediction for unknown id \"" + id + "\"");
    if (it->second == predicted) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(gold.size());
}

double avg_length(const std::vector<Tokens>& texts) {
  if (texts.empty()) throw ValidationError("avg_length: empty text list");
  std::size_t total = 0;
  for (const auto& t : texts) total += t.size();
  return static_cast<double>(total) / static_cast<double>(texts.size());
}

}  // namespace moralbench
