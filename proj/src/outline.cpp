#include "moralbench/outline.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

#include "moralbench/error.hpp"
#include "moralbench/text.hpp"

namespace moralbench {
namespace {

struct Candidate {
  std::size_t begin;
  std::size_t length;
};

bool by_score_then_position(const Phrase& a, const Phrase& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.first_pos.value_or(SIZE_MAX) < b.first_pos.value_or(SIZE_MAX);
}

}  // namespace

std::optional<std::size_t> find_run(const std::vector<std::string>& haystack,
                                    const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return std::nullopt;
  const auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end());
  if (it == haystack.end()) return std::nullopt;
  return static_cast<std::size_t>(it - haystack.begin());
}

bool contains_run(const std::vector<std::string>& haystack, const std::vector<std::string>& needle) {
  return find_run(haystack, needle).has_value();
}

std::vector<Phrase> rake_extract(const std::vector<std::string>& tokens, const StopwordSet& stopwords,
                                 std::size_t max_phrase_len, const std::vector<bool>& breaks) {
  if (max_phrase_len < 1) throw ValidationError("rake_extract: max_phrase_len must be >= 1");

  std::vector<Candidate> candidates;
  auto flush = [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; b += max_phrase_len) {
      candidates.push_back({b, std::min(max_phrase_len, end - b)});
    }
  };
  std::size_t run_start = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool cut = i < breaks.size() && breaks[i];
    if (cut) {
      flush(run_start, i);
      run_start = i;
    }
    if (stopwords.contains(tokens[i])) {
      flush(run_start, i);
      run_start = i + 1;
    }
  }
  flush(run_start, tokens.size());

  std::unordered_map<std::string, double> degree;
  std::unordered_map<std::string, double> frequency;
  for (const auto& c : candidates) {
    for (std::size_t i = c.begin; i < c.begin + c.length; ++i) {
      degree[tokens[i]] += static_cast<double>(c.length);
      frequency[tokens[i]] += 1.0;
    }
  }

  std::vector<Phrase> phrases;
  std::map<std::vector<std::string>, bool> seen;
  for (const auto& c : candidates) {
    std::vector<std::string> run(tokens.begin() + static_cast<std::ptrdiff_t>(c.begin),
                                 tokens.begin() + static_cast<std::ptrdiff_t>(c.begin + c.length));
    if (!seen.emplace(run, true).second) continue;
    double score = 0;
    for (const auto& w : run) score += degree[w] / frequency[w];
    const auto first = find_run(tokens, run);
    phrases.push_back({std::move(run), score, first});
  }
  std::stable_sort(phrases.begin(), phrases.end(), by_score_then_position);
  return phrases;
}

void order_by_position(Outline& outline) {
  auto& order = outline.ground_truth_order;
  order.resize(outline.phrases.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return outline.phrases[a].first_pos.value_or(SIZE_MAX) < outline.phrases[b].first_pos.value_or(SIZE_MAX);
  });
}

Outline build_outline(const StoryMoralPair& pair, const StopwordSet& stopwords, const OutlineParams& params) {
  std::vector<bool> breaks;
  const auto spans = text::tokenize_spans(pair.story);
  const bool builtin_tokens =
      spans.size() == pair.story_tokens.size() &&
      std::equal(spans.begin(), spans.end(), pair.story_tokens.begin(),
                 [](const text::TokenSpan& s, const std::string& t) { return s.token == t; });
  if (builtin_tokens) {
    for (const auto& s : spans) breaks.push_back(s.break_before);
  }

  auto phrases = rake_extract(pair.story_tokens, stopwords, params.max_words, breaks);

  // Longer phrases claim their sub-runs first; among equal lengths the higher score wins.
  std::vector<std::size_t> by_length(phrases.size());
  std::iota(by_length.begin(), by_length.end(), std::size_t{0});
  std::stable_sort(by_length.begin(), by_length.end(), [&](std::size_t a, std::size_t b) {
    return phrases[a].tokens.size() > phrases[b].tokens.size();
  });
  std::vector<bool> keep(phrases.size(), false);
  std::vector<std::size_t> kept;
  for (std::size_t idx : by_length) {
    const bool contained = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return contains_run(phrases[k].tokens, phrases[idx].tokens);
    });
    if (!contained) {
      keep[idx] = true;
      kept.push_back(idx);
    }
  }

  Outline outline;
  outline.source_id = pair.id;
  for (std::size_t i = 0; i < phrases.size() && outline.phrases.size() < params.max_phrases; ++i) {
    if (keep[i]) outline.phrases.push_back(std::move(phrases[i]));
  }
  outline.empty_flag = outline.phrases.empty();
  order_by_position(outline);
  return outline;
}

const std::string& first_sentence(const StoryMoralPair& pair) {
  if (pair.story_sentences.empty()) {
    throw ValidationError("story \"" + pair.id + "\" has no sentences");
  }
  return pair.story_sentences.front();
}

}  // namespace moralbench
