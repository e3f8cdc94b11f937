#include "moralbench/synthetic.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "moralbench/error.hpp"
#include "moralbench/rng.hpp"

namespace moralbench::synthetic {
namespace {

constexpr std::string_view kConsonants = "bdfgklmprtvz";
constexpr std::string_view kVowels = "aeiou";

std::string syllable(std::size_t x) {
  std::string s;
  s.push_back(kConsonants[x % kConsonants.size()]);
  s.push_back(kVowels[x / kConsonants.size()]);
  return s;
}

constexpr std::array<std::string_view, 6> kTemplates = {
    "The {} saw the {} near the {}.",     "A {} and a {} went to the {}.",
    "They found the {} with the {}.",      "Then the {} was in the {} and the {}.",
    "It was the {} of the {}.",            "One day the {} came to the {} with a {}.",
};

std::size_t draw_weighted(Rng& rng, const std::vector<double>& cumulative) {
  const double u = rng.uniform() * cumulative.back();
  return static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
}

std::vector<double> zipf_cumulative(std::size_t n) {
  std::vector<double> c(n);
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += 1.0 / static_cast<double>(i + 1);
    c[i] = sum;
  }
  return c;
}

std::string fill(std::string_view pattern, const std::vector<std::string>& words) {
  std::string out;
  std::size_t next = 0;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] == '{' && i + 1 < pattern.size() && pattern[i + 1] == '}') {
      out += words[next++];
      ++i;
    } else {
      out.push_back(pattern[i]);
    }
  }
  return out;
}

std::size_t slots(std::string_view pattern) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < pattern.size(); ++i) n += pattern[i] == '{' && pattern[i + 1] == '}';
  return n;
}

}  // namespace

std::string word(std::size_t theme, std::size_t index) {
  // Three syllables from a 60-syllable alphabet: unique for fewer than 216000 words.
  const std::size_t base = kConsonants.size() * kVowels.size();
  const std::size_t x = theme * 1000 + index;
  return syllable(x % base) + syllable((x / base) % base) + syllable((x / base / base) % base) + "n";
}

const std::vector<std::string>& value_words() {
  static const std::vector<std::string> words = {"strength", "kindness", "honesty", "patience",
                                                 "wisdom",   "courage",  "good",    "happiness"};
  return words;
}

std::string value_antonyms() {
  return "strength\tweakness\n"
         "kindness\tcruelty\n"
         "honesty\tdishonesty\n"
         "patience\timpatience\n"
         "wisdom\tfolly\n"
         "courage\tcowardice\n"
         "good\tbad\n"
         "happiness\tsadness\n";
}

Corpus corpus(const CorpusSpec& spec) {
  if (spec.themes == 0 || spec.theme_vocab == 0 || spec.min_sentences == 0 ||
      spec.max_sentences < spec.min_sentences) {
    throw ValidationError("synthetic corpus: invalid parameters");
  }
  const auto weights = zipf_cumulative(spec.theme_vocab);
  std::vector<StoryMoralPair> pairs;
  pairs.reserve(spec.pairs);
  for (std::size_t n = 0; n < spec.pairs; ++n) {
    const std::size_t theme = n % spec.themes;
    const std::string id = "t" + std::to_string(theme) + "-" + std::to_string(n);
    Rng rng = Rng::stream(spec.seed, id);
    const std::size_t sentences = spec.min_sentences + rng.index(spec.max_sentences - spec.min_sentences + 1);
    std::string story;
    std::vector<std::string> used;
    for (std::size_t s = 0; s < sentences; ++s) {
      const auto pattern = kTemplates[rng.index(kTemplates.size())];
      std::vector<std::string> words;
      for (std::size_t k = 0; k < slots(pattern); ++k) {
        words.push_back(word(theme, draw_weighted(rng, weights)));
        if (std::find(used.begin(), used.end(), words.back()) == used.end()) used.push_back(words.back());
      }
      std::string sentence = fill(pattern, words);
      if (!story.empty()) story.push_back(' ');
      story += sentence;
    }
    // Moral: distinct story words, then optionally "is <value>".
    rng.shuffle(used);
    const std::size_t take = std::min(spec.moral_story_words, used.size());
    std::string moral;
    for (std::size_t k = 0; k < take; ++k) moral += (k ? " " : "") + used[k];
    if (spec.value_word) moral += " is " + value_words()[rng.index(value_words().size())];
    moral += ".";
    moral[0] = static_cast<char>(moral[0] - 'a' + 'A');
    pairs.push_back(make_pair(id, story, moral, "en"));
  }
  return Corpus(std::move(pairs));
}

std::size_t theme_of(const std::string& id) {
  if (id.size() < 2 || id[0] != 't') throw ValidationError("not a synthetic id: " + id);
  return static_cast<std::size_t>(std::stoul(id.substr(1, id.find('-') - 1)));
}

std::vector<std::vector<std::string>> topic_docs(std::size_t themes, std::size_t theme_vocab, std::size_t docs,
                                                 std::size_t doc_len, std::uint64_t seed, bool zipf) {
  std::vector<double> cumulative(theme_vocab);
  if (zipf) {
    cumulative = zipf_cumulative(theme_vocab);
  } else {
    std::iota(cumulative.begin(), cumulative.end(), 1.0);
  }
  Rng rng(seed);
  std::vector<std::vector<std::string>> out(docs);
  for (std::size_t d = 0; d < docs; ++d) {
    for (std::size_t i = 0; i < doc_len; ++i) out[d].push_back(word(d % themes, draw_weighted(rng, cumulative)));
  }
  return out;
}

}  // namespace moralbench::synthetic
