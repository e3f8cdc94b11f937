#include "moralbench/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "moralbench/error.hpp"
#include "moralbench/rng.hpp"
#include "moralbench/text.hpp"

namespace moralbench {
namespace {

using nlohmann::json;

std::string line_prefix(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

std::string require_string(const json& record, const char* field, std::size_t line_no) {
  const auto it = record.find(field);
  if (it == record.end()) {
    throw ValidationError(line_prefix(line_no) + "missing field \"" + field + "\"");
  }
  if (!it->is_string()) {
    throw ValidationError(line_prefix(line_no) + "field \"" + field + "\" must be a string");
  }
  return it->get<std::string>();
}

std::optional<std::vector<std::string>> optional_strings(const json& record, const char* field,
                                                         std::size_t line_no) {
  const auto it = record.find(field);
  if (it == record.end()) return std::nullopt;
  const bool ok = it->is_array() && std::all_of(it->begin(), it->end(), [](const json& v) {
                    return v.is_string();
                  });
  if (!ok) {
    throw ValidationError(line_prefix(line_no) + "field \"" + field + "\" must be an array of strings");
  }
  return it->get<std::vector<std::string>>();
}

StoryMoralPair build_pair(std::string id, std::string_view story, std::string_view moral, std::string lang,
                          std::optional<std::vector<std::string>> story_tokens,
                          std::optional<std::vector<std::string>> moral_tokens,
                          std::optional<std::vector<std::string>> story_sentences) {
  StoryMoralPair pair;
  pair.id = std::move(id);
  pair.story = text::normalize(story);
  pair.moral = text::normalize(moral);
  pair.lang = std::move(lang);
  if (pair.story.empty()) throw ValidationError("empty story in record \"" + pair.id + "\"");
  if (pair.moral.empty()) throw ValidationError("empty moral in record \"" + pair.id + "\"");
  pair.story_tokens = story_tokens ? std::move(*story_tokens) : text::tokenize(pair.story, pair.lang);
  pair.moral_tokens = moral_tokens ? std::move(*moral_tokens) : text::tokenize(pair.moral, pair.lang);
  pair.story_sentences = story_sentences ? std::move(*story_sentences) : text::split_sentences(pair.story);
  return pair;
}

}  // namespace

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Val:
      return "val";
    case Split::Test:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw ValidationError("unknown split \"" + std::string(s) + "\"");
}

StoryMoralPair make_pair(std::string id, std::string_view story, std::string_view moral, std::string lang) {
  return build_pair(std::move(id), story, moral, std::move(lang), std::nullopt, std::nullopt, std::nullopt);
}

Corpus::Corpus(std::vector<StoryMoralPair> pairs) : pairs_(std::move(pairs)) {
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (!by_id_.emplace(pairs_[i].id, i).second) {
      throw ValidationError("duplicate id \"" + pairs_[i].id + "\"");
    }
  }
}

const StoryMoralPair* Corpus::find(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &pairs_[it->second];
}

const StoryMoralPair& Corpus::at(std::string_view id) const {
  const auto* pair = find(id);
  if (pair == nullptr) throw ValidationError("unknown id \"" + std::string(id) + "\"");
  return *pair;
}

Corpus Corpus::with_splits(std::map<std::string, Split> split_of) const {
  for (const auto& [id, split] : split_of) {
    if (!by_id_.contains(id)) throw ValidationError("split assigns unknown id \"" + id + "\"");
  }
  Corpus out = *this;
  out.split_of_ = std::move(split_of);
  return out;
}

Corpus Corpus::subset(Split s) const {
  std::vector<StoryMoralPair> kept;
  std::map<std::string, Split> kept_splits;
  for (const auto& pair : pairs_) {
    const auto it = split_of_.find(pair.id);
    if (it != split_of_.end() && it->second == s) {
      kept.push_back(pair);
      kept_splits.emplace(pair.id, s);
    }
  }
  Corpus out(std::move(kept));
  out.split_of_ = std::move(kept_splits);
  return out;
}

Corpus read_corpus(std::istream& in) {
  std::vector<StoryMoralPair> pairs;
  std::map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(line_prefix(line_no) + "malformed JSON (" + e.what() + ")");
    }
    if (!record.is_object()) throw ValidationError(line_prefix(line_no) + "record is not a JSON object");
    std::string id = require_string(record, "id", line_no);
    const std::string story = require_string(record, "story", line_no);
    const std::string moral = require_string(record, "moral", line_no);
    std::string lang = require_string(record, "lang", line_no);
    if (const auto [it, inserted] = first_line.emplace(id, line_no); !inserted) {
      throw ValidationError("duplicate id \"" + id + "\" on lines " + std::to_string(it->second) + " and " +
                            std::to_string(line_no));
    }
    try {
      pairs.push_back(build_pair(std::move(id), story, moral, std::move(lang),
                                 optional_strings(record, "story_tokens", line_no),
                                 optional_strings(record, "moral_tokens", line_no),
                                 optional_strings(record, "story_sentences", line_no)));
    } catch (const ValidationError& e) {
      const std::string what = e.what();
      if (what.rfind("line ", 0) == 0) throw;
      throw ValidationError(line_prefix(line_no) + what);
    }
  }
  return Corpus(std::move(pairs));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open corpus file " + path.string());
  return read_corpus(in);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& p : corpus.pairs()) {
    const json record = {{"id", p.id},
                         {"story", p.story},
                         {"moral", p.moral},
                         {"lang", p.lang},
                         {"story_tokens", p.story_tokens},
                         {"moral_tokens", p.moral_tokens},
                         {"story_sentences", p.story_sentences}};
    out << record.dump() << '\n';
  }
}

std::map<std::string, Split> read_splits(std::istream& in) {
  std::map<std::string, Split> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(line_prefix(line_no) + "malformed JSON (" + e.what() + ")");
    }
    const std::string id = require_string(record, "id", line_no);
    const std::string split = require_string(record, "split", line_no);
    Split s;
    try {
      s = parse_split(split);
    } catch (const ValidationError& e) {
      throw ValidationError(line_prefix(line_no) + e.what());
    }
    if (!out.emplace(id, s).second) {
      throw ValidationError(line_prefix(line_no) + "duplicate id \"" + id + "\"");
    }
  }
  return out;
}

std::map<std::string, Split> load_splits(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open split file " + path.string());
  return read_splits(in);
}

void write_splits(std::ostream& out, const Corpus& corpus) {
  for (const auto& p : corpus.pairs()) {
    const auto it = corpus.split_of().find(p.id);
    if (it == corpus.split_of().end()) continue;
    out << json{{"id", p.id}, {"split", to_string(it->second)}}.dump() << '\n';
  }
}

std::array<std::size_t, 3> split_sizes(std::size_t n, std::array<std::uint32_t, 3> ratios) {
  const std::uint64_t total = std::uint64_t{ratios[0]} + ratios[1] + ratios[2];
  if (total == 0) throw ValidationError("split ratios must not all be zero");
  std::array<std::size_t, 3> sizes{};
  std::array<std::uint64_t, 3> remainders{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::uint64_t scaled = static_cast<std::uint64_t>(n) * ratios[i];
    sizes[i] = static_cast<std::size_t>(scaled / total);
    remainders[i] = scaled % total;
    assigned += sizes[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % 3]];
  return sizes;
}

Corpus split_corpus(const Corpus& corpus, std::array<std::uint32_t, 3> ratios, std::uint64_t seed) {
  if (corpus.empty()) throw ValidationError("cannot split an empty corpus");
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& p : corpus.pairs()) ids.push_back(p.id);
  std::sort(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(ids);
  const auto sizes = split_sizes(ids.size(), ratios);
  std::map<std::string, Split> split_of;
  std::size_t i = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t j = 0; j < sizes[s]; ++j, ++i) split_of.emplace(ids[i], static_cast<Split>(s));
  }
  return corpus.with_splits(std::move(split_of));
}

CorpusStats corpus_stats(const Corpus& corpus) {
  if (corpus.empty()) throw ValidationError("corpus_stats on an empty corpus");
  CorpusStats stats;
  stats.n_examples = corpus.size();
  std::set<std::string> story_vocab;
  std::set<std::string> moral_vocab;
  std::size_t story_words = 0, moral_words = 0, story_sents = 0, moral_sents = 0;
  for (const auto& p : corpus.pairs()) {
    story_words += p.story_tokens.size();
    moral_words += p.moral_tokens.size();
    story_sents += p.story_sentences.size();
    moral_sents += text::split_sentences(p.moral).size();
    story_vocab.insert(p.story_tokens.begin(), p.story_tokens.end());
    moral_vocab.insert(p.moral_tokens.begin(), p.moral_tokens.end());
  }
  const double n = static_cast<double>(corpus.size());
  stats.avg_story_words = static_cast<double>(story_words) / n;
  stats.avg_moral_words = static_cast<double>(moral_words) / n;
  stats.avg_story_sents = static_cast<double>(story_sents) / n;
  stats.avg_moral_sents = static_cast<double>(moral_sents) / n;
  stats.story_vocab = story_vocab.size();
  stats.moral_vocab = moral_vocab.size();
  return stats;
}

}  // namespace moralbench
