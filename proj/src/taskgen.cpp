#include "moralbench/taskgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "moralbench/error.hpp"
#include "moralbench/rng.hpp"
#include "moralbench/text.hpp"

namespace moralbench {
namespace {

using nlohmann::json;

std::optional<std::size_t> try_assign(const TopicModel& model, const std::vector<std::string>& tokens) {
  try {
    return assign_topic(model, tokens);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

std::string_view to_string(FaithLabel label) { return label == FaithLabel::Matched ? "matched" : "mismatched"; }

std::string_view to_string(Corruption c) {
  switch (c) {
    case Corruption::None:
      return "none";
    case Corruption::StoryReplaced:
      return "story_replaced";
    case Corruption::MoralReplaced:
      return "moral_replaced";
  }
  return "none";
}

template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<MoCptRecord> build_mocpt(const Corpus& split, const Corpus& pool, const TopicModel& model,
                                     std::size_t n_neg, std::uint64_t seed, SkipLog* skipped) {
  struct PoolEntry {
    const StoryMoralPair* pair;
    std::size_t topic;
  };
  // Distinct pool morals with their topics; first occurrence of a moral text wins.
  std::vector<PoolEntry> entries;
  std::unordered_set<std::string> seen_text;
  std::unordered_map<std::string, std::optional<std::size_t>> topic_of;
  for (const auto& p : pool.pairs()) {
    const auto topic = try_assign(model, p.moral_tokens);
    topic_of.emplace(p.id, topic);
    if (topic && seen_text.insert(p.moral).second) entries.push_back({&p, *topic});
  }

  std::vector<MoCptRecord> records;
  for (const auto& pair : split.pairs()) {
    const auto cached = topic_of.find(pair.id);
    const auto gold_topic = cached != topic_of.end() ? cached->second : try_assign(model, pair.moral_tokens);
    if (!gold_topic) {
      if (skipped) skipped->add(pair.id, std::string(kUnassignableGold));
      continue;
    }
    std::vector<const PoolEntry*> eligible;
    for (const auto& e : entries) {
      if (e.topic != *gold_topic && e.pair->id != pair.id && e.pair->moral != pair.moral) eligible.push_back(&e);
    }
    if (eligible.size() < n_neg) {
      if (skipped) skipped->add(pair.id, std::string(kInsufficientNegatives));
      continue;
    }
    Rng rng = Rng::stream(seed, pair.id);
    for (std::size_t i = 0; i < n_neg; ++i) {
      std::swap(eligible[i], eligible[i + rng.index(eligible.size() - i)]);
    }

    // Slot 0 is the gold moral until the shuffle.
    std::vector<std::pair<std::string, std::optional<std::size_t>>> slots;
    slots.emplace_back(pair.moral, std::nullopt);
    for (std::size_t i = 0; i < n_neg; ++i) slots.emplace_back(eligible[i]->pair->moral, eligible[i]->topic);
    rng.shuffle(slots);

    MoCptRecord record;
    record.id = pair.id;
    record.story = pair.story;
    record.gold_topic = *gold_topic;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      record.candidates.push_back(slots[i].first);
      if (slots[i].second) {
        record.neg_topic_ids.push_back(*slots[i].second);
      } else {
        record.label = i;
      }
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::string substitute_token(const StoryMoralPair& pair, std::size_t position, const std::string& replacement) {
  if (position >= pair.moral_tokens.size()) throw ValidationError("substitute_token: position out of range");
  const auto spans = text::tokenize_spans(pair.moral);
  const bool builtin = spans.size() == pair.moral_tokens.size() &&
                       std::equal(spans.begin(), spans.end(), pair.moral_tokens.begin(),
                                  [](const text::TokenSpan& s, const std::string& t) { return s.token == t; });
  if (!builtin) {
    auto tokens = pair.moral_tokens;
    tokens[position] = replacement;
    return text::join_tokens(tokens);
  }
  const std::string normalized = text::normalize(pair.moral);
  const auto& span = spans[position];
  std::string word = replacement;
  const unsigned char lead = static_cast<unsigned char>(normalized[span.begin]);
  if (std::isupper(lead) && !word.empty() && std::islower(static_cast<unsigned char>(word[0]))) {
    word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
  }
  return normalized.substr(0, span.begin) + word + normalized.substr(span.end);
}

std::vector<MoPrefRecord> build_mopref(const Corpus& split, const AntonymLexicon& antonyms, std::uint64_t seed,
                                       SkipLog* skipped) {
  if (antonyms.empty()) throw ValidationError("build_mopref: antonym lexicon is empty");
  std::vector<MoPrefRecord> records;
  for (const auto& pair : split.pairs()) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < pair.moral_tokens.size(); ++i) {
      if (antonyms.find(pair.moral_tokens[i]) != nullptr) eligible.push_back(i);
    }
    if (eligible.empty()) {
      if (skipped) skipped->add(pair.id, "no token has an antonym");
      continue;
    }
    Rng rng = Rng::stream(seed, pair.id);
    const std::size_t position = eligible[rng.index(eligible.size())];
    const std::string& original = pair.moral_tokens[position];
    const auto& options = *antonyms.find(original);
    const std::string& flipped = options[rng.index(options.size())];

    std::vector<std::string> candidates{pair.moral, substitute_token(pair, position, flipped)};
    std::size_t label = 0;
    if (rng.coin()) {
      std::swap(candidates[0], candidates[1]);
      label = 1;
    }
    records.push_back({pair.id, pair.story, std::move(candidates), label, position, {original, flipped}});
  }
  return records;
}

std::vector<St2MoRecord> build_st2mo(const Corpus& split) {
  std::vector<St2MoRecord> records;
  records.reserve(split.size());
  for (const auto& pair : split.pairs()) records.push_back({pair.id, pair.story, pair.moral});
  return records;
}

std::vector<Mo2StRecord> build_mo2st(const Corpus& split, const StopwordSet& stopwords, const OutlineParams& params,
                                     SkipLog* flagged) {
  std::vector<Mo2StRecord> records;
  records.reserve(split.size());
  for (const auto& pair : split.pairs()) {
    Outline outline = build_outline(pair, stopwords, params);
    if (outline.empty_flag && flagged) flagged->add(pair.id, "empty outline");
    records.push_back({pair.id, pair.moral, first_sentence(pair), std::move(outline), pair.story});
  }
  return records;
}

std::vector<FaithPairRecord> build_faithfulness_data(const Corpus& split, double neg_ratio, std::uint64_t seed) {
  if (!(neg_ratio >= 0)) throw ValidationError("build_faithfulness_data: neg_ratio must be >= 0");
  const auto& pairs = split.pairs();
  const std::size_t n = pairs.size();
  const auto negatives = static_cast<std::size_t>(std::floor(neg_ratio * static_cast<double>(n)));
  if (negatives > 0 && n < 2) {
    throw ValidationError("build_faithfulness_data: need at least two examples to create mismatches");
  }
  std::vector<FaithPairRecord> records;
  records.reserve(n + negatives);
  for (const auto& p : pairs) {
    records.push_back({p.id, p.story, p.moral, FaithLabel::Matched, Corruption::None, p.id, p.id});
  }
  for (std::size_t j = 0; j < negatives; ++j) {
    const std::size_t base = j % n;
    const auto& target = pairs[base];
    Rng rng = Rng::stream(seed, target.id + "#neg" + std::to_string(j));
    std::size_t donor = rng.index(n - 1);
    if (donor >= base) ++donor;
    const auto& other = pairs[donor];
    FaithPairRecord record;
    record.id = target.id + "#neg" + std::to_string(j);
    record.label = FaithLabel::Mismatched;
    if (rng.coin()) {
      record.corruption = Corruption::StoryReplaced;
      record.story = other.story;
      record.story_source = other.id;
      record.moral = target.moral;
      record.moral_source = target.id;
    } else {
      record.corruption = Corruption::MoralReplaced;
      record.story = target.story;
      record.story_source = target.id;
      record.moral = other.moral;
      record.moral_source = other.id;
    }
    records.push_back(std::move(record));
  }
  return records;
}

void write_jsonl(std::ostream& out, const std::vector<MoCptRecord>& records) {
  for (const auto& r : records) {
    out << json{{"id", r.id}, {"story", r.story}, {"candidates", r.candidates}, {"label", r.label},
                {"neg_topic_ids", r.neg_topic_ids}, {"gold_topic", r.gold_topic}}
               .dump()
        << '\n';
  }
}

void write_jsonl(std::ostream& out, const std::vector<MoPrefRecord>& records) {
  for (const auto& r : records) {
    out << json{{"id", r.id},
                {"story", r.story},
                {"candidates", r.candidates},
                {"label", r.label},
                {"flipped_token_pos", r.flipped_token_pos},
                {"antonym_used", {r.antonym_used.first, r.antonym_used.second}}}
               .dump()
        << '\n';
  }
}

void write_jsonl(std::ostream& out, const std::vector<St2MoRecord>& records) {
  for (const auto& r : records) out << json{{"id", r.id}, {"story", r.story}, {"moral", r.moral}}.dump() << '\n';
}

void write_jsonl(std::ostream& out, const std::vector<Mo2StRecord>& records) {
  for (const auto& r : records) {
    std::vector<std::string> phrases;
    std::vector<json> positions;
    for (const auto& p : r.outline.phrases) {
      phrases.push_back(text::join_tokens(p.tokens));
      positions.push_back(p.first_pos ? json(*p.first_pos) : json(-1));
    }
    out << json{{"id", r.id},
                {"moral", r.moral},
                {"first_sentence", r.first_sentence},
                {"outline", phrases},
                {"outline_positions", positions},
                {"target_story", r.target_story}}
               .dump()
        << '\n';
  }
}

void write_jsonl(std::ostream& out, const std::vector<FaithPairRecord>& records) {
  for (const auto& r : records) {
    out << json{{"id", r.id},
                {"story", r.story},
                {"moral", r.moral},
                {"label", to_string(r.label)},
                {"corruption", to_string(r.corruption)},
                {"story_source", r.story_source},
                {"moral_source", r.moral_source}}
               .dump()
        << '\n';
  }
}

std::vector<ChoiceRecord> read_choice_records(std::istream& in) {
  std::vector<ChoiceRecord> out;
  for_each_record(in, [&](const json& j) {
    ChoiceRecord r{j.at("id").get<std::string>(), j.at("story").get<std::string>(),
                   j.at("candidates").get<std::vector<std::string>>(), j.at("label").get<std::size_t>()};
    if (r.candidates.size() < 2) throw ValidationError("record \"" + r.id + "\" has fewer than two candidates");
    if (r.label >= r.candidates.size()) throw ValidationError("record \"" + r.id + "\" label out of range");
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<ChoiceRecord> to_choice_records(const std::vector<MoCptRecord>& records) {
  std::vector<ChoiceRecord> out;
  for (const auto& r : records) out.push_back({r.id, r.story, r.candidates, r.label});
  return out;
}

std::vector<ChoiceRecord> to_choice_records(const std::vector<MoPrefRecord>& records) {
  std::vector<ChoiceRecord> out;
  for (const auto& r : records) out.push_back({r.id, r.story, r.candidates, r.label});
  return out;
}

std::vector<St2MoRecord> read_st2mo(std::istream& in) {
  std::vector<St2MoRecord> out;
  for_each_record(in, [&](const json& j) {
    out.push_back({j.at("id").get<std::string>(), j.at("story").get<std::string>(), j.at("moral").get<std::string>()});
  });
  return out;
}

std::vector<Mo2StRecord> read_mo2st(std::istream& in) {
  std::vector<Mo2StRecord> out;
  for_each_record(in, [&](const json& j) {
    Mo2StRecord r;
    r.id = j.at("id").get<std::string>();
    r.moral = j.at("moral").get<std::string>();
    r.first_sentence = j.at("first_sentence").get<std::string>();
    r.target_story = j.at("target_story").get<std::string>();
    const auto phrases = j.at("outline").get<std::vector<std::string>>();
    const auto positions = j.at("outline_positions").get<std::vector<long long>>();
    if (phrases.size() != positions.size()) {
      throw ValidationError("record \"" + r.id + "\": outline and outline_positions differ in length");
    }
    r.outline.source_id = r.id;
    for (std::size_t i = 0; i < phrases.size(); ++i) {
      Phrase p;
      p.tokens = text::tokenize(phrases[i]);
      if (p.tokens.empty()) throw ValidationError("record \"" + r.id + "\": empty outline phrase");
      if (positions[i] >= 0) p.first_pos = static_cast<std::size_t>(positions[i]);
      r.outline.phrases.push_back(std::move(p));
    }
    r.outline.empty_flag = r.outline.phrases.empty();
    order_by_position(r.outline);
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace moralbench
