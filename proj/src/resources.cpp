#include "moralbench/resources.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "moralbench/error.hpp"
#include "moralbench/text.hpp"

namespace moralbench {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ResourceError("cannot open resource file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Calls fn(line_number, fields) for every non-blank, non-comment line.
template <typename Fn>
void for_each_tsv_line(std::string_view content, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (text::trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(text::trim(line.substr(start, tab == std::string_view::npos ? tab : tab - start)));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    fn(line_no, fields);
    if (nl == content.size()) break;
  }
}

std::string single_token(std::string_view word, std::size_t line_no) {
  auto tokens = text::tokenize(word);
  if (tokens.size() != 1) {
    throw ResourceError("line " + std::to_string(line_no) + ": \"" + std::string(word) +
                        "\" is not a single token");
  }
  return std::move(tokens.front());
}

std::string single_token(std::string_view word) {
  auto tokens = text::tokenize(word);
  if (tokens.size() != 1) {
    throw ValidationError("\"" + std::string(word) + "\" is not a single token");
  }
  return std::move(tokens.front());
}

bool ascii_lower(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) { return std::any_of(s.begin(), s.end(), is_vowel); }

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// "runn" -> "run", "stopp" -> "stop"; l, s and z doublings are kept (fall, pass, buzz).
std::string undouble(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
  }
  return stem;
}

std::size_t vowel_groups(std::string_view s) {
  std::size_t groups = 0;
  bool prev = false;
  for (char c : s) {
    const bool v = is_vowel(c);
    groups += v && !prev;
    prev = v;
  }
  return groups;
}

// Stem left after stripping -ed/-ing. A single-syllable stem ending
// consonant-vowel-consonant lost a silent e ("graz" -> "graze"); a doubled
// final consonant is undone instead ("runn" -> "run").
std::string restore_stem(std::string_view raw) {
  std::string stem(raw);
  const std::string undoubled = undouble(stem);
  if (undoubled != stem) return undoubled;
  const std::size_t n = stem.size();
  if (n >= 3 && vowel_groups(stem) == 1 && !is_vowel(stem[n - 1]) && is_vowel(stem[n - 2]) &&
      !is_vowel(stem[n - 3]) && std::string_view("wxy").find(stem[n - 1]) == std::string_view::npos) {
    stem.push_back('e');
  }
  return stem;
}

std::optional<std::string> plural_rule(std::string_view w) {
  if (w.size() > 4 && ends_with(w, "ies")) return std::string(w.substr(0, w.size() - 3)) + "y";
  if (ends_with(w, "sses")) return std::string(w.substr(0, w.size() - 2));
  if (w.size() > 4 && (ends_with(w, "ches") || ends_with(w, "shes") || ends_with(w, "xes") ||
                       ends_with(w, "zes"))) {
    return std::string(w.substr(0, w.size() - 2));
  }
  if (w.size() > 3 && ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") &&
      !ends_with(w, "is")) {
    return std::string(w.substr(0, w.size() - 1));
  }
  return std::nullopt;
}

std::optional<std::string> verb_rule(std::string_view w) {
  if (ends_with(w, "ing") && w.size() >= 6) {
    const auto stem = w.substr(0, w.size() - 3);
    if (has_vowel(stem)) return restore_stem(stem);
  }
  if (w.size() > 4 && ends_with(w, "ied")) return std::string(w.substr(0, w.size() - 3)) + "y";
  if (ends_with(w, "eed")) {
    // agreed -> agree; greed, speed and need stay.
    if (has_vowel(w.substr(0, w.size() - 3))) return std::string(w.substr(0, w.size() - 1));
    return std::nullopt;
  }
  if (ends_with(w, "ed") && w.size() >= 5) {
    const auto stem = w.substr(0, w.size() - 2);
    if (has_vowel(stem)) return restore_stem(stem);
  }
  return std::nullopt;
}

}  // namespace

StopwordSet parse_stopwords(std::string_view content) {
  StopwordSet out;
  for_each_tsv_line(content, [&](std::size_t, const std::vector<std::string>& fields) {
    for (auto& token : text::tokenize(fields.front())) out.insert(std::move(token));
  });
  return out;
}

StopwordSet load_stopwords(const std::filesystem::path& path) { return parse_stopwords(read_file(path)); }

void AntonymLexicon::add(std::string_view a, std::string_view b) {
  const std::string left = single_token(a);
  const std::string right = single_token(b);
  if (left == right) return;
  auto insert = [this](const std::string& from, const std::string& to) {
    auto& list = map_[from];
    const auto it = std::lower_bound(list.begin(), list.end(), to);
    if (it == list.end() || *it != to) list.insert(it, to);
  };
  insert(left, right);
  insert(right, left);
}

const std::vector<std::string>* AntonymLexicon::find(std::string_view word) const {
  const auto it = map_.find(std::string(word));
  return it == map_.end() ? nullptr : &it->second;
}

bool AntonymLexicon::contains(std::string_view a, std::string_view b) const {
  const auto* list = find(a);
  return list != nullptr && std::binary_search(list->begin(), list->end(), std::string(b));
}

AntonymLexicon parse_antonyms(std::string_view content) {
  AntonymLexicon lexicon;
  for_each_tsv_line(content, [&](std::size_t line_no, const std::vector<std::string>& fields) {
    if (fields.size() != 2) {
      throw ResourceError("antonym lexicon line " + std::to_string(line_no) +
                          ": expected word<TAB>antonym");
    }
    lexicon.add(single_token(fields[0], line_no), single_token(fields[1], line_no));
  });
  return lexicon;
}

AntonymLexicon load_antonyms(const std::filesystem::path& path) { return parse_antonyms(read_file(path)); }

std::optional<PosTag> parse_pos_tag(std::string_view tag) {
  if (tag == "N") return PosTag::Noun;
  if (tag == "V") return PosTag::Verb;
  if (tag == "ADJ") return PosTag::Adjective;
  if (tag == "ADV") return PosTag::Adverb;
  if (tag == "CLOSED") return PosTag::Closed;
  return std::nullopt;
}

PosLexicon parse_pos_lexicon(std::string_view content) {
  PosLexicon lexicon;
  for_each_tsv_line(content, [&](std::size_t line_no, const std::vector<std::string>& fields) {
    const auto tag = fields.size() == 2 ? parse_pos_tag(fields[1]) : std::nullopt;
    if (!tag) {
      throw ResourceError("POS lexicon line " + std::to_string(line_no) +
                          ": expected word<TAB>{N,V,ADJ,ADV,CLOSED}");
    }
    lexicon.insert_or_assign(single_token(fields[0], line_no), *tag);
  });
  return lexicon;
}

PosLexicon load_pos_lexicon(const std::filesystem::path& path) { return parse_pos_lexicon(read_file(path)); }

std::string Lemmatizer::lemma(std::string_view word, std::optional<PosTag> tag) const {
  if (const auto it = exceptions_.find(std::string(word)); it != exceptions_.end()) return it->second;
  if (!ascii_lower(word)) return std::string(word);
  if (tag == PosTag::Adjective || tag == PosTag::Adverb || tag == PosTag::Closed) {
    return std::string(word);
  }
  if (auto plural = plural_rule(word)) return *plural;
  if (tag != PosTag::Noun) {
    if (auto verb = verb_rule(word)) return *verb;
  }
  return std::string(word);
}

Lemmatizer parse_lemmatizer(std::string_view content) {
  std::unordered_map<std::string, std::string> exceptions;
  for_each_tsv_line(content, [&](std::size_t line_no, const std::vector<std::string>& fields) {
    if (fields.size() != 2) {
      throw ResourceError("lemma exceptions line " + std::to_string(line_no) +
                          ": expected form<TAB>lemma");
    }
    exceptions.insert_or_assign(single_token(fields[0], line_no), single_token(fields[1], line_no));
  });
  return Lemmatizer(std::move(exceptions));
}

Lemmatizer load_lemmatizer(const std::filesystem::path& exceptions_path) {
  return parse_lemmatizer(read_file(exceptions_path));
}

Resources load_resources(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ResourceError("resource directory not found: " + dir.string());
  }
  Resources r;
  r.stopwords = load_stopwords(dir / "stopwords.txt");
  r.antonyms = load_antonyms(dir / "antonyms.tsv");
  r.pos = load_pos_lexicon(dir / "pos.tsv");
  r.lemmatizer = load_lemmatizer(dir / "lemma_exceptions.tsv");
  return r;
}

}  // namespace moralbench
