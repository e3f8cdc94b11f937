#include "moralbench/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "moralbench/error.hpp"
#include "moralbench/rng.hpp"
#include "moralbench/text.hpp"

namespace moralbench {
namespace {

using nlohmann::json;

constexpr double kUnitTolerance = 1e-6;

double norm(const Vector& v) {
  double sum = 0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

Vector normalized(Vector v, std::string_view what) {
  const double n = norm(v);
  if (!(n > 0)) throw ValidationError("zero-vector embedding for " + std::string(what));
  for (double& x : v) x /= n;
  return v;
}

std::uint64_t token_hash(std::string_view token) { return splitmix64(fnv1a64(token)); }

void require_m(std::size_t m) {
  if (m < 1) throw ValidationError("m must be >= 1");
}

}  // namespace

EmbeddingProvider EmbeddingProvider::builtin(const std::vector<Tokens>& docs, std::size_t dim) {
  if (dim < 1) throw ValidationError("embedding dim must be >= 1");
  EmbeddingProvider p;
  p.name_ = "builtin-hashbow-" + std::to_string(dim);
  p.dim_ = dim;
  p.mode_ = EmbeddingMode::Builtin;
  p.n_docs_ = docs.size();
  for (const auto& doc : docs) {
    const std::unordered_set<std::string> unique(doc.begin(), doc.end());
    for (const auto& token : unique) ++p.doc_freq_[token];
  }
  return p;
}

EmbeddingProvider EmbeddingProvider::external(std::map<std::string, Vector> vectors, std::string name) {
  if (vectors.empty()) throw ValidationError("external embedding file has no vectors");
  EmbeddingProvider p;
  p.name_ = std::move(name);
  p.mode_ = EmbeddingMode::ExternalFile;
  p.dim_ = vectors.begin()->second.size();
  if (p.dim_ == 0) throw ValidationError("external vectors must be non-empty");
  for (auto& [key, vec] : vectors) {
    if (vec.size() != p.dim_) {
      throw ValidationError("external vector \"" + key + "\" has dim " + std::to_string(vec.size()) + ", expected " +
                            std::to_string(p.dim_));
    }
    vec = normalized(std::move(vec), key);
  }
  p.external_ = std::move(vectors);
  return p;
}

EmbeddingProvider EmbeddingProvider::load_external(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open vector file " + path.string());
  std::map<std::string, Vector> vectors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json record = json::parse(line);
      auto id = record.at("id").get<std::string>();
      if (!vectors.emplace(id, record.at("vec").get<Vector>()).second) {
        throw ValidationError("duplicate id \"" + id + "\"");
      }
    } catch (const json::exception& e) {
      throw ValidationError("vector file line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("vector file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return external(std::move(vectors), "external:" + path.filename().string());
}

double EmbeddingProvider::idf(const std::string& token) const {
  const auto it = doc_freq_.find(token);
  const double df = it == doc_freq_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + df)) + 1.0;
}

std::size_t EmbeddingProvider::bucket(std::string_view token) const {
  return static_cast<std::size_t>(token_hash(token) % dim_);
}

double EmbeddingProvider::sign(std::string_view token) const { return (token_hash(token) >> 63) != 0 ? -1.0 : 1.0; }

Vector EmbeddingProvider::embed(const Tokens& tokens) const {
  return embed(std::string_view{}, tokens);
}

Vector EmbeddingProvider::embed(std::string_view key, const Tokens& tokens) const {
  if (mode_ == EmbeddingMode::ExternalFile) {
    if (!key.empty()) {
      if (const auto it = external_.find(std::string(key)); it != external_.end()) return it->second;
    }
    const std::string joined = text::join_tokens(tokens);
    if (const auto it = external_.find(joined); it != external_.end()) return it->second;
    throw ValidationError("no external vector for \"" + std::string(key.empty() ? joined : key) + "\"");
  }
  if (tokens.empty()) throw ValidationError("zero-vector embedding for empty token list");
  Vector v(dim_, 0.0);
  for (const auto& token : tokens) v[bucket(token)] += sign(token) * idf(token);
  return normalized(std::move(v), key.empty() ? text::join_tokens(tokens) : std::string(key));
}

void write_provider_state(std::ostream& out, const EmbeddingProvider& provider) {
  if (provider.mode_ != EmbeddingMode::Builtin) {
    throw ValidationError("only built-in providers carry serializable state");
  }
  const json j = {{"name", provider.name_},
                  {"dim", provider.dim_},
                  {"n_docs", provider.n_docs_},
                  {"doc_freq", provider.doc_freq_}};
  out << j.dump();
}

EmbeddingProvider read_provider_state(std::istream& in) {
  try {
    json j;
    in >> j;
    EmbeddingProvider p;
    p.mode_ = EmbeddingMode::Builtin;
    p.name_ = j.at("name").get<std::string>();
    p.dim_ = j.at("dim").get<std::size_t>();
    p.n_docs_ = j.at("n_docs").get<std::size_t>();
    p.doc_freq_ = j.at("doc_freq").get<std::map<std::string, std::size_t>>();
    if (p.dim_ < 1) throw ValidationError("provider state: dim must be >= 1");
    return p;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("provider state: ") + e.what());
  }
}

StoryIndex::StoryIndex(std::vector<std::string> ids, std::size_t dim, std::vector<Vector> rows,
                       std::string provider_name)
    : ids_(std::move(ids)), dim_(dim), rows_(std::move(rows)), provider_name_(std::move(provider_name)) {
  if (ids_.size() != rows_.size()) throw ValidationError("index: ids and vectors differ in count");
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!position_.emplace(ids_[i], i).second) throw ValidationError("index: duplicate id \"" + ids_[i] + "\"");
    if (rows_[i].size() != dim_) throw ValidationError("index: row \"" + ids_[i] + "\" has wrong dim");
    if (std::abs(norm(rows_[i]) - 1.0) > kUnitTolerance) {
      throw ValidationError("index: row \"" + ids_[i] + "\" is not unit-norm");
    }
  }
}

bool StoryIndex::contains(std::string_view id) const { return position_.find(id) != position_.end(); }

std::optional<std::size_t> StoryIndex::position(std::string_view id) const {
  const auto it = position_.find(id);
  if (it == position_.end()) return std::nullopt;
  return it->second;
}

StoryIndex build_index(const Corpus& corpus, const EmbeddingProvider& provider, IndexField field) {
  std::vector<std::string> ids;
  std::vector<Vector> rows;
  ids.reserve(corpus.size());
  rows.reserve(corpus.size());
  for (const auto& pair : corpus.pairs()) {
    const Tokens& tokens = field == IndexField::Story ? pair.story_tokens : pair.moral_tokens;
    try {
      rows.push_back(provider.embed(pair.id, tokens));
    } catch (const ValidationError& e) {
      throw ValidationError("index build failed for \"" + pair.id + "\": " + e.what());
    }
    ids.push_back(pair.id);
  }
  return StoryIndex(std::move(ids), provider.dim(), std::move(rows), provider.name());
}

void write_index(std::ostream& out, const StoryIndex& index, const EmbeddingProvider* provider) {
  json vectors = json::array();
  for (std::size_t i = 0; i < index.size(); ++i) vectors.push_back(index.row(i));
  json j = {{"ids", index.ids()}, {"dim", index.dim()}, {"vectors", std::move(vectors)},
            {"provider", index.provider_name()}};
  if (provider != nullptr && provider->mode() == EmbeddingMode::Builtin) {
    std::ostringstream state;
    write_provider_state(state, *provider);
    j["provider_state"] = json::parse(state.str());
  }
  out << j.dump() << '\n';
}

LoadedIndex read_index(std::istream& in) {
  try {
    json j;
    in >> j;
    LoadedIndex loaded{StoryIndex(j.at("ids").get<std::vector<std::string>>(), j.at("dim").get<std::size_t>(),
                                  j.at("vectors").get<std::vector<Vector>>(), j.value("provider", std::string{})),
                       std::nullopt};
    if (j.contains("provider_state")) {
      std::istringstream state(j.at("provider_state").dump());
      loaded.provider = read_provider_state(state);
    }
    return loaded;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("index file: ") + e.what());
  }
}

LoadedIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open index file " + path.string());
  return read_index(in);
}

double dot(const Vector& a, const Vector& b) {
  double sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

RetrievalResult retrieve(const StoryIndex& index, const Vector& query, std::size_t m,
                         std::optional<std::string_view> exclude_id) {
  require_m(m);
  if (query.size() != index.dim()) {
    throw ValidationError("query dim " + std::to_string(query.size()) + " does not match index dim " +
                          std::to_string(index.dim()));
  }
  std::vector<Hit> scored;
  scored.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (exclude_id && index.ids()[i] == *exclude_id) continue;
    scored.push_back({index.ids()[i], dot(index.row(i), query)});
  }
  RetrievalResult result;
  result.truncated = scored.size() < m;
  const std::size_t keep = std::min(m, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    [](const Hit& a, const Hit& b) { return a.score != b.score ? a.score > b.score : a.id < b.id; });
  scored.resize(keep);
  result.hits = std::move(scored);
  return result;
}

ConceptList extract_concepts(const std::vector<RetrievedMoral>& morals, const Resources& resources) {
  ConceptList out;
  for (const auto& moral : morals) {
    for (const auto& token : moral.tokens) {
      std::optional<PosTag> tag;
      if (const auto it = resources.pos.find(token); it != resources.pos.end()) tag = it->second;
      const bool keep = tag ? *tag != PosTag::Closed : !resources.stopwords.contains(token);
      if (!keep) continue;
      std::string lemma = resources.lemmatizer.lemma(token, tag);
      auto& sources = out.sources[lemma];
      if (sources.empty()) out.concepts.push_back(lemma);
      if (std::find(sources.begin(), sources.end(), moral.id) == sources.end()) sources.push_back(moral.id);
    }
  }
  return out;
}

Tokens Augmentation::combined() const {
  Tokens out = story_tokens;
  out.emplace_back(kConceptSeparator);
  out.insert(out.end(), concepts.concepts.begin(), concepts.concepts.end());
  return out;
}

Augmentation augment_story(const StoryMoralPair& pair, const StoryIndex& index, const EmbeddingProvider& provider,
                           std::size_t m, const Resources& resources, const Corpus& source) {
  require_m(m);
  Augmentation out;
  out.story_tokens = pair.story_tokens;
  const Vector query = provider.embed(pair.id, pair.story_tokens);
  const std::optional<std::string_view> exclude =
      index.contains(pair.id) ? std::optional<std::string_view>(pair.id) : std::nullopt;
  out.retrieved = retrieve(index, query, m, exclude);
  std::vector<RetrievedMoral> morals;
  for (const auto& hit : out.retrieved.hits) {
    const auto* neighbour = source.find(hit.id);
    if (neighbour == nullptr) throw ValidationError("retrieved id \"" + hit.id + "\" is not in the source corpus");
    morals.push_back({hit.id, neighbour->moral_tokens});
  }
  out.concepts = extract_concepts(morals, resources);
  return out;
}

RetrievedOutlines retrieve_outlines(const Tokens& moral, const StoryIndex& moral_index,
                                    const std::map<std::string, Outline>& outlines,
                                    const EmbeddingProvider& provider, std::size_t m,
                                    std::optional<std::string_view> exclude_id) {
  require_m(m);
  RetrievedOutlines out;
  out.retrieved = retrieve(moral_index, provider.embed(moral), m, exclude_id);
  for (const auto& hit : out.retrieved.hits) {
    const auto it = outlines.find(hit.id);
    if (it == outlines.end()) throw ValidationError("no outline for retrieved id \"" + hit.id + "\"");
    out.outlines.push_back(it->second);
  }
  return out;
}

}  // namespace moralbench
