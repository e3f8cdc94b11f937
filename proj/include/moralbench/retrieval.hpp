#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "moralbench/corpus.hpp"
#include "moralbench/outline.hpp"
#include "moralbench/resources.hpp"

namespace moralbench {

using Vector = std::vector<double>;
using Tokens = std::vector<std::string>;

enum class EmbeddingMode { Builtin, ExternalFile };

/// Maps texts to unit-length vectors. Built-in mode is an idf-weighted,
/// sign-hashed bag of words; external mode looks up precomputed vectors by
/// key (an example id, or the space-joined tokens of a text).
class EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultDim = 1024;

  /// idf is fitted on `docs` (the training split).
  static EmbeddingProvider builtin(const std::vector<Tokens>& docs, std::size_t dim = kDefaultDim);
  /// Vectors are L2-normalized on load; all must share one dimension.
  static EmbeddingProvider external(std::map<std::string, Vector> vectors, std::string name = "external");
  /// JSONL {"id": string, "vec": [real]}.
  static EmbeddingProvider load_external(const std::filesystem::path& path);

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  EmbeddingMode mode() const { return mode_; }

  /// Built-in: hashes `tokens`. External: looks up join_tokens(tokens).
  Vector embed(const Tokens& tokens) const;
  /// Built-in: hashes `tokens`. External: looks up `key`, then the joined
  /// tokens; ValidationError if neither is present.
  Vector embed(std::string_view key, const Tokens& tokens) const;

  double idf(const std::string& token) const;
  std::size_t bucket(std::string_view token) const;
  double sign(std::string_view token) const;

  bool operator==(const EmbeddingProvider&) const = default;

 private:
  friend void write_provider_state(std::ostream&, const EmbeddingProvider&);
  friend EmbeddingProvider read_provider_state(std::istream&);

  std::string name_;
  std::size_t dim_ = 0;
  EmbeddingMode mode_ = EmbeddingMode::Builtin;
  std::size_t n_docs_ = 0;
  std::map<std::string, std::size_t> doc_freq_;
  std::map<std::string, Vector> external_;
};

/// Built-in provider state as one JSON document (external providers are
/// re-loaded from their vector file instead).
void write_provider_state(std::ostream& out, const EmbeddingProvider& provider);
EmbeddingProvider read_provider_state(std::istream& in);

/// Unit-norm rows keyed by example id. Immutable once built.
class StoryIndex {
 public:
  StoryIndex() = default;
  /// Validates ids unique, row lengths == dim, rows unit-norm within 1e-6.
  StoryIndex(std::vector<std::string> ids, std::size_t dim, std::vector<Vector> rows, std::string provider_name);

  const std::vector<std::string>& ids() const { return ids_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const Vector& row(std::size_t i) const { return rows_[i]; }
  const std::string& provider_name() const { return provider_name_; }
  bool contains(std::string_view id) const;
  std::optional<std::size_t> position(std::string_view id) const;

  bool operator==(const StoryIndex&) const = default;

 private:
  std::vector<std::string> ids_;
  std::map<std::string, std::size_t, std::less<>> position_;
  std::size_t dim_ = 0;
  std::vector<Vector> rows_;
  std::string provider_name_;
};

enum class IndexField { Story, Moral };

/// One row per pair, embedding the chosen field (keyed by the pair id).
StoryIndex build_index(const Corpus& corpus, const EmbeddingProvider& provider, IndexField field);

/// {"ids":[...],"dim":int,"vectors":[[...]],"provider":string}, with the
/// built-in provider state under "provider_state" when given.
void write_index(std::ostream& out, const StoryIndex& index, const EmbeddingProvider* provider = nullptr);

struct LoadedIndex {
  StoryIndex index;
  std::optional<EmbeddingProvider> provider;
};
LoadedIndex read_index(std::istream& in);
LoadedIndex load_index(const std::filesystem::path& path);

struct Hit {
  std::string id;
  double score = 0;

  bool operator==(const Hit&) const = default;
};

struct RetrievalResult {
  std::vector<Hit> hits;  // descending score, ties by ascending id
  bool truncated = false;  // fewer than m candidates remained
};

double dot(const Vector& a, const Vector& b);

/// Exact top-m by dot product. `exclude_id` is removed before ranking.
RetrievalResult retrieve(const StoryIndex& index, const Vector& query, std::size_t m = 10,
                         std::optional<std::string_view> exclude_id = std::nullopt);

struct RetrievedMoral {
  std::string id;
  Tokens tokens;
};

struct ConceptList {
  std::vector<std::string> concepts;  // first-retrieval order, no duplicates
  std::map<std::string, std::vector<std::string>> sources;  // concept -> retrieved-moral ids

  bool operator==(const ConceptList&) const = default;
};

/// Content-word lemmas of the retrieved morals. A token is kept when the POS
/// lexicon tags it N/V/ADJ/ADV, or when it is untagged and not a stopword.
ConceptList extract_concepts(const std::vector<RetrievedMoral>& morals, const Resources& resources);

inline constexpr std::string_view kConceptSeparator = "[SEP]";

struct Augmentation {
  Tokens story_tokens;
  ConceptList concepts;
  RetrievalResult retrieved;

  /// story tokens, separator, concepts.
  Tokens combined() const;
};

/// Retrieves the m nearest indexed stories (excluding the pair itself when
/// indexed) and extracts concepts from their morals, looked up in `source`.
Augmentation augment_story(const StoryMoralPair& pair, const StoryIndex& index, const EmbeddingProvider& provider,
                           std::size_t m, const Resources& resources, const Corpus& source);

struct RetrievedOutlines {
  std::vector<Outline> outlines;  // ranking order
  RetrievalResult retrieved;
};

/// Outlines of the m nearest training morals.
RetrievedOutlines retrieve_outlines(const Tokens& moral, const StoryIndex& moral_index,
                                    const std::map<std::string, Outline>& outlines,
                                    const EmbeddingProvider& provider, std::size_t m,
                                    std::optional<std::string_view> exclude_id = std::nullopt);

}  // namespace moralbench
