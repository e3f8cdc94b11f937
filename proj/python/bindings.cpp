#include <pybind11/pybind11.h>
#include <pybind11/functional.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "moralbench/corpus.hpp"
#include "moralbench/error.hpp"
#include "moralbench/harness.hpp"
#include "moralbench/metrics.hpp"
#include "moralbench/outline.hpp"
#include "moralbench/resources.hpp"
#include "moralbench/retrieval.hpp"
#include "moralbench/synthetic.hpp"
#include "moralbench/taskgen.hpp"
#include "moralbench/text.hpp"
#include "moralbench/topics.hpp"

namespace py = pybind11;
using namespace moralbench;

namespace {

template <typename Records>
std::string to_jsonl(const Records& records) {
  std::ostringstream out;
  write_jsonl(out, records);
  return out.str();
}

Outline outline_from(const std::vector<Tokens>& phrases) {
  Outline o;
  for (const auto& p : phrases) o.phrases.push_back({p, 0, std::nullopt});
  o.ground_truth_order.resize(phrases.size());
  for (std::size_t i = 0; i < phrases.size(); ++i) o.ground_truth_order[i] = i;
  return o;
}

GenerationBatch batch_from(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs) {
  if (hyps.size() != refs.size()) throw ValidationError("hypotheses and references differ in length");
  GenerationBatch b;
  for (std::size_t i = 0; i < hyps.size(); ++i) b.items.push_back({std::to_string(i), hyps[i], refs[i], std::nullopt});
  return b;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Moral-story benchmark toolkit";

  auto validation = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_OSError);

  // text
  m.def("normalize", &text::normalize, py::arg("text"));
  m.def("tokenize", &text::tokenize, py::arg("text"), py::arg("lang") = "en");
  m.def("split_sentences", &text::split_sentences, py::arg("text"));
  m.def("join_tokens", [](const Tokens& t) { return text::join_tokens(t); }, py::arg("tokens"));

  // corpus
  py::class_<StoryMoralPair>(m, "Pair")
      .def_readonly("id", &StoryMoralPair::id)
      .def_readonly("story", &StoryMoralPair::story)
      .def_readonly("moral", &StoryMoralPair::moral)
      .def_readonly("lang", &StoryMoralPair::lang)
      .def_readonly("story_tokens", &StoryMoralPair::story_tokens)
      .def_readonly("moral_tokens", &StoryMoralPair::moral_tokens)
      .def_readonly("story_sentences", &StoryMoralPair::story_sentences)
      .def("__repr__", [](const StoryMoralPair& p) { return "<Pair " + p.id + ">"; });
  m.def("make_pair", &make_pair, py::arg("id"), py::arg("story"), py::arg("moral"), py::arg("lang") = "en");

  py::class_<Corpus>(m, "Corpus")
      .def(py::init<>())
      .def(py::init<std::vector<StoryMoralPair>>(), py::arg("pairs"))
      .def_property_readonly("pairs", &Corpus::pairs)
      .def("__len__", &Corpus::size)
      .def("__getitem__", [](const Corpus& c, const std::string& id) { return c.at(id); })
      .def("__contains__", [](const Corpus& c, const std::string& id) { return c.find(id) != nullptr; })
      .def_property_readonly("split_of", [](const Corpus& c) {
        std::map<std::string, std::string> out;
        for (const auto& [id, s] : c.split_of()) out[id] = std::string(to_string(s));
        return out;
      })
      .def("subset", [](const Corpus& c, const std::string& s) { return c.subset(parse_split(s)); }, py::arg("split"))
      .def(
          "with_splits",
          [](const Corpus& c, const std::map<std::string, std::string>& splits) {
            std::map<std::string, Split> parsed;
            for (const auto& [id, s] : splits) parsed[id] = parse_split(s);
            return c.with_splits(parsed);
          },
          py::arg("split_of"));
  m.def("load_corpus", &load_corpus, py::arg("path"));
  m.def("split_corpus", &split_corpus, py::arg("corpus"), py::arg("ratios"), py::arg("seed"));
  m.def("split_sizes", &split_sizes, py::arg("n"), py::arg("ratios"));
  m.def("corpus_stats", [](const Corpus& c) {
    const CorpusStats s = corpus_stats(c);
    return py::dict(py::arg("n_examples") = s.n_examples, py::arg("avg_story_words") = s.avg_story_words,
                    py::arg("avg_moral_words") = s.avg_moral_words, py::arg("avg_story_sents") = s.avg_story_sents,
                    py::arg("avg_moral_sents") = s.avg_moral_sents, py::arg("story_vocab") = s.story_vocab,
                    py::arg("moral_vocab") = s.moral_vocab);
  });
  m.def(
      "synthetic_corpus",
      [](std::size_t pairs, std::size_t themes, bool value_word, std::uint64_t seed) {
        return synthetic::corpus({.pairs = pairs, .themes = themes, .value_word = value_word, .seed = seed});
      },
      py::arg("pairs") = 200, py::arg("themes") = 4, py::arg("value_word") = true, py::arg("seed") = 1);

  // resources
  py::class_<AntonymLexicon>(m, "AntonymLexicon")
      .def(py::init<>())
      .def("add", &AntonymLexicon::add, py::arg("a"), py::arg("b"))
      .def("contains", &AntonymLexicon::contains, py::arg("a"), py::arg("b"))
      .def("__len__", &AntonymLexicon::size);
  py::class_<Resources>(m, "Resources")
      .def_readonly("stopwords", &Resources::stopwords)
      .def_readonly("antonyms", &Resources::antonyms)
      .def("lemma", [](const Resources& r, const std::string& w) { return r.lemmatizer.lemma(w); }, py::arg("word"));
  m.def("load_resources", &load_resources, py::arg("directory"));
  m.def("load_stopwords", &load_stopwords, py::arg("path"));
  m.def("load_antonyms", &load_antonyms, py::arg("path"));

  // topics
  py::class_<TopicModel>(m, "TopicModel")
      .def_property_readonly("num_topics", &TopicModel::num_topics)
      .def_property_readonly("vocab", &TopicModel::vocab)
      .def_property_readonly("beta", &TopicModel::beta)
      .def_property_readonly("alpha", &TopicModel::alpha)
      .def_property_readonly("seed", &TopicModel::seed)
      .def("to_json", [](const TopicModel& model) {
        std::ostringstream out;
        write_model(out, model);
        return out.str();
      });
  auto lda_params = [](std::optional<double> alpha, double eta, std::size_t iters, std::size_t fold_in_iters) {
    return LdaParams{alpha, eta, iters, fold_in_iters};
  };
  m.def(
      "fit_lda",
      [lda_params](const TokenDocs& docs, std::size_t topics, std::uint64_t seed, std::optional<double> alpha,
                   double eta, std::size_t iters, std::size_t fold_in_iters) {
        py::gil_scoped_release release;
        return fit_lda(docs, topics, lda_params(alpha, eta, iters, fold_in_iters), seed);
      },
      py::arg("docs"), py::arg("num_topics"), py::arg("seed") = 0, py::arg("alpha") = std::nullopt,
      py::arg("eta") = 0.01, py::arg("iters") = 500, py::arg("fold_in_iters") = 50);
  m.def(
      "select_topic_count",
      [lda_params](const TokenDocs& docs, std::size_t b_min, std::size_t b_max, std::size_t k, double h,
                   std::uint64_t seed, std::optional<double> alpha, double eta, std::size_t iters) {
        TopicSelection sel;
        {
          py::gil_scoped_release release;
          sel = select_topic_count(docs, b_min, b_max, k, h, lda_params(alpha, eta, iters, 50), seed);
        }
        return py::make_tuple(sel.num_topics, sel.model, sel.report.scores, sel.converged);
      },
      py::arg("docs"), py::arg("b_min") = 2, py::arg("b_max") = 40, py::arg("k") = 20, py::arg("h") = 0.5,
      py::arg("seed") = 0, py::arg("alpha") = std::nullopt, py::arg("eta") = 0.01, py::arg("iters") = 500);
  m.def("specificity", &specificity, py::arg("model"), py::arg("topic"), py::arg("k"));
  m.def("top_words", &top_words, py::arg("model"), py::arg("topic"), py::arg("k"));
  m.def("assign_topic", &assign_topic, py::arg("model"), py::arg("doc"));
  m.def("load_model", &load_model, py::arg("path"));

  // outline
  py::class_<Phrase>(m, "Phrase")
      .def_readonly("tokens", &Phrase::tokens)
      .def_readonly("score", &Phrase::score)
      .def_readonly("first_pos", &Phrase::first_pos);
  py::class_<Outline>(m, "Outline")
      .def_readonly("phrases", &Outline::phrases)
      .def_readonly("ground_truth_order", &Outline::ground_truth_order)
      .def_readonly("empty_flag", &Outline::empty_flag);
  m.def("rake_extract", &rake_extract, py::arg("tokens"), py::arg("stopwords"), py::arg("max_phrase_len") = 8,
        py::arg("breaks") = std::vector<bool>{});
  m.def(
      "build_outline",
      [](const StoryMoralPair& pair, const StopwordSet& stop, std::size_t max_phrases, std::size_t max_words) {
        return build_outline(pair, stop, {.max_phrases = max_phrases, .max_words = max_words});
      },
      py::arg("pair"), py::arg("stopwords"), py::arg("max_phrases") = 8, py::arg("max_words") = 8);

  // metrics
  m.def(
      "bleu",
      [](const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs, std::size_t n) {
        return bleu_n(batch_from(hyps, refs), n);
      },
      py::arg("hypotheses"), py::arg("references"), py::arg("n"));
  m.def("distinct_n", &distinct_n, py::arg("texts"), py::arg("n"));
  m.def("repetition_n", &repetition_n, py::arg("texts"), py::arg("n"));
  m.def("lcs_length", &lcs_length, py::arg("a"), py::arg("b"));
  m.def(
      "coverage", [](const Tokens& story, const std::vector<Tokens>& phrases) {
        return coverage(story, outline_from(phrases));
      },
      py::arg("story"), py::arg("phrases"));
  m.def(
      "order_score",
      [](const Tokens& story, const std::vector<Tokens>& phrases) {
        const OrderResult r = order_score(story, outline_from(phrases));
        return py::dict(py::arg("score") = r.score, py::arg("located") = r.located, py::arg("pairs") = r.pairs,
                        py::arg("inversions") = r.inversions, py::arg("unlocatable") = r.unlocatable);
      },
      py::arg("story"), py::arg("phrases_in_order"));
  m.def("accuracy", &accuracy, py::arg("predictions"), py::arg("gold"));

  // task construction
  py::class_<MoCptRecord>(m, "MoCptRecord")
      .def_readonly("id", &MoCptRecord::id)
      .def_readonly("story", &MoCptRecord::story)
      .def_readonly("candidates", &MoCptRecord::candidates)
      .def_readonly("label", &MoCptRecord::label)
      .def_readonly("neg_topic_ids", &MoCptRecord::neg_topic_ids)
      .def_readonly("gold_topic", &MoCptRecord::gold_topic);
  py::class_<MoPrefRecord>(m, "MoPrefRecord")
      .def_readonly("id", &MoPrefRecord::id)
      .def_readonly("story", &MoPrefRecord::story)
      .def_readonly("candidates", &MoPrefRecord::candidates)
      .def_readonly("label", &MoPrefRecord::label)
      .def_readonly("flipped_token_pos", &MoPrefRecord::flipped_token_pos)
      .def_readonly("antonym_used", &MoPrefRecord::antonym_used);
  py::class_<St2MoRecord>(m, "St2MoRecord")
      .def_readonly("id", &St2MoRecord::id)
      .def_readonly("story", &St2MoRecord::story)
      .def_readonly("moral", &St2MoRecord::moral);
  py::class_<Mo2StRecord>(m, "Mo2StRecord")
      .def_readonly("id", &Mo2StRecord::id)
      .def_readonly("moral", &Mo2StRecord::moral)
      .def_readonly("first_sentence", &Mo2StRecord::first_sentence)
      .def_readonly("outline", &Mo2StRecord::outline)
      .def_readonly("target_story", &Mo2StRecord::target_story);
  py::class_<FaithPairRecord>(m, "FaithPairRecord")
      .def_readonly("id", &FaithPairRecord::id)
      .def_readonly("story", &FaithPairRecord::story)
      .def_readonly("moral", &FaithPairRecord::moral)
      .def_property_readonly("matched", [](const FaithPairRecord& r) { return r.label == FaithLabel::Matched; })
      .def_readonly("story_source", &FaithPairRecord::story_source)
      .def_readonly("moral_source", &FaithPairRecord::moral_source);

  m.def(
      "build_mocpt",
      [](const Corpus& split, const Corpus& pool, const TopicModel& model, std::size_t n_neg, std::uint64_t seed) {
        SkipLog log;
        auto records = build_mocpt(split, pool, model, n_neg, seed, &log);
        return py::make_tuple(records, log.entries);
      },
      py::arg("split"), py::arg("pool"), py::arg("model"), py::arg("n_neg") = 4, py::arg("seed") = 0,
      "Returns (records, skipped) where skipped lists (id, reason).");
  m.def(
      "build_mopref",
      [](const Corpus& split, const AntonymLexicon& lex, std::uint64_t seed) {
        SkipLog log;
        auto records = build_mopref(split, lex, seed, &log);
        return py::make_tuple(records, log.entries);
      },
      py::arg("split"), py::arg("antonyms"), py::arg("seed") = 0);
  m.def("build_st2mo", &build_st2mo, py::arg("split"));
  m.def(
      "build_mo2st",
      [](const Corpus& split, const StopwordSet& stop) { return build_mo2st(split, stop); }, py::arg("split"),
      py::arg("stopwords"));
  m.def("build_faithfulness_data", &build_faithfulness_data, py::arg("split"), py::arg("neg_ratio") = 1.0,
        py::arg("seed") = 0);
  m.def("to_jsonl", &to_jsonl<std::vector<MoCptRecord>>, py::arg("records"));
  m.def("to_jsonl", &to_jsonl<std::vector<MoPrefRecord>>, py::arg("records"));
  m.def("to_jsonl", &to_jsonl<std::vector<St2MoRecord>>, py::arg("records"));
  m.def("to_jsonl", &to_jsonl<std::vector<Mo2StRecord>>, py::arg("records"));
  m.def("to_jsonl", &to_jsonl<std::vector<FaithPairRecord>>, py::arg("records"));

  // retrieval
  py::class_<EmbeddingProvider>(m, "EmbeddingProvider")
      .def_static("builtin", &EmbeddingProvider::builtin, py::arg("docs"),
                  py::arg("dim") = EmbeddingProvider::kDefaultDim)
      .def_static("external", &EmbeddingProvider::external, py::arg("vectors"), py::arg("name") = "external")
      .def_static("load_external", &EmbeddingProvider::load_external, py::arg("path"))
      .def_property_readonly("dim", &EmbeddingProvider::dim)
      .def_property_readonly("name", &EmbeddingProvider::name)
      .def("embed", py::overload_cast<const Tokens&>(&EmbeddingProvider::embed, py::const_), py::arg("tokens"));
  py::class_<StoryIndex>(m, "StoryIndex")
      .def_property_readonly("ids", &StoryIndex::ids)
      .def_property_readonly("dim", &StoryIndex::dim)
      .def("__len__", &StoryIndex::size);
  m.def(
      "build_index",
      [](const Corpus& c, const EmbeddingProvider& p, const std::string& field) {
        if (field != "story" && field != "moral") throw ValidationError("field must be story or moral");
        return build_index(c, p, field == "story" ? IndexField::Story : IndexField::Moral);
      },
      py::arg("corpus"), py::arg("provider"), py::arg("field") = "story");
  m.def(
      "retrieve",
      [](const StoryIndex& index, const Vector& query, std::size_t m, std::optional<std::string> exclude) {
        std::optional<std::string_view> ex;
        if (exclude) ex = *exclude;
        std::vector<std::pair<std::string, double>> out;
        for (const auto& h : retrieve(index, query, m, ex).hits) out.emplace_back(h.id, h.score);
        return out;
      },
      py::arg("index"), py::arg("query"), py::arg("m") = 10, py::arg("exclude_id") = std::nullopt);
  m.def(
      "augment_story",
      [](const StoryMoralPair& pair, const StoryIndex& index, const EmbeddingProvider& p, std::size_t m,
         const Resources& res, const Corpus& source) {
        const Augmentation a = augment_story(pair, index, p, m, res, source);
        std::vector<std::string> ids;
        for (const auto& h : a.retrieved.hits) ids.push_back(h.id);
        return py::dict(py::arg("concepts") = a.concepts.concepts, py::arg("sources") = a.concepts.sources,
                        py::arg("retrieved") = ids, py::arg("combined") = a.combined());
      },
      py::arg("pair"), py::arg("index"), py::arg("provider"), py::arg("m"), py::arg("resources"), py::arg("source"));

  // harness
  m.def("softmax", &softmax, py::arg("scores"), py::arg("temperature") = 1.0);
  m.def("random_chooser", &random_chooser, py::arg("n_candidates"), py::arg("seed"));
  m.def(
      "evaluate_understanding",
      [](const py::object& records, const std::string& chooser, std::uint64_t seed,
         const EmbeddingProvider* provider) {
        std::vector<ChoiceRecord> choice;
        if (py::isinstance<py::list>(records) && !py::len(records)) throw ValidationError("empty dataset");
        try {
          choice = to_choice_records(records.cast<std::vector<MoCptRecord>>());
        } catch (const py::cast_error&) {
          choice = to_choice_records(records.cast<std::vector<MoPrefRecord>>());
        }
        Chooser c;
        if (chooser == "gold") {
          c = gold_chooser();
        } else if (chooser == "random") {
          c = random_record_chooser(seed);
        } else if (chooser == "embedding") {
          if (provider == nullptr) throw ValidationError("the embedding chooser needs a provider");
          c = embedding_chooser({.provider = provider});
        } else {
          throw ValidationError("chooser must be gold, random or embedding");
        }
        return evaluate_understanding(choice, c).metrics.values.at("accuracy");
      },
      py::arg("records"), py::arg("chooser") = "random", py::arg("seed") = 0, py::arg("provider") = nullptr,
      "Accuracy (0-100) of a chooser over MoCpt or MoPref records.");
  m.def(
      "evaluate_generation",
      [](const std::map<std::string, std::string>& hyps, const py::object& records) {
        GenerationDataset dataset;
        try {
          dataset = records.cast<std::vector<St2MoRecord>>();
        } catch (const py::cast_error&) {
          dataset = records.cast<std::vector<Mo2StRecord>>();
        }
        return evaluate_generation(hyps, dataset).values;
      },
      py::arg("hypotheses"), py::arg("records"));

  (void)validation;
}
