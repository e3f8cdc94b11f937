// Command-line front end. Exit codes: 0 success, 1 validation error,
// 2 resource error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moralbench/corpus.hpp"
#include "moralbench/error.hpp"
#include "moralbench/harness.hpp"
#include "moralbench/outline.hpp"
#include "moralbench/resources.hpp"
#include "moralbench/retrieval.hpp"
#include "moralbench/taskgen.hpp"
#include "moralbench/text.hpp"
#include "moralbench/topics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace moralbench;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitResource = 2;

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open " + path.string());
  return in;
}

// Writes to --out, or stdout when no path was given.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    file_.open(path);
    if (!file_) throw ResourceError("cannot write " + path);
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

// Flat "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> read_config(const fs::path& path) {
  auto in = open_in(path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(path.string() + " line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = text::trim(trimmed.substr(0, eq));
    for (char& c : key) {
      if (c == '_') c = '-';
    }
    out[key] = text::trim(trimmed.substr(eq + 1));
  }
  return out;
}

// Fills options not given on the command line from the config file. Keys are
// looked up in the selected subcommand chain, innermost first; keys no active
// command knows are reported and ignored.
void apply_config(CLI::App& app, const std::map<std::string, std::string>& config) {
  std::vector<CLI::App*> chain{&app};
  for (CLI::App* cur = &app;;) {
    const auto subs = cur->get_subcommands();
    if (subs.empty()) break;
    cur = subs.front();
    chain.push_back(cur);
  }
  for (const auto& [key, value] : config) {
    if (key == "config") continue;
    CLI::Option* opt = nullptr;
    for (auto it = chain.rbegin(); it != chain.rend() && opt == nullptr; ++it) {
      opt = (*it)->get_option_no_throw("--" + key);
    }
    if (opt == nullptr) {
      std::cerr << "note: config key '" << key << "' is not used by this command\n";
      continue;
    }
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

std::array<std::uint32_t, 3> parse_ratios(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 3) throw ValidationError("ratios must look like 8:1:1, got \"" + s + "\"");
  std::array<std::uint32_t, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    try {
      std::size_t used = 0;
      out[i] = static_cast<std::uint32_t>(std::stoul(parts[i], &used));
      if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
    } catch (const std::logic_error&) {
      throw ValidationError("ratios must look like 8:1:1, got \"" + s + "\"");
    }
  }
  return out;
}

json report_json(const MetricReport& r) {
  return {{"values", r.values}, {"settings", r.settings}, {"item_count", r.item_count}};
}

json specificity_json(const SpecificityReport& r) {
  return {{"k", r.k},
          {"threshold", r.threshold},
          {"scores", r.scores},
          {"pass", r.pass},
          {"all_pass", r.all_pass()},
          {"min_score", r.min_score()}};
}

json stats_json(const CorpusStats& s) {
  return {{"n_examples", s.n_examples},       {"avg_story_words", s.avg_story_words},
          {"avg_moral_words", s.avg_moral_words}, {"avg_story_sents", s.avg_story_sents},
          {"avg_moral_sents", s.avg_moral_sents}, {"story_vocab", s.story_vocab},
          {"moral_vocab", s.moral_vocab}};
}

json hits_json(const RetrievalResult& r) {
  json hits = json::array();
  for (const auto& h : r.hits) hits.push_back({{"id", h.id}, {"score", h.score}});
  return {{"hits", hits}, {"truncated", r.truncated}};
}

struct Globals {
  std::uint64_t seed = 0;
  std::string config;
  std::string resources;
  std::string lang = "en";
};

// Corpus input shared by most subcommands: a corpus file, optionally
// restricted to one split by a splits file.
struct CorpusArgs {
  std::string in;
  std::string splits;
  std::string split;

  void add(CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option("--in", in, "corpus JSONL");
    if (required) opt->required();
    cmd->add_option("--splits", splits, "splits JSONL from `split`");
    cmd->add_option("--split", split, "restrict to train, val or test (needs --splits)");
  }

  Corpus load() const {
    Corpus c = load_corpus(in);
    if (!splits.empty()) c = c.with_splits(load_splits(splits));
    if (!split.empty()) {
      if (!c.is_split()) throw ValidationError("--split needs --splits");
      c = c.subset(parse_split(split));
    }
    return c;
  }
};

Resources load_language_resources(const Globals& g) {
  if (g.resources.empty()) throw ResourceError("--resources <dir> is required for this command");
  fs::path dir = g.resources;
  if (fs::exists(dir / g.lang / "stopwords.txt")) dir /= g.lang;
  return load_resources(dir);
}

struct IndexArgs {
  std::string path;
  std::string vectors;

  void add(CLI::App* cmd) {
    cmd->add_option("--index", path, "index JSON from `index build`")->required();
    cmd->add_option("--vectors", vectors, "external vector JSONL (for indexes built from one)");
  }

  std::pair<StoryIndex, EmbeddingProvider> load() const {
    LoadedIndex loaded = load_index(path);
    if (loaded.provider) return {std::move(loaded.index), std::move(*loaded.provider)};
    if (vectors.empty()) throw ValidationError("index has no built-in provider state; pass --vectors");
    return {std::move(loaded.index), EmbeddingProvider::load_external(vectors)};
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moral-story benchmark toolkit: corpus handling, task construction, retrieval and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--config", g.config, "flat key = value file supplying option defaults");
  app.add_option("--resources", g.resources, "directory with stopwords/antonyms/POS/lemma files");
  app.add_option("--lang", g.lang, "language subdirectory of --resources")->capture_default_str();
  std::string out_path;
  app.add_option("--out", out_path, "output file (stdout when omitted)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate, normalize and tokenize a corpus");
  std::string ingest_in;
  ingest->add_option("--in", ingest_in, "raw corpus JSONL")->required();

  // split
  auto* split = app.add_subcommand("split", "seeded train/val/test assignment");
  std::string split_in;
  std::string ratios = "8:1:1";
  split->add_option("--in", split_in, "corpus JSONL")->required();
  split->add_option("--ratios", ratios, "train:val:test")->capture_default_str();

  // topics fit|select
  auto* topics = app.add_subcommand("topics", "LDA over morals");
  topics->require_subcommand(1);
  CorpusArgs topic_corpus;
  LdaParams lda;
  double alpha = 0;
  auto add_lda = [&](CLI::App* cmd) {
    topic_corpus.add(cmd);
    cmd->add_option("--alpha", alpha, "doc-topic prior (default 50/B)");
    cmd->add_option("--eta", lda.eta, "topic-word prior")->capture_default_str();
    cmd->add_option("--iters", lda.iters, "Gibbs sweeps")->capture_default_str();
    cmd->add_option("--fold-in-iters", lda.fold_in_iters, "sweeps when assigning held-out morals")
        ->capture_default_str();
  };
  auto* topics_fit = topics->add_subcommand("fit", "fit a model with a fixed topic count");
  std::size_t num_topics = 0;
  add_lda(topics_fit);
  topics_fit->add_option("--topics", num_topics, "topic count B")->required();
  auto* topics_select = topics->add_subcommand("select", "smallest B whose topics all pass the specificity test");
  std::size_t b_min = 2;
  std::size_t b_max = 40;
  std::size_t top_k = 20;
  double threshold = 0.5;
  std::string report_out;
  add_lda(topics_select);
  topics_select->add_option("--b-min", b_min)->capture_default_str();
  topics_select->add_option("--b-max", b_max)->capture_default_str();
  topics_select->add_option("--k", top_k, "top words per topic")->capture_default_str();
  topics_select->add_option("--threshold", threshold, "specificity threshold h")->capture_default_str();
  topics_select->add_option("--report", report_out, "write the specificity report here (default stderr)");

  // tasks build
  auto* tasks = app.add_subcommand("tasks", "benchmark task construction");
  tasks->require_subcommand(1);
  auto* tasks_build = tasks->add_subcommand("build", "build one task's records");
  CorpusArgs task_corpus;
  task_corpus.add(tasks_build);
  std::string task_name;
  std::string model_path;
  std::string pool_split;
  std::size_t n_neg = 4;
  double neg_ratio = 1.0;
  std::size_t max_phrases = 8;
  std::size_t max_words = 8;
  std::string skip_log;
  tasks_build->add_option("--task", task_name)
      ->required()
      ->check(CLI::IsMember({"mocpt", "mopref", "st2mo", "mo2st", "faith"}));
  tasks_build->add_option("--model", model_path, "topic model (mocpt)");
  tasks_build->add_option("--pool-split", pool_split, "split supplying mocpt negatives (default: --split)");
  tasks_build->add_option("--n-neg", n_neg, "mocpt negatives per record")->capture_default_str();
  tasks_build->add_option("--neg-ratio", neg_ratio, "mismatched faith pairs per matched pair")->capture_default_str();
  tasks_build->add_option("--max-phrases", max_phrases)->capture_default_str();
  tasks_build->add_option("--max-words", max_words)->capture_default_str();
  tasks_build->add_option("--skip-log", skip_log, "JSONL of skipped or flagged examples");

  // index build
  auto* index = app.add_subcommand("index", "dense story/moral index");
  index->require_subcommand(1);
  auto* index_build = index->add_subcommand("build", "embed and index a corpus field");
  CorpusArgs index_corpus;
  index_corpus.add(index_build);
  std::string field = "story";
  std::string build_vectors;
  std::size_t dim = EmbeddingProvider::kDefaultDim;
  index_build->add_option("--field", field)->check(CLI::IsMember({"story", "moral"}))->capture_default_str();
  index_build->add_option("--vectors", build_vectors, "external vector JSONL instead of the built-in embedder");
  index_build->add_option("--dim", dim, "built-in embedding dimension")->capture_default_str();

  // retrieve
  auto* retrieve_cmd = app.add_subcommand("retrieve", "top-m neighbors of a query");
  IndexArgs retrieve_index;
  retrieve_index.add(retrieve_cmd);
  std::string query_text;
  std::string query_id;
  CorpusArgs retrieve_corpus;
  retrieve_corpus.add(retrieve_cmd, false);
  std::size_t m = 10;
  bool exclude_self = false;
  retrieve_cmd->add_option("--query", query_text, "query text");
  retrieve_cmd->add_option("--id", query_id, "query by the story of this pair (needs --in)");
  retrieve_cmd->add_option("--m", m, "neighbors")->capture_default_str();
  retrieve_cmd->add_flag("--exclude-self", exclude_self, "drop the query id from the results");

  // augment
  auto* augment = app.add_subcommand("augment", "concepts from retrieved morals for each story");
  IndexArgs augment_index;
  augment_index.add(augment);
  CorpusArgs augment_corpus;
  augment_corpus.add(augment);
  std::string source_path;
  augment->add_option("--source", source_path, "corpus the index was built from (default --in)");
  augment->add_option("--m", m, "neighbors")->capture_default_str();

  // eval understanding|generation
  auto* eval = app.add_subcommand("eval", "evaluation");
  eval->require_subcommand(1);
  auto* eval_u = eval->add_subcommand("understanding", "accuracy on mocpt/mopref records");
  std::string dataset_path;
  std::string chooser_name = "embedding";
  std::string predictions_path;
  std::string decisions_path;
  std::string eval_index_path;
  std::string eval_vectors;
  std::string eval_source;
  bool use_retrieval = false;
  double temperature = 1.0;
  eval_u->add_option("--dataset", dataset_path)->required();
  eval_u->add_option("--chooser", chooser_name)
      ->check(CLI::IsMember({"embedding", "random", "gold", "predictions"}))
      ->capture_default_str();
  eval_u->add_option("--predictions", predictions_path, "JSONL {id, prediction} for --chooser predictions");
  eval_u->add_option("--index", eval_index_path, "story index (embedding chooser)");
  eval_u->add_option("--vectors", eval_vectors, "external vectors for an index built from them");
  eval_u->add_option("--source", eval_source, "corpus the index was built from (retrieval)");
  eval_u->add_flag("--retrieval", use_retrieval, "augment stories with retrieved concepts");
  eval_u->add_option("--m", m, "neighbors")->capture_default_str();
  eval_u->add_option("--temperature", temperature)->capture_default_str();
  eval_u->add_option("--decisions", decisions_path, "JSONL of per-record decisions");
  auto* eval_g = eval->add_subcommand("generation", "metric bundle for st2mo/mo2st hypotheses");
  std::string gen_task;
  std::string hypotheses_path;
  std::size_t ngram_n = 0;
  eval_g->add_option("--task", gen_task)->required()->check(CLI::IsMember({"st2mo", "mo2st"}));
  eval_g->add_option("--dataset", dataset_path)->required();
  eval_g->add_option("--hypotheses", hypotheses_path, "JSONL {id, text}")->required();
  eval_g->add_option("--n", ngram_n, "n for repetition/distinct (default 2 st2mo, 4 mo2st)");

  // report
  auto* report = app.add_subcommand("report", "corpus statistics, per split when splits are given");
  CorpusArgs report_corpus;
  report_corpus.add(report);

  try {
    app.parse(argc, argv);
    if (!g.config.empty()) {
      apply_config(app, read_config(g.config));
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitResource;
  }

  try {
    if (alpha > 0) lda.alpha = alpha;

    if (*ingest) {
      const Corpus c = load_corpus(ingest_in);
      Output out(out_path);
      write_corpus(out.stream(), c);
      std::cerr << "ingested " << c.size() << " pairs\n";
    } else if (*split) {
      const Corpus c = split_corpus(load_corpus(split_in), parse_ratios(ratios), g.seed);
      Output out(out_path);
      write_splits(out.stream(), c);
    } else if (*topics) {
      const Corpus c = topic_corpus.load();
      TokenDocs docs;
      for (const auto& p : c.pairs()) docs.push_back(p.moral_tokens);
      Output out(out_path);
      if (*topics_fit) {
        const TopicModel model = fit_lda(docs, num_topics, lda, g.seed);
        write_model(out.stream(), model);
        std::cerr << specificity_json(specificity_report(model, top_k, threshold)).dump() << "\n";
      } else {
        const TopicSelection sel = select_topic_count(docs, b_min, b_max, top_k, threshold, lda, g.seed);
        write_model(out.stream(), sel.model);
        json rep = specificity_json(sel.report);
        rep["B"] = sel.num_topics;
        rep["converged"] = sel.converged;
        if (report_out.empty()) {
          std::cerr << rep.dump() << "\n";
        } else {
          Output r(report_out);
          r.stream() << rep.dump(2) << "\n";
        }
      }
    } else if (*tasks) {
      const Corpus c = task_corpus.load();
      SkipLog log;
      Output out(out_path);
      if (task_name == "mocpt") {
        if (model_path.empty()) throw ValidationError("--model is required for mocpt");
        const TopicModel model = load_model(model_path);
        Corpus pool = c;
        if (!pool_split.empty()) pool = CorpusArgs{task_corpus.in, task_corpus.splits, pool_split}.load();
        write_jsonl(out.stream(), build_mocpt(c, pool, model, n_neg, g.seed, &log));
      } else if (task_name == "mopref") {
        write_jsonl(out.stream(), build_mopref(c, load_language_resources(g).antonyms, g.seed, &log));
      } else if (task_name == "st2mo") {
        write_jsonl(out.stream(), build_st2mo(c));
      } else if (task_name == "mo2st") {
        write_jsonl(out.stream(), build_mo2st(c, load_language_resources(g).stopwords,
                                              {.max_phrases = max_phrases, .max_words = max_words}, &log));
      } else {
        write_jsonl(out.stream(), build_faithfulness_data(c, neg_ratio, g.seed));
      }
      if (!skip_log.empty()) {
        Output s(skip_log);
        for (const auto& [id, reason] : log.entries) s.stream() << json{{"id", id}, {"reason", reason}}.dump() << "\n";
      }
      if (!log.entries.empty()) std::cerr << log.entries.size() << " examples skipped or flagged\n";
    } else if (*index) {
      const Corpus c = index_corpus.load();
      const IndexField f = field == "story" ? IndexField::Story : IndexField::Moral;
      Output out(out_path);
      if (build_vectors.empty()) {
        std::vector<Tokens> docs;
        for (const auto& p : c.pairs()) docs.push_back(f == IndexField::Story ? p.story_tokens : p.moral_tokens);
        const EmbeddingProvider provider = EmbeddingProvider::builtin(docs, dim);
        write_index(out.stream(), build_index(c, provider, f), &provider);
      } else {
        const EmbeddingProvider provider = EmbeddingProvider::load_external(build_vectors);
        write_index(out.stream(), build_index(c, provider, f));
      }
    } else if (*retrieve_cmd) {
      const auto [idx, provider] = retrieve_index.load();
      Vector query;
      std::string exclude = query_id;
      if (!query_id.empty()) {
        if (retrieve_corpus.in.empty()) throw ValidationError("--id needs --in");
        const Corpus c = retrieve_corpus.load();
        const auto& pair = c.at(query_id);
        query = provider.embed(pair.id, pair.story_tokens);
      } else if (!query_text.empty()) {
        query = provider.embed(text::tokenize(query_text, g.lang));
      } else {
        throw ValidationError("retrieve needs --query or --id");
      }
      std::optional<std::string_view> ex;
      if (exclude_self && !exclude.empty()) ex = exclude;
      Output out(out_path);
      out.stream() << hits_json(retrieve(idx, query, m, ex)).dump(2) << "\n";
    } else if (*augment) {
      const auto [idx, provider] = augment_index.load();
      const Resources res = load_language_resources(g);
      const Corpus c = augment_corpus.load();
      const Corpus source = source_path.empty() ? load_corpus(augment_corpus.in) : load_corpus(source_path);
      Output out(out_path);
      for (const auto& pair : c.pairs()) {
        const Augmentation a = augment_story(pair, idx, provider, m, res, source);
        json rec = hits_json(a.retrieved);
        rec["id"] = pair.id;
        rec["concepts"] = a.concepts.concepts;
        rec["sources"] = a.concepts.sources;
        out.stream() << rec.dump() << "\n";
      }
    } else if (*eval_u) {
      auto in = open_in(dataset_path);
      const std::vector<ChoiceRecord> records = read_choice_records(in);
      std::optional<std::pair<StoryIndex, EmbeddingProvider>> loaded;
      std::optional<Resources> res;
      std::optional<Corpus> source;
      Chooser chooser;
      if (chooser_name == "gold") {
        chooser = gold_chooser();
      } else if (chooser_name == "random") {
        chooser = random_record_chooser(g.seed);
      } else if (chooser_name == "predictions") {
        if (predictions_path.empty()) throw ValidationError("--chooser predictions needs --predictions");
        auto pin = open_in(predictions_path);
        chooser = [preds = read_predictions(pin)](const ChoiceRecord& r) {
          const auto it = preds.find(r.id);
          if (it == preds.end()) throw ValidationError("no prediction for \"" + r.id + "\"");
          return Decision{r.id, it->second, r.label, {}};
        };
      } else {
        if (eval_index_path.empty()) throw ValidationError("the embedding chooser needs --index");
        loaded = IndexArgs{eval_index_path, eval_vectors}.load();
        CandidateScorer scorer{.provider = &loaded->second, .use_retrieval = use_retrieval, .m = m,
                               .temperature = temperature};
        std::optional<RetrievalContext> ctx;
        if (use_retrieval) {
          if (eval_source.empty()) throw ValidationError("--retrieval needs --source");
          res = load_language_resources(g);
          source = load_corpus(eval_source);
          ctx = RetrievalContext{&loaded->first, &*res, &*source};
        }
        chooser = embedding_chooser(scorer, ctx);
      }
      const UnderstandingReport rep = evaluate_understanding(records, chooser);
      json j = report_json(rep.metrics);
      j["settings"]["chooser"] = chooser_name;
      j["settings"]["retrieval"] = use_retrieval ? "on" : "off";
      Output out(out_path);
      out.stream() << j.dump(2) << "\n";
      if (!decisions_path.empty()) {
        Output d(decisions_path);
        for (const auto& dec : rep.decisions) {
          d.stream() << json{{"id", dec.id},
                             {"predicted", dec.predicted},
                             {"gold", dec.gold},
                             {"probabilities", dec.probabilities}}
                            .dump()
                     << "\n";
        }
      }
    } else if (*eval_g) {
      auto hin = open_in(hypotheses_path);
      const auto hyps = read_hypotheses(hin);
      auto din = open_in(dataset_path);
      GenerationDataset dataset;
      if (gen_task == "st2mo") {
        dataset = read_st2mo(din);
      } else {
        dataset = read_mo2st(din);
      }
      GenerationSettings settings{.lang = g.lang};
      if (ngram_n > 0) settings.ngram_n = ngram_n;
      Output out(out_path);
      out.stream() << report_json(evaluate_generation(hyps, dataset, settings)).dump(2) << "\n";
    } else if (*report) {
      const Corpus c = report_corpus.load();
      json j = stats_json(corpus_stats(c));
      if (c.is_split()) {
        for (Split s : {Split::Train, Split::Val, Split::Test}) {
          const Corpus sub = c.subset(s);
          if (!sub.empty()) j["splits"][std::string(to_string(s))] = stats_json(corpus_stats(sub));
        }
      }
      if (!g.resources.empty() && !c.empty()) {
        const Resources res = load_language_resources(g);
        double phrases = 0;
        std::size_t empty = 0;
        for (const auto& p : c.pairs()) {
          const Outline o = build_outline(p, res.stopwords);
          phrases += static_cast<double>(o.phrases.size());
          if (o.empty_flag) ++empty;
        }
        j["avg_outline_phrases"] = phrases / static_cast<double>(c.size());
        j["empty_outlines"] = empty;
      }
      Output out(out_path);
      out.stream() << j.dump(2) << "\n";
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitResource;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitResource;
  }
  return 0;
}
