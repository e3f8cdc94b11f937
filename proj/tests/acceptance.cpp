// Runs the acceptance criteria at their stated tolerances and prints one
// PASS/FAIL line per criterion. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "moralbench/error.hpp"
#include "moralbench/harness.hpp"
#include "moralbench/metrics.hpp"
#include "moralbench/outline.hpp"
#include "moralbench/retrieval.hpp"
#include "moralbench/rng.hpp"
#include "moralbench/synthetic.hpp"
#include "moralbench/taskgen.hpp"
#include "moralbench/text.hpp"
#include "moralbench/topics.hpp"
#include "oracles.hpp"

namespace mb = moralbench;
using mb::Tokens;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const mb::Resources& resources() {
  static const mb::Resources r = mb::load_resources(MORALBENCH_RESOURCES "/en");
  return r;
}

std::string fmt(double v, int precision = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

// Synthetic corpus, moral topic model and MoCpt records shared by criteria 2
// and 3.
struct MoCptFixture {
  mb::Corpus corpus;
  mb::TopicModel model;
  std::vector<mb::MoCptRecord> records;
  std::size_t skipped = 0;
};

const MoCptFixture& mocpt_fixture() {
  static const MoCptFixture f = [] {
    MoCptFixture out;
    out.corpus = mb::synthetic::corpus({.pairs = 2200, .seed = 21});
    mb::TokenDocs docs;
    for (const auto& p : out.corpus.pairs()) docs.push_back(p.moral_tokens);
    out.model = mb::fit_lda(docs, 4, {.iters = 200}, 21);
    mb::SkipLog log;
    out.records = mb::build_mocpt(out.corpus, out.corpus, out.model, 4, 21, &log);
    out.skipped = log.entries.size();
    return out;
  }();
  return f;
}

Outcome truth_rows() {
  const mb::Corpus c = mb::synthetic::corpus({.pairs = 200, .seed = 1});
  const auto mo2st = mb::build_mo2st(c, resources().stopwords);
  std::map<std::string, std::string> stories;
  for (const auto& r : mo2st) stories[r.id] = r.target_story;
  const auto mo = mb::evaluate_generation(stories, mo2st);

  const auto st2mo = mb::build_st2mo(c);
  std::map<std::string, std::string> morals;
  for (const auto& r : st2mo) morals[r.id] = r.moral;
  const auto st = mb::evaluate_generation(morals, st2mo);

  const double cov = mo.values.at("coverage");
  const double ord = mo.values.at("order");
  const double bleu1 = st.values.at("bleu1");
  return {cov == 100.0 && ord == 100.0 && bleu1 == 100.0,
          "coverage=" + fmt(cov) + " order=" + fmt(ord) + " st2mo bleu1=" + fmt(bleu1)};
}

Outcome random_anchors() {
  const auto& f = mocpt_fixture();
  std::vector<mb::ChoiceRecord> mocpt = mb::to_choice_records(f.records);
  if (mocpt.size() > 2000) mocpt.resize(2000);

  const mb::AntonymLexicon lex = mb::parse_antonyms(mb::synthetic::value_antonyms());
  std::vector<mb::ChoiceRecord> mopref = mb::to_choice_records(mb::build_mopref(f.corpus, lex, 5));
  if (mopref.size() > 2000) mopref.resize(2000);

  const double a5 = mb::evaluate_understanding(mocpt, mb::random_record_chooser(77)).metrics.values.at("accuracy");
  const double a2 = mb::evaluate_understanding(mopref, mb::random_record_chooser(77)).metrics.values.at("accuracy");
  const bool sizes = mocpt.size() == 2000 && mopref.size() == 2000;
  return {sizes && std::abs(a5 - 20.0) <= 2.7 && std::abs(a2 - 50.0) <= 3.4,
          "mocpt n=" + std::to_string(mocpt.size()) + " acc=" + fmt(a5) + " (20+-2.7), mopref n=" +
              std::to_string(mopref.size()) + " acc=" + fmt(a2) + " (50+-3.4)"};
}

Outcome construction_constraints() {
  const auto& f = mocpt_fixture();
  std::size_t topic_violations = 0;
  std::size_t neg_count = 0;
  for (const auto& r : f.records) {
    const std::size_t gold = mb::assign_topic(f.model, mb::text::tokenize(r.candidates[r.label]));
    if (gold != r.gold_topic) ++topic_violations;
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
      if (i == r.label) continue;
      ++neg_count;
      if (mb::assign_topic(f.model, mb::text::tokenize(r.candidates[i])) == gold) ++topic_violations;
    }
  }

  const mb::AntonymLexicon lex = mb::parse_antonyms(mb::synthetic::value_antonyms());
  const auto mopref = mb::build_mopref(f.corpus, lex, 9);
  std::size_t flip_violations = 0;
  for (const auto& r : mopref) {
    const Tokens gold = mb::text::tokenize(r.candidates[r.label]);
    const Tokens neg = mb::text::tokenize(r.candidates[1 - r.label]);
    if (gold.size() != neg.size()) {
      ++flip_violations;
      continue;
    }
    std::size_t diff = 0;
    bool in_lexicon = true;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (gold[i] == neg[i]) continue;
      ++diff;
      in_lexicon = in_lexicon && lex.contains(gold[i], neg[i]);
    }
    if (diff != 1 || !in_lexicon) ++flip_violations;
  }

  mb::AntonymLexicon unity;
  unity.add("strength", "weakness");
  const auto cows = mb::build_mopref(mb::Corpus({mb::make_pair("cows", "Four cows.", "Unity is strength.")}), unity, 1);
  const bool verbatim = cows.size() == 1 && cows[0].candidates[1 - cows[0].label] == "Unity is weakness.";

  const bool pass = f.records.size() >= 1000 && neg_count == 4 * f.records.size() && topic_violations == 0 &&
                    flip_violations == 0 && !mopref.empty() && verbatim;
  return {pass, "mocpt records=" + std::to_string(f.records.size()) + " skipped=" + std::to_string(f.skipped) +
                    " topic violations=" + std::to_string(topic_violations) +
                    ", mopref records=" + std::to_string(mopref.size()) +
                    " flip violations=" + std::to_string(flip_violations) +
                    ", unity->weakness " + (verbatim ? "verbatim" : "MISSING")};
}

bool is_subrun(const Tokens& needle, const Tokens& hay) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

Outcome outline_contract() {
  std::vector<mb::StoryMoralPair> stories = mb::synthetic::corpus({.pairs = 800, .seed = 13}).pairs();
  mb::Rng rng(4242);
  const std::vector<std::string> words{"fox", "crow", "cheese", "the", "and", "of", "sly", "old", "tree", "sang"};
  for (int i = 0; i < 400; ++i) {
    std::string story;
    for (std::size_t n = 1 + rng.index(80); n > 0; --n) {
      story += words[rng.index(words.size())];
      story += rng.index(7) == 0 ? ". " : " ";
    }
    stories.push_back(mb::make_pair("r" + std::to_string(i), story, "m"));
  }
  std::size_t violations = 0;
  std::size_t empty = 0;
  for (const auto& pair : stories) {
    const mb::Outline o = mb::build_outline(pair, resources().stopwords);
    if (o.phrases.empty()) {
      ++empty;
      continue;
    }
    bool ok = o.phrases.size() <= 8;
    for (std::size_t i = 0; i < o.phrases.size(); ++i) {
      ok = ok && !o.phrases[i].tokens.empty() && o.phrases[i].tokens.size() <= 8;
      for (std::size_t j = 0; j < o.phrases.size(); ++j) {
        if (i != j && is_subrun(o.phrases[i].tokens, o.phrases[j].tokens)) ok = false;
      }
    }
    std::vector<Tokens> phrases;
    for (const auto& p : o.phrases) phrases.push_back(p.tokens);
    ok = ok && oracle::coverage(pair.story_tokens, phrases) == 100.0 && mb::coverage(pair.story_tokens, o) == 100.0;
    if (!ok) ++violations;
  }
  return {stories.size() >= 1000 && violations == 0,
          "stories=" + std::to_string(stories.size()) + " empty outlines=" + std::to_string(empty) +
              " violations=" + std::to_string(violations)};
}

Outcome topic_selection() {
  const auto docs = mb::synthetic::topic_docs(4, 25, 200, 30, 3);
  const mb::TopicSelection sel = mb::select_topic_count(docs, 2, 8, 20, 0.5, {}, 3);
  bool all = sel.converged && sel.report.all_pass();
  for (std::size_t b = 0; b < sel.model.num_topics(); ++b) all = all && mb::specificity(sel.model, b, 20) >= 0.5;

  mb::Rng rng(99);
  std::size_t monotone_violations = 0;
  for (int probe = 0; probe < 100; ++probe) {
    const std::size_t v = 5 + rng.index(60);
    const std::size_t topics = 1 + rng.index(5);
    std::vector<std::string> vocab;
    for (std::size_t i = 0; i < v; ++i) vocab.push_back("w" + std::to_string(i));
    std::sort(vocab.begin(), vocab.end());
    std::vector<std::vector<double>> beta(topics, std::vector<double>(v));
    for (auto& row : beta) {
      for (double& x : row) x = -std::log(1.0 - rng.uniform()) * (rng.index(4) == 0 ? 20.0 : 1.0);
    }
    const mb::TopicModel model(vocab, beta, 0.1, 1);
    const std::size_t b = rng.index(topics);
    double prev = 0;
    for (std::size_t k = 1; k <= v; ++k) {
      const double s = mb::specificity(model, b, k);
      if (s + 1e-15 < prev) ++monotone_violations;
      prev = s;
    }
    if (std::abs(prev - 1.0) > 1e-12) ++monotone_violations;
  }

  double uniform_err = 0;
  for (std::size_t v : {7u, 50u, 301u}) {
    std::vector<std::string> vocab;
    for (std::size_t i = 0; i < v; ++i) vocab.push_back("u" + std::to_string(1000 + i));
    const mb::TopicModel model(vocab, {std::vector<double>(v, 1.0)}, 0.1, 1);
    for (std::size_t k = 1; k <= v; ++k) {
      uniform_err = std::max(uniform_err, std::abs(mb::specificity(model, 0, k) -
                                                   static_cast<double>(k) / static_cast<double>(v)));
    }
  }
  return {all && monotone_violations == 0 && uniform_err <= 1e-12,
          "selected B=" + std::to_string(sel.num_topics) + " min s_b=" + fmt(sel.report.min_score(), 4) +
              ", monotonicity violations=" + std::to_string(monotone_violations) +
              ", uniform max err=" + fmt(uniform_err, 15)};
}

Outcome retrieval_invariants() {
  const mb::Corpus c = mb::synthetic::corpus({.pairs = 1200, .seed = 17});
  std::vector<Tokens> docs;
  for (const auto& p : c.pairs()) docs.push_back(p.story_tokens);
  const auto provider = mb::EmbeddingProvider::builtin(docs);
  const mb::StoryIndex index = mb::build_index(c, provider, mb::IndexField::Story);

  mb::Rng rng(7);
  std::size_t self_misses = 0;
  std::size_t exclusion_leaks = 0;
  std::size_t trace_violations = 0;
  for (int q = 0; q < 1000; ++q) {
    const auto& pair = c.pairs()[rng.index(c.size())];
    const mb::Vector query = provider.embed(pair.id, pair.story_tokens);
    const auto hits = mb::retrieve(index, query, 10).hits;
    if (hits.empty() || hits[0].id != pair.id) ++self_misses;
    for (const auto& h : mb::retrieve(index, query, 10, pair.id).hits) {
      if (h.id == pair.id) ++exclusion_leaks;
    }
  }

  const auto& res = resources();
  auto lemma_set = [&](const std::string& id) {
    std::set<std::string> out;
    for (const auto& t : c.at(id).moral_tokens) {
      std::optional<mb::PosTag> tag;
      if (const auto it = res.pos.find(t); it != res.pos.end()) tag = it->second;
      out.insert(res.lemmatizer.lemma(t, tag));
    }
    return out;
  };
  std::size_t concepts_seen = 0;
  bool identical = true;
  for (std::size_t i = 0; i < 200; ++i) {
    const auto& pair = c.pairs()[i * 5];
    const auto a = mb::augment_story(pair, index, provider, 10, res, c);
    const auto b = mb::augment_story(pair, index, provider, 10, res, c);
    identical = identical && a.concepts == b.concepts && a.retrieved.hits == b.retrieved.hits;
    std::set<std::string> retrieved;
    for (const auto& h : a.retrieved.hits) retrieved.insert(h.id);
    for (const auto& word : a.concepts.concepts) {
      ++concepts_seen;
      const auto it = a.concepts.sources.find(word);
      bool traced = it != a.concepts.sources.end() && !it->second.empty();
      if (traced) {
        for (const auto& src : it->second) traced = traced && retrieved.contains(src) && lemma_set(src).contains(word);
      }
      if (!traced) ++trace_violations;
    }
  }
  return {self_misses == 0 && exclusion_leaks == 0 && trace_violations == 0 && identical && concepts_seen > 0,
          "self-rank misses=" + std::to_string(self_misses) + "/1000, exclusion leaks=" +
              std::to_string(exclusion_leaks) + ", concepts checked=" + std::to_string(concepts_seen) +
              " untraced=" + std::to_string(trace_violations) + ", repeat runs " +
              (identical ? "bit-identical" : "DIFFER")};
}

Outcome separable_scorer() {
  // Stories and gold morals from themes 0-3 are indexed; distractors are
  // morals from themes 4-7, vocabulary-disjoint from stories and index.
  const mb::Corpus all = mb::synthetic::corpus({.pairs = 400, .themes = 8, .value_word = false, .seed = 31});
  std::vector<mb::StoryMoralPair> inside;
  std::vector<std::string> outside;
  for (const auto& p : all.pairs()) {
    if (mb::synthetic::theme_of(p.id) < 4) {
      inside.push_back(p);
    } else {
      outside.push_back(p.moral);
    }
  }
  const mb::Corpus indexed(inside);
  std::vector<mb::ChoiceRecord> records;
  std::size_t min_shared = 99;
  for (std::size_t i = 0; i < inside.size(); ++i) {
    const std::set<std::string> story(inside[i].story_tokens.begin(), inside[i].story_tokens.end());
    std::size_t shared = 0;
    for (const auto& t : std::set<std::string>(inside[i].moral_tokens.begin(), inside[i].moral_tokens.end())) {
      if (story.contains(t) && !resources().stopwords.contains(t)) ++shared;
    }
    min_shared = std::min(min_shared, shared);
    mb::ChoiceRecord r{inside[i].id, inside[i].story, {inside[i].moral}, i % 5};
    for (std::size_t j = 0; j < 4; ++j) r.candidates.push_back(outside[(4 * i + j) % outside.size()]);
    std::swap(r.candidates[0], r.candidates[r.label]);
    records.push_back(r);
  }

  std::vector<Tokens> docs;
  for (const auto& p : indexed.pairs()) docs.push_back(p.story_tokens);
  const auto provider = mb::EmbeddingProvider::builtin(docs);
  const mb::StoryIndex index = mb::build_index(indexed, provider, mb::IndexField::Story);
  const mb::RetrievalContext ctx{&index, &resources(), &indexed};
  const double off =
      mb::evaluate_understanding(records, mb::embedding_chooser({.provider = &provider})).metrics.values.at("accuracy");
  const double on = mb::evaluate_understanding(records, mb::embedding_chooser(
                                                            {.provider = &provider, .use_retrieval = true}, ctx))
                        .metrics.values.at("accuracy");
  return {min_shared >= 3 && on > 60.0 && on >= off,
          "records=" + std::to_string(records.size()) + " min shared lemmas=" + std::to_string(min_shared) +
              " retrieval on=" + fmt(on) + " off=" + fmt(off)};
}

Tokens random_text(mb::Rng& rng, std::size_t max_len, std::size_t alphabet) {
  Tokens t;
  for (std::size_t i = rng.index(max_len + 1); i > 0; --i) t.push_back("t" + std::to_string(rng.index(alphabet)));
  return t;
}

Outcome metric_oracles() {
  mb::Rng rng(2024);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t alphabet = 2 + rng.index(6);
    std::vector<Tokens> texts;
    for (std::size_t i = 1 + rng.index(5); i > 0; --i) texts.push_back(random_text(rng, 30, alphabet));
    const std::size_t n = 1 + rng.index(4);

    const auto d = oracle::distinct(texts, n);
    if (d) {
      if (mb::distinct_n(texts, n) != *d) ++mismatches;
    } else {
      try {
        mb::distinct_n(texts, n);
        ++mismatches;
      } catch (const mb::ValidationError&) {
      }
    }
    if (mb::repetition_n(texts, n) != oracle::repetition(texts, n)) ++mismatches;

    mb::Outline o;
    for (std::size_t p = 2 + rng.index(5); p > 0; --p) {
      Tokens phrase = random_text(rng, 4, alphabet + 2);
      if (phrase.empty()) phrase.push_back("t0");
      o.phrases.push_back({phrase, 0, std::nullopt});
    }
    o.ground_truth_order.resize(o.phrases.size());
    std::iota(o.ground_truth_order.begin(), o.ground_truth_order.end(), std::size_t{0});
    rng.shuffle(o.ground_truth_order);
    std::vector<std::size_t> rank(o.phrases.size());
    for (std::size_t r = 0; r < rank.size(); ++r) rank[o.ground_truth_order[r]] = r;
    std::vector<Tokens> phrases;
    for (const auto& p : o.phrases) phrases.push_back(p.tokens);

    if (mb::coverage(texts[0], o) != oracle::coverage(texts[0], phrases)) ++mismatches;
    const mb::OrderResult got = mb::order_score(texts[0], o);
    const oracle::OrderOracle want = oracle::order(texts[0], phrases, rank);
    if (got.score != want.score || got.inversions != want.inversions || got.pairs != want.pairs) ++mismatches;
  }
  return {mismatches == 0, "500 instances, mismatches=" + std::to_string(mismatches)};
}

Outcome faithfulness() {
  const mb::Corpus c = mb::synthetic::corpus({.pairs = 300, .seed = 3});
  std::string detail;
  bool pass = true;
  for (double ratio : {0.0, 0.5, 1.0, 2.0, 3.3}) {
    const auto records = mb::build_faithfulness_data(c, ratio, 11);
    std::size_t matched = 0;
    std::size_t mismatched = 0;
    std::size_t same_source = 0;
    std::size_t wrong_text = 0;
    for (const auto& r : records) {
      if (r.label == mb::FaithLabel::Matched) {
        ++matched;
        if (r.story_source != r.moral_source) ++wrong_text;
        continue;
      }
      ++mismatched;
      if (r.story_source == r.moral_source) ++same_source;
      if (c.at(r.story_source).story != r.story || c.at(r.moral_source).moral != r.moral) ++wrong_text;
    }
    const auto expected = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(c.size())));
    pass = pass && matched == c.size() && mismatched == expected && same_source == 0 && wrong_text == 0;
    detail += (detail.empty() ? "" : ", ") + fmt(ratio, 1) + ":" + std::to_string(matched) + "/" +
              std::to_string(mismatched) + " same-source=" + std::to_string(same_source);
  }
  return {pass, "matched/mismatched per ratio " + detail};
}

struct Criterion {
  int number;
  const char* name;
  double budget_seconds;  // 0 means no stated budget
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "ground-truth hypotheses", 10.0, truth_rows},
      {2, "random-baseline anchors", 5.0, random_anchors},
      {3, "construction constraints", 0, construction_constraints},
      {4, "outline contract", 0, outline_contract},
      {5, "topic-selection property", 0, topic_selection},
      {6, "retrieval invariants", 0, retrieval_invariants},
      {7, "separable-corpus scorer", 0, separable_scorer},
      {8, "metric oracles", 0, metric_oracles},
      {9, "faithfulness data", 0, faithfulness},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && secs >= c.budget_seconds) {
      out.pass = false;
      out.detail += " (over " + fmt(c.budget_seconds, 0) + " s budget)";
    }
    if (!out.pass) ++failures;
    std::printf("%s %d %s: %s [%.2f s]\n", out.pass ? "PASS" : "FAIL", c.number, c.name, out.detail.c_str(), secs);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
