#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "moralbench/error.hpp"
#include "moralbench/metrics.hpp"
#include "moralbench/rng.hpp"
#include "moralbench/text.hpp"
#include "oracles.hpp"

namespace moralbench {
namespace {

Tokens tok(const std::string& s) { return text::tokenize(s); }

GenerationBatch batch(const std::vector<std::pair<std::string, std::string>>& hyp_ref) {
  GenerationBatch b;
  for (std::size_t i = 0; i < hyp_ref.size(); ++i) {
    b.items.push_back({std::to_string(i), tok(hyp_ref[i].first), tok(hyp_ref[i].second), std::nullopt});
  }
  return b;
}

// Phrases in the given order; ground truth is the listed order.
Outline outline_of(const std::vector<std::string>& phrases) {
  Outline o;
  for (const auto& p : phrases) o.phrases.push_back({tok(p), 1.0, std::nullopt});
  o.ground_truth_order.resize(phrases.size());
  std::iota(o.ground_truth_order.begin(), o.ground_truth_order.end(), std::size_t{0});
  return o;
}

TEST(BleuTest, Identity) {
  EXPECT_NEAR(bleu_n(batch({{"the cat sat on the mat", "the cat sat on the mat"}, {"a b", "a b"}}), 2), 100.0,
              1e-9);
}

TEST(BleuTest, DisjointIsNearZero) { EXPECT_LT(bleu_n(batch({{"x y z", "a b c"}}), 1), 1e-6); }

TEST(BleuTest, UnigramPrecision) {
  EXPECT_NEAR(bleu_n(batch({{"the cat sat", "the cat ran"}}), 1), 200.0 / 3.0, 1e-9);
}

TEST(BleuTest, ClippingAndBrevity) {
  // Hypothesis "the the" against "the cat sat": clipped precision 1/2,
  // brevity exp(1 - 3/2).
  EXPECT_NEAR(bleu_n(batch({{"the the", "the cat sat"}}), 1), 100.0 * 0.5 * std::exp(-0.5), 1e-9);
}

TEST(BleuTest, CorpusLevelPooling) {
  // Unigrams 2/3 and 1/1 pool to 3/4; bigrams 1/2 and 0/0 pool to 1/2.
  const double expected = 100.0 * std::sqrt(0.75 * 0.5);
  EXPECT_NEAR(bleu_n(batch({{"the cat sat", "the cat ran"}, {"dog", "dog"}}), 2), expected, 1e-9);
}

TEST(BleuTest, PermutationInvariant) {
  const auto a = batch({{"a b c", "a b d"}, {"x y", "x z y"}, {"p q r s", "p q r s"}});
  auto b = a;
  std::reverse(b.items.begin(), b.items.end());
  EXPECT_DOUBLE_EQ(bleu_n(a, 2), bleu_n(b, 2));
}

TEST(BleuTest, Errors) {
  EXPECT_THROW(bleu_n(GenerationBatch{}, 1), ValidationError);
  GenerationBatch no_ref;
  no_ref.items.push_back({"a", {"x"}, std::nullopt, std::nullopt});
  EXPECT_THROW(bleu_n(no_ref, 1), ValidationError);
}

TEST(DistinctTest, Examples) {
  EXPECT_NEAR(distinct_n({tok("a b a b")}, 2), 200.0 / 3.0, 1e-9);
  EXPECT_DOUBLE_EQ(distinct_n({tok("a b c d")}, 2), 100.0);
  EXPECT_DOUBLE_EQ(distinct_n({tok("a b"), tok("z")}, 2), 100.0);
  EXPECT_THROW(distinct_n({tok("a"), tok("b")}, 2), ValidationError);
}

TEST(DistinctTest, DuplicateTextNeverIncreases) {
  const std::vector<Tokens> texts{tok("a b c a"), tok("c d e")};
  auto doubled = texts;
  doubled.push_back(texts[0]);
  EXPECT_LE(distinct_n(doubled, 2), distinct_n(texts, 2));
}

TEST(RepetitionTest, Examples) {
  EXPECT_DOUBLE_EQ(repetition_n({tok("a b a b"), tok("a b c")}, 2), 50.0);
  EXPECT_DOUBLE_EQ(repetition_n({tok("a b c d")}, 2), 0.0);
  EXPECT_DOUBLE_EQ(repetition_n({tok("a b c d x a b c d")}, 4), 100.0);
  EXPECT_DOUBLE_EQ(repetition_n({tok("a")}, 2), 0.0);
  EXPECT_THROW(repetition_n({}, 2), ValidationError);
}

TEST(CoverageTest, Examples) {
  EXPECT_DOUBLE_EQ(coverage(tok("a perfect opportunity to eat"), outline_of({"perfect opportunity", "eat"})), 100.0);
  EXPECT_DOUBLE_EQ(coverage(tok("only an opportunity"), outline_of({"perfect opportunity"})), 50.0);
  EXPECT_DOUBLE_EQ(coverage(tok("nothing here"), outline_of({"perfect opportunity"})), 0.0);
  EXPECT_THROW(coverage(tok("x"), Outline{}), ValidationError);
}

TEST(OrderTest, Examples) {
  const Outline o = outline_of({"alpha beta", "gamma", "delta epsilon"});
  EXPECT_DOUBLE_EQ(order_score(tok("alpha beta then gamma then delta epsilon"), o).score, 100.0);

  const OrderResult swapped = order_score(tok("gamma then alpha beta then delta epsilon"), o);
  EXPECT_EQ(swapped.pairs, 3u);
  EXPECT_EQ(swapped.inversions, 1u);
  EXPECT_NEAR(swapped.score, 200.0 / 3.0, 1e-9);

  EXPECT_DOUBLE_EQ(order_score(tok("delta epsilon gamma alpha beta"), o).score, 0.0);
}

TEST(OrderTest, UnlocatedPhrasesExcluded) {
  const Outline o = outline_of({"alpha", "gamma", "zeta"});
  const OrderResult r = order_score(tok("gamma alpha"), o);
  EXPECT_EQ(r.located, 2u);
  EXPECT_EQ(r.pairs, 1u);
  EXPECT_DOUBLE_EQ(r.score, 0.0);

  const OrderResult none = order_score(tok("nothing matches"), o);
  EXPECT_TRUE(none.unlocatable);
  EXPECT_DOUBLE_EQ(none.score, 0.0);
}

TEST(OrderTest, PartialMatchLocatesAtBestWindow) {
  // "perfect opportunity" only partially present: the best window starts at
  // "opportunity".
  const Outline o = outline_of({"cows lived", "perfect opportunity"});
  const auto pos = locate_phrases(tok("cows lived until an opportunity came"), o);
  EXPECT_EQ(pos[0], 0u);
  EXPECT_EQ(pos[1], 3u);
}

TEST(OrderTest, Preconditions) {
  EXPECT_THROW(order_score(tok("a"), outline_of({"a"})), ValidationError);
  Outline bad = outline_of({"a", "b"});
  bad.ground_truth_order.pop_back();
  EXPECT_THROW(order_score(tok("a b"), bad), ValidationError);
}

TEST(OrderTest, RelabelingInvariant) {
  Outline o = outline_of({"alpha", "beta", "gamma", "delta"});
  const Tokens story = tok("beta alpha delta gamma");
  const double before = order_score(story, o).score;
  // Swap the storage positions of two phrases but keep the same ground truth.
  std::swap(o.phrases[0], o.phrases[2]);
  o.ground_truth_order = {2, 1, 0, 3};
  EXPECT_DOUBLE_EQ(order_score(story, o).score, before);
}

TEST(AccuracyTest, Cases) {
  const std::map<std::string, std::size_t> gold{{"a", 0}, {"b", 1}, {"c", 2}, {"d", 3}};
  EXPECT_DOUBLE_EQ(accuracy(gold, gold), 100.0);
  EXPECT_DOUBLE_EQ(accuracy({{"a", 0}, {"b", 0}}, gold), 25.0);
  EXPECT_THROW(accuracy({{"zz", 0}}, gold), ValidationError);
  EXPECT_THROW(accuracy({}, {}), ValidationError);
}

TEST(AvgLengthTest, Cases) {
  EXPECT_DOUBLE_EQ(avg_length({tok("a b c"), tok("a b c d e")}), 4.0);
  EXPECT_DOUBLE_EQ(avg_length({tok("a b c d e f g")}), 7.0);
  EXPECT_DOUBLE_EQ(avg_length({Tokens{}, Tokens{}}), 0.0);
  EXPECT_THROW(avg_length({}), ValidationError);
}

TEST(LcsTest, MatchesQuadraticTable) {
  Rng rng(5);
  const Tokens alphabet{"a", "b", "c", "d"};
  for (int trial = 0; trial < 500; ++trial) {
    Tokens x, y;
    for (std::size_t i = rng.index(25); i > 0; --i) x.push_back(alphabet[rng.index(4)]);
    for (std::size_t i = rng.index(25); i > 0; --i) y.push_back(alphabet[rng.index(4)]);
    EXPECT_EQ(lcs_length(x, y), oracle::lcs(x, y));
    EXPECT_EQ(lcs_length(x, y), lcs_length(y, x));
  }
}

Tokens random_text(Rng& rng, std::size_t max_len, std::size_t alphabet) {
  Tokens t;
  for (std::size_t i = rng.index(max_len + 1); i > 0; --i) t.push_back("t" + std::to_string(rng.index(alphabet)));
  return t;
}

TEST(OracleAgreementTest, RandomInstances) {
  Rng rng(31337);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t alphabet = 2 + rng.index(6);
    std::vector<Tokens> texts;
    for (std::size_t i = 1 + rng.index(5); i > 0; --i) texts.push_back(random_text(rng, 30, alphabet));
    const std::size_t n = 1 + rng.index(4);

    const auto d = oracle::distinct(texts, n);
    if (d) {
      EXPECT_DOUBLE_EQ(distinct_n(texts, n), *d);
    } else {
      EXPECT_THROW(distinct_n(texts, n), ValidationError);
    }
    EXPECT_DOUBLE_EQ(repetition_n(texts, n), oracle::repetition(texts, n));

    const Tokens& story = texts[0];
    Outline o;
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

    EXPECT_DOUBLE_EQ(coverage(story, o), oracle::coverage(story, phrases));
    const OrderResult got = order_score(story, o);
    const oracle::OrderOracle want = oracle::order(story, phrases, rank);
    EXPECT_EQ(got.unlocatable, want.unlocatable);
    EXPECT_EQ(got.inversions, want.inversions);
    EXPECT_EQ(got.pairs, want.pairs);
    EXPECT_DOUBLE_EQ(got.score, want.score);
  }
}

}  // namespace
}  // namespace moralbench
