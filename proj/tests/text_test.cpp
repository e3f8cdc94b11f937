#include <gtest/gtest.h>

#include "moralbench/error.hpp"
#include "moralbench/rng.hpp"
#include "moralbench/text.hpp"

namespace moralbench::text {
namespace {

using Tokens = std::vector<std::string>;

TEST(TokenizeTest, LatinWordsLowercasedPunctuationDropped) {
  EXPECT_EQ(tokenize("Unity is strength."), (Tokens{"unity", "is", "strength"}));
}

TEST(TokenizeTest, CjkOneTokenPerCharacter) { EXPECT_EQ(tokenize("四头牛", "zh"), (Tokens{"四", "头", "牛"})); }

TEST(TokenizeTest, EmptyText) { EXPECT_TRUE(tokenize("").empty()); }

TEST(TokenizeTest, MixedScriptsAndDigits) {
  EXPECT_EQ(tokenize("Route66 通往 Café's end!"), (Tokens{"route66", "通", "往", "café", "s", "end"}));
}

TEST(TokenizeTest, NonLatinScriptNotLowercased) {
  // Greek keeps its case; only Latin script is folded.
  EXPECT_EQ(tokenize("ΑΒΓ Abc"), (Tokens{"ΑΒΓ", "abc"}));
}

TEST(TokenizeTest, NfcNormalizesDecomposedInput) {
  // "e" + combining acute -> "é"
  EXPECT_EQ(tokenize("cafe\xCC\x81"), (Tokens{"caf\xC3\xA9"}));
}

TEST(TokenizeTest, InvalidUtf8Rejected) { EXPECT_THROW(tokenize("bad \xFF byte"), ValidationError); }

TEST(TokenizeTest, SpansPointIntoNormalizedText) {
  const std::string text = "  Hello, World";
  const auto spans = tokenize_spans(text);
  ASSERT_EQ(spans.size(), 2u);
  const std::string normalized = normalize(text);
  EXPECT_EQ(normalized.substr(spans[0].begin, spans[0].end - spans[0].begin), "Hello");
  EXPECT_EQ(normalized.substr(spans[1].begin, spans[1].end - spans[1].begin), "World");
  EXPECT_FALSE(spans[0].break_before);
  EXPECT_TRUE(spans[1].break_before);
}

TEST(TokenizeTest, IdempotentOnJoinedOutput) {
  // Property: tokenize(join(tokenize(x))) == tokenize(x) for Latin text.
  const std::string alphabet = "abcXYZ019 ,.;!?'-\"";
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    std::string s;
    const std::size_t len = rng.index(40);
    for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng.index(alphabet.size())]);
    const auto once = tokenize(s);
    EXPECT_EQ(tokenize(join_tokens(once)), once) << s;
  }
}

TEST(JoinTokensTest, CjkTokensJoinWithoutSpaces) {
  const Tokens t{"团", "结", "is", "strength"};
  EXPECT_EQ(join_tokens(t), "团结 is strength");
  EXPECT_EQ(tokenize(join_tokens(t)), t);
}

TEST(SplitSentencesTest, TerminalPunctuationFollowedBySpace) {
  EXPECT_EQ(split_sentences("One. Two!  Three? Four"), (Tokens{"One.", "Two!", "Three?", "Four"}));
}

TEST(SplitSentencesTest, QuotesStayWithPrecedingSentence) {
  EXPECT_EQ(split_sentences("He said \"Run!\" Then he ran."), (Tokens{"He said \"Run!\"", "Then he ran."}));
}

TEST(SplitSentencesTest, DecimalsDoNotSplit) {
  EXPECT_EQ(split_sentences("It cost 3.50 coins. Cheap."), (Tokens{"It cost 3.50 coins.", "Cheap."}));
}

TEST(SplitSentencesTest, CjkTerminalsSplitWithoutWhitespace) {
  EXPECT_EQ(split_sentences("四头牛是好朋友。它们一起吃草！"), (Tokens{"四头牛是好朋友。", "它们一起吃草！"}));
}

TEST(SplitSentencesTest, SentencesConcatenateToText) {
  const std::string story = "Alpha beta. Gamma delta!  Epsilon?";
  std::string joined;
  for (const auto& s : split_sentences(story)) joined += (joined.empty() ? "" : " ") + s;
  EXPECT_EQ(tokenize(joined), tokenize(story));
  EXPECT_TRUE(split_sentences("   ").empty());
}

}  // namespace
}  // namespace moralbench::text
