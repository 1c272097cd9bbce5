#include <gtest/gtest.h>

#include <utility>

#include "fixtures.hpp"
#include "psyling/featx/syntax.hpp"
#include "psyling/featx/text.hpp"

using namespace psyling;
using namespace psyling::featx;
using psyling::testing::sentence;

TEST(Syllables, HandCountedWords) {
  const std::vector<std::pair<std::string, int>> cases = {
      {"cat", 1},       {"the", 1},       {"a", 1},          {"table", 2},     {"people", 2},
      {"make", 1},      {"makes", 1},     {"free", 1},       {"jumped", 1},    {"wanted", 2},
      {"boxes", 2},     {"yellow", 2},    {"happy", 2},      {"because", 2},   {"house", 1},
      {"beautiful", 3}, {"computer", 3},  {"elephant", 3},   {"tomorrow", 3},  {"difficult", 3},
      {"readability", 5}, {"university", 5}, {"apparently", 4}, {"Yesterday", 3}, {"explained", 2},
  };
  for (const auto& [w, n] : cases) EXPECT_EQ(syllable_count(w), n) << w;
}

TEST(Syllables, NoLettersIsZero) {
  EXPECT_EQ(syllable_count("42"), 0);
  EXPECT_EQ(syllable_count("..."), 0);
  EXPECT_EQ(syllable_count(""), 0);
  EXPECT_EQ(syllable_count("x"), 1);
}

TEST(Letters, CountsAlphanumericCodePoints) {
  EXPECT_EQ(letter_count("don't"), 4u);
  EXPECT_EQ(letter_count("COVID-19"), 7u);
  EXPECT_EQ(letter_count("caf\xC3\xA9"), 4u);
  EXPECT_EQ(letter_count(""), 0u);
}

TEST(WordTokens, PunctuationTagsAreDropped) {
  auto s = sentence("Well/UH/well ,/,/, I/PRP/i -LRB-/-LRB-/-lrb- think/VBP/think -RRB-/-RRB-/-rrb- ././.",
                    "(ROOT (S (INTJ (UH Well)) (, ,) (NP (PRP I)) (-LRB- -LRB-) (VP (VBP think)) (-RRB- -RRB-) (. .)))");
  auto w = word_tokens(s);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[0].key, "well");
  EXPECT_EQ(w[1].form, "I");
  EXPECT_EQ(w[1].key, "i");
  EXPECT_EQ(w[2].lemma, "think");
}

TEST(ContentTags, OpenClassPrefixes) {
  for (const char* t : {"NN", "NNS", "NNP", "VB", "VBD", "JJ", "JJR", "RB", "RBS"})
    EXPECT_TRUE(is_content_tag(t)) << t;
  for (const char* t : {"DT", "IN", "PRP", "CC", "TO", "MD", "UH"}) EXPECT_FALSE(is_content_tag(t)) << t;
}

namespace {

SyntaxCounts counts_of(const std::string& tree) { return syntax_counts(ParseTree::parse(tree)); }

void expect_counts(const SyntaxCounts& got, const SyntaxCounts& want) {
  EXPECT_EQ(got.clauses, want.clauses);
  EXPECT_EQ(got.t_units, want.t_units);
  EXPECT_EQ(got.dependent_clauses, want.dependent_clauses);
  EXPECT_EQ(got.complex_t_units, want.complex_t_units);
  EXPECT_EQ(got.coordinate_phrases, want.coordinate_phrases);
  EXPECT_EQ(got.complex_nominals, want.complex_nominals);
  EXPECT_EQ(got.verb_phrases, want.verb_phrases);
  EXPECT_EQ(got.np_count, want.np_count);
  EXPECT_EQ(got.np_premod_words, want.np_premod_words);
  EXPECT_EQ(got.np_postmod_words, want.np_postmod_words);
}

}  // namespace

TEST(Syntax, SimpleClause) {
  expect_counts(counts_of("(ROOT (S (NP (DT The) (NN cat)) (VP (VBD sat) (PP (IN on) (NP (DT the) (NN mat)))) (. .)))"),
                {1, 1, 0, 0, 0, 0, 1, 2, 2, 0});
}

TEST(Syntax, CoordinatedSentenceWithRelativeAndComplementClauses) {
  const char* tree =
      "(ROOT (S (S (NP (PRP I)) (VP (VBP think) (SBAR (IN that) (S (NP (NP (DT the) (JJ old) (NN man)) "
      "(SBAR (WHNP (WP who)) (S (VP (VBZ lives) (ADVP (RB here)))))) (VP (VBZ is) (ADJP (JJ happy)))))))"
      " (CC and) (S (NP (PRP you)) (VP (VBP know) (NP (PRP it)))) (. .)))";
  // clauses: think / is happy / lives here / know it; T-units: outer S and the S after CC.
  expect_counts(counts_of(tree), {4, 2, 2, 1, 0, 2, 4, 5, 2, 3});
}

TEST(Syntax, CoordinatePhrases) {
  expect_counts(counts_of("(ROOT (S (NP (NNP Tom) (CC and) (NNP Jerry)) (VP (VP (VBD ran)) (CC and) "
                          "(VP (VBD jumped))) (. .)))"),
                {1, 1, 0, 0, 2, 0, 1, 1, 2, 0});
}

TEST(Syntax, ImperativeCountsAsClause) {
  expect_counts(counts_of("(ROOT (S (VP (VB Go) (ADVP (RB home))) (. .)))"), {1, 1, 0, 0, 0, 0, 1, 0, 0, 0});
}

TEST(Syntax, FragmentIsOneClauseAndOneTUnit) {
  expect_counts(counts_of("(ROOT (FRAG (NP (DT No) (NN way)) (. !)))"), {1, 1, 0, 0, 0, 0, 0, 1, 1, 0});
}

TEST(Syntax, ModalAndGerundSubject) {
  // "Swimming daily can help ." : gerund S subject followed by its VP sister.
  auto c = counts_of("(ROOT (S (S (VP (VBG Swimming) (ADVP (RB daily)))) (VP (MD can) (VP (VB help))) (. .)))");
  EXPECT_EQ(c.clauses, 1);
  EXPECT_EQ(c.t_units, 1);
  EXPECT_EQ(c.complex_nominals, 1);
  EXPECT_EQ(c.verb_phrases, 2);
}
