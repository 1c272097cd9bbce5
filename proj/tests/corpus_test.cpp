#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "fixtures.hpp"
#include "psyling/corpus/folds.hpp"

namespace psyling {
namespace {

using testing::balanced_posts;
using testing::cat_sat;

const std::string kHeader = R"({"schema_version":1,"tagset":"PTB"})";

std::string record(const std::string& id, const std::string& label, const std::string& sentences) {
  return R"({"post_id":")" + id + R"(","user_id":"u1","source":"Dreaddit","label":")" + label +
         R"(","sentences":)" + sentences + "}";
}

const std::string kTwoSentences =
    R"J([{"tokens":[["I","PRP","I"],["am","VBP","be"],["tired","JJ","tired"],[".",".","."]],)J"
    R"J("parse":"(ROOT (S (NP (PRP I)) (VP (VBP am) (ADJP (JJ tired))) (. .)))"},)J"
    R"J({"tokens":[["Work","NN","work"],["is","VBZ","be"],["hard","JJ","hard"]],)J"
    R"J("parse":"(ROOT (S (NP (NN Work)) (VP (VBZ is) (ADJP (JJ hard)))))"}])J";

TEST(ParseTree, ParsesAndPrintsCanonically) {
  auto t = ParseTree::parse("(ROOT\n (S (NP (DT The)  (NN cat)) (VP (VBD sat))))");
  EXPECT_EQ(t.to_string(), "(ROOT (S (NP (DT The) (NN cat)) (VP (VBD sat))))");
  EXPECT_EQ(t.leaf_words(), (std::vector<std::string>{"The", "cat", "sat"}));
  EXPECT_EQ(ParseTree::parse(t.to_string()), t);
}

TEST(ParseTree, RejectsMalformed) {
  EXPECT_THROW(ParseTree::parse(""), std::invalid_argument);
  EXPECT_THROW(ParseTree::parse("(ROOT (S (NN a))"), std::invalid_argument);
  EXPECT_THROW(ParseTree::parse("(ROOT (S))"), std::invalid_argument);
  EXPECT_THROW(ParseTree::parse("(ROOT (NN a)))"), std::invalid_argument);
}

TEST(Ingest, EmptyInputGivesEmptyCorpus) {
  std::istringstream in("");
  EXPECT_TRUE(read_corpus(in).empty());
}

TEST(Ingest, SinglePostTwoSentences) {
  std::istringstream in(kHeader + "\n" + record("p1", "Stress", kTwoSentences) + "\n");
  auto posts = read_corpus(in);
  ASSERT_EQ(posts.size(), 1u);
  EXPECT_EQ(posts[0].label, MhcLabel::Stress);
  EXPECT_EQ(posts[0].source, Source::Dreaddit);
  ASSERT_EQ(posts[0].sentences.size(), 2u);
  EXPECT_EQ(posts[0].sentences[1].tokens[0].lemma, "work");
}

TEST(Ingest, DeletedTokenIsParseLeafMismatch) {
  std::string broken = kTwoSentences;
  broken.replace(broken.find(R"(["tired","JJ","tired"],)"), std::string(R"(["tired","JJ","tired"],)").size(), "");
  std::istringstream in(kHeader + "\n" + record("p1", "Stress", broken) + "\n");
  EXPECT_THROW(read_corpus(in), ParseLeafMismatch);
}

TEST(Ingest, UnknownLabelRejected) {
  std::istringstream in(kHeader + "\n" + record("p1", "Schizophrenia", kTwoSentences) + "\n");
  EXPECT_THROW(read_corpus(in), UnknownLabel);
}

TEST(Ingest, MalformedRecordCarriesLineNumber) {
  std::istringstream in(kHeader + "\n" + record("p1", "Stress", kTwoSentences) + "\n{not json\n");
  try {
    read_corpus(in);
    FAIL() << "expected MalformedRecord";
  } catch (const MalformedRecord& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Ingest, SchemaViolations) {
  auto fails = [](const std::string& text) {
    std::istringstream in(text);
    EXPECT_THROW(read_corpus(in), MalformedRecord) << text;
  };
  fails(record("p1", "Stress", kTwoSentences) + "\n");  // no header
  fails(R"({"schema_version":2,"tagset":"PTB"})" "\n");
  fails(kHeader + "\n" + record("p1", "Stress", "[]") + "\n");
  fails(kHeader + "\n" + record("p1", "Stress", kTwoSentences) + "\n" + record("p1", "ADHD", kTwoSentences));
  std::string bad_tag = kTwoSentences;
  bad_tag.replace(bad_tag.find("\"VBP\""), 5, "\"VERB\"");
  fails(kHeader + "\n" + record("p1", "Stress", bad_tag) + "\n");
}

TEST(Ingest, RoundTripProperty) {
  std::mt19937 gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<AnnotatedPost> posts;
    std::size_t n = gen() % 6;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<AnnotatedSentence> sents(1 + gen() % 3, cat_sat());
      for (auto& s : sents) s.tokens[1].form = "cat" + std::to_string(gen() % 100);
      for (auto& s : sents) s.parse = ParseTree::parse(
          "(ROOT (S (NP (DT The) (NN " + s.tokens[1].form + ")) (VP (VBD sat) (PP (IN on) (NP (DT the) (NN mat)))) (. .)))");
      auto p = testing::post("p" + std::to_string(i), kAllLabels[gen() % kNumLabels], sents);
      p.source = static_cast<Source>(gen() % 3);
      posts.push_back(p);
    }
    std::stringstream buf;
    write_corpus(buf, posts);
    EXPECT_EQ(read_corpus(buf), posts);
  }
}

TEST(Folds, PerfectlyDivisible) {
  auto posts = balanced_posts(5, {kAllLabels.begin(), kAllLabels.end()});
  auto fa = assign_folds(posts, 5, 42);
  for (int k = 0; k < 5; ++k) {
    std::map<MhcLabel, int> per_class;
    for (std::size_t i : fa.members(k)) per_class[posts[i].label]++;
    EXPECT_EQ(per_class.size(), kNumLabels);
    for (auto [l, c] : per_class) EXPECT_EQ(c, 1) << label_name(l) << " fold " << k;
  }
}

TEST(Folds, DeterministicGivenSeed) {
  auto posts = balanced_posts(9, {kAllLabels.begin(), kAllLabels.end()});
  EXPECT_EQ(assign_folds(posts, 5, 3), assign_folds(posts, 5, 3));
  EXPECT_NE(assign_folds(posts, 5, 3).fold, assign_folds(posts, 5, 4).fold);
}

TEST(Folds, UnevenClassesStayWithinOne) {
  auto posts = balanced_posts(23, {kAllLabels.begin(), kAllLabels.end()});
  auto fa = assign_folds(posts, 5, 11);
  for (int k = 0; k < 5; ++k) {
    std::map<MhcLabel, int> per_class;
    for (std::size_t i : fa.members(k)) per_class[posts[i].label]++;
    for (auto [l, c] : per_class) {
      EXPECT_GE(c, 4);
      EXPECT_LE(c, 5);
    }
  }
}

TEST(Folds, PartitionAndStratificationProperty) {
  std::mt19937 gen(99);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<AnnotatedPost> posts;
    int n_folds = 2 + static_cast<int>(gen() % 5);
    std::map<MhcLabel, int> totals;
    for (MhcLabel l : kAllLabels) {
      int n = n_folds + static_cast<int>(gen() % 30);
      totals[l] = n;
      for (int i = 0; i < n; ++i)
        posts.push_back(testing::post(std::string(label_name(l)) + std::to_string(i), l, {cat_sat()}));
    }
    std::uint64_t seed = gen();
    auto fa = assign_folds(posts, n_folds, seed);
    std::size_t covered = 0;
    for (int k = 0; k < n_folds; ++k) {
      auto m = fa.members(k);
      covered += m.size();
      std::map<MhcLabel, int> per_class;
      for (std::size_t i : m) per_class[posts[i].label]++;
      for (auto [l, total] : totals) {
        double expected = static_cast<double>(total) / n_folds;
        EXPECT_LE(std::abs(per_class[l] - expected), 2.0);
      }
    }
    EXPECT_EQ(covered, posts.size());
    for (int f : fa.fold) EXPECT_TRUE(f >= 0 && f < n_folds);
  }
}

TEST(Folds, ClassTooSmall) {
  auto posts = balanced_posts(5, {MhcLabel::ADHD, MhcLabel::Stress});
  posts.pop_back();
  EXPECT_THROW(assign_folds(posts, 5, 1), ClassTooSmall);
}

TEST(Exclude, IdentityFilterAndAnnihilation) {
  auto posts = balanced_posts(10, {kAllLabels.begin(), kAllLabels.end()});
  EXPECT_EQ(exclude_classes(posts, {}), posts);

  auto no_ptsd = exclude_classes(posts, {MhcLabel::PTSD});
  EXPECT_EQ(no_ptsd.size(), 60u);
  std::size_t j = 0;
  for (const auto& p : posts) {
    if (p.label == MhcLabel::PTSD) continue;
    EXPECT_EQ(no_ptsd[j++].post_id, p.post_id);
  }

  std::set<MhcLabel> all(kAllLabels.begin(), kAllLabels.end());
  EXPECT_TRUE(exclude_classes(posts, all).empty());
}

TEST(Labels, CodesAndClassSets) {
  EXPECT_EQ(label_code(MhcLabel::ADHD), 0);
  EXPECT_EQ(label_code(MhcLabel::Control), 6);
  auto cs = ClassSet::excluding({MhcLabel::PTSD});
  EXPECT_EQ(cs.size(), 6u);
  EXPECT_FALSE(cs.contains(MhcLabel::PTSD));
  EXPECT_EQ(*cs.index_of(MhcLabel::Stress), 4u);
  EXPECT_EQ(ClassSet::from_names(cs.names()), cs);
}

}  // namespace
}  // namespace psyling
