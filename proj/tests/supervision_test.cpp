#include "attrex/supervision.hpp"

#include <gtest/gtest.h>

namespace attrex {
namespace {

TEST(LexicalScorer, IdenticalSentencesScoreOne) {
  EXPECT_DOUBLE_EQ(lexical_scorer("i like cats", "i like cats"), 1.0);
}

TEST(LexicalScorer, HypothesisCoveredByLongerPremise) {
  EXPECT_DOUBLE_EQ(lexical_scorer("i like cats a lot", "i like cats"), 1.0);
}

TEST(LexicalScorer, DisjointContentWordsScoreZero) {
  EXPECT_DOUBLE_EQ(lexical_scorer("i like cats", "you drive trucks"), 0.0);
}

TEST(LexicalScorer, PartialOverlapIsHypothesisFraction) {
  EXPECT_DOUBLE_EQ(lexical_scorer("i like cats", "i like cats and dogs a lot"), 0.5);
}

TEST(LexicalScorer, StopwordOnlyHypothesisScoresZero) {
  EXPECT_DOUBLE_EQ(lexical_scorer("i like cats", "i am so very"), 0.0);
}

TEST(SubstringScorer, FindsTokenContiguousMatch) {
  EXPECT_DOUBLE_EQ(substring_scorer("you know , i like eating sushi these days .",
                                    "i like eating sushi"),
                   1.0);
}

TEST(SubstringScorer, IgnoresCaseAndPunctuation) {
  EXPECT_DOUBLE_EQ(substring_scorer("Wow, I LIKE Cats!", "like cats"), 1.0);
}

TEST(SubstringScorer, GapBreaksContainment) {
  EXPECT_DOUBLE_EQ(substring_scorer("i really like small cats", "like cats"), 0.0);
}

TEST(SubstringScorer, EmptyHypothesisScoresZero) {
  EXPECT_DOUBLE_EQ(substring_scorer("i like cats", ""), 0.0);
}

TEST(FileScorerTest, ReturnsStoredScore) {
  FileScorer s;
  s.insert("u1", "p1", 0.93);
  EXPECT_DOUBLE_EQ(s("u1", "p1"), 0.93);
  EXPECT_EQ(s.misses(), 0);
}

TEST(FileScorerTest, MissingPairScoresZeroAndCounts) {
  FileScorer s;
  s.insert("u1", "p1", 0.93);
  EXPECT_DOUBLE_EQ(s("u1", "p2"), 0.0);
  EXPECT_DOUBLE_EQ(s("u2", "p1"), 0.0);
  EXPECT_EQ(s.misses(), 2);
}

TEST(FileScorerTest, RejectsScoreOutsideUnitInterval) {
  FileScorer s;
  EXPECT_THROW(s.insert("u", "p", 1.5), DataError);
  EXPECT_THROW(s.insert("u", "p", -0.1), DataError);
}

std::vector<PersonaRecord> fixture_personas() {
  return {
      {"alice", "i like playing basketball", {"i", "like_sports", "basketball"}},
      {"alice", "i have a pet dog", {"i", "have_pet", "dog"}},
      {"bob", "i live in boston", {"i", "live_in", "boston"}},
  };
}

std::vector<DialogueRecord> fixture_dialogues() {
  return {
      {"d0",
       "alice",
       {{Role::user, "i prefer basketball ; team sports are fun"},
        {Role::system, "nice , tell me more"},
        {Role::user, "what a lovely day"}}},
      {"d1", "bob", {{Role::user, "i live in boston right now"}}},
  };
}

TEST(BuildLabels, AttachesTripletWhenScorePassesThreshold) {
  BuildReport report;
  auto corpus =
      build_labels(fixture_dialogues(), fixture_personas(), lexical_scorer, 0.3, &report);
  ASSERT_EQ(corpus.size(), 3u);
  EXPECT_EQ(corpus[0].utterance, "i prefer basketball ; team sports are fun");
  ASSERT_EQ(corpus[0].triplets.size(), 1u);
  EXPECT_EQ(corpus[0].triplets[0].predicate, "like_sports");
  EXPECT_EQ(corpus[0].triplets[0].object, "basketball");
  EXPECT_TRUE(corpus[1].triplets.empty());
  ASSERT_EQ(corpus[2].triplets.size(), 1u);
  EXPECT_EQ(corpus[2].triplets[0].predicate, "live_in");
  EXPECT_EQ(report.user_turns, 3);
  EXPECT_EQ(report.labeled_turns, 2);
  EXPECT_EQ(report.unlabeled_turns, 1);
  EXPECT_EQ(report.total_triplets, 2);
  EXPECT_EQ(report.triplets_per_predicate.at("like_sports"), 1);
}

TEST(BuildLabels, ZeroScorerLeavesEverythingUnlabeled) {
  BuildReport report;
  auto corpus = build_labels(fixture_dialogues(), fixture_personas(),
                             [](const std::string&, const std::string&) { return 0.0; }, 0.5,
                             &report);
  ASSERT_EQ(corpus.size(), 3u);
  for (const auto& lu : corpus) EXPECT_TRUE(lu.triplets.empty());
  EXPECT_EQ(report.labeled_turns, 0);
  EXPECT_EQ(report.unlabeled_turns, 3);
}

TEST(BuildLabels, ConstantScorerAttachesAllPersonaTriplets) {
  auto corpus = build_labels(fixture_dialogues(), fixture_personas(),
                             [](const std::string&, const std::string&) { return 1.0; }, 0.9);
  ASSERT_EQ(corpus.size(), 3u);
  EXPECT_EQ(corpus[0].triplets.size(), 2u);  // both alice triplets
  EXPECT_EQ(corpus[2].triplets.size(), 1u);
}

TEST(BuildLabels, DuplicateTripletsCollapse) {
  std::vector<PersonaRecord> personas = {
      {"alice", "i like playing basketball", {"i", "like_sports", "basketball"}},
      {"alice", "basketball is my favorite sport", {"i", "like_sports", "basketball"}},
  };
  auto corpus = build_labels(fixture_dialogues(), personas,
                             [](const std::string&, const std::string&) { return 1.0; }, 0.5);
  ASSERT_EQ(corpus.size(), 2u);  // bob's dialogue is skipped (no persona)
  EXPECT_EQ(corpus[0].triplets.size(), 1u);
}

TEST(BuildLabels, UnknownPersonaSkipsDialogueWithWarning) {
  std::vector<DialogueRecord> dialogues = fixture_dialogues();
  dialogues.push_back({"d2", "ghost", {{Role::user, "i have a pet dog"}}});
  BuildReport report;
  auto corpus = build_labels(dialogues, fixture_personas(), lexical_scorer, 0.3, &report);
  EXPECT_EQ(corpus.size(), 3u);
  EXPECT_EQ(report.skipped_dialogues, 1);
  ASSERT_EQ(report.warnings.size(), 1u);
  EXPECT_NE(report.warnings[0].find("ghost"), std::string::npos);
}

TEST(BuildLabels, SystemTurnsAreNeverLabeled) {
  auto corpus = build_labels(fixture_dialogues(), fixture_personas(),
                             [](const std::string&, const std::string&) { return 1.0; }, 0.5);
  ASSERT_EQ(corpus.size(), 3u);
  for (const auto& lu : corpus) EXPECT_NE(lu.utterance, "nice , tell me more");
}

TEST(BuildLabels, RaisingThresholdNeverAddsLabels) {
  auto hash_scorer = [](const std::string& u, const std::string& p) {
    std::size_t h = std::hash<std::string>{}(u + "|" + p);
    return static_cast<double>(h % 1000) / 999.0;
  };
  long prev = std::numeric_limits<long>::max();
  for (double threshold : {0.1, 0.5, 0.9}) {
    BuildReport report;
    build_labels(fixture_dialogues(), fixture_personas(), hash_scorer, threshold, &report);
    EXPECT_LE(report.total_triplets, prev);
    prev = report.total_triplets;
  }
}

TEST(BuildLabels, RejectsDegenerateThreshold) {
  EXPECT_THROW(build_labels({}, {}, lexical_scorer, 0.0), UsageError);
  EXPECT_THROW(build_labels({}, {}, lexical_scorer, 1.0), UsageError);
}

TEST(PredicateDerivation, SortedDistinctNamesFromPersonas) {
  auto preds = predicates_from_personas(fixture_personas());
  ASSERT_EQ(preds.size(), 3);
  EXPECT_EQ(preds.name(0), "have_pet");
  EXPECT_EQ(preds.name(1), "like_sports");
  EXPECT_EQ(preds.name(2), "live_in");
}

TEST(PredicateDerivation, FromCorpusMatchesLabels) {
  auto corpus = build_labels(fixture_dialogues(), fixture_personas(),
                             [](const std::string&, const std::string&) { return 1.0; }, 0.5);
  auto preds = predicates_from_corpus(corpus);
  EXPECT_EQ(preds.size(), 3);
  EXPECT_EQ(preds.id("like_sports"), 1);
}

}  // namespace
}  // namespace attrex
