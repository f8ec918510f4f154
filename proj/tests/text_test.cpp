#include "attrex/text.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

using namespace attrex;

TEST(Tokenize, LowercasesAndSplitsPunctuation) {
  TokenSeq got = tokenize("I prefer basketball; team sports are fun");
  TokenSeq want = {"i", "prefer", "basketball", ";", "team", "sports", "are", "fun"};
  EXPECT_EQ(got, want);
}

TEST(Tokenize, PunctuationBecomesSingleTokens) {
  TokenSeq got = tokenize("Hello, how are you doing today?");
  TokenSeq want = {"hello", ",", "how", "are", "you", "doing", "today", "?"};
  EXPECT_EQ(got, want);
}

TEST(Tokenize, EmptyAndWhitespaceOnly) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("   \t\n").empty());
}

TEST(Tokenize, SemicolonWithoutSpaces) {
  TokenSeq want = {"a", ";", "b"};
  EXPECT_EQ(tokenize("A;b"), want);
}

TEST(Vocabulary, ReservedIdsAreFixed) {
  Vocabulary v;
  EXPECT_EQ(v.size(), kNumReserved);
  EXPECT_EQ(v.id("<pad>"), kPad);
  EXPECT_EQ(v.id("<unk>"), kUnk);
  EXPECT_EQ(v.id("<sos>"), kSos);
  EXPECT_EQ(v.id("<eos>"), kEos);
  EXPECT_EQ(v.id(";"), kSep);
}

TEST(Vocabulary, MinFrequencyFilter) {
  std::vector<TokenSeq> corpus = {{"a", "b"}, {"a"}};
  Vocabulary v = Vocabulary::build(corpus, 2);
  EXPECT_EQ(v.size(), kNumReserved + 1);
  EXPECT_EQ(v.id("a"), kNumReserved);
  EXPECT_EQ(v.id("b"), kUnk);
}

TEST(Vocabulary, FrequencyThenLexicographicOrder) {
  std::vector<TokenSeq> corpus = {{"zeta", "beta", "beta", "alpha"}};
  Vocabulary v = Vocabulary::build(corpus);
  EXPECT_EQ(v.id("beta"), 5);   // most frequent first
  EXPECT_EQ(v.id("alpha"), 6);  // tie broken lexicographically
  EXPECT_EQ(v.id("zeta"), 7);
}

TEST(Vocabulary, BuildIsDeterministic) {
  std::vector<TokenSeq> corpus = {{"x", "y", "z"}, {"y", "z"}, {"z"}};
  Vocabulary a = Vocabulary::build(corpus);
  Vocabulary b = Vocabulary::build(corpus);
  ASSERT_EQ(a.size(), b.size());
  for (int i = 0; i < a.size(); ++i) EXPECT_EQ(a.token(i), b.token(i));
}

TEST(Vocabulary, EncodeMapsUnknownToUnk) {
  Vocabulary v = Vocabulary::build({{"cats"}});
  IdSeq got = v.encode({"cats", "dogs"});
  IdSeq want = {kNumReserved, kUnk};
  EXPECT_EQ(got, want);
}

TEST(Vocabulary, DecodeOutOfRangeThrows) {
  Vocabulary v;
  EXPECT_THROW(v.decode({v.size()}), std::out_of_range);
  EXPECT_THROW(v.decode({-1}), std::out_of_range);
}

TEST(Vocabulary, RandomRoundTrip) {
  Rng rng(42);
  std::vector<TokenSeq> corpus;
  TokenSeq lexicon;
  for (int i = 0; i < 50; ++i) lexicon.push_back("w" + std::to_string(i));
  corpus.push_back(lexicon);
  Vocabulary v = Vocabulary::build(corpus);
  for (int trial = 0; trial < 1000; ++trial) {
    TokenSeq seq;
    int len = 1 + static_cast<int>(uniform_index(rng, 12));
    for (int t = 0; t < len; ++t)
      seq.push_back(lexicon[uniform_index(rng, lexicon.size())]);
    EXPECT_EQ(v.decode(v.encode(seq)), seq);
  }
}

TEST(WordDropout, RateZeroIsIdentity) {
  Rng rng(1);
  IdSeq ids = {kPad, kUnk, 5, 6, 7, kEos};
  EXPECT_EQ(word_dropout(ids, 0.0, rng), ids);
}

TEST(WordDropout, RateOneMasksAllNonReserved) {
  Rng rng(1);
  IdSeq ids = {kPad, 5, 6, kSep, 7};
  IdSeq want = {kPad, kUnk, kUnk, kSep, kUnk};
  EXPECT_EQ(word_dropout(ids, 1.0, rng), want);
}

TEST(WordDropout, EmpiricalRateMatches) {
  Rng rng(7);
  IdSeq ids(10000, kNumReserved);
  IdSeq out = word_dropout(ids, 0.1, rng);
  int dropped = 0;
  for (int id : out) dropped += (id == kUnk);
  double rate = dropped / 10000.0;
  EXPECT_GE(rate, 0.08);
  EXPECT_LE(rate, 0.12);
}

TEST(WordDropout, DeterministicGivenSeed) {
  IdSeq ids(100, 9);
  Rng a(3), b(3);
  EXPECT_EQ(word_dropout(ids, 0.5, a), word_dropout(ids, 0.5, b));
}

namespace {
Vocabulary small_vocab() {
  return Vocabulary::build({{"cats", "dogs", "like", "i"}});
}
}  // namespace

TEST(EmbeddingTable, ShapeAndPadRow) {
  Vocabulary v = small_vocab();
  Rng rng(11);
  EmbeddingTable e = EmbeddingTable::init(v, 8, 4, rng);
  EXPECT_EQ(e.matrix.rows(), v.size());
  EXPECT_EQ(e.matrix.cols(), 12);
  EXPECT_EQ(e.matrix.row(kPad).cwiseAbs().sum(), 0.0);
  EXPECT_GT(e.matrix.row(kNumReserved).cwiseAbs().sum(), 0.0);
}

TEST(EmbeddingTable, DeterministicInit) {
  Vocabulary v = small_vocab();
  Rng a(5), b(5);
  EmbeddingTable ea = EmbeddingTable::init(v, 8, 4, a);
  EmbeddingTable eb = EmbeddingTable::init(v, 8, 4, b);
  EXPECT_TRUE(ea.matrix == eb.matrix);
}

TEST(EmbeddingTable, PretrainedVectorsAreUsed) {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "attrex_emb_test.txt";
  {
    std::ofstream out(path);
    out << "cats 1 2 3 4\n";
    out << "unlisted 9 9 9 9\n";
  }
  auto table = load_pretrained_embeddings(path.string(), 4);
  EXPECT_EQ(table.size(), 2u);

  Vocabulary v = small_vocab();
  Rng rng(11);
  EmbeddingTable e = EmbeddingTable::init(v, 4, 2, rng, &table);
  Eigen::VectorXd want(4);
  want << 1, 2, 3, 4;
  EXPECT_TRUE(e.matrix.block(v.id("cats"), 0, 1, 4).transpose() == want);
  fs::remove(path);
}

TEST(EmbeddingTable, MalformedPretrainedFileReportsLine) {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "attrex_emb_bad.txt";
  {
    std::ofstream out(path);
    out << "ok 1 2\n";
    out << "short 1\n";
  }
  try {
    load_pretrained_embeddings(path.string(), 2);
    FAIL() << "expected DataError";
  } catch (const DataError& err) {
    EXPECT_NE(std::string(err.what()).find(":2"), std::string::npos);
  }
  fs::remove(path);
}
