#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "attrex/checkpoint.hpp"
#include "attrex/io.hpp"
#include "attrex/supervision.hpp"

namespace attrex {
namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string temp_path(const std::string& name) { return ::testing::TempDir() + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunResult run_cli(const std::vector<std::string>& args, const std::string& tag) {
  const std::string out_path = temp_path(tag + ".out");
  const std::string err_path = temp_path(tag + ".err");
  std::string cmd = ATTREX_CLI_PATH;
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " >" + out_path + " 2>" + err_path;
  int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

std::vector<std::string> non_meta_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line.rfind("{\"_meta\"", 0) != 0) lines.push_back(line);
  return lines;
}

std::string fixture(const std::string& name) {
  return std::string(ATTREX_TEST_DATA) + "/" + name;
}

struct SmokeCorpus {
  std::string dialogues, personas, gold, corpus;
};

SmokeCorpus make_corpus(const std::string& tag, int dialogues = 20) {
  SmokeCorpus c{temp_path(tag + "_d.jsonl"), temp_path(tag + "_p.jsonl"),
                temp_path(tag + "_gold.jsonl"), temp_path(tag + "_corpus.jsonl")};
  RunResult synth = run_cli({"synth", "--seed", "5", "--dialogues", std::to_string(dialogues),
                             "--out-dialogues", c.dialogues, "--out-personas", c.personas,
                             "--out-gold", c.gold},
                            tag + "_synth");
  EXPECT_EQ(synth.code, 0) << synth.err;
  RunResult build = run_cli({"build-data", "--dialogues", c.dialogues, "--personas", c.personas,
                             "--scorer", "substring", "--threshold", "0.5", "--out", c.corpus},
                            tag + "_build");
  EXPECT_EQ(build.code, 0) << build.err;
  return c;
}

std::vector<std::string> tiny_train_args(const SmokeCorpus& c, const std::string& ckpt,
                                         const std::string& log, const std::string& epochs) {
  return {"train", "--data", c.corpus, "--out", ckpt, "--log", log, "--epochs", epochs,
          "--d-hdd", "8", "--word-dim", "8", "--char-dim", "4", "--hops", "2",
          "--dropout", "0.1", "--word-dropout", "0.2", "--seed", "11"};
}

TEST(CliSynth, SameSeedRunsAreByteIdentical) {
  const std::string d1 = temp_path("syn1_d.jsonl"), p1 = temp_path("syn1_p.jsonl");
  const std::string d2 = temp_path("syn2_d.jsonl"), p2 = temp_path("syn2_p.jsonl");
  const std::string d3 = temp_path("syn3_d.jsonl"), p3 = temp_path("syn3_p.jsonl");
  auto args = [](const std::string& seed, const std::string& d, const std::string& p) {
    return std::vector<std::string>{"synth", "--seed", seed, "--dialogues", "12",
                                    "--out-dialogues", d, "--out-personas", p};
  };
  EXPECT_EQ(run_cli(args("5", d1, p1), "syn1").code, 0);
  EXPECT_EQ(run_cli(args("5", d2, p2), "syn2").code, 0);
  EXPECT_EQ(run_cli(args("6", d3, p3), "syn3").code, 0);
  EXPECT_EQ(slurp(d1), slurp(d2));
  EXPECT_EQ(slurp(p1), slurp(p2));
  EXPECT_NE(slurp(d1), slurp(d3));
}

TEST(CliBuildData, MatchesCommittedFixture) {
  const std::string out = temp_path("fixture_corpus.jsonl");
  RunResult r = run_cli({"build-data", "--dialogues", fixture("cli_dialogues.jsonl"),
                         "--personas", fixture("cli_personas.jsonl"), "--scorer", "substring",
                         "--threshold", "0.5", "--out", out},
                        "fixture_build");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(non_meta_lines(out), non_meta_lines(fixture("cli_expected_corpus.jsonl")));
}

TEST(CliBuildData, SubstringScorerReproducesSynthGold) {
  SmokeCorpus c = make_corpus("repro", 30);
  EXPECT_EQ(non_meta_lines(c.corpus), non_meta_lines(c.gold));
}

TEST(CliBuildData, EmptyDialogueFileYieldsEmptyCorpus) {
  const std::string empty = temp_path("empty_dialogues.jsonl");
  std::ofstream(empty).close();
  const std::string out = temp_path("empty_corpus.jsonl");
  RunResult r = run_cli({"build-data", "--dialogues", empty, "--personas",
                         fixture("cli_personas.jsonl"), "--out", out},
                        "empty_build");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_TRUE(non_meta_lines(out).empty());
}

TEST(CliTrain, EpochZeroCheckpointIsPureInitialization) {
  SmokeCorpus c = make_corpus("zero");
  const std::string ckpt = temp_path("zero.ckpt");
  RunResult r = run_cli(tiny_train_args(c, ckpt, temp_path("zero.log"), "0"), "zero_train");
  ASSERT_EQ(r.code, 0) << r.err;

  auto corpus = read_labeled_corpus(c.corpus);
  PredicateVocabulary preds = predicates_from_corpus(corpus);
  std::vector<TokenSeq> docs;
  for (const auto& lu : corpus) {
    docs.push_back(tokenize(lu.utterance));
    for (const auto& t : lu.triplets) {
      docs.push_back(tokenize(t.subject));
      docs.push_back(tokenize(t.object));
    }
  }
  Vocabulary vocab = Vocabulary::build(docs, 1);
  ModelConfig cfg;
  cfg.d_hdd = 8;
  cfg.hops = 2;
  cfg.word_dim = 8;
  cfg.char_dim = 4;
  cfg.n_predicates = preds.size();
  Rng rng(11);
  EmbeddingTable emb = EmbeddingTable::init(vocab, cfg.word_dim, cfg.char_dim, rng);
  ModelParams expected = ModelParams::init(cfg, emb, rng);

  LoadedModel lm = load_model(ckpt);
  EXPECT_EQ(lm.provenance.at("epochs_done").get<int>(), 0);
  auto ra = tensor_refs(expected), rb = tensor_refs(lm.model.params);
  ASSERT_EQ(ra.size(), rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ASSERT_EQ(ra[i].rows, rb[i].rows);
    ASSERT_EQ(ra[i].cols, rb[i].cols);
    EXPECT_EQ(std::memcmp(ra[i].data, rb[i].data,
                          static_cast<std::size_t>(ra[i].size()) * sizeof(double)),
              0);
  }
}

TEST(CliTrain, SameSeedRunsProduceIdenticalLogsAndCheckpoints) {
  SmokeCorpus c = make_corpus("det");
  const std::string ck1 = temp_path("det1.ckpt"), lg1 = temp_path("det1.log");
  const std::string ck2 = temp_path("det2.ckpt"), lg2 = temp_path("det2.log");
  ASSERT_EQ(run_cli(tiny_train_args(c, ck1, lg1, "3"), "det1").code, 0);
  ASSERT_EQ(run_cli(tiny_train_args(c, ck2, lg2, "3"), "det2").code, 0);
  EXPECT_EQ(slurp(lg1), slurp(lg2));
  EXPECT_EQ(slurp(ck1), slurp(ck2));
}

TEST(CliTrain, ResumedRunMatchesStraightRun) {
  SmokeCorpus c = make_corpus("resume");
  const std::string straight = temp_path("straight.ckpt");
  const std::string split = temp_path("split.ckpt");
  ASSERT_EQ(run_cli(tiny_train_args(c, straight, temp_path("straight.log"), "4"), "straight").code,
            0);
  auto half = tiny_train_args(c, split, temp_path("split1.log"), "4");
  half.push_back("--stop-after");
  half.push_back("2");
  ASSERT_EQ(run_cli(half, "split1").code, 0);
  const std::string log2 = temp_path("split2.log");
  RunResult r = run_cli({"train", "--data", c.corpus, "--resume", split, "--out", split, "--log",
                         log2},
                        "split2");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(straight), slurp(split));
  auto lines = non_meta_lines(log2);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(json::parse(lines.front()).at("epoch").get<int>(), 2);
  EXPECT_EQ(json::parse(lines.back()).at("epoch").get<int>(), 3);
}

TEST(CliTrain, ConfigFileFillsUnsetFlagsOnly) {
  SmokeCorpus c = make_corpus("cfg");
  const std::string cfg_file = temp_path("train.cfg");
  {
    std::ofstream f(cfg_file);
    f << "# hyperparameters\n"
      << "epochs=2\nseed=3\nd-hdd=8\nword-dim=8\nchar-dim=4\nhops=2\n";
  }
  const std::string log = temp_path("cfg.log");
  RunResult r = run_cli({"train", "--data", c.corpus, "--out", temp_path("cfg.ckpt"), "--log",
                         log, "--config", cfg_file, "--seed", "9"},
                        "cfg_train");
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(log);
  std::string meta_line;
  ASSERT_TRUE(std::getline(in, meta_line));
  json meta = json::parse(meta_line).at("_meta");
  EXPECT_EQ(meta.at("train_config").at("seed").get<std::uint64_t>(), 9u);
  EXPECT_EQ(meta.at("train_config").at("max_epochs").get<int>(), 2);
  EXPECT_EQ(meta.at("model_config").at("d_hdd").get<int>(), 8);

  const std::string bad_cfg = temp_path("bad.cfg");
  std::ofstream(bad_cfg) << "bogus=1\n";
  EXPECT_EQ(run_cli({"train", "--data", c.corpus, "--out", temp_path("bad.ckpt"), "--config",
                     bad_cfg},
                    "bad_cfg")
                .code,
            1);
}

TEST(CliExtract, KeepsLineCountOrderAndDeterminism) {
  SmokeCorpus c = make_corpus("ext");
  const std::string ckpt = temp_path("ext.ckpt");
  ASSERT_EQ(run_cli(tiny_train_args(c, ckpt, temp_path("ext.log"), "1"), "ext_train").code, 0);

  const std::string utts = temp_path("utts.txt");
  {
    std::ofstream f(utts);
    f << "i like eating pizza on weekends .\n\ni live in boston .\nhello there .\n";
  }
  const std::string out1 = temp_path("ext1.jsonl"), out2 = temp_path("ext2.jsonl");
  ASSERT_EQ(run_cli({"extract", "--model", ckpt, "--in", utts, "--out", out1}, "ext1").code, 0);
  ASSERT_EQ(run_cli({"extract", "--model", ckpt, "--in", utts, "--out", out2}, "ext2").code, 0);
  EXPECT_EQ(slurp(out1), slurp(out2));

  auto lines = non_meta_lines(out1);
  ASSERT_EQ(lines.size(), 4u);
  const std::vector<std::string> inputs = {"i like eating pizza on weekends .", "",
                                           "i live in boston .", "hello there ."};
  for (std::size_t i = 0; i < lines.size(); ++i) {
    json rec = json::parse(lines[i]);
    EXPECT_EQ(rec.at("utterance").get<std::string>(), inputs[i]);
    EXPECT_TRUE(rec.at("triplets").is_array());
  }
  json empty_rec = json::parse(lines[1]);
  EXPECT_TRUE(empty_rec.at("triplets").empty());
}

TEST(CliExtract, SingleTextFlagEmitsOneRecord) {
  SmokeCorpus c = make_corpus("text");
  const std::string ckpt = temp_path("text.ckpt");
  ASSERT_EQ(run_cli(tiny_train_args(c, ckpt, temp_path("text.log"), "1"), "text_train").code, 0);
  RunResult r = run_cli({"extract", "--model", ckpt, "--text", "hello , how are you"}, "text_run");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream out(r.out);
  std::vector<std::string> lines;
  for (std::string line; std::getline(out, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0].rfind("{\"_meta\"", 0), 0u);
  EXPECT_EQ(json::parse(lines[1]).at("utterance").get<std::string>(), "hello , how are you");

  RunResult both = run_cli({"extract", "--model", ckpt, "--text", "hi", "--in", c.corpus},
                           "text_excl");
  EXPECT_EQ(both.code, 1);
}

TEST(CliEvaluate, GoldAgainstItselfScoresPerfect) {
  SmokeCorpus c = make_corpus("gold");
  const std::string report = temp_path("gold_report.json");
  RunResult r = run_cli({"evaluate", "--data", c.gold, "--predictions", c.gold, "--out", report},
                        "gold_eval");
  ASSERT_EQ(r.code, 0) << r.err;
  json rep = json::parse(slurp(report));
  for (const char* key : {"accuracy", "precision", "recall", "f1", "bleu1"})
    EXPECT_DOUBLE_EQ(rep.at(key).get<double>(), 1.0) << key;
  EXPECT_EQ(rep.at("predicted_triplets"), rep.at("gold_triplets"));
  EXPECT_NE(r.out.find("1.0000"), std::string::npos);
}

TEST(CliEvaluate, PredicateOutsideModelVocabularyIsHardError) {
  SmokeCorpus c = make_corpus("mismatch");
  const std::string ckpt = temp_path("mismatch.ckpt");
  ASSERT_EQ(run_cli(tiny_train_args(c, ckpt, temp_path("mismatch.log"), "0"), "mm_train").code,
            0);
  const std::string alien = temp_path("alien_gold.jsonl");
  std::ofstream(alien) << "{\"triplets\":[{\"object\":\"chess\",\"predicate\":"
                          "\"plays_game\",\"subject\":\"i\"}],\"utterance\":\"i play chess .\"}\n";
  RunResult r = run_cli({"evaluate", "--data", alien, "--model", ckpt}, "mm_eval");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("plays_game"), std::string::npos);
}

TEST(CliExitCodes, UsageDataAndNumericErrorsMapDistinctly) {
  SmokeCorpus c = make_corpus("codes");
  EXPECT_EQ(run_cli({"evaluate", "--data", c.gold}, "usage").code, 1);

  const std::string malformed = temp_path("malformed.jsonl");
  std::ofstream(malformed) << "not json\n";
  EXPECT_EQ(run_cli({"evaluate", "--data", malformed, "--predictions", c.gold}, "data").code, 2);

  const std::string ckpt = temp_path("codes.ckpt");
  ASSERT_EQ(run_cli(tiny_train_args(c, ckpt, temp_path("codes.log"), "1"), "codes_train").code,
            0);
  LoadedModel lm = load_model(ckpt);
  for (auto& ref : tensor_refs(lm.model.params))
    for (long i = 0; i < ref.size(); ++i) ref.data[i] = std::nan("");
  json prov = lm.provenance;
  prov["epochs_done"] = 0;
  const std::string poisoned = temp_path("poisoned.ckpt");
  save_model(lm.model, poisoned, prov, &lm.adam);
  RunResult r = run_cli({"train", "--data", c.corpus, "--resume", poisoned, "--out",
                         temp_path("poisoned_out.ckpt")},
                        "numeric");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("non-finite"), std::string::npos);

  EXPECT_EQ(run_cli({"frobnicate"}, "badcmd").code, 1);
}

}  // namespace
}  // namespace attrex
