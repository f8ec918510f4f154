#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "attrex/checkpoint.hpp"
#include "attrex/eval.hpp"
#include "attrex/io.hpp"
#include "attrex/synth.hpp"

namespace attrex {
namespace {

json train_config_to_json(const TrainConfig& tc) {
  return {{"batch_size", tc.batch_size}, {"lr_start", tc.lr_start},
          {"lr_end", tc.lr_end},         {"dropout", tc.dropout},
          {"word_dropout", tc.word_dropout}, {"max_epochs", tc.max_epochs},
          {"seed", tc.seed},             {"grad_clip", tc.grad_clip}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig tc;
  tc.batch_size = j.at("batch_size").get<int>();
  tc.lr_start = j.at("lr_start").get<double>();
  tc.lr_end = j.at("lr_end").get<double>();
  tc.dropout = j.at("dropout").get<double>();
  tc.word_dropout = j.at("word_dropout").get<double>();
  tc.max_epochs = j.at("max_epochs").get<int>();
  tc.seed = j.at("seed").get<std::uint64_t>();
  tc.grad_clip = j.at("grad_clip").get<double>();
  return tc;
}

Vocabulary corpus_vocabulary(const std::vector<LabeledUtterance>& corpus, int min_freq) {
  std::vector<TokenSeq> docs;
  for (const auto& lu : corpus) {
    docs.push_back(tokenize(lu.utterance));
    for (const auto& t : lu.triplets) {
      docs.push_back(tokenize(t.subject));
      docs.push_back(tokenize(t.object));
    }
  }
  return Vocabulary::build(docs, min_freq);
}

std::string join_tokens(const TokenSeq& tokens) {
  std::string out;
  for (const auto& t : tokens) out += (out.empty() ? "" : " ") + t;
  return out;
}

TripletText to_text_triplet(const AttributeTriplet& t, const PredicateVocabulary& preds) {
  return {join_tokens(t.subject), preds.name(t.predicate), join_tokens(t.object)};
}

json report_to_json(const EvalReport& rep, const PredicateVocabulary& preds) {
  json per = json::array();
  for (const auto& row : rep.per_predicate)
    per.push_back({{"predicate", preds.name(row.predicate)},
                   {"tp", row.tp},
                   {"pred_count", row.pred_count},
                   {"gold_count", row.gold_count},
                   {"precision", row.precision},
                   {"recall", row.recall}});
  return {{"accuracy", rep.accuracy},
          {"precision", rep.precision},
          {"recall", rep.recall},
          {"f1", rep.f1},
          {"bleu1", rep.bleu1},
          {"utterances", rep.utterances},
          {"predicted_triplets", rep.predicted_triplets},
          {"gold_triplets", rep.gold_triplets},
          {"per_predicate", per}};
}

void print_report(const EvalReport& rep, const PredicateVocabulary& preds) {
  std::cout << std::fixed << std::setprecision(4);
  std::cout << "utterances          " << rep.utterances << "\n";
  std::cout << "predicted triplets  " << rep.predicted_triplets << "\n";
  std::cout << "gold triplets       " << rep.gold_triplets << "\n";
  std::cout << "accuracy            " << rep.accuracy << "\n";
  std::cout << "precision           " << rep.precision << "\n";
  std::cout << "recall              " << rep.recall << "\n";
  std::cout << "f1                  " << rep.f1 << "\n";
  std::cout << "bleu1               " << rep.bleu1 << "\n";
  if (!rep.per_predicate.empty()) {
    std::cout << "\npredicate            tp  pred  gold  precision  recall\n";
    for (const auto& row : rep.per_predicate)
      std::cout << std::left << std::setw(18) << preds.name(row.predicate) << std::right
                << std::setw(5) << row.tp << std::setw(6) << row.pred_count << std::setw(6)
                << row.gold_count << std::setw(11) << row.precision << std::setw(8) << row.recall
                << "\n";
  }
  std::cout.flush();
}

struct SynthArgs {
  SynthConfig cfg;
  std::string out_dialogues, out_personas, out_gold;
};

int cmd_synth(const SynthArgs& a) {
  SynthCorpus c = synth_corpus(a.cfg);
  json meta = {{"command", "synth"},
               {"seed", a.cfg.seed},
               {"n_dialogues", a.cfg.n_dialogues},
               {"turns_per_dialogue", a.cfg.turns_per_dialogue},
               {"n_predicates", a.cfg.n_predicates},
               {"no_attr_ratio", a.cfg.no_attr_ratio},
               {"multi_attr_ratio", a.cfg.multi_attr_ratio},
               {"heldout", a.cfg.heldout}};
  write_dialogues(a.out_dialogues, c.dialogues, meta);
  write_personas(a.out_personas, c.personas, meta);
  if (!a.out_gold.empty()) write_labeled_corpus(a.out_gold, c.gold, meta);
  std::cout << "wrote " << c.dialogues.size() << " dialogues, " << c.personas.size()
            << " persona sentences, " << c.gold.size() << " user turns ("
            << c.lexicon.size() << " lexicon tokens)\n";
  return 0;
}

struct BuildDataArgs {
  std::string dialogues, personas, scorer = "lexical", scores, out;
  double threshold = 0.9;
};

int cmd_build_data(const BuildDataArgs& a) {
  auto dialogues = read_dialogues(a.dialogues);
  auto personas = read_personas(a.personas);

  std::shared_ptr<FileScorer> file_scorer;
  EntailmentScorer scorer;
  if (a.scorer == "lexical") {
    scorer = lexical_scorer;
  } else if (a.scorer == "substring") {
    scorer = substring_scorer;
  } else {
    if (a.scores.empty()) throw UsageError("--scorer file requires --scores");
    file_scorer = std::make_shared<FileScorer>(read_score_file(a.scores));
    scorer = [file_scorer](const std::string& u, const std::string& p) {
      return (*file_scorer)(u, p);
    };
  }

  BuildReport report;
  auto corpus = build_labels(dialogues, personas, scorer, a.threshold, &report);
  json meta = {{"command", "build-data"}, {"scorer", a.scorer}, {"threshold", a.threshold}};
  write_labeled_corpus(a.out, corpus, meta);

  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  if (corpus.empty()) std::cerr << "warning: no user turns found; wrote an empty corpus\n";
  if (file_scorer && file_scorer->misses() > 0)
    std::cerr << "warning: " << file_scorer->misses() << " score lookups missed (scored 0)\n";
  std::cout << "dialogues " << report.dialogues << " (skipped " << report.skipped_dialogues
            << ")\nuser turns " << report.user_turns << " (labeled " << report.labeled_turns
            << ", unlabeled " << report.unlabeled_turns << ")\ntriplets " << report.total_triplets
            << "\n";
  for (const auto& [name, count] : report.triplets_per_predicate)
    std::cout << "  " << name << " " << count << "\n";
  return 0;
}

struct TrainArgs {
  std::string data, out, log, resume, embeddings, config_path;
  int stop_after = 0;
  int min_freq = 1;
  bool freeze = false;
  ModelConfig mc;
  TrainConfig tc;
};

// CLI11 only reads config files registered on the root app, so the flat
// key=value file is merged by hand: keys name train options, flags win.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path + ":" + std::to_string(lineno);
    std::string s = CLI::detail::trim_copy(line);
    if (s.empty() || s[0] == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError(where + ": expected key=value");
    std::string key = CLI::detail::trim_copy(s.substr(0, eq));
    std::string value = CLI::detail::trim_copy(s.substr(eq + 1));
    CLI::Option* op = cmd->get_option_no_throw("--" + key);
    if (op == nullptr || key == "config")
      throw UsageError(where + ": unknown config key '" + key + "'");
    if (op->count() > 0) continue;
    try {
      op->add_result(value);
      op->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError(where + ": bad value for '" + key + "': " + e.what());
    }
  }
}

int cmd_train(const TrainArgs& a) {
  auto corpus = read_labeled_corpus(a.data);

  Model model;
  AdamState adam;
  TrainConfig tc = a.tc;
  int start_epoch = 0;

  if (!a.resume.empty()) {
    LoadedModel lm = load_model(a.resume);
    if (!lm.has_adam)
      throw DataError("checkpoint has no optimizer state; cannot resume: " + a.resume);
    const json& prov = lm.provenance;
    if (!prov.contains("train_config") || !prov.contains("epochs_done"))
      throw DataError("checkpoint lacks training provenance; cannot resume: " + a.resume);
    model = std::move(lm.model);
    adam = std::move(lm.adam);
    tc = train_config_from_json(prov.at("train_config"));
    start_epoch = prov.at("epochs_done").get<int>();
  } else {
    PredicateVocabulary preds = predicates_from_corpus(corpus);
    if (preds.size() == 0) throw DataError("corpus carries no predicates; nothing to train");
    Vocabulary vocab = corpus_vocabulary(corpus, a.min_freq);
    ModelConfig cfg = a.mc;
    cfg.finetune_embeddings = !a.freeze;
    cfg.n_predicates = preds.size();
    cfg.validate();
    Rng rng(tc.seed);
    std::unordered_map<std::string, Eigen::VectorXd> pretrained;
    const bool use_pretrained = !a.embeddings.empty();
    if (use_pretrained) pretrained = load_pretrained_embeddings(a.embeddings, cfg.word_dim);
    EmbeddingTable emb = EmbeddingTable::init(vocab, cfg.word_dim, cfg.char_dim, rng,
                                              use_pretrained ? &pretrained : nullptr);
    model.params = ModelParams::init(cfg, emb, rng);
    model.vocab = std::move(vocab);
    model.predicates = std::move(preds);
    adam = AdamState::init(model.params);
  }

  std::vector<LabeledExample> examples;
  long skipped = 0;
  for (const auto& lu : corpus) {
    if (tokenize(lu.utterance).empty()) {
      ++skipped;
      continue;
    }
    examples.push_back(make_example(lu, model.vocab, model.predicates));
  }
  if (skipped > 0) std::cerr << "warning: skipped " << skipped << " empty utterances\n";
  if (examples.empty()) throw DataError("no usable training examples in " + a.data);

  json meta = {{"command", "train"},
               {"seed", tc.seed},
               {"data", a.data},
               {"model_config", detail::config_to_json(model.params.config)},
               {"train_config", train_config_to_json(tc)}};
  std::unique_ptr<JsonlWriter> log_writer;
  if (!a.log.empty()) log_writer = std::make_unique<JsonlWriter>(a.log, meta);

  auto provenance = [&](int epochs_done) {
    json p = meta;
    p["epochs_done"] = epochs_done;
    return p;
  };

  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochMetrics& m) {
    std::cout << "epoch " << m.epoch << "  loss " << m.loss_total << " (predicate " << m.loss_p
              << ", entity " << m.loss_v << ")  lr " << m.lr << "  " << std::setprecision(2)
              << m.wall_s << "s\n"
              << std::setprecision(6);
    if (log_writer) {
      json j = epoch_to_json(m);
      j.erase("wall_s");  // timing would break byte-level log determinism
      log_writer->write(j);
    }
  };
  hooks.on_checkpoint = [&](const Model& m, int epoch, const AdamState& state) {
    save_model(m, a.out, provenance(epoch + 1), &state);
  };

  int end_epoch = tc.max_epochs;
  if (a.stop_after > 0) end_epoch = std::min(end_epoch, start_epoch + a.stop_after);
  if (start_epoch >= end_epoch) {
    save_model(model, a.out, provenance(start_epoch), &adam);
    std::cout << "no epochs to run (start " << start_epoch << ", horizon " << end_epoch
              << "); checkpoint written\n";
    return 0;
  }
  train(model, examples, tc, hooks, &adam, start_epoch, end_epoch);
  std::cout << "trained epochs [" << start_epoch << ", " << end_epoch << ") of " << tc.max_epochs
            << "; checkpoint at " << a.out << "\n";
  return 0;
}

struct ExtractArgs {
  std::string model, in, text, out = "-";
  bool text_set = false;
};

int cmd_extract(const ExtractArgs& a) {
  LoadedModel lm = load_model(a.model);

  std::vector<std::string> inputs;
  if (a.text_set) {
    inputs.push_back(a.text);
  } else {
    std::ifstream in(a.in);
    if (!in) throw DataError("cannot open " + a.in);
    for (std::string line; std::getline(in, line);) inputs.push_back(line);
  }

  std::ofstream file_out;
  std::ostream* out = &std::cout;
  if (a.out != "-") {
    file_out.open(a.out);
    if (!file_out) throw DataError("cannot write " + a.out);
    out = &file_out;
  }

  json meta = {{"command", "extract"}, {"checkpoint", a.model},
               {"model_provenance", lm.provenance}};
  *out << json{{"_meta", meta}}.dump() << "\n";
  for (const auto& line : inputs) {
    json triplets = json::array();
    for (const auto& t : extract(lm.model, line))
      triplets.push_back(triplet_to_json(to_text_triplet(t, lm.model.predicates)));
    *out << json{{"utterance", line}, {"triplets", triplets}}.dump() << "\n";
  }
  out->flush();
  if (!*out) throw DataError("write failed: " + a.out);
  return 0;
}

struct EvaluateArgs {
  std::string model, data, predictions, oracle, out;
};

int cmd_evaluate(const EvaluateArgs& a) {
  auto gold_corpus = read_labeled_corpus(a.data);

  EvalReport rep;
  PredicateVocabulary preds;
  json meta = {{"command", "evaluate"}, {"data", a.data}};
  if (!a.predictions.empty()) {
    auto pred_corpus = read_labeled_corpus(a.predictions);
    if (pred_corpus.size() != gold_corpus.size())
      throw DataError("prediction/gold record counts differ (" +
                      std::to_string(pred_corpus.size()) + " vs " +
                      std::to_string(gold_corpus.size()) + ")");
    std::vector<std::string> names;
    for (const auto* corpus : {&gold_corpus, &pred_corpus})
      for (const auto& lu : *corpus)
        for (const auto& t : lu.triplets) names.push_back(t.predicate);
    preds = PredicateVocabulary::from_names(std::move(names));
    rep = evaluate_sets(gold_sets(pred_corpus, preds), gold_sets(gold_corpus, preds), preds);
    meta["predictions"] = a.predictions;
  } else {
    if (a.model.empty()) throw UsageError("evaluate needs --model or --predictions");
    LoadedModel lm = load_model(a.model);
    preds = lm.model.predicates;
    meta["checkpoint"] = a.model;
    meta["model_provenance"] = lm.provenance;
    if (a.oracle.empty()) {
      rep = end_to_end_eval(lm.model, gold_corpus);
    } else {
      meta["oracle"] = a.oracle;
      rep = oracle_eval(lm.model, gold_corpus,
                        a.oracle == "classifier" ? OracleMode::classifier
                                                 : OracleMode::generator);
    }
  }

  print_report(rep, preds);
  if (!a.out.empty()) {
    json doc = report_to_json(rep, preds);
    doc["_meta"] = meta;
    std::ofstream out(a.out);
    if (!out) throw DataError("cannot write " + a.out);
    out << doc.dump(2) << "\n";
  }
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Dialogue attribute-triplet extractor"};
  app.require_subcommand(1);

  SynthArgs sy;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dialogue corpus");
  synth->add_option("--seed", sy.cfg.seed, "Generator seed");
  synth->add_option("--dialogues", sy.cfg.n_dialogues, "Number of dialogues");
  synth->add_option("--turns", sy.cfg.turns_per_dialogue, "User turns per dialogue");
  synth->add_option("--predicates", sy.cfg.n_predicates, "Number of predicate families");
  synth->add_option("--no-attr-ratio", sy.cfg.no_attr_ratio, "Fraction of smalltalk turns");
  synth->add_option("--multi-attr-ratio", sy.cfg.multi_attr_ratio,
                    "Fraction of two-attribute turns");
  synth->add_flag("--heldout", sy.cfg.heldout, "Use the held-out filler pools");
  synth->add_option("--out-dialogues", sy.out_dialogues, "Dialogues output path")->required();
  synth->add_option("--out-personas", sy.out_personas, "Personas output path")->required();
  synth->add_option("--out-gold", sy.out_gold, "Ground-truth labeled corpus output path");

  BuildDataArgs bd;
  CLI::App* build = app.add_subcommand("build-data", "Label user turns via entailment scoring");
  build->add_option("--dialogues", bd.dialogues, "Dialogues file")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--personas", bd.personas, "Personas file")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--scorer", bd.scorer, "Entailment scorer")
      ->check(CLI::IsMember({"lexical", "substring", "file"}));
  build->add_option("--scores", bd.scores, "Score file for --scorer file")
      ->check(CLI::ExistingFile);
  build->add_option("--threshold", bd.threshold, "Entailment threshold");
  build->add_option("--out", bd.out, "Labeled corpus output path")->required();

  TrainArgs tr;
  CLI::App* train_cmd = app.add_subcommand("train", "Train the extractor");
  train_cmd->add_option("--config", tr.config_path,
                        "Flat key=value file naming model/training options; flags win")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--data", tr.data, "Labeled corpus")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", tr.out, "Checkpoint output path")->required();
  train_cmd->add_option("--log", tr.log, "Per-epoch metrics log (JSON lines)");
  train_cmd->add_option("--resume", tr.resume, "Continue from this checkpoint")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--stop-after", tr.stop_after,
                        "Run at most this many epochs now (0 = to the horizon)");
  train_cmd->add_option("--embeddings", tr.embeddings, "Pretrained word embedding file")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--min-freq", tr.min_freq, "Vocabulary frequency cutoff");
  train_cmd->add_option("--d-hdd", tr.mc.d_hdd, "Hidden size");
  train_cmd->add_option("--hops", tr.mc.hops, "Memory hops");
  train_cmd->add_option("--word-dim", tr.mc.word_dim, "Word embedding size");
  train_cmd->add_option("--char-dim", tr.mc.char_dim, "Character embedding size");
  train_cmd->add_option("--trigger-threshold", tr.mc.trigger_threshold,
                        "Predicate trigger threshold");
  train_cmd->add_option("--max-decode-len", tr.mc.max_decode_len, "Entity decode length cap");
  train_cmd->add_option("--lambda", tr.mc.lambda, "Predicate loss weight");
  train_cmd->add_flag("--freeze-embeddings", tr.freeze, "Keep the embedding table fixed");
  train_cmd->add_option("--batch-size", tr.tc.batch_size, "Batch size");
  train_cmd->add_option("--lr-start", tr.tc.lr_start, "Initial learning rate");
  train_cmd->add_option("--lr-end", tr.tc.lr_end, "Final learning rate");
  train_cmd->add_option("--dropout", tr.tc.dropout, "Dropout rate");
  train_cmd->add_option("--word-dropout", tr.tc.word_dropout, "Word dropout rate");
  train_cmd->add_option("--epochs", tr.tc.max_epochs, "Training horizon in epochs");
  train_cmd->add_option("--seed", tr.tc.seed, "Training seed");
  train_cmd->add_option("--grad-clip", tr.tc.grad_clip, "Gradient norm clip");

  ExtractArgs ex;
  CLI::App* extract_cmd = app.add_subcommand("extract", "Extract triplets from utterances");
  extract_cmd->add_option("--model", ex.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  CLI::Option* in_opt =
      extract_cmd->add_option("--in", ex.in, "Utterance file, one per line")
          ->check(CLI::ExistingFile);
  CLI::Option* text_opt = extract_cmd->add_option("--text", ex.text, "Single utterance");
  in_opt->excludes(text_opt);
  text_opt->excludes(in_opt);
  extract_cmd->add_option("--out", ex.out, "Output path or - for stdout");

  EvaluateArgs ev;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Score a model or a predictions file");
  CLI::Option* model_opt =
      eval_cmd->add_option("--model", ev.model, "Checkpoint")->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", ev.data, "Gold labeled corpus")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option* pred_opt = eval_cmd->add_option("--predictions", ev.predictions,
                                               "Score this predictions file instead of a model")
                              ->check(CLI::ExistingFile);
  CLI::Option* oracle_opt = eval_cmd->add_option("--oracle", ev.oracle, "Oracle decomposition")
                                ->check(CLI::IsMember({"classifier", "generator"}));
  pred_opt->excludes(model_opt);
  pred_opt->excludes(oracle_opt);
  oracle_opt->needs(model_opt);
  eval_cmd->add_option("--out", ev.out, "Report file path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  ex.text_set = text_opt->count() > 0;
  if (extract_cmd->parsed() && !ex.text_set && ex.in.empty())
    throw UsageError("extract needs --in or --text");
  if (train_cmd->parsed() && !tr.config_path.empty())
    apply_config_file(train_cmd, tr.config_path);

  if (synth->parsed()) return cmd_synth(sy);
  if (build->parsed()) return cmd_build_data(bd);
  if (train_cmd->parsed()) return cmd_train(tr);
  if (extract_cmd->parsed()) return cmd_extract(ex);
  return cmd_evaluate(ev);
}

}  // namespace
}  // namespace attrex

int main(int argc, char** argv) {
  try {
    return attrex::run(argc, argv);
  } catch (const attrex::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const attrex::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const attrex::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
