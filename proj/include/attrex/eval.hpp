#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "attrex/model.hpp"
#include "attrex/triplet.hpp"

namespace attrex {

using TripletSet = std::set<AttributeTriplet>;

// Canonical comparable form of a surface triplet: tokenized fields plus the
// predicate id. Strict matching then reduces to exact equality.
inline AttributeTriplet to_eval_triplet(const TripletText& t, const PredicateVocabulary& preds) {
  int id = preds.id(t.predicate);
  if (id < 0) throw DataError("unknown predicate in labels: " + t.predicate);
  return {tokenize(t.subject), id, tokenize(t.object)};
}

inline std::vector<TripletSet> gold_sets(const std::vector<LabeledUtterance>& corpus,
                                         const PredicateVocabulary& preds) {
  std::vector<TripletSet> out;
  out.reserve(corpus.size());
  for (const auto& lu : corpus) {
    TripletSet s;
    for (const auto& t : lu.triplets) s.insert(to_eval_triplet(t, preds));
    out.push_back(std::move(s));
  }
  return out;
}

struct StrictMatchResult {
  std::vector<bool> correct;
  double accuracy = 1.0;
};

// An utterance counts as correct iff predicted and gold sets are equal;
// two empty sets are equal, so the no-attribute case scores as correct.
inline StrictMatchResult strict_match(const std::vector<TripletSet>& pred,
                                      const std::vector<TripletSet>& gold) {
  if (pred.size() != gold.size())
    throw std::invalid_argument("strict_match: corpus size mismatch");
  StrictMatchResult out;
  long hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    bool ok = pred[i] == gold[i];
    out.correct.push_back(ok);
    hits += ok ? 1 : 0;
  }
  out.accuracy = pred.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(pred.size());
  return out;
}

struct F1Stats {
  long tp = 0;
  long pred_count = 0;
  long gold_count = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline F1Stats finish_f1(F1Stats s) {
  if (s.pred_count == 0 && s.gold_count == 0) {
    s.precision = s.recall = s.f1 = 1.0;  // degenerate all-empty corpus
    return s;
  }
  s.precision = s.pred_count > 0 ? static_cast<double>(s.tp) / s.pred_count : 0.0;
  s.recall = s.gold_count > 0 ? static_cast<double>(s.tp) / s.gold_count : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                                    : 0.0;
  return s;
}

// Micro-averaged exact-match triplet precision/recall/F1.
inline F1Stats triplet_f1(const std::vector<TripletSet>& pred,
                          const std::vector<TripletSet>& gold) {
  if (pred.size() != gold.size()) throw std::invalid_argument("triplet_f1: corpus size mismatch");
  F1Stats s;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    s.pred_count += static_cast<long>(pred[i].size());
    s.gold_count += static_cast<long>(gold[i].size());
    for (const auto& t : pred[i]) s.tp += gold[i].count(t) ? 1 : 0;
  }
  return finish_f1(s);
}

// Corpus-level BLEU-1: per-segment clipped unigram counts are summed, then
// modified precision is scaled by the brevity penalty over total lengths.
// Candidates and references are whitespace-tokenized.
inline double bleu1(const std::vector<std::string>& candidates,
                    const std::vector<std::string>& references) {
  if (candidates.size() != references.size())
    throw std::invalid_argument("bleu1: corpus size mismatch");
  auto split = [](const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> toks;
    for (std::string w; in >> w;) toks.push_back(w);
    return toks;
  };
  long clipped = 0, cand_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto cand = split(candidates[i]);
    auto ref = split(references[i]);
    cand_len += static_cast<long>(cand.size());
    ref_len += static_cast<long>(ref.size());
    std::map<std::string, long> ref_counts;
    for (const auto& w : ref) ++ref_counts[w];
    std::map<std::string, long> cand_counts;
    for (const auto& w : cand) ++cand_counts[w];
    for (const auto& [w, c] : cand_counts) {
      auto it = ref_counts.find(w);
      clipped += std::min(c, it == ref_counts.end() ? 0L : it->second);
    }
  }
  if (cand_len == 0) return 0.0;
  double p1 = static_cast<double>(clipped) / static_cast<double>(cand_len);
  double bp = cand_len > ref_len
                  ? 1.0
                  : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
  return bp * p1;
}

// Renders one utterance's triplets as "subject ; predicate ; object" pieces
// joined with " ; ", ordered by predicate id (set order already provides it).
inline std::string render_triplets(const TripletSet& triplets, const PredicateVocabulary& preds) {
  std::string out;
  for (const auto& t : triplets) {
    if (!out.empty()) out += " ; ";
    std::string subject, object;
    for (const auto& w : t.subject) subject += (subject.empty() ? "" : " ") + w;
    for (const auto& w : t.object) object += (object.empty() ? "" : " ") + w;
    out += subject + " ; " + preds.name(t.predicate) + " ; " + object;
  }
  return out;
}

struct PredicateStats {
  int predicate = 0;
  long tp = 0;
  long pred_count = 0;
  long gold_count = 0;
  double precision = 0.0;
  double recall = 0.0;
};

struct EvalReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double bleu1 = 0.0;
  long utterances = 0;
  long predicted_triplets = 0;
  long gold_triplets = 0;
  std::vector<PredicateStats> per_predicate;
};

inline EvalReport evaluate_sets(const std::vector<TripletSet>& pred,
                                const std::vector<TripletSet>& gold,
                                const PredicateVocabulary& preds) {
  EvalReport rep;
  rep.utterances = static_cast<long>(pred.size());
  rep.accuracy = strict_match(pred, gold).accuracy;
  F1Stats overall = triplet_f1(pred, gold);
  rep.precision = overall.precision;
  rep.recall = overall.recall;
  rep.f1 = overall.f1;
  rep.predicted_triplets = overall.pred_count;
  rep.gold_triplets = overall.gold_count;

  std::vector<std::string> cand, ref;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    cand.push_back(render_triplets(pred[i], preds));
    ref.push_back(render_triplets(gold[i], preds));
  }
  rep.bleu1 = bleu1(cand, ref);

  for (int j = 0; j < preds.size(); ++j) {
    F1Stats s;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      for (const auto& t : pred[i])
        if (t.predicate == j) {
          ++s.pred_count;
          s.tp += gold[i].count(t) ? 1 : 0;
        }
      for (const auto& t : gold[i]) s.gold_count += t.predicate == j ? 1 : 0;
    }
    s = finish_f1(s);
    rep.per_predicate.push_back({j, s.tp, s.pred_count, s.gold_count, s.precision, s.recall});
  }
  return rep;
}

inline std::vector<TripletSet> predict_sets(const Model& m,
                                            const std::vector<LabeledUtterance>& corpus) {
  std::vector<TripletSet> out;
  out.reserve(corpus.size());
  for (const auto& lu : corpus) {
    auto triplets = extract(m, lu.utterance);
    out.emplace_back(triplets.begin(), triplets.end());
  }
  return out;
}

inline EvalReport end_to_end_eval(const Model& m, const std::vector<LabeledUtterance>& corpus) {
  return evaluate_sets(predict_sets(m, corpus), gold_sets(corpus, m.predicates), m.predicates);
}

enum class OracleMode { classifier, generator };

// Oracle decompositions: classifier mode scores the predicate decision alone
// (sets of predicate ids); generator mode bypasses the classifier and feeds
// the gold predicates to the entity generator.
inline EvalReport oracle_eval(const Model& m, const std::vector<LabeledUtterance>& corpus,
                              OracleMode mode) {
  std::vector<TripletSet> gold = gold_sets(corpus, m.predicates);
  if (mode == OracleMode::generator) {
    std::vector<TripletSet> pred;
    pred.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      std::set<int> ids;
      for (const auto& t : gold[i]) ids.insert(t.predicate);
      auto triplets =
          extract_with(m, corpus[i].utterance, std::vector<int>(ids.begin(), ids.end()));
      pred.emplace_back(triplets.begin(), triplets.end());
    }
    return evaluate_sets(pred, gold, m.predicates);
  }

  // Classifier mode: represent each predicate id j as a bare triplet (∅, j, ∅)
  // so the set machinery and micro counts apply unchanged.
  auto id_set = [](const std::set<int>& ids) {
    TripletSet s;
    for (int j : ids) s.insert({{}, j, {}});
    return s;
  };
  std::vector<TripletSet> pred, gold_ids;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    TokenSeq tokens = tokenize(corpus[i].utterance);
    std::set<int> triggered;
    if (!tokens.empty()) {
      EncodedContext ctx = encode_utterance(m, tokens);
      VectorXd alpha = classify_predicates(m.params, ctx.summary);
      for (int j : trigger_set(alpha, m.params.config.trigger_threshold)) triggered.insert(j);
    }
    std::set<int> gold_j;
    for (const auto& t : gold[i]) gold_j.insert(t.predicate);
    pred.push_back(id_set(triggered));
    gold_ids.push_back(id_set(gold_j));
  }
  return evaluate_sets(pred, gold_ids, m.predicates);
}

}  // namespace attrex
