#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "attrex/errors.hpp"
#include "attrex/text.hpp"
#include "attrex/triplet.hpp"

namespace attrex {

struct PersonaRecord {
  std::string persona_id;
  std::string sentence;
  TripletText triplet;
};

enum class Role { user, system };

struct DialogueTurn {
  Role role = Role::user;
  std::string text;
};

struct DialogueRecord {
  std::string dialogue_id;
  std::string persona_id;
  std::vector<DialogueTurn> turns;
};

// score(premise = utterance, hypothesis = persona sentence) in [0, 1].
using EntailmentScorer = std::function<double(const std::string&, const std::string&)>;

inline const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> words = {
      "i",    "a",    "an",   "the",  "my",   "me",    "you",  "your",  "am",   "is",
      "are",  "was",  "were", "be",   "been", "do",    "does", "did",   "to",   "of",
      "on",   "at",   "and",  "or",   "it",   "its",   "this", "that",  "he",   "she",
      "we",   "they", "not",  "no",   "so",   "too",   "very", "just",  "with", "for",
      "as",   "but",  "what", "how",  "when", "who",   "oh",   "hey",   "hello", "hi",
      "yes",  "yeah", "know", "well", "also"};
  return words;
}

inline std::set<std::string> content_words(const std::string& text) {
  std::set<std::string> out;
  for (const auto& tok : tokenize(text)) {
    bool wordlike = false;
    for (unsigned char c : tok) wordlike |= std::isalnum(c) != 0;
    if (wordlike && !stopwords().count(tok)) out.insert(tok);
  }
  return out;
}

// Overlap coefficient on content words, normalized by the hypothesis side.
inline double lexical_scorer(const std::string& premise, const std::string& hypothesis) {
  std::set<std::string> p = content_words(premise), h = content_words(hypothesis);
  std::size_t hit = 0;
  for (const auto& w : h) hit += p.count(w);
  return static_cast<double>(hit) / static_cast<double>(std::max<std::size_t>(1, h.size()));
}

// 1.0 when the hypothesis occurs verbatim (token-contiguous) in the premise.
inline double substring_scorer(const std::string& premise, const std::string& hypothesis) {
  TokenSeq p = tokenize(premise), h = tokenize(hypothesis);
  if (h.empty() || h.size() > p.size()) return 0.0;
  for (std::size_t start = 0; start + h.size() <= p.size(); ++start) {
    bool match = true;
    for (std::size_t i = 0; i < h.size() && match; ++i) match = p[start + i] == h[i];
    if (match) return 1.0;
  }
  return 0.0;
}

// Adapter for externally computed scores, keyed by the raw (utterance,
// persona-sentence) text pair. Unknown pairs score 0 and bump a counter.
class FileScorer {
 public:
  FileScorer() = default;

  void insert(const std::string& u_key, const std::string& p_key, double score) {
    if (!(score >= 0.0 && score <= 1.0))
      throw DataError("score outside [0,1] for pair (" + u_key + ", " + p_key + ")");
    table_[u_key + '\x1f' + p_key] = score;
  }

  double operator()(const std::string& premise, const std::string& hypothesis) const {
    auto it = table_.find(premise + '\x1f' + hypothesis);
    if (it == table_.end()) {
      ++misses_;
      return 0.0;
    }
    return it->second;
  }

  long misses() const { return misses_; }
  std::size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, double> table_;
  mutable long misses_ = 0;
};

struct BuildReport {
  long dialogues = 0;
  long skipped_dialogues = 0;
  long user_turns = 0;
  long labeled_turns = 0;
  long unlabeled_turns = 0;
  long total_triplets = 0;
  std::map<std::string, long> triplets_per_predicate;
  std::vector<std::string> warnings;
};

// Distant supervision: every user turn is scored against all persona
// sentences of its dialogue's persona; sentences at or above the threshold
// contribute their triplet. Identical triplets collapse to one label. Every
// user turn yields exactly one output record, labeled or not.
inline std::vector<LabeledUtterance> build_labels(const std::vector<DialogueRecord>& dialogues,
                                                  const std::vector<PersonaRecord>& personas,
                                                  const EntailmentScorer& scorer, double threshold,
                                                  BuildReport* report = nullptr) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw UsageError("entailment threshold must lie strictly between 0 and 1");
  std::map<std::string, std::vector<const PersonaRecord*>> by_persona;
  for (const auto& p : personas) by_persona[p.persona_id].push_back(&p);

  BuildReport local;
  std::vector<LabeledUtterance> out;
  for (const auto& d : dialogues) {
    local.dialogues += 1;
    auto it = by_persona.find(d.persona_id);
    if (it == by_persona.end()) {
      local.skipped_dialogues += 1;
      local.warnings.push_back("dialogue " + d.dialogue_id + " references unknown persona " +
                               d.persona_id + "; skipped");
      continue;
    }
    for (const auto& turn : d.turns) {
      if (turn.role != Role::user) continue;
      local.user_turns += 1;
      LabeledUtterance lu;
      lu.utterance = turn.text;
      std::set<std::string> seen;
      for (const PersonaRecord* p : it->second) {
        if (scorer(turn.text, p->sentence) < threshold) continue;
        if (seen.insert(p->triplet.key()).second) lu.triplets.push_back(p->triplet);
      }
      std::sort(lu.triplets.begin(), lu.triplets.end());
      if (lu.triplets.empty()) {
        local.unlabeled_turns += 1;
      } else {
        local.labeled_turns += 1;
        for (const auto& t : lu.triplets) {
          local.total_triplets += 1;
          local.triplets_per_predicate[t.predicate] += 1;
        }
      }
      out.push_back(std::move(lu));
    }
  }
  if (report) *report = std::move(local);
  return out;
}

// Canonical predicate inventory of a persona file: sorted distinct names.
inline PredicateVocabulary predicates_from_personas(const std::vector<PersonaRecord>& personas) {
  std::vector<std::string> names;
  for (const auto& p : personas) names.push_back(p.triplet.predicate);
  return PredicateVocabulary::from_names(std::move(names));
}

// Same derivation from an already-labeled corpus.
inline PredicateVocabulary predicates_from_corpus(const std::vector<LabeledUtterance>& corpus) {
  std::vector<std::string> names;
  for (const auto& lu : corpus)
    for (const auto& t : lu.triplets) names.push_back(t.predicate);
  return PredicateVocabulary::from_names(std::move(names));
}

}  // namespace attrex
