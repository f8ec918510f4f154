#pragma once

#include <set>
#include <string>
#include <vector>

#include "attrex/rng.hpp"
#include "attrex/supervision.hpp"
#include "attrex/text.hpp"
#include "attrex/triplet.hpp"

namespace attrex {

// Template-based dialogue generator. Every planted attribute embeds its
// persona sentence verbatim (token-contiguous) in the utterance, so an exact
// substring scorer reconstructs the planted labels perfectly. Filler pools
// are split into train and held-out halves so generalization can be measured
// on surfaces the model never saw. Pools are consumed round-robin, which
// makes the realized token inventory equal the declared lexicon.

struct SynthFamily {
  std::string name;
  std::string clause;    // persona sentence; "{f}" and "{r}" are filler slots
  std::string subject;   // "i" or "my {r}"
  std::string object;    // "{f}" or a fixed word never present in the clause
  std::vector<std::string> train_f, held_f;
  std::vector<std::string> train_r, held_r;
  std::vector<std::pair<std::string, std::string>> wrappers;  // prefix, suffix
};

inline const std::vector<SynthFamily>& synth_families() {
  static const std::vector<SynthFamily> fams = {
      {"like_food", "i like eating {f}", "i", "{f}",
       {"pizza", "pasta", "sushi", "salad", "curry", "steak", "noodles", "pancakes", "bread"}, {"tacos", "ramen", "waffles"}, {}, {},
       {{"", "on weekends ."}, {"you know ,", "."}, {"these days", "."}}},
      {"have_pet", "i have a pet {f}", "i", "{f}",
       {"cat", "dog", "parrot", "hamster", "rabbit", "goldfish", "pony"}, {"turtle", "ferret", "gecko"}, {}, {},
       {{"", "at home ."}, {"guess what ,", "."}, {"by the way ,", "."}}},
      {"have_vehicle", "i drive a {f}", "i", "{f}",
       {"ford", "honda", "jeep", "toyota", "chevy", "scooter"}, {"subaru", "mazda", "tesla"}, {}, {},
       {{"", "to work ."}, {"most days", "."}, {"", "around town ."}}},
      {"live_in", "i live in {f}", "i", "{f}",
       {"boston", "denver", "austin", "seattle", "miami", "tucson", "omaha", "reno"}, {"portland", "chicago", "dallas"}, {}, {},
       {{"", "right now ."}, {"fun fact ,", "."}, {"", "with two roommates ."}}},
      {"place_origin", "i am originally from {f}", "i", "{f}",
       {"france", "brazil", "japan", "canada", "ireland", "mexico", "spain", "italy"}, {"norway", "kenya", "peru"}, {}, {},
       {{"", "actually ."}, {"well ,", "."}, {"", "but moved away young ."}}},
      {"has_profession", "i work as a {f}", "i", "{f}",
       {"teacher", "nurse", "plumber", "chef", "dentist", "farmer", "tailor", "banker"}, {"lawyer", "barista", "welder"}, {}, {},
       {{"", "downtown ."}, {"", "for a living ."}, {"honestly ,", "."}}},
      {"has_hobby", "my hobby is {f}", "i", "{f}",
       {"painting", "fishing", "knitting", "hiking", "baking", "gardening", "carving"}, {"archery", "pottery", "juggling"}, {}, {},
       {{"", "lately ."}, {"as you might guess ,", "."}, {"", "and it keeps me busy ."}}},
      {"like_music", "i listen to {f} music", "i", "{f}",
       {"jazz", "rock", "folk", "metal", "blues", "country", "reggae"}, {"disco", "techno", "opera"}, {}, {},
       {{"", "every morning ."}, {"at night", "."}, {"", "while cooking ."}}},
      {"misc_attribute", "my {r} is very {f}", "my {r}", "{f}",
       {"shy", "quiet", "funny", "clever", "loud"}, {"brave", "messy"}, {"son", "daughter", "brother", "sister", "uncle"}, {"nephew", "niece"},
       {{"", "around strangers ."}, {"to be honest ,", "."}, {"", "most of the time ."}}},
      {"marital_status", "my {r} cooks dinner", "i", "married",
       {}, {}, {"wife", "partner"}, {"husband"},
       {{"", "every evening ."}, {"luckily ,", "."}, {"", "when i get home late ."}}},
      {"like_sports", "i enjoy playing {f}", "i", "{f}",
       {"soccer", "tennis", "hockey", "golf"}, {"cricket", "rugby", "badminton"}, {}, {},
       {{"", "with my friends ."}, {"after work", "."}, {"", "on saturdays ."}}},
      {"like_goto", "i like going to the {f}", "i", "{f}",
       {"church", "library", "gym", "beach"}, {"museum", "theater", "park"}, {}, {},
       {{"", "on sundays ."}, {"sometimes", "."}, {"", "when it rains ."}}},
  };
  return fams;
}

inline const std::vector<std::string>& synth_smalltalk() {
  static const std::vector<std::string> pool = {
      "hello , how are you doing today ?",
      "what a lovely day it has been .",
      "did you watch anything good recently ?",
      "that reminds me of something else .",
      "the train station was crowded yesterday .",
      "someone told me an old joke about pirates .",
      "time flies so fast these days .",
      "thanks for asking , nothing much going on .",
      "the weather was gloomy this whole week .",
      "hope your week is going alright .",
  };
  return pool;
}

inline const std::vector<std::string>& synth_system_turns() {
  static const std::vector<std::string> pool = {
      "that sounds great .",      "oh interesting , tell me more .",
      "nice , thanks for sharing .", "i see , that makes sense .",
      "really ? tell me about it .", "good to hear from you .",
  };
  return pool;
}

struct SynthConfig {
  std::uint64_t seed = 7;
  int n_dialogues = 125;
  int turns_per_dialogue = 4;  // user turns; each is followed by a system turn
  int n_predicates = 10;
  double no_attr_ratio = 0.30;
  double multi_attr_ratio = 0.15;
  bool heldout = false;

  void validate() const {
    if (n_dialogues < 1 || turns_per_dialogue < 1) throw UsageError("corpus size must be positive");
    if (n_predicates < 1 || n_predicates > static_cast<int>(synth_families().size()))
      throw UsageError("n_predicates must lie in [1, " +
                       std::to_string(synth_families().size()) + "]");
    if (no_attr_ratio < 0 || multi_attr_ratio < 0 || no_attr_ratio + multi_attr_ratio > 1.0)
      throw UsageError("turn-type ratios must be non-negative and sum to at most 1");
  }
};

struct SynthCorpus {
  std::vector<DialogueRecord> dialogues;
  std::vector<PersonaRecord> personas;
  std::vector<LabeledUtterance> gold;  // one record per user turn, in order
  std::vector<std::string> predicate_names;
  std::vector<std::string> lexicon;  // declared token inventory of the labeled corpus
};

namespace detail {

inline std::string substitute(std::string text, const std::string& slot, const std::string& value) {
  for (std::size_t at = text.find(slot); at != std::string::npos; at = text.find(slot))
    text = text.substr(0, at) + value + text.substr(at + slot.size());
  return text;
}

inline std::string join_clause(const std::string& prefix, const std::string& clause,
                               const std::string& suffix) {
  std::string out;
  for (const std::string* part : {&prefix, &clause, &suffix}) {
    if (part->empty()) continue;
    if (!out.empty()) out += ' ';
    out += *part;
  }
  return out;
}

struct PoolCursor {
  std::size_t next = 0;
  const std::string& take(const std::vector<std::string>& pool) {
    const std::string& v = pool[next % pool.size()];
    ++next;
    return v;
  }
  std::size_t take_index(std::size_t size) { return next++ % size; }
};

}  // namespace detail

inline SynthCorpus synth_corpus(const SynthConfig& cfg) {
  cfg.validate();
  const auto& families = synth_families();
  const int n_active = cfg.n_predicates;

  SynthCorpus out;
  for (int f = 0; f < n_active; ++f) out.predicate_names.push_back(families[f].name);

  // Fixed global turn-type multiset, shuffled once, so realized ratios match
  // the configuration up to rounding.
  const int total_turns = cfg.n_dialogues * cfg.turns_per_dialogue;
  const int n_none = static_cast<int>(cfg.no_attr_ratio * total_turns + 0.5);
  const int n_multi = static_cast<int>(cfg.multi_attr_ratio * total_turns + 0.5);
  enum TurnKind : int { kSingle = 0, kNone = 1, kMulti = 2 };
  std::vector<int> kinds(static_cast<std::size_t>(total_turns), kSingle);
  for (int i = 0; i < n_none; ++i) kinds[static_cast<std::size_t>(i)] = kNone;
  for (int i = 0; i < n_multi; ++i) kinds[static_cast<std::size_t>(n_none + i)] = kMulti;
  Rng rng(cfg.seed);
  shuffle(kinds, rng);

  // Deal kinds to dialogues. When supply allows, every dialogue receives at
  // least one attribute-bearing turn, so no persona comes out empty.
  std::vector<int> attr_kinds, none_kinds;
  for (int k : kinds) (k == kNone ? none_kinds : attr_kinds).push_back(k);
  std::vector<std::vector<int>> dealt(static_cast<std::size_t>(cfg.n_dialogues));
  if (static_cast<int>(attr_kinds.size()) >= cfg.n_dialogues) {
    std::vector<int> rest(attr_kinds.begin() + cfg.n_dialogues, attr_kinds.end());
    rest.insert(rest.end(), none_kinds.begin(), none_kinds.end());
    shuffle(rest, rng);
    std::size_t at = 0;
    for (int di = 0; di < cfg.n_dialogues; ++di) {
      auto& mine = dealt[static_cast<std::size_t>(di)];
      mine.push_back(attr_kinds[static_cast<std::size_t>(di)]);
      while (static_cast<int>(mine.size()) < cfg.turns_per_dialogue) mine.push_back(rest[at++]);
      shuffle(mine, rng);
    }
  } else {
    std::size_t at = 0;
    for (auto& mine : dealt)
      for (int t = 0; t < cfg.turns_per_dialogue; ++t) mine.push_back(kinds[at++]);
  }

  std::vector<detail::PoolCursor> filler_cur(families.size()), rel_cur(families.size()),
      wrapper_cur(families.size());
  detail::PoolCursor family_cur, smalltalk_cur, system_cur;

  for (int di = 0; di < cfg.n_dialogues; ++di) {
    DialogueRecord dlg;
    dlg.dialogue_id = "d" + std::to_string(di);
    dlg.persona_id = "p" + std::to_string(di);

    // Families used by this dialogue must be distinct so one persona never
    // carries two attributes of the same predicate.
    std::vector<int> turn_kinds;
    int needed = 0;
    for (int t = 0; t < cfg.turns_per_dialogue; ++t) {
      int kind = dealt[static_cast<std::size_t>(di)][static_cast<std::size_t>(t)];
      int want = kind == kMulti ? 2 : (kind == kSingle ? 1 : 0);
      if (needed + want > n_active) {
        // A dialogue never repeats a family; downgrade once the persona is full.
        if (kind == kMulti && needed + 1 <= n_active) {
          kind = kSingle;
          want = 1;
        } else {
          kind = kNone;
          want = 0;
        }
      }
      needed += want;
      turn_kinds.push_back(kind);
    }
    // Consecutive residues of the cycling cursor are distinct while the draw
    // count stays at or below the family count.
    std::vector<int> dialogue_families;
    for (int k = 0; k < needed; ++k)
      dialogue_families.push_back(
          static_cast<int>(family_cur.take_index(static_cast<std::size_t>(n_active))));

    std::size_t fam_at = 0;
    const std::size_t personas_before = out.personas.size();
    auto plant = [&](int fi) {
      const SynthFamily& fam = families[fi];
      const auto& fpool = cfg.heldout && !fam.held_f.empty()
                              ? fam.held_f
                              : fam.train_f;
      const auto& rpool = cfg.heldout && !fam.held_r.empty() ? fam.held_r : fam.train_r;
      std::string clause = fam.clause, subject = fam.subject, object = fam.object;
      if (!rpool.empty()) {
        const std::string& r = rel_cur[fi].take(rpool);
        clause = detail::substitute(clause, "{r}", r);
        subject = detail::substitute(subject, "{r}", r);
      }
      if (!fpool.empty()) {
        const std::string& f = filler_cur[fi].take(fpool);
        clause = detail::substitute(clause, "{f}", f);
        object = detail::substitute(object, "{f}", f);
      }
      PersonaRecord persona;
      persona.persona_id = dlg.persona_id;
      persona.sentence = clause;
      persona.triplet = {subject, fam.name, object};
      out.personas.push_back(persona);
      return std::make_pair(clause, persona.triplet);
    };

    for (int t = 0; t < cfg.turns_per_dialogue; ++t) {
      const int kind = turn_kinds[static_cast<std::size_t>(t)];
      LabeledUtterance gold;
      std::string text;
      if (kind == kNone) {
        text = smalltalk_cur.take(synth_smalltalk());
      } else if (kind == kSingle) {
        int fi = dialogue_families[fam_at++];
        auto [clause, triplet] = plant(fi);
        const auto& wrap =
            families[fi].wrappers[wrapper_cur[fi].take_index(families[fi].wrappers.size())];
        text = detail::join_clause(wrap.first, clause, wrap.second);
        gold.triplets.push_back(triplet);
      } else {
        int fa = dialogue_families[fam_at++];
        int fb = dialogue_families[fam_at++];
        auto [ca, ta] = plant(fa);
        auto [cb, tb] = plant(fb);
        text = ca + " and also " + cb + " .";
        gold.triplets.push_back(ta);
        gold.triplets.push_back(tb);
      }
      gold.utterance = text;
      std::sort(gold.triplets.begin(), gold.triplets.end());
      out.gold.push_back(std::move(gold));
      dlg.turns.push_back({Role::user, text});
      dlg.turns.push_back({Role::system, system_cur.take(synth_system_turns())});
    }
    // A dialogue of pure smalltalk still gets a persona; its sentence simply
    // never occurs in the dialogue, so no label arises from it.
    if (out.personas.size() == personas_before)
      plant(static_cast<int>(family_cur.take_index(static_cast<std::size_t>(n_active))));
    out.dialogues.push_back(std::move(dlg));
  }

  // Declared lexicon: every token the labeled corpus (user utterances plus
  // triplet texts) can contain, enumerated from the static tables.
  std::set<std::string> lex;
  auto add_tokens = [&lex](const std::string& text) {
    for (const auto& tok : tokenize(text)) lex.insert(tok);
  };
  for (int f = 0; f < n_active; ++f) {
    const SynthFamily& fam = families[f];
    const auto& fpool = cfg.heldout && !fam.held_f.empty() ? fam.held_f : fam.train_f;
    const auto& rpool = cfg.heldout && !fam.held_r.empty() ? fam.held_r : fam.train_r;
    std::string clause = detail::substitute(detail::substitute(fam.clause, "{f}", ""), "{r}", "");
    std::string subject =
        detail::substitute(detail::substitute(fam.subject, "{f}", ""), "{r}", "");
    std::string object = detail::substitute(detail::substitute(fam.object, "{f}", ""), "{r}", "");
    add_tokens(clause);
    add_tokens(subject);
    add_tokens(object);
    for (const auto& w : fam.wrappers) {
      add_tokens(w.first);
      add_tokens(w.second);
    }
    for (const auto& v : fpool) add_tokens(v);
    for (const auto& v : rpool) add_tokens(v);
  }
  for (const auto& s : synth_smalltalk()) add_tokens(s);
  add_tokens("and also .");
  out.lexicon.assign(lex.begin(), lex.end());
  return out;
}

}  // namespace attrex
