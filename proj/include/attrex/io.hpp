#pragma once

#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "attrex/errors.hpp"
#include "attrex/supervision.hpp"
#include "attrex/training.hpp"
#include "attrex/triplet.hpp"

namespace attrex {

using json = nlohmann::json;

// Line-delimited JSON files. Writers may prepend a single {"_meta": {...}}
// record carrying the producing config and seed; readers skip such records
// (and blank lines) transparently.

namespace detail {

inline std::string at_line(const std::string& path, long lineno) {
  return path + ":" + std::to_string(lineno);
}

inline const json& require(const json& j, const char* field, const std::string& path,
                           long lineno) {
  auto it = j.find(field);
  if (it == j.end())
    throw DataError(at_line(path, lineno) + ": missing field \"" + field + "\"");
  return *it;
}

inline std::string require_string(const json& j, const char* field, const std::string& path,
                                  long lineno) {
  const json& v = require(j, field, path, lineno);
  if (!v.is_string())
    throw DataError(at_line(path, lineno) + ": field \"" + field + "\" must be a string");
  return v.get<std::string>();
}

}  // namespace detail

// Calls fn(record, lineno) for every non-meta record. Returns the _meta
// payload if one was present.
inline json read_jsonl(const std::string& path,
                       const std::function<void(const json&, long)>& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  json meta;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(detail::at_line(path, lineno) + ": " + e.what());
    }
    if (j.is_object() && j.contains("_meta")) {
      meta = j["_meta"];
      continue;
    }
    fn(j, lineno);
  }
  return meta;
}

class JsonlWriter {
 public:
  JsonlWriter(const std::string& path, const json& meta = json()) : path_(path), out_(path) {
    if (!out_) throw DataError("cannot write " + path);
    if (!meta.is_null()) write(json{{"_meta", meta}});
  }

  void write(const json& record) {
    out_ << record.dump() << '\n';
    if (!out_) throw DataError("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

// --- triplets ---

inline json triplet_to_json(const TripletText& t) {
  return {{"subject", t.subject}, {"predicate", t.predicate}, {"object", t.object}};
}

inline TripletText triplet_from_json(const json& j, const std::string& path, long lineno) {
  if (!j.is_object()) throw DataError(detail::at_line(path, lineno) + ": triplet must be an object");
  return {detail::require_string(j, "subject", path, lineno),
          detail::require_string(j, "predicate", path, lineno),
          detail::require_string(j, "object", path, lineno)};
}

// --- dialogues ---

inline void write_dialogues(const std::string& path, const std::vector<DialogueRecord>& dialogues,
                            const json& meta = json()) {
  JsonlWriter w(path, meta);
  for (const auto& d : dialogues) {
    json turns = json::array();
    for (const auto& t : d.turns)
      turns.push_back({{"role", t.role == Role::user ? "user" : "system"}, {"text", t.text}});
    w.write({{"dialogue_id", d.dialogue_id}, {"persona_id", d.persona_id}, {"turns", turns}});
  }
}

inline std::vector<DialogueRecord> read_dialogues(const std::string& path) {
  std::vector<DialogueRecord> out;
  read_jsonl(path, [&](const json& j, long lineno) {
    DialogueRecord d;
    d.dialogue_id = detail::require_string(j, "dialogue_id", path, lineno);
    d.persona_id = detail::require_string(j, "persona_id", path, lineno);
    const json& turns = detail::require(j, "turns", path, lineno);
    if (!turns.is_array())
      throw DataError(detail::at_line(path, lineno) + ": \"turns\" must be an array");
    for (const auto& t : turns) {
      std::string role = detail::require_string(t, "role", path, lineno);
      if (role != "user" && role != "system")
        throw DataError(detail::at_line(path, lineno) + ": unknown role \"" + role + "\"");
      d.turns.push_back(
          {role == "user" ? Role::user : Role::system, detail::require_string(t, "text", path, lineno)});
    }
    out.push_back(std::move(d));
  });
  return out;
}

// --- personas ---

inline void write_personas(const std::string& path, const std::vector<PersonaRecord>& personas,
                           const json& meta = json()) {
  JsonlWriter w(path, meta);
  for (const auto& p : personas)
    w.write({{"persona_id", p.persona_id},
             {"sentence", p.sentence},
             {"triplet", triplet_to_json(p.triplet)}});
}

inline std::vector<PersonaRecord> read_personas(const std::string& path) {
  std::vector<PersonaRecord> out;
  read_jsonl(path, [&](const json& j, long lineno) {
    PersonaRecord p;
    p.persona_id = detail::require_string(j, "persona_id", path, lineno);
    p.sentence = detail::require_string(j, "sentence", path, lineno);
    p.triplet = triplet_from_json(detail::require(j, "triplet", path, lineno), path, lineno);
    out.push_back(std::move(p));
  });
  return out;
}

// --- labeled corpus (train/test format) ---

inline void write_labeled_corpus(const std::string& path,
                                 const std::vector<LabeledUtterance>& corpus,
                                 const json& meta = json()) {
  JsonlWriter w(path, meta);
  for (const auto& lu : corpus) {
    json triplets = json::array();
    for (const auto& t : lu.triplets) triplets.push_back(triplet_to_json(t));
    w.write({{"utterance", lu.utterance}, {"triplets", triplets}});
  }
}

inline std::vector<LabeledUtterance> read_labeled_corpus(const std::string& path) {
  std::vector<LabeledUtterance> out;
  read_jsonl(path, [&](const json& j, long lineno) {
    LabeledUtterance lu;
    lu.utterance = detail::require_string(j, "utterance", path, lineno);
    const json& triplets = detail::require(j, "triplets", path, lineno);
    if (!triplets.is_array())
      throw DataError(detail::at_line(path, lineno) + ": \"triplets\" must be an array");
    for (const auto& t : triplets) lu.triplets.push_back(triplet_from_json(t, path, lineno));
    out.push_back(std::move(lu));
  });
  return out;
}

// --- entailment score file ---

struct ScoreEntry {
  std::string u_key;
  std::string p_key;
  double score = 0.0;
};

inline void write_score_file(const std::string& path, const std::vector<ScoreEntry>& entries,
                             const json& meta = json()) {
  JsonlWriter w(path, meta);
  for (const auto& e : entries)
    w.write({{"u_key", e.u_key}, {"p_key", e.p_key}, {"score", e.score}});
}

inline FileScorer read_score_file(const std::string& path) {
  FileScorer scorer;
  read_jsonl(path, [&](const json& j, long lineno) {
    const json& score = detail::require(j, "score", path, lineno);
    if (!score.is_number())
      throw DataError(detail::at_line(path, lineno) + ": \"score\" must be a number");
    try {
      scorer.insert(detail::require_string(j, "u_key", path, lineno),
                    detail::require_string(j, "p_key", path, lineno), score.get<double>());
    } catch (const DataError& e) {
      throw DataError(detail::at_line(path, lineno) + ": " + e.what());
    }
  });
  return scorer;
}

// --- training metrics log ---

inline json epoch_to_json(const EpochMetrics& m) {
  return {{"epoch", m.epoch},     {"loss_p", m.loss_p}, {"loss_v", m.loss_v},
          {"loss_total", m.loss_total}, {"lr", m.lr},   {"wall_s", m.wall_s}};
}

}  // namespace attrex
