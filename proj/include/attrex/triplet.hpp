#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "attrex/errors.hpp"
#include "attrex/text.hpp"

namespace attrex {

// Raw triplet as it appears in data files; subject/object are untokenized text.
struct TripletText {
  std::string subject;
  std::string predicate;
  std::string object;

  // Canonical key: fields tokenized and joined, so "Two Dogs" == "two dogs".
  std::string key() const {
    auto join = [](const TokenSeq& t) {
      std::string s;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) s += ' ';
        s += t[i];
      }
      return s;
    };
    return join(tokenize(subject)) + "\t" + predicate + "\t" + join(tokenize(object));
  }

  bool operator==(const TripletText& o) const { return key() == o.key(); }
  bool operator<(const TripletText& o) const { return key() < o.key(); }
};

// Model-level triplet: tokenized entities plus a predicate id.
struct AttributeTriplet {
  TokenSeq subject;
  int predicate = -1;
  TokenSeq object;

  bool operator==(const AttributeTriplet& o) const {
    return predicate == o.predicate && subject == o.subject && object == o.object;
  }
  bool operator<(const AttributeTriplet& o) const {
    if (predicate != o.predicate) return predicate < o.predicate;
    if (subject != o.subject) return subject < o.subject;
    return object < o.object;
  }
};

// One utterance with its gold (or predicted) triplets, as stored on disk.
struct LabeledUtterance {
  std::string utterance;
  std::vector<TripletText> triplets;
};

// Fixed, ordered set of predicate names. Ids are positions in the list.
class PredicateVocabulary {
 public:
  PredicateVocabulary() = default;

  explicit PredicateVocabulary(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      auto [it, fresh] = ids_.emplace(names_[i], static_cast<int>(i));
      if (!fresh) throw DataError("duplicate predicate name: " + names_[i]);
    }
  }

  // Sorted distinct names, the canonical order when deriving from data files.
  static PredicateVocabulary from_names(std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    return PredicateVocabulary(std::move(names));
  }

  int id(const std::string& name) const {
    auto it = ids_.find(name);
    return it == ids_.end() ? -1 : it->second;
  }

  const std::string& name(int id) const {
    if (id < 0 || id >= size())
      throw std::out_of_range("predicate id " + std::to_string(id) + " outside table of size " +
                              std::to_string(size()));
    return names_[static_cast<std::size_t>(id)];
  }

  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> ids_;
};

}  // namespace attrex
