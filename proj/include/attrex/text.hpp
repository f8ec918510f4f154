#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "attrex/errors.hpp"
#include "attrex/rng.hpp"

namespace attrex {

using TokenSeq = std::vector<std::string>;
using IdSeq = std::vector<int>;

// Reserved ids occupy the first five slots of every vocabulary.
enum ReservedId : int { kPad = 0, kUnk = 1, kSos = 2, kEos = 3, kSep = 4 };
inline constexpr int kNumReserved = 5;

inline const TokenSeq& reserved_tokens() {
  static const TokenSeq toks = {"<pad>", "<unk>", "<sos>", "<eos>", ";"};
  return toks;
}

// Lowercases and splits on whitespace; punctuation becomes single-character
// tokens, so "cats." -> ["cats", "."] and "a;b" -> ["a", ";", "b"].
// Bytes >= 0x80 are kept inside word tokens so UTF-8 text survives intact.
inline TokenSeq tokenize(const std::string& text) {
  TokenSeq out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (unsigned char c : text) {
    if (c < 0x80 && std::isspace(c)) {
      flush();
    } else if (c >= 0x80 || std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    }
  }
  flush();
  return out;
}

class Vocabulary {
 public:
  Vocabulary() {
    for (const auto& t : reserved_tokens()) {
      token_to_id_.emplace(t, static_cast<int>(id_to_token_.size()));
      id_to_token_.push_back(t);
    }
  }

  // Frequency-sorted construction; ties broken lexicographically so identical
  // corpora always get identical id assignments.
  static Vocabulary build(const std::vector<TokenSeq>& corpus, int min_freq = 1) {
    std::map<std::string, long> freq;
    for (const auto& seq : corpus)
      for (const auto& tok : seq) freq[tok]++;
    std::vector<std::pair<std::string, long>> items;
    for (auto& [tok, n] : freq) {
      if (n < min_freq) continue;
      bool reserved = std::find(reserved_tokens().begin(), reserved_tokens().end(), tok) !=
                      reserved_tokens().end();
      if (!reserved) items.emplace_back(tok, n);
    }
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    Vocabulary v;
    for (auto& [tok, n] : items) v.add(tok);
    return v;
  }

  // Rebuilds a vocabulary from its non-reserved tokens in id order.
  static Vocabulary from_tokens(const std::vector<std::string>& toks) {
    Vocabulary v;
    for (const auto& t : toks) v.add(t);
    return v;
  }

  int add(const std::string& tok) {
    auto it = token_to_id_.find(tok);
    if (it != token_to_id_.end()) return it->second;
    int id = static_cast<int>(id_to_token_.size());
    token_to_id_.emplace(tok, id);
    id_to_token_.push_back(tok);
    return id;
  }

  int id(const std::string& tok) const {
    auto it = token_to_id_.find(tok);
    return it == token_to_id_.end() ? kUnk : it->second;
  }

  bool contains(const std::string& tok) const { return token_to_id_.count(tok) > 0; }

  const std::string& token(int id) const {
    if (id < 0 || id >= size())
      throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary of size " +
                              std::to_string(size()));
    return id_to_token_[static_cast<std::size_t>(id)];
  }

  int size() const { return static_cast<int>(id_to_token_.size()); }

  IdSeq encode(const TokenSeq& toks) const {
    IdSeq ids;
    ids.reserve(toks.size());
    for (const auto& t : toks) ids.push_back(id(t));
    return ids;
  }

  TokenSeq decode(const IdSeq& ids) const {
    TokenSeq toks;
    toks.reserve(ids.size());
    for (int i : ids) toks.push_back(token(i));
    return toks;
  }

  // Non-reserved tokens in id order, for serialization.
  std::vector<std::string> payload_tokens() const {
    return {id_to_token_.begin() + kNumReserved, id_to_token_.end()};
  }

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
};

// Replaces non-reserved ids with <unk> independently with probability `rate`.
// Reserved ids are never dropped.
inline IdSeq word_dropout(const IdSeq& ids, double rate, Rng& rng) {
  IdSeq out = ids;
  if (rate <= 0.0) return out;
  for (int& id : out) {
    if (id >= kNumReserved && uniform01(rng) < rate) id = kUnk;
  }
  return out;
}

// Reads "token v1 ... v_dim" lines. Returns a token -> vector map.
inline std::unordered_map<std::string, Eigen::VectorXd> load_pretrained_embeddings(
    const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path);
  std::unordered_map<std::string, Eigen::VectorXd> table;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    Eigen::VectorXd vec(dim);
    for (int i = 0; i < dim; ++i) {
      if (!(ss >> vec[i]))
        throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " values after token");
    }
    double extra;
    if (ss >> extra)
      throw DataError(path + ":" + std::to_string(line_no) + ": too many values");
    table[tok] = vec;
  }
  return table;
}

// Dense lookup table of per-token vectors: a word part optionally seeded from
// a pretrained file, plus a character part initialized from hashed character
// trigrams so that surface-similar words start near each other. The whole
// matrix trains as one block; the <pad> row stays zero.
struct EmbeddingTable {
  int word_dim = 300;
  int char_dim = 100;
  Eigen::MatrixXd matrix;  // |V| x (word_dim + char_dim)

  int dim() const { return word_dim + char_dim; }

  static EmbeddingTable init(const Vocabulary& vocab, int word_dim, int char_dim, Rng& rng,
                             const std::unordered_map<std::string, Eigen::VectorXd>* pretrained =
                                 nullptr) {
    EmbeddingTable e;
    e.word_dim = word_dim;
    e.char_dim = char_dim;
    e.matrix = Eigen::MatrixXd::Zero(vocab.size(), word_dim + char_dim);

    for (int r = kNumReserved; r < vocab.size(); ++r)
      for (int c = 0; c < word_dim; ++c) e.matrix(r, c) = uniform_range(rng, -0.1, 0.1);
    for (int r = 1; r < kNumReserved; ++r)  // <unk>, <sos>, <eos>, separator
      for (int c = 0; c < word_dim; ++c) e.matrix(r, c) = uniform_range(rng, -0.1, 0.1);

    if (char_dim > 0) {
      constexpr int kBuckets = 1024;
      Eigen::MatrixXd buckets(kBuckets, char_dim);
      for (int r = 0; r < kBuckets; ++r)
        for (int c = 0; c < char_dim; ++c) buckets(r, c) = uniform_range(rng, -0.1, 0.1);
      for (int r = 1; r < vocab.size(); ++r) {
        const std::string padded = "#" + vocab.token(r) + "#";
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(char_dim);
        int n = 0;
        if (padded.size() < 3) {
          acc += buckets.row(trigram_bucket(padded, kBuckets)).transpose();
          n = 1;
        } else {
          for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
            acc += buckets.row(trigram_bucket(padded.substr(i, 3), kBuckets)).transpose();
            ++n;
          }
        }
        e.matrix.block(r, word_dim, 1, char_dim) = (acc / n).transpose();
      }
    }

    if (pretrained) {
      for (int r = 1; r < vocab.size(); ++r) {
        auto it = pretrained->find(vocab.token(r));
        if (it != pretrained->end()) e.matrix.block(r, 0, 1, word_dim) = it->second.transpose();
      }
    }
    e.matrix.row(kPad).setZero();
    return e;
  }

 private:
  static int trigram_bucket(std::string_view gram, int buckets) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : gram) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return static_cast<int>(h % static_cast<std::uint64_t>(buckets));
  }
};

}  // namespace attrex
