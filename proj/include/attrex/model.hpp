#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "attrex/errors.hpp"
#include "attrex/rng.hpp"
#include "attrex/text.hpp"
#include "attrex/triplet.hpp"

namespace attrex {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline VectorXd softmax(const VectorXd& z) {
  VectorXd out = (z.array() - z.maxCoeff()).exp();
  return out / out.sum();
}

// First index of the maximum, so ties resolve to the lowest index.
inline int argmax(const VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

struct ModelConfig {
  int d_hdd = 64;               // hidden size shared by encoder, hops and decoder
  int hops = 3;                 // memory hops in the predicate classifier
  int n_predicates = 0;         // predicate inventory size
  int word_dim = 300;           // word-level embedding width
  int char_dim = 100;           // character-level embedding width (0 disables)
  double trigger_threshold = 0.5;
  int max_decode_len = 12;
  double lambda = 0.5;          // classifier weight in the joint loss
  bool finetune_embeddings = true;

  int emb_dim() const { return word_dim + char_dim; }

  void validate() const {
    if (d_hdd < 1) throw UsageError("d_hdd must be positive");
    if (hops < 1) throw UsageError("hops must be at least 1");
    if (n_predicates < 1) throw UsageError("model needs at least one predicate");
    if (word_dim < 1 || char_dim < 0) throw UsageError("bad embedding dims");
    if (!(trigger_threshold > 0.0 && trigger_threshold < 1.0))
      throw UsageError("trigger threshold must lie in (0, 1)");
    if (max_decode_len < 1) throw UsageError("max_decode_len must be positive");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw UsageError("lambda must lie in [0, 1]");
  }
};

// Gated recurrent cell. Stacked matrices hold the reset, update and candidate
// blocks in that order:
//   r = sigmoid(Wr x + br_in + Ur h + br_hid)
//   u = sigmoid(Wu x + bu_in + Uu h + bu_hid)
//   n = tanh(Wn x + bn_in + r .* (Un h + bn_hid))
//   h' = (1 - u) .* n + u .* h
struct GruCell {
  MatrixXd w_input;   // 3d x in_dim
  MatrixXd w_hidden;  // 3d x d
  VectorXd b_input;   // 3d
  VectorXd b_hidden;  // 3d

  int hidden() const { return static_cast<int>(w_hidden.cols()); }
  int input_dim() const { return static_cast<int>(w_input.cols()); }

  static GruCell init(int in_dim, int d, Rng& rng) {
    GruCell c;
    c.w_input = MatrixXd::Zero(3 * d, in_dim);
    c.w_hidden = MatrixXd::Zero(3 * d, d);
    c.b_input = VectorXd::Zero(3 * d);
    c.b_hidden = VectorXd::Zero(3 * d);
    const double si = std::sqrt(6.0 / (in_dim + d));
    const double sh = std::sqrt(6.0 / (d + d));
    for (int r = 0; r < 3 * d; ++r) {
      for (int cc = 0; cc < in_dim; ++cc) c.w_input(r, cc) = uniform_range(rng, -si, si);
      for (int cc = 0; cc < d; ++cc) c.w_hidden(r, cc) = uniform_range(rng, -sh, sh);
    }
    return c;
  }

  static GruCell zeros_like(const GruCell& o) {
    GruCell c;
    c.w_input = MatrixXd::Zero(o.w_input.rows(), o.w_input.cols());
    c.w_hidden = MatrixXd::Zero(o.w_hidden.rows(), o.w_hidden.cols());
    c.b_input = VectorXd::Zero(o.b_input.size());
    c.b_hidden = VectorXd::Zero(o.b_hidden.size());
    return c;
  }
};

struct GruTrace {
  VectorXd x, h_prev, r, u, n, k, h;  // k = Un h_prev + bn_hid
};

inline VectorXd gru_step(const GruCell& c, const VectorXd& x, const VectorXd& h_prev,
                         GruTrace* trace = nullptr) {
  const int d = c.hidden();
  VectorXd a = c.w_input * x + c.b_input;
  VectorXd b = c.w_hidden * h_prev + c.b_hidden;
  VectorXd r = (a.segment(0, d) + b.segment(0, d)).unaryExpr([](double v) { return sigmoid(v); });
  VectorXd u =
      (a.segment(d, d) + b.segment(d, d)).unaryExpr([](double v) { return sigmoid(v); });
  VectorXd k = b.segment(2 * d, d);
  VectorXd n = (a.segment(2 * d, d) + r.cwiseProduct(k)).array().tanh();
  VectorXd h = (VectorXd::Ones(d) - u).cwiseProduct(n) + u.cwiseProduct(h_prev);
  if (trace) {
    trace->x = x;
    trace->h_prev = h_prev;
    trace->r = r;
    trace->u = u;
    trace->n = n;
    trace->k = k;
    trace->h = h;
  }
  return h;
}

struct ModelParams {
  ModelConfig config;
  MatrixXd embeddings;         // V x emb_dim; <pad> row stays zero
  GruCell enc_fw, enc_bw, dec;
  std::vector<MatrixXd> hop;   // hops+1 matrices, each J x d
  MatrixXd predicate_emb;      // J x emb_dim, decoder start-of-sequence inputs
  MatrixXd w_out;              // V x d, vocabulary head
  MatrixXd w_gate;             // 1 x (2 d + emb_dim), copy gate

  // Zero tensors of the right shapes for a given config and vocabulary size.
  static ModelParams shaped(const ModelConfig& cfg, int vocab_size) {
    cfg.validate();
    ModelParams p;
    p.config = cfg;
    const int d = cfg.d_hdd, e = cfg.emb_dim(), j = cfg.n_predicates;
    p.embeddings = MatrixXd::Zero(vocab_size, e);
    p.enc_fw = GruCell::zeros_like(GruCell{MatrixXd::Zero(3 * d, e), MatrixXd::Zero(3 * d, d),
                                           VectorXd::Zero(3 * d), VectorXd::Zero(3 * d)});
    p.enc_bw = p.enc_fw;
    p.dec = p.enc_fw;
    p.hop.assign(cfg.hops + 1, MatrixXd::Zero(j, d));
    p.predicate_emb = MatrixXd::Zero(j, e);
    p.w_out = MatrixXd::Zero(vocab_size, d);
    p.w_gate = MatrixXd::Zero(1, 2 * d + e);
    return p;
  }

  static ModelParams init(const ModelConfig& cfg, const EmbeddingTable& emb, Rng& rng) {
    ModelParams p = shaped(cfg, static_cast<int>(emb.matrix.rows()));
    p.embeddings = emb.matrix;
    const int d = cfg.d_hdd, e = cfg.emb_dim(), j = cfg.n_predicates;
    p.enc_fw = GruCell::init(e, d, rng);
    p.enc_bw = GruCell::init(e, d, rng);
    p.dec = GruCell::init(e, d, rng);
    for (auto& m : p.hop)
      for (int r = 0; r < j; ++r)
        for (int c = 0; c < d; ++c) m(r, c) = uniform_range(rng, -0.1, 0.1);
    for (int r = 0; r < j; ++r)
      for (int c = 0; c < e; ++c) p.predicate_emb(r, c) = uniform_range(rng, -0.1, 0.1);
    const int v = static_cast<int>(emb.matrix.rows());
    const double so = std::sqrt(6.0 / (v + d));
    for (int r = 0; r < v; ++r)
      for (int c = 0; c < d; ++c) p.w_out(r, c) = uniform_range(rng, -so, so);
    const double sg = std::sqrt(6.0 / (2 * d + e + 1));
    for (int c = 0; c < 2 * d + e; ++c) p.w_gate(0, c) = uniform_range(rng, -sg, sg);
    return p;
  }

  static ModelParams zeros_like(const ModelParams& o) {
    ModelParams p;
    p.config = o.config;
    p.embeddings = MatrixXd::Zero(o.embeddings.rows(), o.embeddings.cols());
    p.enc_fw = GruCell::zeros_like(o.enc_fw);
    p.enc_bw = GruCell::zeros_like(o.enc_bw);
    p.dec = GruCell::zeros_like(o.dec);
    p.hop.reserve(o.hop.size());
    for (const auto& m : o.hop) p.hop.push_back(MatrixXd::Zero(m.rows(), m.cols()));
    p.predicate_emb = MatrixXd::Zero(o.predicate_emb.rows(), o.predicate_emb.cols());
    p.w_out = MatrixXd::Zero(o.w_out.rows(), o.w_out.cols());
    p.w_gate = MatrixXd::Zero(o.w_gate.rows(), o.w_gate.cols());
    return p;
  }
};

struct TensorRef {
  std::string name;
  double* data;
  Eigen::Index rows, cols;
  Eigen::Index size() const { return rows * cols; }
};

// Stable enumeration of all trainable tensors; the order defines the
// serialization layout and the optimizer slot assignment.
inline std::vector<TensorRef> tensor_refs(ModelParams& p) {
  std::vector<TensorRef> refs;
  auto add_mat = [&](const std::string& name, MatrixXd& m) {
    refs.push_back({name, m.data(), m.rows(), m.cols()});
  };
  auto add_vec = [&](const std::string& name, VectorXd& v) {
    refs.push_back({name, v.data(), v.size(), 1});
  };
  auto add_cell = [&](const std::string& prefix, GruCell& c) {
    add_mat(prefix + ".w_input", c.w_input);
    add_mat(prefix + ".w_hidden", c.w_hidden);
    add_vec(prefix + ".b_input", c.b_input);
    add_vec(prefix + ".b_hidden", c.b_hidden);
  };
  add_mat("embeddings", p.embeddings);
  add_cell("enc_fw", p.enc_fw);
  add_cell("enc_bw", p.enc_bw);
  add_cell("dec", p.dec);
  for (std::size_t k = 0; k < p.hop.size(); ++k) add_mat("hop." + std::to_string(k), p.hop[k]);
  add_mat("predicate_emb", p.predicate_emb);
  add_mat("w_out", p.w_out);
  add_mat("w_gate", p.w_gate);
  return refs;
}

// Inverted-dropout configuration used by the traced forward pass. Inactive
// (eval-mode) when rate is zero or no generator is supplied.
struct DropoutPlan {
  double rate = 0.0;
  Rng* rng = nullptr;
  bool active() const { return rate > 0.0 && rng != nullptr; }
  VectorXd mask(Eigen::Index n) const {
    VectorXd m(n);
    const double keep = 1.0 - rate;
    for (Eigen::Index i = 0; i < n; ++i) m[i] = (uniform01(*rng) < rate) ? 0.0 : 1.0 / keep;
    return m;
  }
};

// Utterance mapped onto the extended vocabulary: base ids feed the encoder
// (<unk> for out-of-vocabulary words) while ext ids give every position a
// copy target, assigning ids V, V+1, ... to distinct OOV surfaces.
struct SourceIds {
  IdSeq base;
  IdSeq ext;
  TokenSeq oov;
};

inline SourceIds map_source(const Vocabulary& vocab, const TokenSeq& tokens) {
  SourceIds s;
  s.base.reserve(tokens.size());
  s.ext.reserve(tokens.size());
  for (const auto& tok : tokens) {
    if (vocab.contains(tok)) {
      int id = vocab.id(tok);
      s.base.push_back(id);
      s.ext.push_back(id);
    } else {
      s.base.push_back(kUnk);
      auto it = std::find(s.oov.begin(), s.oov.end(), tok);
      int slot = it == s.oov.end() ? static_cast<int>(s.oov.size())
                                   : static_cast<int>(it - s.oov.begin());
      if (it == s.oov.end()) s.oov.push_back(tok);
      s.ext.push_back(vocab.size() + slot);
    }
  }
  return s;
}

struct EncodedContext {
  MatrixXd states;    // l x d, per-position encoder states (directions summed)
  VectorXd summary;   // d, final forward state + final backward state
  IdSeq src_ids;      // ids fed to the encoder
  IdSeq ext_ids;      // extended-vocabulary id per position
  TokenSeq oov_tokens;
  int n_oov = 0;
  int ext_size(int vocab_size) const { return vocab_size + n_oov; }
};

struct EncoderTrace {
  std::vector<GruTrace> fw, bw;
  MatrixXd states_raw;    // pre-dropout states
  VectorXd summary_raw;
  MatrixXd state_mask;    // empty when dropout inactive
  VectorXd summary_mask;
};

// Bidirectional encoding. Per-position states and the sequence summary are
// the elementwise sums of the two directions.
inline EncodedContext encode_context(const ModelParams& p, const IdSeq& ids,
                                     EncoderTrace* trace = nullptr,
                                     const DropoutPlan* drop = nullptr) {
  if (ids.empty()) throw std::invalid_argument("encode_context: empty id sequence");
  const int l = static_cast<int>(ids.size());
  const int d = p.config.d_hdd;
  MatrixXd hf(l, d), hb(l, d);
  VectorXd h = VectorXd::Zero(d);
  if (trace) {
    trace->fw.resize(l);
    trace->bw.resize(l);
  }
  for (int t = 0; t < l; ++t) {
    h = gru_step(p.enc_fw, p.embeddings.row(ids[t]).transpose(), h, trace ? &trace->fw[t] : nullptr);
    hf.row(t) = h.transpose();
  }
  VectorXd fw_final = h;
  h.setZero();
  for (int t = l - 1; t >= 0; --t) {
    h = gru_step(p.enc_bw, p.embeddings.row(ids[t]).transpose(), h, trace ? &trace->bw[t] : nullptr);
    hb.row(t) = h.transpose();
  }
  VectorXd bw_final = h;

  EncodedContext ctx;
  ctx.states = hf + hb;
  ctx.summary = fw_final + bw_final;
  ctx.src_ids = ids;
  if (trace) {
    trace->states_raw = ctx.states;
    trace->summary_raw = ctx.summary;
  }
  if (drop && drop->active()) {
    MatrixXd smask(l, d);
    for (int t = 0; t < l; ++t) smask.row(t) = drop->mask(d).transpose();
    VectorXd qmask = drop->mask(d);
    ctx.states = ctx.states.cwiseProduct(smask);
    ctx.summary = ctx.summary.cwiseProduct(qmask);
    if (trace) {
      trace->state_mask = smask;
      trace->summary_mask = qmask;
    }
  }
  return ctx;
}

struct ClassifierTrace {
  std::vector<VectorXd> q;     // q^1 .. q^K
  std::vector<VectorXd> attn;  // softmax outputs of hops 1 .. K-1
  VectorXd scores;             // final-hop logits
};

// Multi-hop predicate scorer over the per-predicate memory matrices. Interior
// hops use softmax attention and additive query updates; the final hop scores
// the refined query and squashes with a sigmoid so predicates are independent.
inline VectorXd classify_predicates(const ModelParams& p, const VectorXd& query,
                                    ClassifierTrace* trace = nullptr) {
  const int hops = p.config.hops;
  VectorXd q = query;
  if (trace) {
    trace->q.clear();
    trace->attn.clear();
    trace->q.push_back(q);
  }
  for (int k = 0; k < hops - 1; ++k) {
    VectorXd a = softmax(p.hop[k] * q);
    q = q + p.hop[k + 1].transpose() * a;
    if (trace) {
      trace->attn.push_back(a);
      trace->q.push_back(q);
    }
  }
  VectorXd scores = p.hop[hops - 1] * q;
  if (trace) trace->scores = scores;
  return scores.unaryExpr([](double v) { return sigmoid(v); });
}

inline std::vector<int> trigger_set(const VectorXd& alpha, double threshold) {
  std::vector<int> out;
  for (int j = 0; j < alpha.size(); ++j)
    if (alpha[j] >= threshold) out.push_back(j);
  return out;
}

struct DecodeStep {
  GruTrace gru;
  VectorXd h;        // hidden state used by the output heads (post-dropout)
  VectorXd mask;     // dropout mask on h; empty when inactive
  VectorXd p_vocab;  // V
  VectorXd p_source; // l
  VectorXd context;  // d, attention-weighted sum of encoder states
  double p_gen = 0.0;
  VectorXd p_final;  // V + n_oov
};

// One generator step: advance the decoder cell, mix the vocabulary
// distribution with the source attention through the scalar copy gate, and
// scatter copy mass onto extended-vocabulary ids (duplicates accumulate).
inline DecodeStep decode_step(const ModelParams& p, const EncodedContext& ctx,
                              const VectorXd& h_prev, const VectorXd& x,
                              const DropoutPlan* drop = nullptr,
                              std::optional<double> gate_override = std::nullopt) {
  DecodeStep st;
  VectorXd h = gru_step(p.dec, x, h_prev, &st.gru);
  if (drop && drop->active()) {
    st.mask = drop->mask(h.size());
    st.h = h.cwiseProduct(st.mask);
  } else {
    st.h = h;
  }
  st.p_vocab = softmax(p.w_out * st.h);
  st.p_source = softmax(ctx.states * st.h);
  st.context = ctx.states.transpose() * st.p_source;
  if (gate_override) {
    st.p_gen = *gate_override;
  } else {
    VectorXd z(2 * p.config.d_hdd + p.config.emb_dim());
    z << st.h, x, st.context;
    st.p_gen = sigmoid((p.w_gate * z)(0, 0));
  }
  const int v = static_cast<int>(p.embeddings.rows());
  st.p_final = VectorXd::Zero(ctx.ext_size(v));
  st.p_final.head(v) = st.p_gen * st.p_vocab;
  for (std::size_t t = 0; t < ctx.ext_ids.size(); ++t)
    st.p_final[ctx.ext_ids[t]] += (1.0 - st.p_gen) * st.p_source[static_cast<int>(t)];
  return st;
}

struct GenerationResult {
  IdSeq ext_ids;   // emitted ids in extended space, end marker excluded
  TokenSeq tokens;
};

// Greedy decoding of one "subject ; object" token sequence for a predicate.
inline GenerationResult generate_entities(const ModelParams& p, const Vocabulary& vocab,
                                          const EncodedContext& ctx, int predicate,
                                          std::optional<double> gate_override = std::nullopt) {
  GenerationResult out;
  const int v = vocab.size();
  VectorXd h = ctx.summary;
  VectorXd x = p.predicate_emb.row(predicate).transpose();
  for (int t = 0; t < p.config.max_decode_len; ++t) {
    DecodeStep st = decode_step(p, ctx, h, x, nullptr, gate_override);
    int id = argmax(st.p_final);
    if (id == kEos) break;
    out.ext_ids.push_back(id);
    out.tokens.push_back(id < v ? vocab.token(id) : ctx.oov_tokens[id - v]);
    h = st.gru.h;
    x = p.embeddings.row(id < v ? id : kUnk).transpose();
  }
  return out;
}

struct ParsedEntities {
  TokenSeq subject;
  TokenSeq object;
  bool missing_separator = false;
};

// Splits a generated sequence at the first separator token. A sequence with
// no separator is read as an object-only answer for the speaker.
inline ParsedEntities parse_entity_tokens(const TokenSeq& tokens) {
  ParsedEntities out;
  auto sep = std::find(tokens.begin(), tokens.end(), reserved_tokens()[kSep]);
  if (sep == tokens.end()) {
    out.subject = {"i"};
    out.object = tokens;
    out.missing_separator = true;
  } else {
    out.subject.assign(tokens.begin(), sep);
    for (auto it = sep + 1; it != tokens.end(); ++it)
      if (*it != reserved_tokens()[kSep]) out.object.push_back(*it);
  }
  return out;
}

struct Model {
  ModelParams params;
  Vocabulary vocab;
  PredicateVocabulary predicates;
};

inline EncodedContext encode_utterance(const Model& m, const TokenSeq& tokens) {
  SourceIds src = map_source(m.vocab, tokens);
  EncodedContext ctx = encode_context(m.params, src.base);
  ctx.ext_ids = src.ext;
  ctx.oov_tokens = src.oov;
  ctx.n_oov = static_cast<int>(src.oov.size());
  return ctx;
}

// Runs the generator once per given predicate and deduplicates the parses.
inline std::vector<AttributeTriplet> extract_from_context(const Model& m,
                                                          const EncodedContext& ctx,
                                                          const std::vector<int>& predicates) {
  std::set<AttributeTriplet> found;
  for (int j : predicates) {
    GenerationResult gen = generate_entities(m.params, m.vocab, ctx, j);
    ParsedEntities pe = parse_entity_tokens(gen.tokens);
    if (pe.object.empty()) continue;
    AttributeTriplet t;
    t.subject = pe.subject.empty() ? TokenSeq{"i"} : pe.subject;
    t.predicate = j;
    t.object = pe.object;
    found.insert(std::move(t));
  }
  return {found.begin(), found.end()};
}

// Generator with the predicate decision forced from outside.
inline std::vector<AttributeTriplet> extract_with(const Model& m, const std::string& utterance,
                                                  const std::vector<int>& predicates) {
  TokenSeq tokens = tokenize(utterance);
  if (tokens.empty()) return {};
  return extract_from_context(m, encode_utterance(m, tokens), predicates);
}

// Full per-utterance pipeline: encode, threshold the predicate scores, run
// the generator once per triggered predicate.
inline std::vector<AttributeTriplet> extract(const Model& m, const std::string& utterance) {
  TokenSeq tokens = tokenize(utterance);
  if (tokens.empty()) return {};
  EncodedContext ctx = encode_utterance(m, tokens);
  VectorXd alpha = classify_predicates(m.params, ctx.summary);
  return extract_from_context(m, ctx, trigger_set(alpha, m.params.config.trigger_threshold));
}

}  // namespace attrex
