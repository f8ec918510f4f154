#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "attrex/model.hpp"

namespace attrex {

inline constexpr double kProbEps = 1e-7;

// Supervision for one utterance: encoder ids, the multi-hot predicate label,
// and one gold entity sequence ("subject ; object <eos>", in extended-
// vocabulary ids) per positive predicate.
struct LabeledExample {
  TokenSeq tokens;
  IdSeq ids;      // base-vocabulary encoder input
  IdSeq ext_ids;  // extended-vocabulary id per position
  TokenSeq oov_tokens;
  std::vector<std::uint8_t> r_label;
  std::map<int, IdSeq> entity_targets;
};

// Maps gold entity tokens into the utterance's extended vocabulary: in-vocab
// tokens keep their id, out-of-vocabulary tokens that appear in the utterance
// get its copy slot, anything else falls back to <unk>.
inline IdSeq entity_target_ids(const TokenSeq& subject, const TokenSeq& object,
                               const Vocabulary& vocab, const SourceIds& src) {
  auto resolve = [&](const std::string& tok) {
    if (vocab.contains(tok)) return vocab.id(tok);
    auto it = std::find(src.oov.begin(), src.oov.end(), tok);
    if (it != src.oov.end())
      return vocab.size() + static_cast<int>(it - src.oov.begin());
    return static_cast<int>(kUnk);
  };
  IdSeq out;
  for (const auto& t : subject) out.push_back(resolve(t));
  out.push_back(kSep);
  for (const auto& t : object) out.push_back(resolve(t));
  out.push_back(kEos);
  return out;
}

inline LabeledExample make_example(const LabeledUtterance& lu, const Vocabulary& vocab,
                                   const PredicateVocabulary& preds) {
  LabeledExample ex;
  ex.tokens = tokenize(lu.utterance);
  if (ex.tokens.empty()) throw std::invalid_argument("empty utterance");
  SourceIds src = map_source(vocab, ex.tokens);
  ex.ids = src.base;
  ex.ext_ids = src.ext;
  ex.oov_tokens = src.oov;
  ex.r_label.assign(preds.size(), 0);
  for (const auto& t : lu.triplets) {
    int j = preds.id(t.predicate);
    if (j < 0) throw DataError("unknown predicate: " + t.predicate);
    if (ex.r_label[j]) continue;  // one gold sequence per predicate; first wins
    ex.r_label[j] = 1;
    TokenSeq subj = tokenize(t.subject), obj = tokenize(t.object);
    if (subj.empty() || obj.empty())
      throw DataError("triplet with empty subject or object for predicate " + t.predicate);
    ex.entity_targets[j] = entity_target_ids(subj, obj, vocab, src);
  }
  return ex;
}

// ---------------------------------------------------------------------------
// Losses

inline double predicate_loss(const VectorXd& alpha, const std::vector<std::uint8_t>& r) {
  double loss = 0.0;
  for (int j = 0; j < alpha.size(); ++j) {
    double a = std::min(std::max(alpha[j], kProbEps), 1.0 - kProbEps);
    loss -= r[static_cast<std::size_t>(j)] ? std::log(a) : std::log(1.0 - a);
  }
  return loss;
}

inline double entity_loss(const std::vector<VectorXd>& dists, const IdSeq& target) {
  double loss = 0.0;
  for (std::size_t t = 0; t < target.size(); ++t)
    loss -= std::log(std::max(dists[t][target[t]], kProbEps));
  return loss;
}

inline double total_loss(double loss_p, double loss_v, double lambda) {
  return lambda * loss_p + (1.0 - lambda) * loss_v;
}

// ---------------------------------------------------------------------------
// Traced forward pass over one example

struct PairTape {
  int predicate = -1;
  IdSeq target;
  std::vector<DecodeStep> steps;
  std::vector<VectorXd> inputs;  // decoder input per step
  std::vector<int> input_rows;   // embedding row per step; -1 = predicate row
  double loss = 0.0;             // summed negative log-likelihood
};

struct ExampleTape {
  IdSeq enc_ids;
  EncoderTrace enc;
  EncodedContext ctx;  // post-dropout states/summary
  ClassifierTrace cls;
  VectorXd alpha;
  double loss_p = 0.0;
  std::vector<PairTape> pairs;
};

inline ExampleTape forward_example(const ModelParams& p, const LabeledExample& ex,
                                   const IdSeq* enc_ids = nullptr,
                                   const DropoutPlan* drop = nullptr) {
  ExampleTape tape;
  tape.enc_ids = enc_ids ? *enc_ids : ex.ids;
  tape.ctx = encode_context(p, tape.enc_ids, &tape.enc, drop);
  tape.ctx.ext_ids = ex.ext_ids;  // copy targets keep the original surface ids
  tape.ctx.oov_tokens = ex.oov_tokens;
  tape.ctx.n_oov = static_cast<int>(ex.oov_tokens.size());
  tape.alpha = classify_predicates(p, tape.ctx.summary, &tape.cls);
  tape.loss_p = predicate_loss(tape.alpha, ex.r_label);

  for (const auto& [pred, target] : ex.entity_targets) {
    PairTape pair;
    pair.predicate = pred;
    pair.target = target;
    VectorXd h = tape.ctx.summary;
    VectorXd x = p.predicate_emb.row(pred).transpose();
    int x_row = -1;
    for (int y : target) {
      DecodeStep st = decode_step(p, tape.ctx, h, x, drop);
      pair.loss -= std::log(std::max(st.p_final[y], kProbEps));
      pair.inputs.push_back(x);
      pair.input_rows.push_back(x_row);
      h = st.gru.h;
      x_row = y < p.embeddings.rows() ? y : kUnk;
      x = p.embeddings.row(x_row).transpose();
      pair.steps.push_back(std::move(st));
    }
    tape.pairs.push_back(std::move(pair));
  }
  return tape;
}

// ---------------------------------------------------------------------------
// Backward pass

// Accumulates parameter gradients for one GRU step. dx is freshly assigned;
// dh_prev is accumulated so chained steps can sum output and recurrent paths.
inline void gru_step_backward(const GruCell& c, const GruTrace& tr, const VectorXd& dh,
                              GruCell& g, VectorXd& dx, VectorXd& dh_prev) {
  const int d = c.hidden();
  VectorXd du = dh.cwiseProduct(tr.h_prev - tr.n);
  VectorXd dn = dh.cwiseProduct(VectorXd::Ones(d) - tr.u);
  dh_prev += dh.cwiseProduct(tr.u);
  VectorXd dan = dn.cwiseProduct((1.0 - tr.n.array().square()).matrix());
  VectorXd dr = dan.cwiseProduct(tr.k);
  VectorXd dk = dan.cwiseProduct(tr.r);
  VectorXd dar = dr.cwiseProduct(tr.r.cwiseProduct(VectorXd::Ones(d) - tr.r));
  VectorXd dau = du.cwiseProduct(tr.u.cwiseProduct(VectorXd::Ones(d) - tr.u));
  VectorXd da(3 * d), db(3 * d);
  da << dar, dau, dan;
  db << dar, dau, dk;
  g.w_input += da * tr.x.transpose();
  g.b_input += da;
  g.w_hidden += db * tr.h_prev.transpose();
  g.b_hidden += db;
  dx = c.w_input.transpose() * da;
  dh_prev += c.w_hidden.transpose() * db;
}

// Backpropagates one example's tape into `g`. scale_p multiplies the
// predicate-loss gradient, scale_v the entity-loss gradient; the caller picks
// them so that the batch loss is lambda * mean(L_p) + (1-lambda) * mean(L_v).
inline void backward_example(const ModelParams& p, const LabeledExample& ex,
                             const ExampleTape& tape, double scale_p, double scale_v,
                             ModelParams& g) {
  const int d = p.config.d_hdd;
  const int l = static_cast<int>(tape.enc_ids.size());
  const int v = static_cast<int>(p.embeddings.rows());
  VectorXd d_summary = VectorXd::Zero(d);
  MatrixXd d_states = MatrixXd::Zero(l, d);

  // Generator pairs.
  for (const auto& pair : tape.pairs) {
    const int steps = static_cast<int>(pair.steps.size());
    VectorXd dh_chain = VectorXd::Zero(d);
    for (int t = steps - 1; t >= 0; --t) {
      const DecodeStep& st = pair.steps[t];
      const int y = pair.target[t];
      VectorXd dh_tilde = VectorXd::Zero(d);
      VectorXd dx_extra = VectorXd::Zero(p.config.emb_dim());

      if (scale_v != 0.0 && st.p_final[y] > kProbEps) {
        const double dP = -scale_v / st.p_final[y];
        double src_mass = 0.0;
        for (std::size_t q = 0; q < tape.ctx.ext_ids.size(); ++q)
          if (tape.ctx.ext_ids[q] == y) src_mass += st.p_source[static_cast<int>(q)];
        const double in_vocab = y < v ? st.p_vocab[y] : 0.0;
        double dp_gen = dP * (in_vocab - src_mass);
        VectorXd dp_source = VectorXd::Zero(l);
        for (std::size_t q = 0; q < tape.ctx.ext_ids.size(); ++q)
          if (tape.ctx.ext_ids[q] == y) dp_source[static_cast<int>(q)] = dP * (1.0 - st.p_gen);

        // Copy gate: p_gen = sigmoid(w_gate [h; x; v_ctx]).
        VectorXd dv = VectorXd::Zero(d);
        {
          const double dg = dp_gen * st.p_gen * (1.0 - st.p_gen);
          VectorXd z(2 * d + p.config.emb_dim());
          z << st.h, pair.inputs[t], st.context;
          g.w_gate += dg * z.transpose();
          VectorXd dz = p.w_gate.transpose() * dg;
          dh_tilde += dz.head(d);
          dx_extra += dz.segment(d, p.config.emb_dim());
          dv += dz.tail(d);
        }

        // Attention context v_ctx = states^T p_source.
        dp_source += tape.ctx.states * dv;
        d_states += st.p_source * dv.transpose();

        // p_source = softmax(states h).
        VectorXd ds_src =
            st.p_source.cwiseProduct(dp_source.array().matrix() -
                                     VectorXd::Constant(l, st.p_source.dot(dp_source)));
        dh_tilde += tape.ctx.states.transpose() * ds_src;
        d_states += ds_src * st.h.transpose();

        // p_vocab = softmax(w_out h); upstream is one-hot at y when in vocab.
        if (y < v) {
          const double dpv = dP * st.p_gen;
          const double dot = st.p_vocab[y] * dpv;
          VectorXd ds_voc = st.p_vocab * (-dot);
          ds_voc[y] += st.p_vocab[y] * dpv;
          g.w_out += ds_voc * st.h.transpose();
          dh_tilde += p.w_out.transpose() * ds_voc;
        }
      }

      VectorXd dh = st.mask.size() ? dh_tilde.cwiseProduct(st.mask) : dh_tilde;
      dh += dh_chain;
      dh_chain.setZero();
      VectorXd dx;
      gru_step_backward(p.dec, st.gru, dh, g.dec, dx, dh_chain);
      dx += dx_extra;
      if (pair.input_rows[t] < 0)
        g.predicate_emb.row(pair.predicate) += dx.transpose();
      else
        g.embeddings.row(pair.input_rows[t]) += dx.transpose();
    }
    d_summary += dh_chain;  // decoder initial state is the context summary
  }

  // Classifier: dL/d(score_j) = scale_p (alpha_j - r_j) while unclamped.
  {
    const int hops = p.config.hops;
    VectorXd ds = VectorXd::Zero(p.config.n_predicates);
    if (scale_p != 0.0) {
      for (int j = 0; j < ds.size(); ++j) {
        const double a = tape.alpha[j];
        if (a > kProbEps && a < 1.0 - kProbEps)
          ds[j] = scale_p * (a - static_cast<double>(ex.r_label[static_cast<std::size_t>(j)]));
      }
    }
    g.hop[hops - 1] += ds * tape.cls.q[hops - 1].transpose();
    VectorXd dq = p.hop[hops - 1].transpose() * ds;
    for (int k = hops - 2; k >= 0; --k) {
      const VectorXd& a = tape.cls.attn[k];
      VectorXd da = p.hop[k + 1] * dq;
      g.hop[k + 1] += a * dq.transpose();
      VectorXd ds_att = a.cwiseProduct(da.array().matrix() -
                                       VectorXd::Constant(a.size(), a.dot(da)));
      g.hop[k] += ds_att * tape.cls.q[k].transpose();
      dq += p.hop[k].transpose() * ds_att;
    }
    d_summary += dq;
  }

  // Undo the dropout scaling on the encoder outputs.
  if (tape.enc.summary_mask.size()) d_summary = d_summary.cwiseProduct(tape.enc.summary_mask);
  if (tape.enc.state_mask.size()) d_states = d_states.cwiseProduct(tape.enc.state_mask);

  // Forward direction: states[t] takes hf_t, summary takes hf_{l-1}.
  {
    VectorXd dh_chain = VectorXd::Zero(d);
    for (int t = l - 1; t >= 0; --t) {
      VectorXd dh = d_states.row(t).transpose() + dh_chain;
      if (t == l - 1) dh += d_summary;
      dh_chain.setZero();
      VectorXd dx;
      gru_step_backward(p.enc_fw, tape.enc.fw[t], dh, g.enc_fw, dx, dh_chain);
      g.embeddings.row(tape.enc_ids[t]) += dx.transpose();
    }
  }
  // Backward direction runs positions l-1..0, so its BPTT runs 0..l-1.
  {
    VectorXd dh_chain = VectorXd::Zero(d);
    for (int t = 0; t < l; ++t) {
      VectorXd dh = d_states.row(t).transpose() + dh_chain;
      if (t == 0) dh += d_summary;
      dh_chain.setZero();
      VectorXd dx;
      gru_step_backward(p.enc_bw, tape.enc.bw[t], dh, g.enc_bw, dx, dh_chain);
      g.embeddings.row(tape.enc_ids[t]) += dx.transpose();
    }
  }

  g.embeddings.row(kPad).setZero();
  if (!p.config.finetune_embeddings) g.embeddings.setZero();
}

// ---------------------------------------------------------------------------
// Batch loss (shared by the train loop and the gradient checker)

struct BatchStats {
  double loss_p_sum = 0.0;
  double loss_v_sum = 0.0;
  long n_examples = 0;
  long n_pairs = 0;

  double mean_p() const { return n_examples ? loss_p_sum / n_examples : 0.0; }
  double mean_v() const { return n_pairs ? loss_v_sum / n_pairs : 0.0; }
  double total(double lambda) const { return total_loss(mean_p(), mean_v(), lambda); }
};

inline BatchStats batch_loss(const ModelParams& p, const std::vector<LabeledExample>& batch) {
  BatchStats st;
  for (const auto& ex : batch) {
    ExampleTape tape = forward_example(p, ex);
    st.loss_p_sum += tape.loss_p;
    st.n_examples += 1;
    for (const auto& pair : tape.pairs) {
      st.loss_v_sum += pair.loss;
      st.n_pairs += 1;
    }
  }
  return st;
}

// ---------------------------------------------------------------------------
// Optimizer

struct AdamState {
  std::vector<VectorXd> m, v;
  long t = 0;

  static AdamState init(ModelParams& p) {
    AdamState s;
    for (const auto& ref : tensor_refs(p)) {
      s.m.push_back(VectorXd::Zero(ref.size()));
      s.v.push_back(VectorXd::Zero(ref.size()));
    }
    return s;
  }
};

inline double gradient_norm(ModelParams& g) {
  double sq = 0.0;
  for (const auto& ref : tensor_refs(g))
    sq += Eigen::Map<VectorXd>(ref.data, ref.size()).squaredNorm();
  return std::sqrt(sq);
}

inline double clip_gradients(ModelParams& g, double max_norm) {
  double norm = gradient_norm(g);
  if (norm > max_norm && norm > 0.0) {
    double scale = max_norm / norm;
    for (const auto& ref : tensor_refs(g))
      Eigen::Map<VectorXd>(ref.data, ref.size()) *= scale;
  }
  return norm;
}

inline void adam_step(ModelParams& p, ModelParams& g, AdamState& s, double lr,
                      double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
  s.t += 1;
  auto prefs = tensor_refs(p);
  auto grefs = tensor_refs(g);
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < prefs.size(); ++i) {
    Eigen::Map<VectorXd> theta(prefs[i].data, prefs[i].size());
    Eigen::Map<VectorXd> grad(grefs[i].data, grefs[i].size());
    s.m[i] = beta1 * s.m[i] + (1.0 - beta1) * grad;
    s.v[i] = beta2 * s.v[i] + (1.0 - beta2) * grad.cwiseProduct(grad);
    VectorXd mhat = s.m[i] / bc1;
    VectorXd vhat = s.v[i] / bc2;
    theta -= lr * mhat.cwiseQuotient(vhat.cwiseSqrt().array().matrix() +
                                     VectorXd::Constant(vhat.size(), eps));
  }
}

// ---------------------------------------------------------------------------
// Training loop

struct TrainConfig {
  int batch_size = 32;
  double lr_start = 1e-3;
  double lr_end = 1e-4;
  double dropout = 0.6;
  double word_dropout = 0.1;
  int max_epochs = 50;
  std::uint64_t seed = 1;
  double grad_clip = 5.0;

  void validate() const {
    if (batch_size < 1) throw UsageError("batch_size must be positive");
    if (lr_end > lr_start) throw UsageError("lr_end must not exceed lr_start");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw UsageError("dropout must lie in [0,1)");
    if (!(word_dropout >= 0.0 && word_dropout <= 1.0))
      throw UsageError("word_dropout must lie in [0,1]");
    if (max_epochs < 0) throw UsageError("max_epochs must be non-negative");
    if (grad_clip <= 0.0) throw UsageError("grad_clip must be positive");
  }
};

struct EpochMetrics {
  int epoch = 0;
  double loss_p = 0.0;
  double loss_v = 0.0;
  double loss_total = 0.0;
  double lr = 0.0;
  double wall_s = 0.0;
};

struct TrainHooks {
  std::function<void(const EpochMetrics&)> on_epoch;
  std::function<void(const Model&, int, const AdamState&)> on_checkpoint;
};

inline double annealed_lr(const TrainConfig& tc, int epoch) {
  if (tc.max_epochs <= 1) return tc.lr_start;
  double f = static_cast<double>(epoch) / (tc.max_epochs - 1);
  return tc.lr_start + (tc.lr_end - tc.lr_start) * f;
}

// Deterministic per-epoch stream so a resumed run replays the exact epochs a
// straight-through run would have executed.
inline Rng epoch_rng(std::uint64_t seed, int epoch) {
  return Rng(seed ^ (0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(epoch) + 1)));
}

// Runs epochs [start_epoch, end_epoch). end_epoch < 0 means tc.max_epochs;
// the learning-rate anneal always spans the full tc.max_epochs horizon, so a
// run stopped early and resumed later replays the straight-through schedule.
inline std::vector<EpochMetrics> train(Model& model, const std::vector<LabeledExample>& data,
                                       const TrainConfig& tc, const TrainHooks& hooks = {},
                                       AdamState* adam_io = nullptr, int start_epoch = 0,
                                       int end_epoch = -1) {
  tc.validate();
  if (data.empty()) throw DataError("training corpus is empty");
  model.params.config.validate();
  const double lambda = model.params.config.lambda;
  if (end_epoch < 0) end_epoch = tc.max_epochs;

  AdamState local_adam = adam_io ? *adam_io : AdamState::init(model.params);
  ModelParams grads = ModelParams::zeros_like(model.params);
  std::vector<EpochMetrics> log;

  for (int epoch = start_epoch; epoch < end_epoch; ++epoch) {
    auto tick = std::chrono::steady_clock::now();
    Rng rng = epoch_rng(tc.seed, epoch);
    const double lr = annealed_lr(tc, epoch);
    std::vector<int> order = shuffled_indices(static_cast<int>(data.size()), rng);

    double ep_loss_p = 0.0, ep_loss_v = 0.0;
    long ep_pairs = 0;

    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      const std::size_t end = std::min(order.size(), start + tc.batch_size);
      for (auto& ref : tensor_refs(grads)) Eigen::Map<VectorXd>(ref.data, ref.size()).setZero();

      // First pass: forward with per-example dropout, collecting tapes.
      std::vector<ExampleTape> tapes;
      std::vector<const LabeledExample*> batch;
      long batch_pairs = 0;
      double batch_loss_p = 0.0, batch_loss_v = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const LabeledExample& ex = data[static_cast<std::size_t>(order[i])];
        IdSeq dropped = word_dropout(ex.ids, tc.word_dropout, rng);
        DropoutPlan drop{tc.dropout, &rng};
        ExampleTape tape = forward_example(model.params, ex, &dropped, &drop);
        batch_loss_p += tape.loss_p;
        for (const auto& pair : tape.pairs) {
          batch_loss_v += pair.loss;
          batch_pairs += 1;
        }
        tapes.push_back(std::move(tape));
        batch.push_back(&ex);
      }

      const long batch_n = static_cast<long>(end - start);
      const double blp = batch_loss_p / batch_n;
      const double blv = batch_pairs ? batch_loss_v / batch_pairs : 0.0;
      if (!std::isfinite(total_loss(blp, blv, lambda)))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                           std::to_string(start / tc.batch_size));

      const double scale_p = lambda / batch_n;
      const double scale_v = batch_pairs ? (1.0 - lambda) / batch_pairs : 0.0;
      for (std::size_t i = 0; i < tapes.size(); ++i)
        backward_example(model.params, *batch[i], tapes[i], scale_p, scale_v, grads);

      clip_gradients(grads, tc.grad_clip);
      adam_step(model.params, grads, local_adam, lr);
      model.params.embeddings.row(kPad).setZero();

      ep_loss_p += batch_loss_p;
      ep_loss_v += batch_loss_v;
      ep_pairs += batch_pairs;
    }

    EpochMetrics em;
    em.epoch = epoch;
    em.loss_p = ep_loss_p / static_cast<double>(data.size());
    em.loss_v = ep_pairs ? ep_loss_v / static_cast<double>(ep_pairs) : 0.0;
    em.loss_total = total_loss(em.loss_p, em.loss_v, lambda);
    em.lr = lr;
    em.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - tick).count();
    log.push_back(em);
    if (hooks.on_epoch) hooks.on_epoch(em);
    if (hooks.on_checkpoint) hooks.on_checkpoint(model, epoch, local_adam);
  }

  if (adam_io) *adam_io = std::move(local_adam);
  return log;
}

// ---------------------------------------------------------------------------
// Finite-difference verification

// Central differences with h=1e-5 against the analytic backward pass, in
// evaluation mode (no dropout). Elements where both gradients sit below the
// noise floor count as exact matches.
inline double gradient_check(ModelParams& params, const std::vector<LabeledExample>& batch,
                             double h = 1e-5) {
  const double lambda = params.config.lambda;
  BatchStats stats = batch_loss(params, batch);
  const double scale_p = lambda / static_cast<double>(batch.size());
  const double scale_v = stats.n_pairs ? (1.0 - lambda) / stats.n_pairs : 0.0;

  ModelParams grads = ModelParams::zeros_like(params);
  for (const auto& ex : batch) {
    ExampleTape tape = forward_example(params, ex);
    backward_example(params, ex, tape, scale_p, scale_v, grads);
  }

  double max_rel = 0.0;
  auto prefs = tensor_refs(params);
  auto grefs = tensor_refs(grads);
  for (std::size_t i = 0; i < prefs.size(); ++i) {
    for (Eigen::Index k = 0; k < prefs[i].size(); ++k) {
      double& theta = prefs[i].data[k];
      const double saved = theta;
      theta = saved + h;
      const double up = batch_loss(params, batch).total(lambda);
      theta = saved - h;
      const double down = batch_loss(params, batch).total(lambda);
      theta = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grefs[i].data[k];
      // The 1e-5 floor keeps central-difference roundoff (about 1e-10 in
      // absolute terms at these loss scales) from dominating near-zero
      // gradients; real sign or scale bugs still trip the threshold.
      const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-5});
      max_rel = std::max(max_rel, std::abs(numeric - analytic) / denom);
    }
  }
  return max_rel;
}

}  // namespace attrex
