#include "loralab/model.hpp"

#include <cmath>
#include <numeric>

#include "loralab/errors.hpp"

namespace loralab {

void ModelConfig::validate() const {
  if (vocab_size < 4)
    throw ConfigError("model: vocab_size must be >= 4 (3 reserved + content)");
  if (d_model < 1) throw ConfigError("model: d_model must be >= 1");
  if (d_ff < 1) throw ConfigError("model: d_ff must be >= 1");
  if (n_layers < 1) throw ConfigError("model: n_layers must be >= 1");
  if (n_heads < 1) throw ConfigError("model: n_heads must be >= 1");
  if (d_model % n_heads != 0)
    throw ConfigError("model: d_model (" + std::to_string(d_model) +
                      ") not divisible by n_heads (" + std::to_string(n_heads) +
                      ")");
  if (max_len < 1) throw ConfigError("model: max_len must be >= 1");
}

AdaptedLinear& LayerWeights::matrix(MatrixName name) {
  switch (name) {
    case MatrixName::Wq: return attn_q;
    case MatrixName::Wk: return attn_k;
    case MatrixName::Wv: return attn_v;
    case MatrixName::Wo: return attn_o;
    case MatrixName::Wf1: return ff_in;
    case MatrixName::Wf2: return ff_out;
  }
  throw LookupError("unknown matrix name enum");
}

const AdaptedLinear& LayerWeights::matrix(MatrixName name) const {
  return const_cast<LayerWeights*>(this)->matrix(name);
}

Tape::NodeId ForwardCtx::leaf_for(const Param& p) {
  auto it = leaves.find(&p);
  if (it != leaves.end()) return it->second;
  Tape::NodeId id = tape.leaf(p.value, &p);
  leaves.emplace(&p, id);
  return id;
}

namespace {

// Width-aware init: unit-variance signal propagation at any d_model, so the
// toy stays trainable where BERT-style fixed 0.02 would starve it.
Param gaussian_param(const std::string& name, int rows, int cols,
                     double stddev, uint64_t seed) {
  Rng rng = Rng::stream(seed, "model-init/" + name);
  return Param{name, Matrix::gaussian(rows, cols, stddev, rng), true};
}

std::string layer_prefix(int layer) { return "L" + std::to_string(layer); }

}  // namespace

TransformerModel TransformerModel::init(const ModelConfig& config, Vocab vocab) {
  config.validate();
  if (int(vocab.id_to_token.size()) != config.vocab_size)
    throw ConfigError("model: vocab_size " + std::to_string(config.vocab_size) +
                      " does not match vocab of " +
                      std::to_string(vocab.id_to_token.size()) + " tokens");

  TransformerModel m;
  m.config_ = config;
  m.vocab_ = std::move(vocab);
  const uint64_t seed = config.seed;
  const int d = config.d_model;

  const double proj_sd = 1.0 / std::sqrt(double(d));
  const double ff_sd = 1.0 / std::sqrt(double(config.d_ff));
  m.tok_emb_ = gaussian_param("tok_emb", config.vocab_size, d, 0.1, seed);
  m.pos_emb_ = gaussian_param("pos_emb", config.max_len, d, 0.1, seed);

  m.layers_.resize(size_t(config.n_layers));
  for (int l = 0; l < config.n_layers; ++l) {
    LayerWeights& lw = m.layers_[size_t(l)];
    const std::string pre = layer_prefix(l) + ".";
    lw.attn_q.weight = gaussian_param(pre + "W_q", d, d, proj_sd, seed);
    lw.attn_k.weight = gaussian_param(pre + "W_k", d, d, proj_sd, seed);
    lw.attn_v.weight = gaussian_param(pre + "W_v", d, d, proj_sd, seed);
    lw.attn_o.weight = gaussian_param(pre + "W_o", d, d, proj_sd, seed);
    lw.ff_in.weight = gaussian_param(pre + "W_f1", config.d_ff, d, proj_sd, seed);
    lw.ff_out.weight = gaussian_param(pre + "W_f2", d, config.d_ff, ff_sd, seed);
    lw.ln1_gain = Param{pre + "ln1.gain", Matrix::filled(1, d, 1.0), true};
    lw.ln1_bias = Param{pre + "ln1.bias", Matrix::zeros(1, d), true};
    lw.ln2_gain = Param{pre + "ln2.gain", Matrix::filled(1, d, 1.0), true};
    lw.ln2_bias = Param{pre + "ln2.bias", Matrix::zeros(1, d), true};
  }

  m.final_ln_gain_ = Param{"final_ln.gain", Matrix::filled(1, d, 1.0), true};
  m.final_ln_bias_ = Param{"final_ln.bias", Matrix::zeros(1, d), true};
  m.out_proj_ = gaussian_param("W_out", config.vocab_size, d, proj_sd, seed);
  return m;
}

AdaptedLinear& TransformerModel::matrix_at(int layer, MatrixName name) {
  if (layer < 0 || layer >= n_layers())
    throw LookupError("model: no layer " + std::to_string(layer) + " (have " +
                      std::to_string(n_layers()) + ")");
  return layers_[size_t(layer)].matrix(name);
}

std::vector<Param*> TransformerModel::params() {
  std::vector<Param*> out;
  out.push_back(&tok_emb_);
  out.push_back(&pos_emb_);
  for (LayerWeights& lw : layers_) {
    for (MatrixName name : all_matrix_names()) {
      AdaptedLinear& lin = lw.matrix(name);
      out.push_back(&lin.weight);
      if (lin.slot.lora) {
        out.push_back(&lin.slot.lora->a);
        out.push_back(&lin.slot.lora->b);
      }
      if (lin.slot.svd) {
        out.push_back(&lin.slot.svd->p);
        out.push_back(&lin.slot.svd->lambda);
        out.push_back(&lin.slot.svd->q);
      }
    }
    out.push_back(&lw.ln1_gain);
    out.push_back(&lw.ln1_bias);
    out.push_back(&lw.ln2_gain);
    out.push_back(&lw.ln2_bias);
  }
  out.push_back(&final_ln_gain_);
  out.push_back(&final_ln_bias_);
  out.push_back(&out_proj_);
  return out;
}

std::vector<const Param*> TransformerModel::params() const {
  auto mut = const_cast<TransformerModel*>(this)->params();
  return std::vector<const Param*>(mut.begin(), mut.end());
}

std::vector<Param*> TransformerModel::base_params() {
  std::vector<Param*> out;
  out.push_back(&tok_emb_);
  out.push_back(&pos_emb_);
  for (LayerWeights& lw : layers_) {
    for (MatrixName name : all_matrix_names())
      out.push_back(&lw.matrix(name).weight);
    out.push_back(&lw.ln1_gain);
    out.push_back(&lw.ln1_bias);
    out.push_back(&lw.ln2_gain);
    out.push_back(&lw.ln2_bias);
  }
  out.push_back(&final_ln_gain_);
  out.push_back(&final_ln_bias_);
  out.push_back(&out_proj_);
  return out;
}

std::vector<const Param*> TransformerModel::base_params() const {
  auto mut = const_cast<TransformerModel*>(this)->base_params();
  return std::vector<const Param*>(mut.begin(), mut.end());
}

long TransformerModel::total_param_count() const {
  long n = 0;
  for (const Param* p : params()) n += p->count();
  return n;
}

long TransformerModel::trainable_param_count() const {
  long n = 0;
  for (const Param* p : params())
    if (p->trainable) n += p->count();
  return n;
}

void TransformerModel::set_all_trainable(bool trainable) {
  for (Param* p : params()) p->trainable = trainable;
}

Tape::NodeId TransformerModel::adapted_linear(ForwardCtx& ctx, Tape::NodeId x,
                                              const AdaptedLinear& lin,
                                              int layer_index,
                                              MatrixName name) const {
  Tape& t = ctx.tape;
  Tape::NodeId y = t.matmul_nt(x, ctx.leaf_for(lin.weight));

  if (lin.slot.lora) {
    const LoraAdapter& ad = *lin.slot.lora;
    Tape::NodeId branch_in = x;
    if (ctx.training && ad.dropout_p > 0.0) {
      const Matrix& xv = t.value(x);
      Rng rng = Rng::stream(ctx.seed,
                            "dropout/" + layer_prefix(layer_index) + "/" +
                                to_string(name),
                            uint64_t(ctx.step), uint64_t(ctx.example));
      Matrix mask = dropout_mask(xv.rows, xv.cols, ad.dropout_p, rng);
      branch_in = t.hadamard(x, t.leaf(std::move(mask)));
    }
    Tape::NodeId xa = t.matmul_nt(branch_in, ctx.leaf_for(ad.a));
    Tape::NodeId xab = t.matmul_nt(xa, ctx.leaf_for(ad.b));
    y = t.add(y, t.scale(xab, ad.alpha / double(ad.rank)));
  }

  if (lin.slot.svd) {
    const SvdAdapter& ad = *lin.slot.svd;
    Matrix mask = Matrix::zeros(1, ad.allocated());
    for (int j = 0; j < ad.allocated(); ++j)
      mask.data[size_t(j)] = ad.active[size_t(j)] ? 1.0 : 0.0;
    Tape::NodeId lam = t.hadamard(ctx.leaf_for(ad.lambda), t.leaf(std::move(mask)));
    Tape::NodeId xq = t.matmul_nt(x, ctx.leaf_for(ad.q));
    Tape::NodeId scaled = t.col_scale(xq, lam);
    y = t.add(y, t.matmul_nt(scaled, ctx.leaf_for(ad.p)));
  }

  return y;
}

Tape::NodeId TransformerModel::encode(ForwardCtx& ctx,
                                      const std::vector<int>& tokens) const {
  if (tokens.empty()) throw InputError("encode: empty token sequence");
  if (int(tokens.size()) > config_.max_len)
    throw InputError("encode: sequence of " + std::to_string(tokens.size()) +
                     " tokens exceeds max_len " +
                     std::to_string(config_.max_len));
  for (int id : tokens)
    if (id < 0 || id >= config_.vocab_size)
      throw IndexError("encode: token id " + std::to_string(id) +
                       " outside vocab of " + std::to_string(config_.vocab_size));

  Tape& t = ctx.tape;
  std::vector<int> positions(tokens.size());
  std::iota(positions.begin(), positions.end(), 0);

  Tape::NodeId x = t.add(t.gather_rows(ctx.leaf_for(tok_emb_), tokens),
                         t.gather_rows(ctx.leaf_for(pos_emb_), positions));

  const int d = config_.d_model;
  const int dh = d / config_.n_heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(double(dh));

  for (int l = 0; l < n_layers(); ++l) {
    const LayerWeights& lw = layers_[size_t(l)];

    Tape::NodeId h = t.layer_norm(x, ctx.leaf_for(lw.ln1_gain),
                                  ctx.leaf_for(lw.ln1_bias));
    Tape::NodeId q = adapted_linear(ctx, h, lw.attn_q, l, MatrixName::Wq);
    Tape::NodeId k = adapted_linear(ctx, h, lw.attn_k, l, MatrixName::Wk);
    Tape::NodeId v = adapted_linear(ctx, h, lw.attn_v, l, MatrixName::Wv);

    std::vector<Tape::NodeId> heads;
    heads.reserve(size_t(config_.n_heads));
    for (int hd = 0; hd < config_.n_heads; ++hd) {
      const int c0 = hd * dh, c1 = (hd + 1) * dh;
      Tape::NodeId qh = t.slice_cols(q, c0, c1);
      Tape::NodeId kh = t.slice_cols(k, c0, c1);
      Tape::NodeId vh = t.slice_cols(v, c0, c1);
      Tape::NodeId attn = t.softmax_rows(t.scale(t.matmul_nt(qh, kh), inv_sqrt_dh));
      heads.push_back(t.matmul(attn, vh));
    }
    Tape::NodeId merged = config_.n_heads == 1 ? heads[0] : t.concat_cols(heads);
    x = t.add(x, adapted_linear(ctx, merged, lw.attn_o, l, MatrixName::Wo));

    Tape::NodeId h2 = t.layer_norm(x, ctx.leaf_for(lw.ln2_gain),
                                   ctx.leaf_for(lw.ln2_bias));
    Tape::NodeId f = t.gelu(adapted_linear(ctx, h2, lw.ff_in, l, MatrixName::Wf1));
    x = t.add(x, adapted_linear(ctx, f, lw.ff_out, l, MatrixName::Wf2));
  }

  return t.layer_norm(x, ctx.leaf_for(final_ln_gain_),
                      ctx.leaf_for(final_ln_bias_));
}

Tape::NodeId TransformerModel::forward_masked_logits(
    ForwardCtx& ctx, const std::vector<int>& tokens,
    const std::vector<int>& masked_positions) const {
  if (masked_positions.empty())
    throw InputError("forward: no masked positions given");
  for (int p : masked_positions)
    if (p < 0 || p >= int(tokens.size()))
      throw IndexError("forward: masked position " + std::to_string(p) +
                       " outside sequence of " + std::to_string(tokens.size()));
  Tape::NodeId hid = encode(ctx, tokens);
  Tape::NodeId sel = ctx.tape.gather_rows(hid, masked_positions);
  return ctx.tape.matmul_nt(sel, ctx.leaf_for(out_proj_));
}

Matrix forward_mlm(const TransformerModel& model, const std::vector<int>& tokens,
                   const std::vector<int>& masked_positions) {
  Tape tape;
  ForwardCtx ctx{tape};
  return tape.value(model.forward_masked_logits(ctx, tokens, masked_positions));
}

double pseudo_log_likelihood(const TransformerModel& model,
                             const std::string& sentence) {
  std::vector<int> tokens = model.vocab().encode(sentence);
  if (tokens.empty()) throw InputError("pll: sentence has no tokens");
  if (int(tokens.size()) > model.config().max_len)
    tokens.resize(size_t(model.config().max_len));

  double total = 0.0;
  std::vector<int> masked = tokens;
  for (int pos = 0; pos < int(tokens.size()); ++pos) {
    masked[size_t(pos)] = model.vocab().mask_id;
    Matrix logits = forward_mlm(model, masked, {pos});
    Matrix logp = log_softmax_rows(logits);
    total += logp.at(0, tokens[size_t(pos)]);
    masked[size_t(pos)] = tokens[size_t(pos)];
  }
  return total;
}

AdapterTargets all_targets(const TransformerModel& model) {
  AdapterTargets t;
  for (int l = 0; l < model.n_layers(); ++l)
    for (MatrixName name : all_matrix_names()) t.emplace(l, name);
  return t;
}

AdapterTargets layer_targets(const TransformerModel& model, int layer) {
  if (layer < 0 || layer >= model.n_layers())
    throw LookupError("targets: no layer " + std::to_string(layer));
  AdapterTargets t;
  for (MatrixName name : all_matrix_names()) t.emplace(layer, name);
  return t;
}

namespace {

AdaptedLinear& target_slot(TransformerModel& model, int layer, MatrixName name) {
  AdaptedLinear& lin = model.matrix_at(layer, name);
  if (!lin.slot.empty())
    throw StateError("attach: " + std::string(layer_prefix(layer)) + "." +
                     to_string(name) + " already has an adapter");
  return lin;
}

void freeze_base(TransformerModel& model) {
  for (Param* p : model.base_params()) p->trainable = false;
}

}  // namespace

void attach_lora(TransformerModel& model, const AdapterTargets& targets,
                 int rank, double alpha, double dropout_p, uint64_t seed) {
  if (targets.empty()) throw InputError("attach: no targets given");
  for (auto [layer, name] : targets) {
    AdaptedLinear& lin = target_slot(model, layer, name);
    const std::string pre =
        layer_prefix(layer) + "." + to_string(name) + ".lora";
    Rng rng = Rng::stream(seed, "lora-init/" + layer_prefix(layer) + "/" +
                                    to_string(name));
    lin.slot.lora = std::make_unique<LoraAdapter>(LoraAdapter::create(
        pre, lin.d_out(), lin.d_in(), rank, alpha, dropout_p, rng));
  }
  freeze_base(model);
}

void attach_svd(TransformerModel& model, const AdapterTargets& targets,
                int r_max, uint64_t seed) {
  if (targets.empty()) throw InputError("attach: no targets given");
  for (auto [layer, name] : targets) {
    AdaptedLinear& lin = target_slot(model, layer, name);
    const std::string pre =
        layer_prefix(layer) + "." + to_string(name) + ".svd";
    Rng rng = Rng::stream(seed, "svd-init/" + layer_prefix(layer) + "/" +
                                    to_string(name));
    lin.slot.svd = std::make_unique<SvdAdapter>(
        SvdAdapter::create(pre, lin.d_out(), lin.d_in(), r_max, rng));
  }
  freeze_base(model);
}

void detach_adapters(TransformerModel& model) {
  for (int l = 0; l < model.n_layers(); ++l)
    for (MatrixName name : all_matrix_names()) {
      AdapterSlot& slot = model.matrix_at(l, name).slot;
      slot.lora.reset();
      slot.svd.reset();
    }
  model.set_all_trainable(true);
}

}  // namespace loralab
