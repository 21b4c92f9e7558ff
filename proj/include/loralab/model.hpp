#pragma once

#include <optional>
#include <unordered_map>

#include "loralab/adapters.hpp"
#include "loralab/tape.hpp"
#include "loralab/vocab.hpp"

namespace loralab {

struct ModelConfig {
  int vocab_size = 0;
  int d_model = 32;
  int d_ff = 64;
  int n_layers = 2;
  int n_heads = 2;
  int max_len = 32;
  uint64_t seed = 0;

  void validate() const;
};

// A weight matrix with an optional adapter slot. Weights use the
// (d_out × d_in) orientation, so a layer input X (seq×d_in) maps through
// X·Wᵀ and adapter shapes match the column-vector convention of
// lora_forward.
struct AdaptedLinear {
  Param weight;
  AdapterSlot slot;
  int d_out() const { return weight.value.rows; }
  int d_in() const { return weight.value.cols; }
};

struct LayerWeights {
  AdaptedLinear attn_q, attn_k, attn_v, attn_o, ff_in, ff_out;
  Param ln1_gain, ln1_bias, ln2_gain, ln2_bias;

  AdaptedLinear& matrix(MatrixName name);
  const AdaptedLinear& matrix(MatrixName name) const;
};

// Context threaded through a traced forward pass: which tape records it,
// whether adapter dropout is live, and the dropout stream to draw from.
struct ForwardCtx {
  explicit ForwardCtx(Tape& t) : tape(t) {}

  Tape& tape;
  bool training = false;
  uint64_t seed = 0;
  long step = 0;
  long example = 0;  // distinguishes dropout draws within one batch
  // Parameter leaves already materialized on this tape, so each parameter
  // appears once no matter how many times it is used.
  std::unordered_map<const Param*, Tape::NodeId> leaves;

  Tape::NodeId leaf_for(const Param& p);
};

// Bidirectional toy encoder with a masked-token prediction head.
class TransformerModel {
 public:
  TransformerModel() = default;
  // Fresh model with seeded gaussian init; vocab must already be built.
  static TransformerModel init(const ModelConfig& config, Vocab vocab);

  const ModelConfig& config() const { return config_; }
  const Vocab& vocab() const { return vocab_; }
  Vocab& vocab_mut() { return vocab_; }

  int n_layers() const { return int(layers_.size()); }
  LayerWeights& layer(int i) { return layers_.at(i); }
  const LayerWeights& layer(int i) const { return layers_.at(i); }
  AdaptedLinear& matrix_at(int layer, MatrixName name);

  Param& tok_emb() { return tok_emb_; }
  Param& pos_emb() { return pos_emb_; }
  Param& out_proj() { return out_proj_; }
  Param& final_ln_gain() { return final_ln_gain_; }
  Param& final_ln_bias() { return final_ln_bias_; }

  // Every parameter in canonical order: embeddings, layers (W_q, W_k, W_v,
  // W_o, W_f1, W_f2, layer norms), final norm, output head, then adapter
  // parameters inline after their host weight.
  std::vector<Param*> params();
  std::vector<const Param*> params() const;
  // Base (non-adapter) parameters only.
  std::vector<Param*> base_params();
  std::vector<const Param*> base_params() const;

  long total_param_count() const;
  long trainable_param_count() const;

  void set_all_trainable(bool trainable);

  // Encoder forward over one token-id sequence; returns the hidden-state
  // node (seq×d_model) on ctx.tape.
  Tape::NodeId encode(ForwardCtx& ctx, const std::vector<int>& tokens) const;

  // Logits rows for the given masked positions (in caller order). Tokens are
  // used as-is; callers put [MASK]/replacement ids in place beforehand.
  Tape::NodeId forward_masked_logits(ForwardCtx& ctx,
                                     const std::vector<int>& tokens,
                                     const std::vector<int>& masked_positions) const;

 private:
  ModelConfig config_;
  Vocab vocab_;
  Param tok_emb_, pos_emb_;
  std::vector<LayerWeights> layers_;
  Param final_ln_gain_, final_ln_bias_;
  Param out_proj_;  // vocab_size×d_model

  Tape::NodeId adapted_linear(ForwardCtx& ctx, Tape::NodeId x,
                              const AdaptedLinear& lin, int layer_index,
                              MatrixName name) const;
};

// Convenience wrapper: logits matrix for masked positions, eval mode.
Matrix forward_mlm(const TransformerModel& model, const std::vector<int>& tokens,
                   const std::vector<int>& masked_positions);

// Sum over positions of log P(token_t | sentence with position t masked).
// Higher is better; always <= 0.
double pseudo_log_likelihood(const TransformerModel& model,
                             const std::string& sentence);

// --- adapter attachment -----------------------------------------------

AdapterTargets all_targets(const TransformerModel& model);
AdapterTargets layer_targets(const TransformerModel& model, int layer);

// Attaches zero-initialized LoRA adapters to each target and freezes the
// base parameters; only adapter parameters stay trainable.
void attach_lora(TransformerModel& model, const AdapterTargets& targets,
                 int rank, double alpha, double dropout_p, uint64_t seed);

// Same contract with singular-triplet adapters (all dimensions active,
// lambda zero-initialized).
void attach_svd(TransformerModel& model, const AdapterTargets& targets,
                int r_max, uint64_t seed);

void detach_adapters(TransformerModel& model);

}  // namespace loralab
