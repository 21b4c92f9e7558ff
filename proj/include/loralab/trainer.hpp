#pragma once

#include <functional>
#include <map>

#include "loralab/model.hpp"
#include "loralab/schedule.hpp"

namespace loralab {

enum class Strategy { FT, LoRA, S1, S2, S3 };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

// Shape of the two-matrix adapters used by LoRA and the S2 post-warmup phase.
struct LoraHyper {
  int rank = 8;
  double alpha = 32.0;
  double dropout = 0.1;
};

struct TrainConfig {
  Strategy strategy = Strategy::LoRA;
  RankSchedule schedule;  // consulted for S1/S3 only
  LoraHyper lora;
  RankVariant rank_variant = RankVariant::Continuous;
  double lr = 1e-3;
  int batch_size = 8;
  long total_steps = 300;
  double mask_prob = 0.15;
  uint64_t seed = 0;
  long warmup_steps = 5000;  // S2/S3 full-model phase length
  double score_ema = 0.0;    // 0 keeps raw per-batch sensitivity scores
  int adapt_layer = -1;      // restrict adapters to one layer, -1 adapts all

  void validate() const;
};

// warmup: full model training. rank-init: adapters at r_init. rank-decay:
// cubic budget reduction. final: hold at r_target. Strategies without a
// stage get an empty interval for it.
enum class StageLabel { Warmup, RankInit, RankDecay, Final };

const char* to_string(StageLabel s);

// Maps the strategy onto concrete stage boundaries: FT never leaves warmup,
// LoRA is all final, S2 is warmup then final, S1/S3 follow cfg.schedule.
RankSchedule effective_schedule(const TrainConfig& cfg);

StageLabel stage_of_step(long t, const TrainConfig& cfg);

// One MLM training example: tokens with replacements already applied, the
// corrupted positions, and the original ids at those positions.
struct MaskedExample {
  std::vector<int> tokens;
  std::vector<int> positions;
  std::vector<int> targets;
};

// Samples batch_size sentences (with replacement) and applies 80/10/10
// masking at mask_prob per position, forcing at least one corruption per
// sentence. Draws depend only on (seed, step), never on the strategy.
std::vector<MaskedExample> make_batch(
    const std::vector<std::vector<int>>& corpus, const TrainConfig& cfg,
    long step, const Vocab& vocab);

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

  void update(Param& p, const Matrix& grad);

 private:
  struct Moments {
    Matrix m, v;
    long t = 0;
  };
  double lr_, b1_, b2_, eps_;
  std::map<std::string, Moments> state_;  // keyed by parameter name
};

struct TrainLogRow {
  long step = 0;
  StageLabel stage = StageLabel::Final;
  double loss = 0.0;
  long budget = 0;     // active adapter rank units after this step
  long trainable = 0;  // effective trainable parameter count
};

struct TrainLog {
  std::vector<TrainLogRow> rows;
};

// CSV: step,stage,loss,budget,trainable_params (loss at full precision).
void write_train_log(const std::string& path, const TrainLog& log);

// Sum of active adapter ranks across all slots; 0 without adapters.
long active_budget(const TransformerModel& model);

// Trainable parameters, counting triplet adapters at their active capacity.
long effective_trainable_params(const TransformerModel& model);

// Parameters of the frozen backbone alone, adapters excluded.
long base_param_count(const TransformerModel& model);

// effective_trainable_params over base_param_count; 1.0 for full fine-tuning,
// sum of r*(d1+d2) over adapters divided by the backbone size otherwise.
double trainable_fraction(const TransformerModel& model);

// All triplet adapters in canonical (layer, matrix) order.
std::vector<AdapterEntry> svd_entries(TransformerModel& model);

struct TrainerState {
  Adam opt;
  std::vector<AdapterEntry> entries;  // filled when triplets attach
  std::vector<double> scores;         // smoothed when cfg.score_ema > 0
  BudgetState budget;
  std::vector<PruneEvent> prune_events;

  explicit TrainerState(const TrainConfig& cfg) : opt(cfg.lr) {}
};

// One optimizer step on the already-staged model. For S1/S3 inside the
// decay/final stages, prunes to budget_at_step(t) after the update.
double train_step(TransformerModel& model,
                  const std::vector<MaskedExample>& batch,
                  const TrainConfig& cfg, TrainerState& st, long t);

struct RunHooks {
  long checkpoint_every = 0;  // 0 disables
  std::function<void(long, const TransformerModel&)> on_checkpoint;
};

struct RunResult {
  TrainLog log;
  std::vector<PruneEvent> prune_events;
};

// Full training run: handles the warmup-to-adapter transition, per-step
// logging, pruning, and optional checkpoint callbacks. Deterministic for a
// fixed (cfg, corpus, model seed).
RunResult run_strategy(const TrainConfig& cfg,
                       const std::vector<std::string>& corpus,
                       TransformerModel& model, const RunHooks& hooks = {});

}  // namespace loralab
