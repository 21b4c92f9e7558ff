#include "loralab/trainer.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "loralab/errors.hpp"

namespace loralab {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::FT: return "FT";
    case Strategy::LoRA: return "LoRA";
    case Strategy::S1: return "S1";
    case Strategy::S2: return "S2";
    case Strategy::S3: return "S3";
  }
  throw LookupError("unknown strategy enum");
}

Strategy strategy_from_string(const std::string& s) {
  std::string low;
  for (char c : s) low.push_back(char(std::tolower(uint8_t(c))));
  for (Strategy st : {Strategy::FT, Strategy::LoRA, Strategy::S1, Strategy::S2,
                      Strategy::S3}) {
    std::string want;
    for (char c : std::string(to_string(st)))
      want.push_back(char(std::tolower(uint8_t(c))));
    if (low == want) return st;
  }
  throw LookupError("unknown strategy '" + s +
                    "' (expected FT, LoRA, S1, S2, or S3)");
}

const char* to_string(StageLabel s) {
  switch (s) {
    case StageLabel::Warmup: return "warmup";
    case StageLabel::RankInit: return "rank-init";
    case StageLabel::RankDecay: return "rank-decay";
    case StageLabel::Final: return "final";
  }
  throw LookupError("unknown stage enum");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (total_steps < 1) throw ConfigError("train: total_steps must be >= 1");
  if (!(mask_prob > 0.0 && mask_prob <= 1.0))
    throw ConfigError("train: mask_prob must be in (0, 1]");
  if (lr < 0.0) throw ConfigError("train: lr must be >= 0");
  if (warmup_steps < 0) throw ConfigError("train: warmup_steps must be >= 0");
  if (score_ema < 0.0 || score_ema >= 1.0)
    throw ConfigError("train: score_ema must be in [0, 1)");
  if (adapt_layer < -1) throw ConfigError("train: adapt_layer must be >= -1");

  const bool uses_lora = strategy == Strategy::LoRA || strategy == Strategy::S2;
  if (uses_lora) {
    if (lora.rank < 1) throw ConfigError("train: lora.rank must be >= 1");
    if (lora.dropout < 0.0 || lora.dropout >= 1.0)
      throw ConfigError("train: lora.dropout must be in [0, 1)");
  }
  if (strategy == Strategy::S2 || strategy == Strategy::S3) {
    if (warmup_steps > total_steps)
      throw ConfigError("train: warmup_steps " + std::to_string(warmup_steps) +
                        " exceeds total_steps " + std::to_string(total_steps));
  }
  if (strategy == Strategy::S1 || strategy == Strategy::S3) {
    schedule.validate();
    if (schedule.r_init < 1)
      throw ConfigError("train: triplet strategies need schedule.r_init >= 1");
    if (schedule.T != total_steps)
      throw ConfigError("train: schedule.T " + std::to_string(schedule.T) +
                        " must equal total_steps " +
                        std::to_string(total_steps));
    const long want_warm = strategy == Strategy::S1 ? 0 : warmup_steps;
    if (schedule.t_warm != want_warm)
      throw ConfigError("train: " + std::string(to_string(strategy)) +
                        " needs schedule.t_warm == " +
                        std::to_string(want_warm) + ", got " +
                        std::to_string(schedule.t_warm));
  }
}

RankSchedule effective_schedule(const TrainConfig& cfg) {
  RankSchedule s;
  s.T = cfg.total_steps;
  switch (cfg.strategy) {
    case Strategy::FT:
      s.t_warm = cfg.total_steps;
      s.t_init = cfg.total_steps;
      break;
    case Strategy::LoRA:
      s.t_final = cfg.total_steps;
      break;
    case Strategy::S2:
      s.t_warm = cfg.warmup_steps;
      s.t_init = cfg.warmup_steps;
      s.t_final = cfg.total_steps - cfg.warmup_steps;
      break;
    case Strategy::S1:
    case Strategy::S3:
      return cfg.schedule;
  }
  return s;
}

StageLabel stage_of_step(long t, const TrainConfig& cfg) {
  if (t < 0 || t >= cfg.total_steps)
    throw RangeError("stage: step " + std::to_string(t) + " outside [0, " +
                     std::to_string(cfg.total_steps) + ")");
  const RankSchedule s = effective_schedule(cfg);
  if (t < s.t_warm) return StageLabel::Warmup;
  if (t < s.t_init) return StageLabel::RankInit;
  if (t < s.T - s.t_final) return StageLabel::RankDecay;
  return StageLabel::Final;
}

std::vector<MaskedExample> make_batch(
    const std::vector<std::vector<int>>& corpus, const TrainConfig& cfg,
    long step, const Vocab& vocab) {
  if (corpus.empty()) throw InputError("batch: empty corpus");
  const int n_reserved = 3;
  if (vocab.size() <= n_reserved)
    throw InputError("batch: vocabulary has no content tokens");

  Rng pick = Rng::stream(cfg.seed, "batch", uint64_t(step));
  Rng mask = Rng::stream(cfg.seed, "mask", uint64_t(step));

  std::vector<MaskedExample> out;
  out.reserve(size_t(cfg.batch_size));
  for (int b = 0; b < cfg.batch_size; ++b) {
    const std::vector<int>& sent = corpus[pick.next_below(corpus.size())];
    MaskedExample ex;
    ex.tokens = sent;

    auto corrupt = [&](int pos) {
      ex.positions.push_back(pos);
      ex.targets.push_back(sent[size_t(pos)]);
      double rule = mask.next_double();
      if (rule < 0.8) {
        ex.tokens[size_t(pos)] = vocab.mask_id;
      } else if (rule < 0.9) {
        ex.tokens[size_t(pos)] =
            n_reserved + int(mask.next_below(uint64_t(vocab.size() - n_reserved)));
      }  // else keep the original token and predict it anyway
    };

    for (int pos = 0; pos < int(sent.size()); ++pos)
      if (mask.next_double() < cfg.mask_prob) corrupt(pos);
    if (ex.positions.empty())
      corrupt(int(mask.next_below(sent.size())));
    out.push_back(std::move(ex));
  }
  return out;
}

void Adam::update(Param& p, const Matrix& grad) {
  if (!p.value.same_shape(grad))
    throw ShapeError("adam: gradient shape does not match parameter " + p.name);
  Moments& st = state_[p.name];
  if (st.t == 0) {
    st.m = Matrix::zeros(grad.rows, grad.cols);
    st.v = Matrix::zeros(grad.rows, grad.cols);
  }
  ++st.t;
  const double c1 = 1.0 - std::pow(b1_, double(st.t));
  const double c2 = 1.0 - std::pow(b2_, double(st.t));
  for (size_t i = 0; i < grad.data.size(); ++i) {
    const double g = grad.data[i];
    st.m.data[i] = b1_ * st.m.data[i] + (1.0 - b1_) * g;
    st.v.data[i] = b2_ * st.v.data[i] + (1.0 - b2_) * g * g;
    const double mhat = st.m.data[i] / c1;
    const double vhat = st.v.data[i] / c2;
    p.value.data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
}

void write_train_log(const std::string& path, const TrainLog& log) {
  std::ofstream out(path);
  if (!out) throw IoError("train log: cannot open " + path + " for writing");
  out << "step,stage,loss,budget,trainable_params\n";
  char buf[32];
  for (const TrainLogRow& r : log.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.loss);
    out << r.step << ',' << to_string(r.stage) << ',' << buf << ',' << r.budget
        << ',' << r.trainable << '\n';
  }
  if (!out) throw IoError("train log: write to " + path + " failed");
}

long active_budget(const TransformerModel& model) {
  long total = 0;
  for (int l = 0; l < model.n_layers(); ++l)
    for (MatrixName name : all_matrix_names()) {
      const AdapterSlot& slot = model.layer(l).matrix(name).slot;
      if (slot.lora) total += slot.lora->rank;
      if (slot.svd) total += slot.svd->effective_rank();
    }
  return total;
}

long effective_trainable_params(const TransformerModel& model) {
  long n = 0;
  for (const Param* p : model.params())
    if (p->trainable) n += p->count();
  for (int l = 0; l < model.n_layers(); ++l)
    for (MatrixName name : all_matrix_names()) {
      const AdapterSlot& slot = model.layer(l).matrix(name).slot;
      if (slot.svd && slot.svd->p.trainable)
        n += slot.svd->effective_param_count() - slot.svd->param_count();
    }
  return n;
}

long base_param_count(const TransformerModel& model) {
  long n = 0;
  for (const Param* p : model.base_params()) n += p->count();
  return n;
}

double trainable_fraction(const TransformerModel& model) {
  return double(effective_trainable_params(model)) /
         double(base_param_count(model));
}

std::vector<AdapterEntry> svd_entries(TransformerModel& model) {
  std::vector<AdapterEntry> entries;
  for (int l = 0; l < model.n_layers(); ++l)
    for (MatrixName name : all_matrix_names()) {
      AdapterSlot& slot = model.matrix_at(l, name).slot;
      if (slot.svd) entries.push_back({l, name, slot.svd.get()});
    }
  return entries;
}

namespace {

bool uses_schedule(Strategy s) {
  return s == Strategy::S1 || s == Strategy::S3;
}

// Raw per-triplet sensitivity scores from this batch's gradients.
std::vector<double> batch_scores(const std::vector<AdapterEntry>& entries,
                                 ForwardCtx& ctx) {
  std::vector<double> scores;
  for (const AdapterEntry& ent : entries) {
    const SvdAdapter& ad = *ent.adapter;
    const Matrix& gp = ctx.tape.grad(ctx.leaves.at(&ad.p));
    const Matrix& gl = ctx.tape.grad(ctx.leaves.at(&ad.lambda));
    const Matrix& gq = ctx.tape.grad(ctx.leaves.at(&ad.q));
    for (double s : triplet_scores(ad, gp, gl, gq)) scores.push_back(s);
  }
  return scores;
}

}  // namespace

double train_step(TransformerModel& model,
                  const std::vector<MaskedExample>& batch,
                  const TrainConfig& cfg, TrainerState& st, long t) {
  if (batch.empty()) throw InputError("train: empty batch");

  Tape tape;
  ForwardCtx ctx(tape);
  ctx.training = true;
  ctx.seed = cfg.seed;
  ctx.step = t;

  Tape::NodeId total = -1;
  for (size_t i = 0; i < batch.size(); ++i) {
    ctx.example = long(i);
    const MaskedExample& ex = batch[i];
    Tape::NodeId logits = model.forward_masked_logits(ctx, ex.tokens, ex.positions);
    Tape::NodeId ce = tape.cross_entropy(logits, ex.targets);
    total = i == 0 ? ce : tape.add(total, ce);
  }
  Tape::NodeId loss = tape.scale(total, 1.0 / double(batch.size()));
  const double loss_value = tape.value(loss).at(0, 0);
  if (!std::isfinite(loss_value))
    throw DivergenceError("train: non-finite loss " +
                          std::to_string(loss_value) + " at step " +
                          std::to_string(t));
  tape.backward(loss);

  // Sensitivity comes from the pre-update weights and this batch's gradient.
  if (!st.entries.empty()) {
    std::vector<double> raw = batch_scores(st.entries, ctx);
    if (cfg.score_ema > 0.0 && st.scores.size() == raw.size()) {
      for (size_t i = 0; i < raw.size(); ++i)
        raw[i] = cfg.score_ema * st.scores[i] + (1.0 - cfg.score_ema) * raw[i];
    }
    st.scores = std::move(raw);
  }

  for (Param* p : model.params()) {
    if (!p->trainable) continue;
    auto it = ctx.leaves.find(p);
    if (it == ctx.leaves.end()) continue;
    st.opt.update(*p, tape.grad(it->second));
  }

  // Optimizer momentum must not resurrect pruned singular values.
  for (const AdapterEntry& ent : st.entries)
    for (int k = 0; k < ent.adapter->allocated(); ++k)
      if (!ent.adapter->active[size_t(k)])
        ent.adapter->lambda.value.at(0, k) = 0.0;

  if (uses_schedule(cfg.strategy) && !st.entries.empty()) {
    StageLabel stage = stage_of_step(t, cfg);
    if (stage == StageLabel::RankDecay || stage == StageLabel::Final) {
      long total_dims = 0;
      for (const AdapterEntry& ent : st.entries)
        total_dims += ent.adapter->allocated();
      long b = budget_at_step(t, cfg.schedule, int(st.entries.size()),
                              cfg.rank_variant);
      b = std::min(b, total_dims);  // allocation caps the realizable budget
      auto events = prune_to_budget(st.entries, st.scores, b, t);
      st.prune_events.insert(st.prune_events.end(), events.begin(),
                             events.end());
      st.budget = BudgetState{t, st.scores, b};
    }
  }
  return loss_value;
}

RunResult run_strategy(const TrainConfig& cfg,
                       const std::vector<std::string>& corpus,
                       TransformerModel& model, const RunHooks& hooks) {
  cfg.validate();

  std::vector<std::vector<int>> ids;
  for (const std::string& line : corpus) {
    std::vector<int> toks = model.vocab().encode(line);
    if (toks.empty()) continue;
    if (int(toks.size()) > model.config().max_len)
      toks.resize(size_t(model.config().max_len));
    ids.push_back(std::move(toks));
  }
  if (ids.empty()) throw InputError("train: corpus has no usable sentences");

  model.set_all_trainable(true);
  const long t_attach =
      cfg.strategy == Strategy::FT ? cfg.total_steps : effective_schedule(cfg).t_warm;

  TrainerState st(cfg);
  RunResult result;
  for (long t = 0; t < cfg.total_steps; ++t) {
    if (t == t_attach) {
      const AdapterTargets targets =
          cfg.adapt_layer < 0 ? all_targets(model)
                              : layer_targets(model, cfg.adapt_layer);
      if (cfg.strategy == Strategy::LoRA || cfg.strategy == Strategy::S2) {
        attach_lora(model, targets, cfg.lora.rank, cfg.lora.alpha,
                    cfg.lora.dropout, cfg.seed);
      } else {
        attach_svd(model, targets, cfg.schedule.r_init, cfg.seed);
        st.entries = svd_entries(model);
        long total_dims = 0;
        for (const AdapterEntry& ent : st.entries)
          total_dims += ent.adapter->allocated();
        st.scores.assign(size_t(total_dims), 0.0);
      }
    }
    auto batch = make_batch(ids, cfg, t, model.vocab());
    double loss = train_step(model, batch, cfg, st, t);
    result.log.rows.push_back({t, stage_of_step(t, cfg), loss,
                               active_budget(model),
                               effective_trainable_params(model)});
    if (hooks.checkpoint_every > 0 && hooks.on_checkpoint &&
        (t + 1) % hooks.checkpoint_every == 0)
      hooks.on_checkpoint(t, model);
  }
  result.prune_events = std::move(st.prune_events);
  return result;
}

}  // namespace loralab
