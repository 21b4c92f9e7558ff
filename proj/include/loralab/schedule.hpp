#pragma once

#include <span>
#include <string>
#include <vector>

#include "loralab/adapters.hpp"

namespace loralab {

// Staged rank schedule: full-rank warm-up, a hold at r_init, a cubic decay
// to r_target, then a hold at r_target until T.
struct RankSchedule {
  int r_full = 0;
  int r_init = 0;
  int r_target = 0;
  long t_warm = 0;
  long t_init = 0;
  long t_final = 0;  // length of the final hold, not a timestamp
  long T = 0;

  void validate() const;
};

// Default sizing of the decay start point relative to the target rank.
int default_r_init(int r_target);

// The printed decay numerator (t − t_init − t_final) overshoots r_init at
// t_init and jumps at T − t_final; the continuous variant (t − t_init) meets
// both endpoints. Both are kept selectable.
enum class RankVariant { AsPrinted, Continuous };

const char* to_string(RankVariant v);
RankVariant rank_variant_from_string(const std::string& s);

double rank_at_step(long t, const RankSchedule& s,
                    RankVariant variant = RankVariant::Continuous);

// Total active-rank budget across all adapted matrices at step t, clamped to
// [0, r_full·num_adapted_matrices].
long budget_at_step(long t, const RankSchedule& s, int num_adapted_matrices,
                    RankVariant variant = RankVariant::Continuous);

// |w·∂L/∂w|: first-order estimate of the loss change from zeroing w.
double sensitivity(double w, double grad);

// Importance of one singular triplet: λ sensitivity plus the mean entrywise
// sensitivity of its P column and Q row.
double triplet_importance(std::span<const double> p_col,
                          std::span<const double> gp_col, double lambda,
                          double glambda, std::span<const double> q_row,
                          std::span<const double> gq_row);

// Per-dimension importance for a whole adapter, given gradients for its
// three parameters. Pruned dimensions carry zero gradients and score 0.
std::vector<double> triplet_scores(const SvdAdapter& ad, const Matrix& gp,
                                   const Matrix& glambda, const Matrix& gq);

// One prunable adapter with its location in the model.
struct AdapterEntry {
  int layer = 0;
  MatrixName matrix = MatrixName::Wq;
  SvdAdapter* adapter = nullptr;
};

struct PruneEvent {
  long step = 0;
  int layer = 0;
  MatrixName matrix = MatrixName::Wq;
  int dim = 0;
  double score = 0.0;
  bool activated = false;  // false: pruned, true: reactivated
};

// Scores aggregated by the trainer between pruning events.
struct BudgetState {
  long step = 0;
  std::vector<double> scores;  // one per triplet, enumeration order
  long budget = 0;
};

// Keeps the top-B triplets by score active and zeroes the Λ of the rest.
// `scores` is aligned with the enumeration (entries order, then dim), which
// also serves as the tie order: layer, matrix, dim. Returns one event per
// activation change; an unchanged active set returns no events.
std::vector<PruneEvent> prune_to_budget(const std::vector<AdapterEntry>& entries,
                                        const std::vector<double>& scores,
                                        long budget, long step);

// CSV with one row per activation change: step,layer,matrix,dim,score,action.
void write_prune_log(const std::string& path,
                     const std::vector<PruneEvent>& events);

}  // namespace loralab
