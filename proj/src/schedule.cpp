#include "loralab/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "loralab/errors.hpp"

namespace loralab {

void RankSchedule::validate() const {
  if (r_target < 0 || r_init < 0 || r_full < 0)
    throw ConfigError("schedule: ranks must be non-negative");
  if (!(r_target <= r_init && r_init <= r_full))
    throw ConfigError("schedule: need r_target <= r_init <= r_full, got " +
                      std::to_string(r_target) + "/" + std::to_string(r_init) +
                      "/" + std::to_string(r_full));
  if (t_warm < 0 || t_init < 0 || t_final < 0 || T < 0)
    throw ConfigError("schedule: step counts must be non-negative");
  if (!(t_warm <= t_init && t_init <= T - t_final && T - t_final <= T))
    throw ConfigError(
        "schedule: need 0 <= t_warm <= t_init <= T - t_final <= T, got "
        "t_warm=" + std::to_string(t_warm) + " t_init=" + std::to_string(t_init) +
        " t_final=" + std::to_string(t_final) + " T=" + std::to_string(T));
}

int default_r_init(int r_target) {
  if (r_target < 0) throw RangeError("schedule: negative r_target");
  return int(std::ceil(1.5 * r_target));
}

const char* to_string(RankVariant v) {
  return v == RankVariant::AsPrinted ? "as-printed" : "continuous";
}

RankVariant rank_variant_from_string(const std::string& s) {
  if (s == "as-printed") return RankVariant::AsPrinted;
  if (s == "continuous") return RankVariant::Continuous;
  throw LookupError("schedule: unknown rank variant '" + s + "'");
}

double rank_at_step(long t, const RankSchedule& s, RankVariant variant) {
  s.validate();
  if (t < 0 || t > s.T)
    throw RangeError("schedule: step " + std::to_string(t) +
                     " outside [0, " + std::to_string(s.T) + "]");
  if (t < s.t_warm) return double(s.r_full);
  if (t < s.t_init) return double(s.r_init);
  if (t >= s.T - s.t_final) return double(s.r_target);
  const double num = variant == RankVariant::AsPrinted
                         ? double(t - s.t_init - s.t_final)
                         : double(t - s.t_init);
  const double denom = double(s.T - s.t_init - s.t_final);
  const double keep = 1.0 - num / denom;
  return double(s.r_target) + double(s.r_init - s.r_target) * keep * keep * keep;
}

long budget_at_step(long t, const RankSchedule& s, int num_adapted_matrices,
                    RankVariant variant) {
  if (num_adapted_matrices < 1)
    throw RangeError("schedule: need at least one adapted matrix");
  long b = std::llround(rank_at_step(t, s, variant) * num_adapted_matrices);
  return std::clamp(b, 0L, long(s.r_full) * num_adapted_matrices);
}

double sensitivity(double w, double grad) { return std::fabs(w * grad); }

namespace {

double mean_sensitivity(std::span<const double> w, std::span<const double> g) {
  if (w.empty()) return 0.0;
  double s = 0.0;
  for (size_t j = 0; j < w.size(); ++j) s += sensitivity(w[j], g[j]);
  return s / double(w.size());
}

}  // namespace

double triplet_importance(std::span<const double> p_col,
                          std::span<const double> gp_col, double lambda,
                          double glambda, std::span<const double> q_row,
                          std::span<const double> gq_row) {
  if (p_col.size() != gp_col.size())
    throw ShapeError("importance: P column has " + std::to_string(p_col.size()) +
                     " entries but its gradient has " +
                     std::to_string(gp_col.size()));
  if (q_row.size() != gq_row.size())
    throw ShapeError("importance: Q row has " + std::to_string(q_row.size()) +
                     " entries but its gradient has " +
                     std::to_string(gq_row.size()));
  return sensitivity(lambda, glambda) + mean_sensitivity(p_col, gp_col) +
         mean_sensitivity(q_row, gq_row);
}

std::vector<double> triplet_scores(const SvdAdapter& ad, const Matrix& gp,
                                   const Matrix& glambda, const Matrix& gq) {
  if (!ad.p.value.same_shape(gp) || !ad.lambda.value.same_shape(glambda) ||
      !ad.q.value.same_shape(gq))
    throw ShapeError("importance: gradient shapes do not match adapter " +
                     ad.lambda.name);
  const int d1 = ad.p.value.rows;
  const int d2 = ad.q.value.cols;
  std::vector<double> scores;
  scores.reserve(size_t(ad.allocated()));
  std::vector<double> pc(size_t(d1), 0.0);
  std::vector<double> gpc(size_t(d1), 0.0);
  for (int k = 0; k < ad.allocated(); ++k) {
    for (int j = 0; j < d1; ++j) {
      pc[size_t(j)] = ad.p.value.at(j, k);
      gpc[size_t(j)] = gp.at(j, k);
    }
    std::span<const double> qr(ad.q.value.data.data() + size_t(k) * d2,
                               size_t(d2));
    std::span<const double> gqr(gq.data.data() + size_t(k) * d2, size_t(d2));
    scores.push_back(triplet_importance(pc, gpc, ad.lambda.value.at(0, k),
                                        glambda.at(0, k), qr, gqr));
  }
  return scores;
}

std::vector<PruneEvent> prune_to_budget(const std::vector<AdapterEntry>& entries,
                                        const std::vector<double>& scores,
                                        long budget, long step) {
  struct Slot {
    size_t entry;
    int dim;
    double score;
  };
  std::vector<Slot> slots;
  for (size_t e = 0; e < entries.size(); ++e) {
    const SvdAdapter* ad = entries[e].adapter;
    if (!ad) throw InputError("prune: null adapter entry");
    for (int k = 0; k < ad->allocated(); ++k)
      slots.push_back({e, k, 0.0});
  }
  if (scores.size() != slots.size())
    throw ShapeError("prune: got " + std::to_string(scores.size()) +
                     " scores for " + std::to_string(slots.size()) +
                     " triplets");
  if (budget < 0 || budget > long(slots.size()))
    throw RangeError("prune: budget " + std::to_string(budget) +
                     " outside [0, " + std::to_string(slots.size()) + "]");
  for (size_t i = 0; i < slots.size(); ++i) slots[i].score = scores[i];

  // Stable sort keeps the enumeration order (layer, matrix, dim) among ties.
  std::stable_sort(slots.begin(), slots.end(),
                   [](const Slot& a, const Slot& b) { return a.score > b.score; });

  std::vector<PruneEvent> events;
  for (size_t rank = 0; rank < slots.size(); ++rank) {
    const Slot& sl = slots[rank];
    const AdapterEntry& ent = entries[sl.entry];
    SvdAdapter& ad = *ent.adapter;
    const bool keep = long(rank) < budget;
    const bool was = ad.active[size_t(sl.dim)] != 0;
    if (keep == was) continue;
    ad.active[size_t(sl.dim)] = keep ? 1 : 0;
    if (!keep) ad.lambda.value.at(0, sl.dim) = 0.0;
    events.push_back(
        {step, ent.layer, ent.matrix, sl.dim, sl.score, keep});
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const PruneEvent& a, const PruneEvent& b) {
                     if (a.layer != b.layer) return a.layer < b.layer;
                     if (a.matrix != b.matrix) return int(a.matrix) < int(b.matrix);
                     return a.dim < b.dim;
                   });
  return events;
}

void write_prune_log(const std::string& path,
                     const std::vector<PruneEvent>& events) {
  std::ofstream out(path);
  if (!out) throw IoError("prune log: cannot open " + path + " for writing");
  out << "step,layer,matrix,dim,score,action\n";
  char buf[32];
  for (const PruneEvent& ev : events) {
    std::snprintf(buf, sizeof buf, "%.17g", ev.score);
    out << ev.step << ',' << ev.layer << ',' << to_string(ev.matrix) << ','
        << ev.dim << ',' << buf << ','
        << (ev.activated ? "reactivate" : "prune") << '\n';
  }
  if (!out) throw IoError("prune log: write to " + path + " failed");
}

}  // namespace loralab
