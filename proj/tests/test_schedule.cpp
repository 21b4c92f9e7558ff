#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "loralab/errors.hpp"
#include "loralab/schedule.hpp"

using namespace loralab;

namespace {

// The worked configuration used throughout: decay from 12 down to 8 over
// steps [5000, 28000) of a 30000-step run.
RankSchedule paper_like() {
  RankSchedule s;
  s.r_full = 32;
  s.r_init = 12;
  s.r_target = 8;
  s.t_warm = 0;
  s.t_init = 5000;
  s.t_final = 2000;
  s.T = 30000;
  return s;
}

SvdAdapter make_adapter(int d1, int d2, int r, uint64_t seed) {
  Rng rng = Rng::stream(seed, "sched-test");
  SvdAdapter ad = SvdAdapter::create("t", d1, d2, r, rng);
  for (auto& v : ad.lambda.value.data) v = rng.next_gaussian();
  return ad;
}

}  // namespace

TEST_CASE("schedule validation rejects inverted boundaries and ranks") {
  RankSchedule s = paper_like();
  s.t_init = 29500;  // T - t_final = 28000 < t_init
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = paper_like();
  s.r_init = 6;  // below r_target
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = paper_like();
  s.t_warm = 6000;  // above t_init
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_NOTHROW(paper_like().validate());
}

TEST_CASE("default r_init is ceil(1.5x target)") {
  CHECK(default_r_init(8) == 12);
  CHECK(default_r_init(5) == 8);
  CHECK(default_r_init(0) == 0);
  CHECK(default_r_init(1) == 2);
}

TEST_CASE("rank_at_step walks the four stages") {
  RankSchedule s = paper_like();
  s.t_warm = 1000;
  s.t_init = 5000;
  CHECK(rank_at_step(0, s) == 32.0);      // warm-up holds full rank
  CHECK(rank_at_step(999, s) == 32.0);
  CHECK(rank_at_step(1000, s) == 12.0);   // boundary enters the next stage
  CHECK(rank_at_step(4999, s) == 12.0);
  CHECK(rank_at_step(5000, s) == 12.0);   // cubic with zero progress
  CHECK(rank_at_step(28000, s) == 8.0);   // final hold
  CHECK(rank_at_step(30000, s) == 8.0);
  CHECK_THROWS_AS(rank_at_step(30001, s), RangeError);
  CHECK_THROWS_AS(rank_at_step(-1, s), RangeError);
}

TEST_CASE("continuous cubic reproduces the worked midpoint value") {
  // Halfway through the decay window the cubic retains 1/8 of the gap:
  // 8 + 4 * 0.5^3 = 8.5.
  CHECK(rank_at_step(16500, paper_like(), RankVariant::Continuous) == 8.5);
}

TEST_CASE("as-printed variant overshoots at t_init and jumps at the end") {
  RankSchedule s = paper_like();
  double at_init = rank_at_step(5000, s, RankVariant::AsPrinted);
  CHECK(at_init > 12.0);  // numerator is negative there
  double before_hold = rank_at_step(27999, s, RankVariant::AsPrinted);
  CHECK(before_hold - 8.0 > 1e-3);  // discontinuity into the hold
  CHECK(rank_at_step(28000, s, RankVariant::AsPrinted) == 8.0);
}

TEST_CASE("variants coincide when t_final is zero") {
  RankSchedule s = paper_like();
  s.t_final = 0;
  for (long t = 0; t <= s.T; t += 250)
    CHECK(rank_at_step(t, s, RankVariant::AsPrinted) ==
          rank_at_step(t, s, RankVariant::Continuous));
}

TEST_CASE("continuous decay is non-increasing and meets both endpoints") {
  RankSchedule s = paper_like();
  CHECK(rank_at_step(s.t_init, s) == double(s.r_init));
  CHECK(rank_at_step(s.T - s.t_final, s) == double(s.r_target));
  double prev = rank_at_step(s.t_init, s);
  for (long t = s.t_init; t <= s.T - s.t_final; t += 100) {
    double r = rank_at_step(t, s);
    CHECK(r <= prev);
    prev = r;
  }
}

TEST_CASE("budget matches the published product and the midpoint example") {
  // 8 ranks across 6 matrices in each of 12 layers.
  RankSchedule s = paper_like();
  CHECK(budget_at_step(29000, s, 6 * 12) == 576);
  CHECK(budget_at_step(16500, s, 72) == 612);
  s.t_warm = 100;
  CHECK(budget_at_step(0, s, 72) == 32L * 72);  // full budget in warm-up
  CHECK_THROWS_AS(budget_at_step(0, s, 0), RangeError);
}

TEST_CASE("sensitivity is |w times grad|") {
  CHECK(sensitivity(0.0, 123.0) == 0.0);
  CHECK(sensitivity(2.0, -3.0) == 6.0);
  Rng rng = Rng::stream(1, "sens");
  for (int i = 0; i < 200; ++i) {
    double w = rng.next_gaussian(), g = rng.next_gaussian();
    CHECK(sensitivity(w, g) == std::fabs(w * g));
  }
}

TEST_CASE("triplet importance is the lambda term plus two means") {
  std::vector<double> zero4(4, 0.0);
  CHECK(triplet_importance(zero4, zero4, 0.0, 5.0, zero4, zero4) == 0.0);
  // Only the lambda term when P/Q gradients vanish.
  std::vector<double> w = {1.0, -2.0, 3.0, 0.5};
  CHECK(triplet_importance(w, zero4, -1.5, 2.0, w, zero4) == 3.0);

  Rng rng = Rng::stream(2, "imp");
  std::vector<double> p(3), gp(3), q(5), gq(5);
  for (auto* v : {&p, &gp}) for (auto& x : *v) x = rng.next_gaussian();
  for (auto* v : {&q, &gq}) for (auto& x : *v) x = rng.next_gaussian();
  double lam = rng.next_gaussian(), glam = rng.next_gaussian();
  double want = std::fabs(lam * glam);
  for (int j = 0; j < 3; ++j) want += std::fabs(p[size_t(j)] * gp[size_t(j)]) / 3.0;
  for (int j = 0; j < 5; ++j) want += std::fabs(q[size_t(j)] * gq[size_t(j)]) / 5.0;
  CHECK(triplet_importance(p, gp, lam, glam, q, gq) ==
        doctest::Approx(want).epsilon(1e-12));

  std::vector<double> short3(3, 0.0);
  CHECK_THROWS_AS(triplet_importance(w, short3, 0.0, 0.0, w, zero4), ShapeError);
}

TEST_CASE("triplet_scores lines up columns, rows, and lambda entries") {
  SvdAdapter ad = make_adapter(3, 4, 2, 7);
  Rng rng = Rng::stream(3, "scores");
  Matrix gp = Matrix::gaussian(3, 2, 1.0, rng);
  Matrix gl = Matrix::gaussian(1, 2, 1.0, rng);
  Matrix gq = Matrix::gaussian(2, 4, 1.0, rng);
  auto scores = triplet_scores(ad, gp, gl, gq);
  REQUIRE(scores.size() == 2);
  for (int k = 0; k < 2; ++k) {
    double want = std::fabs(ad.lambda.value.at(0, k) * gl.at(0, k));
    for (int j = 0; j < 3; ++j)
      want += std::fabs(ad.p.value.at(j, k) * gp.at(j, k)) / 3.0;
    for (int j = 0; j < 4; ++j)
      want += std::fabs(ad.q.value.at(k, j) * gq.at(k, j)) / 4.0;
    CHECK(scores[size_t(k)] == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK_THROWS_AS(triplet_scores(ad, Matrix::zeros(2, 2), gl, gq), ShapeError);
}

TEST_CASE("prune keeps exactly the top-B triplets") {
  SvdAdapter a = make_adapter(2, 2, 3, 10);
  SvdAdapter b = make_adapter(2, 2, 3, 11);
  std::vector<AdapterEntry> entries = {{0, MatrixName::Wq, &a},
                                       {0, MatrixName::Wk, &b}};
  std::vector<double> scores = {5, 4, 3, 2, 1, 0};
  auto events = prune_to_budget(entries, scores, 3, 100);
  CHECK(a.effective_rank() == 3);
  CHECK(b.effective_rank() == 0);
  CHECK(events.size() == 3);  // the three b-dims got pruned
  for (const auto& ev : events) {
    CHECK(ev.matrix == MatrixName::Wk);
    CHECK_FALSE(ev.activated);
    CHECK(ev.step == 100);
  }
  for (double v : b.lambda.value.data) CHECK(v == 0.0);

  // Same call again: the active set is already right, nothing to log.
  CHECK(prune_to_budget(entries, scores, 3, 101).empty());
}

TEST_CASE("budget equal to total keeps everything, zero prunes everything") {
  SvdAdapter a = make_adapter(2, 3, 4, 12);
  std::vector<AdapterEntry> entries = {{0, MatrixName::Wv, &a}};
  std::vector<double> scores = {0.1, 0.4, 0.2, 0.3};
  CHECK(prune_to_budget(entries, scores, 4, 0).empty());
  CHECK(a.effective_rank() == 4);
  auto events = prune_to_budget(entries, scores, 0, 1);
  CHECK(a.effective_rank() == 0);
  CHECK(events.size() == 4);
  CHECK_THROWS_AS(prune_to_budget(entries, scores, 5, 2), RangeError);
  CHECK_THROWS_AS(prune_to_budget(entries, scores, -1, 2), RangeError);
}

TEST_CASE("a pruned triplet reactivates when its score re-enters the top-B") {
  SvdAdapter a = make_adapter(2, 2, 4, 13);
  std::vector<AdapterEntry> entries = {{1, MatrixName::Wf1, &a}};
  prune_to_budget(entries, {4, 3, 2, 1}, 2, 0);
  CHECK(a.active == std::vector<uint8_t>{1, 1, 0, 0});

  auto events = prune_to_budget(entries, {0.0, 3, 2, 9}, 2, 1);
  CHECK(a.active == std::vector<uint8_t>{0, 1, 0, 1});
  REQUIRE(events.size() == 2);
  CHECK(events[0].dim == 0);
  CHECK_FALSE(events[0].activated);
  CHECK(events[1].dim == 3);
  CHECK(events[1].activated);
  // Reactivation restores gradient flow, not the old weight.
  CHECK(a.lambda.value.at(0, 3) == 0.0);
}

TEST_CASE("score ties resolve by enumeration order") {
  SvdAdapter a = make_adapter(2, 2, 2, 14);
  SvdAdapter b = make_adapter(2, 2, 2, 15);
  std::vector<AdapterEntry> entries = {{0, MatrixName::Wq, &a},
                                       {0, MatrixName::Wo, &b}};
  prune_to_budget(entries, {1, 1, 1, 1}, 2, 0);
  CHECK(a.active == std::vector<uint8_t>{1, 1});
  CHECK(b.active == std::vector<uint8_t>{0, 0});
}

TEST_CASE("pruning one triplet removes exactly its rank-1 contribution") {
  SvdAdapter ad = make_adapter(5, 4, 3, 16);
  Matrix w0 = Matrix::zeros(5, 4);
  Rng rng = Rng::stream(4, "rank1");
  Matrix x = Matrix::gaussian(4, 2, 1.0, rng);
  Matrix before = svd_forward(x, w0, ad);

  const int dim = 1;
  const double lam = ad.lambda.value.at(0, dim);
  std::vector<AdapterEntry> entries = {{0, MatrixName::Wq, &ad}};
  // Keep dims 0 and 2 by score; dim 1 goes.
  prune_to_budget(entries, {3, 1, 2}, 2, 0);
  Matrix after = svd_forward(x, w0, ad);

  // Expected delta: P_dim · lam · (Q_dim · x).
  Matrix delta = Matrix::zeros(5, 2);
  for (int i = 0; i < 5; ++i)
    for (int c = 0; c < 2; ++c) {
      double qx = 0.0;
      for (int j = 0; j < 4; ++j) qx += ad.q.value.at(dim, j) * x.at(j, c);
      delta.at(i, c) = ad.p.value.at(i, dim) * lam * qx;
    }
  CHECK(max_abs_diff(sub(before, after), delta) < 1e-10);
}

TEST_CASE("prune log csv has one row per change") {
  SvdAdapter a = make_adapter(2, 2, 3, 17);
  std::vector<AdapterEntry> entries = {{0, MatrixName::Wf2, &a}};
  auto events = prune_to_budget(entries, {3, 1, 2}, 1, 42);
  auto path = std::filesystem::temp_directory_path() / "prune_log_test.csv";
  write_prune_log(path.string(), events);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,layer,matrix,dim,score,action");
  std::getline(in, line);
  CHECK(line == "42,0,W_f2,1,1,prune");
  std::getline(in, line);
  CHECK(line == "42,0,W_f2,2,2,prune");
  CHECK_FALSE(std::getline(in, line));
  std::filesystem::remove(path);
}
