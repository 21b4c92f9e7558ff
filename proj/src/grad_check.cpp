#include "loralab/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "loralab/errors.hpp"

namespace loralab {

GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<std::vector<Matrix>()>& analytic_grads,
                           const std::vector<Param*>& params, double eps,
                           double tol) {
  if (eps <= 0.0) throw RangeError("grad_check: eps must be positive");
  const double l0 = loss();
  const double l1 = loss();
  if (std::memcmp(&l0, &l1, sizeof(double)) != 0)
    throw DeterminismError("grad_check: loss is not deterministic (" +
                           std::to_string(l0) + " vs " + std::to_string(l1) +
                           ")");

  std::vector<Matrix> grads = analytic_grads();
  if (grads.size() != params.size())
    throw ShapeError("grad_check: gradient count mismatch");

  GradCheckReport rep;
  rep.tol = tol;
  for (size_t p = 0; p < params.size(); ++p) {
    Matrix& w = params[p]->value;
    const Matrix& g = grads[p];
    if (!w.same_shape(g))
      throw ShapeError("grad_check: gradient shape mismatch for " +
                       params[p]->name);
    for (size_t i = 0; i < w.data.size(); ++i) {
      const double saved = w.data[i];
      w.data[i] = saved + eps;
      const double lp = loss();
      w.data[i] = saved - eps;
      const double lm = loss();
      w.data[i] = saved;
      const double fd = (lp - lm) / (2.0 * eps);
      const double an = g.data[i];
      const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-8});
      const double rel = std::fabs(fd - an) / denom;
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst_param = params[p]->name;
        rep.worst_index = int(i);
      }
    }
  }
  rep.passed = rep.max_rel_err <= tol;
  return rep;
}

}  // namespace loralab
