#pragma once

#include <functional>
#include <string>
#include <vector>

#include "loralab/param.hpp"

namespace loralab {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_index = -1;
  double tol = 0.0;
  bool passed = false;
};

// Central finite differences against analytic gradients for every entry of
// every parameter. `loss` evaluates the objective at the current parameter
// values without recording gradients; `analytic_grads` returns one gradient
// matrix per parameter, aligned with `params` (zeros for unused parameters).
// Both must be deterministic: two identical loss evaluations that disagree
// raise DeterminismError.
GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<std::vector<Matrix>()>& analytic_grads,
                           const std::vector<Param*>& params, double eps,
                           double tol);

}  // namespace loralab
