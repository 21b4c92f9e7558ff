#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "loralab/param.hpp"
#include "loralab/rng.hpp"

namespace loralab {

// The six adaptable weight matrices of an encoder layer.
enum class MatrixName { Wq, Wk, Wv, Wo, Wf1, Wf2 };
constexpr int kNumMatrixNames = 6;

const char* to_string(MatrixName name);
MatrixName matrix_name_from_string(const std::string& s);
const std::vector<MatrixName>& all_matrix_names();

// (layer, matrix) pairs an adapter attaches to. Kept sorted and unique.
using AdapterTargets = std::set<std::pair<int, MatrixName>>;

// Two-matrix low-rank adapter for a frozen host weight W0 (d1×d2):
//   h = W0·x + (alpha/r)·B·(A·x),  A: r×d2 gaussian-init, B: d1×r zero-init,
// so the adapted forward equals the base forward at construction.
struct LoraAdapter {
  Param a;  // r×d2
  Param b;  // d1×r
  int rank = 0;
  double alpha = 1.0;
  double dropout_p = 0.0;

  static LoraAdapter create(const std::string& name_prefix, int d1, int d2,
                            int rank, double alpha, double dropout_p,
                            Rng& init_rng);
  long param_count() const { return a.count() + b.count(); }
};

// Singular-triplet adapter: ΔW = P·diag(lambda)·Q with per-dimension active
// flags. Pruned dimensions carry lambda == 0 and active == false; they stay
// allocated so parameter addressing is stable across pruning events.
struct SvdAdapter {
  Param p;       // d1×r_max
  Param lambda;  // 1×r_max, zero-init
  Param q;       // r_max×d2
  std::vector<uint8_t> active;

  static SvdAdapter create(const std::string& name_prefix, int d1, int d2,
                           int r_max, Rng& init_rng);
  int allocated() const { return lambda.value.cols; }
  int effective_rank() const;
  // Active update capacity: rank·(d1 + d2). The diagonal's scale folds into
  // the factors, so it adds no degrees of freedom to the count.
  long effective_param_count() const;
  long param_count() const {
    return p.count() + lambda.count() + q.count();
  }
};

// Adapter slot on a host weight. At most one adapter kind can be attached.
struct AdapterSlot {
  std::unique_ptr<LoraAdapter> lora;
  std::unique_ptr<SvdAdapter> svd;
  bool empty() const { return !lora && !svd; }
};

// Column-vector convention: x is d2×n, W0 is d1×d2, result d1×n. Dropout is
// applied to the adapter-branch input only, and only in training mode.
Matrix lora_forward(const Matrix& x, const Matrix& w0,
                    const LoraAdapter& adapter, bool training,
                    Rng* dropout_rng = nullptr);

Matrix svd_forward(const Matrix& x, const Matrix& w0, const SvdAdapter& adapter);

// W0 + (alpha/r)·B·A, or W0 + P·diag(lambda)·Q over active dimensions.
Matrix merge_adapter(const Matrix& w0, const LoraAdapter& adapter);
Matrix merge_adapter(const Matrix& w0, const SvdAdapter& adapter);

// Drop-mask with inverted scaling: entries are 0 with probability p, else
// 1/(1−p).
Matrix dropout_mask(int rows, int cols, double p, Rng& rng);

}  // namespace loralab
