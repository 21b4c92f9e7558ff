#include "loralab/adapters.hpp"

#include <cmath>

#include "loralab/errors.hpp"

namespace loralab {

const char* to_string(MatrixName name) {
  switch (name) {
    case MatrixName::Wq: return "W_q";
    case MatrixName::Wk: return "W_k";
    case MatrixName::Wv: return "W_v";
    case MatrixName::Wo: return "W_o";
    case MatrixName::Wf1: return "W_f1";
    case MatrixName::Wf2: return "W_f2";
  }
  throw LookupError("unknown matrix name enum");
}

MatrixName matrix_name_from_string(const std::string& s) {
  for (MatrixName n : all_matrix_names())
    if (s == to_string(n)) return n;
  throw LookupError("unknown matrix name '" + s + "'");
}

const std::vector<MatrixName>& all_matrix_names() {
  static const std::vector<MatrixName> names = {
      MatrixName::Wq, MatrixName::Wk, MatrixName::Wv,
      MatrixName::Wo, MatrixName::Wf1, MatrixName::Wf2};
  return names;
}

LoraAdapter LoraAdapter::create(const std::string& name_prefix, int d1, int d2,
                                int rank, double alpha, double dropout_p,
                                Rng& init_rng) {
  if (rank < 1) throw RangeError("lora: rank must be >= 1");
  if (dropout_p < 0.0 || dropout_p >= 1.0)
    throw RangeError("lora: dropout_p must be in [0, 1)");
  LoraAdapter ad;
  ad.rank = rank;
  ad.alpha = alpha;
  ad.dropout_p = dropout_p;
  // Rows of A at unit norm so the branch sees input-scale activations even
  // at small widths; B starts at zero, so the adapter is a no-op until
  // trained.
  const double a_sd = 1.0 / std::sqrt(double(d2));
  ad.a = Param{name_prefix + ".A", Matrix::gaussian(rank, d2, a_sd, init_rng),
               true};
  ad.b = Param{name_prefix + ".B", Matrix::zeros(d1, rank), true};
  return ad;
}

SvdAdapter SvdAdapter::create(const std::string& name_prefix, int d1, int d2,
                              int r_max, Rng& init_rng) {
  if (r_max < 1) throw RangeError("svd adapter: r_max must be >= 1");
  SvdAdapter ad;
  // Unit-norm columns of P and rows of Q keep singular-value gradients at a
  // usable scale; lambda starts at zero, so the branch is a no-op until
  // trained.
  const double p_sd = 1.0 / std::sqrt(double(d1));
  const double q_sd = 1.0 / std::sqrt(double(d2));
  ad.p = Param{name_prefix + ".P", Matrix::gaussian(d1, r_max, p_sd, init_rng),
               true};
  ad.lambda = Param{name_prefix + ".lambda", Matrix::zeros(1, r_max), true};
  ad.q = Param{name_prefix + ".Q", Matrix::gaussian(r_max, d2, q_sd, init_rng),
               true};
  ad.active.assign(size_t(r_max), 1);
  return ad;
}

int SvdAdapter::effective_rank() const {
  int n = 0;
  for (uint8_t a : active) n += a ? 1 : 0;
  return n;
}

long SvdAdapter::effective_param_count() const {
  const long d1 = p.value.rows;
  const long d2 = q.value.cols;
  return long(effective_rank()) * (d1 + d2);
}

Matrix dropout_mask(int rows, int cols, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw RangeError("dropout: p must be in [0, 1)");
  Matrix m = Matrix::filled(rows, cols, 1.0 / (1.0 - p));
  for (auto& v : m.data)
    if (rng.next_double() < p) v = 0.0;
  return m;
}

Matrix lora_forward(const Matrix& x, const Matrix& w0,
                    const LoraAdapter& adapter, bool training,
                    Rng* dropout_rng) {
  if (w0.cols != x.rows)
    throw ShapeError("lora_forward: W0/x mismatch " + shape_pair(w0, x));
  if (adapter.a.value.cols != w0.cols || adapter.b.value.rows != w0.rows ||
      adapter.a.value.rows != adapter.rank ||
      adapter.b.value.cols != adapter.rank)
    throw ShapeError("lora_forward: adapter does not conform to host " +
                     w0.shape_str());
  Matrix base = matmul(w0, x);
  Matrix branch_in = x;
  if (training && adapter.dropout_p > 0.0) {
    if (!dropout_rng)
      throw StateError("lora_forward: training dropout needs an rng stream");
    branch_in = hadamard(
        branch_in, dropout_mask(x.rows, x.cols, adapter.dropout_p, *dropout_rng));
  }
  Matrix delta = matmul(adapter.b.value, matmul(adapter.a.value, branch_in));
  return add(base, scale(delta, adapter.alpha / adapter.rank));
}

Matrix svd_forward(const Matrix& x, const Matrix& w0, const SvdAdapter& adapter) {
  if (w0.cols != x.rows)
    throw ShapeError("svd_forward: W0/x mismatch " + shape_pair(w0, x));
  if (adapter.p.value.rows != w0.rows || adapter.q.value.cols != w0.cols)
    throw ShapeError("svd_forward: adapter does not conform to host " +
                     w0.shape_str());
  Matrix base = matmul(w0, x);
  Matrix qx = matmul(adapter.q.value, x);  // r_max×n
  for (int i = 0; i < qx.rows; ++i) {
    const double l = adapter.active[i] ? adapter.lambda.value.at(0, i) : 0.0;
    for (int j = 0; j < qx.cols; ++j) qx.at(i, j) *= l;
  }
  return add(base, matmul(adapter.p.value, qx));
}

Matrix merge_adapter(const Matrix& w0, const LoraAdapter& adapter) {
  if (adapter.b.value.rows != w0.rows || adapter.a.value.cols != w0.cols)
    throw ShapeError("merge_adapter: adapter does not conform to host " +
                     w0.shape_str());
  Matrix delta = matmul(adapter.b.value, adapter.a.value);
  return add(w0, scale(delta, adapter.alpha / adapter.rank));
}

Matrix merge_adapter(const Matrix& w0, const SvdAdapter& adapter) {
  if (adapter.p.value.rows != w0.rows || adapter.q.value.cols != w0.cols)
    throw ShapeError("merge_adapter: adapter does not conform to host " +
                     w0.shape_str());
  Matrix scaled_q = adapter.q.value;  // rows scaled by active lambda
  for (int i = 0; i < scaled_q.rows; ++i) {
    const double l = adapter.active[i] ? adapter.lambda.value.at(0, i) : 0.0;
    for (int j = 0; j < scaled_q.cols; ++j) scaled_q.at(i, j) *= l;
  }
  return add(w0, matmul(adapter.p.value, scaled_q));
}

}  // namespace loralab
