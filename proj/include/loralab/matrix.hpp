#pragma once

#include <string>
#include <vector>

#include "loralab/errors.hpp"
#include "loralab/rng.hpp"

namespace loralab {

// Dense row-major matrix of doubles. All math in this project is 64-bit and
// reductions run in a fixed sequential order so repeated runs are bit-stable.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(size_t(r) * size_t(c), 0.0) {}

  static Matrix zeros(int r, int c) { return Matrix(r, c); }
  static Matrix filled(int r, int c, double v) {
    Matrix m(r, c);
    for (auto& x : m.data) x = v;
    return m;
  }
  static Matrix gaussian(int r, int c, double stddev, Rng& rng) {
    Matrix m(r, c);
    for (auto& x : m.data) x = stddev * rng.next_gaussian();
    return m;
  }
  static Matrix from_rows(const std::vector<std::vector<double>>& rows_in);

  double& at(int i, int j) { return data[size_t(i) * cols + j]; }
  double at(int i, int j) const { return data[size_t(i) * cols + j]; }
  size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
  std::string shape_str() const;
};

std::string shape_pair(const Matrix& a, const Matrix& b);

// c = a·b
Matrix matmul(const Matrix& a, const Matrix& b);
// c = a·bᵀ
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// c = aᵀ·b
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix transpose(const Matrix& a);

// Multiplies column j of a by d[j]; d is 1×cols.
Matrix col_scale(const Matrix& a, const Matrix& d);

// Row-wise softmax with max-subtraction. Empty matrices pass through.
Matrix softmax_rows(const Matrix& m);

// Row-wise log-softmax, same stabilization.
Matrix log_softmax_rows(const Matrix& m);

// Mean negative log-probability of targets[i] under row i of logits.
double cross_entropy(const Matrix& logits, const std::vector<int>& targets);

double max_abs_diff(const Matrix& a, const Matrix& b);
bool bit_equal(const Matrix& a, const Matrix& b);
bool all_finite(const Matrix& a);

}  // namespace loralab
