#include "loralab/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace loralab {

std::string Matrix::shape_str() const {
  return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

std::string shape_pair(const Matrix& a, const Matrix& b) {
  return a.shape_str() + " x " + b.shape_str();
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows_in) {
  if (rows_in.empty()) return Matrix();
  Matrix m(int(rows_in.size()), int(rows_in[0].size()));
  for (int i = 0; i < m.rows; ++i) {
    if (int(rows_in[i].size()) != m.cols)
      throw ShapeError("from_rows: ragged row " + std::to_string(i));
    for (int j = 0; j < m.cols; ++j) m.at(i, j) = rows_in[i][j];
  }
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw ShapeError("matmul: dimension mismatch " + shape_pair(a, b));
  Matrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      const double* brow = &b.data[size_t(k) * b.cols];
      double* crow = &c.data[size_t(i) * c.cols];
      for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols)
    throw ShapeError("matmul_nt: dimension mismatch " + shape_pair(a, b));
  Matrix c(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = &a.data[size_t(i) * a.cols];
    for (int j = 0; j < b.rows; ++j) {
      const double* brow = &b.data[size_t(j) * b.cols];
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
      c.at(i, j) = s;
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows)
    throw ShapeError("matmul_tn: dimension mismatch " + shape_pair(a, b));
  Matrix c(a.cols, b.cols);
  for (int k = 0; k < a.rows; ++k) {
    const double* arow = &a.data[size_t(k) * a.cols];
    const double* brow = &b.data[size_t(k) * b.cols];
    for (int i = 0; i < a.cols; ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* crow = &c.data[size_t(i) * c.cols];
      for (int j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b))
    throw ShapeError("add: shape mismatch " + shape_pair(a, b));
  Matrix c = a;
  for (size_t i = 0; i < c.data.size(); ++i) c.data[i] += b.data[i];
  return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b))
    throw ShapeError("sub: shape mismatch " + shape_pair(a, b));
  Matrix c = a;
  for (size_t i = 0; i < c.data.size(); ++i) c.data[i] -= b.data[i];
  return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b))
    throw ShapeError("hadamard: shape mismatch " + shape_pair(a, b));
  Matrix c = a;
  for (size_t i = 0; i < c.data.size(); ++i) c.data[i] *= b.data[i];
  return c;
}

Matrix scale(const Matrix& a, double s) {
  Matrix c = a;
  for (auto& x : c.data) x *= s;
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix c(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) c.at(j, i) = a.at(i, j);
  return c;
}

Matrix col_scale(const Matrix& a, const Matrix& d) {
  if (d.rows != 1 || d.cols != a.cols)
    throw ShapeError("col_scale: diagonal must be 1x" + std::to_string(a.cols) +
                     ", got " + d.shape_str());
  Matrix c = a;
  for (int i = 0; i < c.rows; ++i)
    for (int j = 0; j < c.cols; ++j) c.at(i, j) *= d.at(0, j);
  return c;
}

Matrix softmax_rows(const Matrix& m) {
  Matrix out = m;
  for (int i = 0; i < m.rows; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m.cols; ++j) mx = std::max(mx, m.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < m.cols; ++j) {
      double e = std::exp(m.at(i, j) - mx);
      out.at(i, j) = e;
      sum += e;
    }
    for (int j = 0; j < m.cols; ++j) out.at(i, j) /= sum;
  }
  return out;
}

Matrix log_softmax_rows(const Matrix& m) {
  Matrix out = m;
  for (int i = 0; i < m.rows; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m.cols; ++j) mx = std::max(mx, m.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < m.cols; ++j) sum += std::exp(m.at(i, j) - mx);
    const double lse = mx + std::log(sum);
    for (int j = 0; j < m.cols; ++j) out.at(i, j) = m.at(i, j) - lse;
  }
  return out;
}

double cross_entropy(const Matrix& logits, const std::vector<int>& targets) {
  if (int(targets.size()) != logits.rows)
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) +
                     " targets for " + std::to_string(logits.rows) + " rows");
  Matrix lsm = log_softmax_rows(logits);
  double loss = 0.0;
  for (int i = 0; i < logits.rows; ++i) {
    int t = targets[i];
    if (t < 0 || t >= logits.cols)
      throw IndexError("cross_entropy: target " + std::to_string(t) +
                       " out of range for " + std::to_string(logits.cols) +
                       " classes (row " + std::to_string(i) + ")");
    loss -= lsm.at(i, t);
  }
  return logits.rows == 0 ? 0.0 : loss / logits.rows;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b))
    throw ShapeError("max_abs_diff: shape mismatch " + shape_pair(a, b));
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  return m;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) return false;
  return std::memcmp(a.data.data(), b.data.data(),
                     a.data.size() * sizeof(double)) == 0;
}

bool all_finite(const Matrix& a) {
  for (double x : a.data)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace loralab
