#include "loralab/tape.hpp"

#include <cmath>
#include <utility>

namespace loralab {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

Tape::NodeId Tape::push(Matrix value, std::function<void(Tape&)> back) {
  nodes_.push_back(Node{std::move(value), Matrix(), std::move(back), nullptr});
  NodeId id = NodeId(nodes_.size()) - 1;
  nodes_[id].grad = Matrix::zeros(nodes_[id].value.rows, nodes_[id].value.cols);
  return id;
}

void Tape::check_id(NodeId id) const {
  if (id < 0 || size_t(id) >= nodes_.size())
    throw IndexError("tape: bad node id " + std::to_string(id));
}

Tape::NodeId Tape::leaf(Matrix value, const void* param_key) {
  NodeId id = push(std::move(value));
  nodes_[id].param_key = param_key;
  return id;
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  NodeId out = push(loralab::add(nodes_[a].value, nodes_[b].value));
  nodes_[out].back = [a, b, out](Tape& t) {
    const Matrix& g = t.nodes_[out].grad;
    t.grad_mut(a) = loralab::add(t.nodes_[a].grad, g);
    t.grad_mut(b) = loralab::add(t.nodes_[b].grad, g);
  };
  return out;
}

Tape::NodeId Tape::scale(NodeId a, double s) {
  check_id(a);
  NodeId out = push(loralab::scale(nodes_[a].value, s));
  nodes_[out].back = [a, out, s](Tape& t) {
    t.grad_mut(a) =
        loralab::add(t.nodes_[a].grad, loralab::scale(t.nodes_[out].grad, s));
  };
  return out;
}

Tape::NodeId Tape::hadamard(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  NodeId out = push(loralab::hadamard(nodes_[a].value, nodes_[b].value));
  nodes_[out].back = [a, b, out](Tape& t) {
    const Matrix& g = t.nodes_[out].grad;
    t.grad_mut(a) = loralab::add(t.nodes_[a].grad,
                                 loralab::hadamard(g, t.nodes_[b].value));
    t.grad_mut(b) = loralab::add(t.nodes_[b].grad,
                                 loralab::hadamard(g, t.nodes_[a].value));
  };
  return out;
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  NodeId out = push(loralab::matmul(nodes_[a].value, nodes_[b].value));
  nodes_[out].back = [a, b, out](Tape& t) {
    const Matrix& g = t.nodes_[out].grad;
    // dA = g·Bᵀ, dB = Aᵀ·g
    t.grad_mut(a) = loralab::add(t.nodes_[a].grad,
                                 loralab::matmul_nt(g, t.nodes_[b].value));
    t.grad_mut(b) = loralab::add(t.nodes_[b].grad,
                                 loralab::matmul_tn(t.nodes_[a].value, g));
  };
  return out;
}

Tape::NodeId Tape::matmul_nt(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  NodeId out = push(loralab::matmul_nt(nodes_[a].value, nodes_[b].value));
  nodes_[out].back = [a, b, out](Tape& t) {
    const Matrix& g = t.nodes_[out].grad;
    // C = A·Bᵀ: dA = g·B, dB = gᵀ·A
    t.grad_mut(a) = loralab::add(t.nodes_[a].grad,
                                 loralab::matmul(g, t.nodes_[b].value));
    t.grad_mut(b) = loralab::add(t.nodes_[b].grad,
                                 loralab::matmul_tn(g, t.nodes_[a].value));
  };
  return out;
}

Tape::NodeId Tape::col_scale(NodeId a, NodeId d) {
  check_id(a);
  check_id(d);
  NodeId out = push(loralab::col_scale(nodes_[a].value, nodes_[d].value));
  nodes_[out].back = [a, d, out](Tape& t) {
    const Matrix& g = t.nodes_[out].grad;
    const Matrix& av = t.nodes_[a].value;
    const Matrix& dv = t.nodes_[d].value;
    Matrix& da = t.grad_mut(a);
    Matrix& dd = t.grad_mut(d);
    for (int i = 0; i < av.rows; ++i)
      for (int j = 0; j < av.cols; ++j) {
        da.at(i, j) += g.at(i, j) * dv.at(0, j);
        dd.at(0, j) += g.at(i, j) * av.at(i, j);
      }
  };
  return out;
}

Tape::NodeId Tape::softmax_rows(NodeId a) {
  check_id(a);
  NodeId out = push(loralab::softmax_rows(nodes_[a].value));
  nodes_[out].back = [a, out](Tape& t) {
    const Matrix& s = t.nodes_[out].value;
    const Matrix& g = t.nodes_[out].grad;
    Matrix& da = t.grad_mut(a);
    // dx_row = s ⊙ (g − <g, s>)
    for (int i = 0; i < s.rows; ++i) {
      double dot = 0.0;
      for (int j = 0; j < s.cols; ++j) dot += g.at(i, j) * s.at(i, j);
      for (int j = 0; j < s.cols; ++j)
        da.at(i, j) += s.at(i, j) * (g.at(i, j) - dot);
    }
  };
  return out;
}

Tape::NodeId Tape::gelu(NodeId a) {
  check_id(a);
  const Matrix& x = nodes_[a].value;
  Matrix y = x;
  for (auto& v : y.data) v = v * 0.5 * (1.0 + std::erf(v * kInvSqrt2));
  NodeId out = push(std::move(y));
  nodes_[out].back = [a, out](Tape& t) {
    const Matrix& xv = t.nodes_[a].value;
    const Matrix& g = t.nodes_[out].grad;
    Matrix& da = t.grad_mut(a);
    for (size_t i = 0; i < xv.data.size(); ++i) {
      double v = xv.data[i];
      double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
      da.data[i] += g.data[i] * (cdf + v * pdf);
    }
  };
  return out;
}

Tape::NodeId Tape::layer_norm(NodeId x, NodeId gain, NodeId bias, double eps) {
  check_id(x);
  check_id(gain);
  check_id(bias);
  const Matrix& xv = nodes_[x].value;
  const Matrix& gv = nodes_[gain].value;
  const Matrix& bv = nodes_[bias].value;
  if (gv.rows != 1 || gv.cols != xv.cols || bv.rows != 1 || bv.cols != xv.cols)
    throw ShapeError("layer_norm: gain/bias must be 1x" +
                     std::to_string(xv.cols));
  const int n = xv.cols;
  Matrix y(xv.rows, n);
  for (int i = 0; i < xv.rows; ++i) {
    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += xv.at(i, j);
    mu /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      double d = xv.at(i, j) - mu;
      var += d * d;
    }
    var /= n;
    double inv = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < n; ++j)
      y.at(i, j) = (xv.at(i, j) - mu) * inv * gv.at(0, j) + bv.at(0, j);
  }
  NodeId out = push(std::move(y));
  nodes_[out].back = [x, gain, bias, out, eps](Tape& t) {
    const Matrix& xv2 = t.nodes_[x].value;
    const Matrix& gv2 = t.nodes_[gain].value;
    const Matrix& g = t.nodes_[out].grad;
    Matrix& dx = t.grad_mut(x);
    Matrix& dgain = t.grad_mut(gain);
    Matrix& dbias = t.grad_mut(bias);
    const int n2 = xv2.cols;
    for (int i = 0; i < xv2.rows; ++i) {
      double mu = 0.0;
      for (int j = 0; j < n2; ++j) mu += xv2.at(i, j);
      mu /= n2;
      double var = 0.0;
      for (int j = 0; j < n2; ++j) {
        double d = xv2.at(i, j) - mu;
        var += d * d;
      }
      var /= n2;
      double inv = 1.0 / std::sqrt(var + eps);
      // xhat = (x−μ)·inv ; dy through gain; then the two mean corrections.
      double mean_dg = 0.0, mean_dgx = 0.0;
      for (int j = 0; j < n2; ++j) {
        double xhat = (xv2.at(i, j) - mu) * inv;
        double dyg = g.at(i, j) * gv2.at(0, j);
        mean_dg += dyg;
        mean_dgx += dyg * xhat;
        dgain.at(0, j) += g.at(i, j) * xhat;
        dbias.at(0, j) += g.at(i, j);
      }
      mean_dg /= n2;
      mean_dgx /= n2;
      for (int j = 0; j < n2; ++j) {
        double xhat = (xv2.at(i, j) - mu) * inv;
        double dyg = g.at(i, j) * gv2.at(0, j);
        dx.at(i, j) += inv * (dyg - mean_dg - xhat * mean_dgx);
      }
    }
  };
  return out;
}

Tape::NodeId Tape::gather_rows(NodeId table, std::vector<int> ids) {
  check_id(table);
  const Matrix& tv = nodes_[table].value;
  Matrix y(int(ids.size()), tv.cols);
  for (size_t i = 0; i < ids.size(); ++i) {
    int r = ids[i];
    if (r < 0 || r >= tv.rows)
      throw IndexError("gather_rows: row " + std::to_string(r) +
                       " out of range for " + tv.shape_str());
    for (int j = 0; j < tv.cols; ++j) y.at(int(i), j) = tv.at(r, j);
  }
  NodeId out = push(std::move(y));
  nodes_[out].back = [table, out, ids = std::move(ids)](Tape& t) {
    const Matrix& g = t.nodes_[out].grad;
    Matrix& dt = t.grad_mut(table);
    for (size_t i = 0; i < ids.size(); ++i)
      for (int j = 0; j < g.cols; ++j) dt.at(ids[i], j) += g.at(int(i), j);
  };
  return out;
}

Tape::NodeId Tape::slice_cols(NodeId a, int col_begin, int col_end) {
  check_id(a);
  const Matrix& av = nodes_[a].value;
  if (col_begin < 0 || col_end > av.cols || col_begin >= col_end)
    throw RangeError("slice_cols: [" + std::to_string(col_begin) + "," +
                     std::to_string(col_end) + ") of " + av.shape_str());
  Matrix y(av.rows, col_end - col_begin);
  for (int i = 0; i < av.rows; ++i)
    for (int j = col_begin; j < col_end; ++j)
      y.at(i, j - col_begin) = av.at(i, j);
  NodeId out = push(std::move(y));
  nodes_[out].back = [a, out, col_begin](Tape& t) {
    const Matrix& g = t.nodes_[out].grad;
    Matrix& da = t.grad_mut(a);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) da.at(i, col_begin + j) += g.at(i, j);
  };
  return out;
}

Tape::NodeId Tape::concat_cols(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw InputError("concat_cols: no parts");
  int rows = nodes_[parts[0]].value.rows;
  int cols = 0;
  for (NodeId p : parts) {
    check_id(p);
    if (nodes_[p].value.rows != rows)
      throw ShapeError("concat_cols: row mismatch");
    cols += nodes_[p].value.cols;
  }
  Matrix y(rows, cols);
  int off = 0;
  for (NodeId p : parts) {
    const Matrix& pv = nodes_[p].value;
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < pv.cols; ++j) y.at(i, off + j) = pv.at(i, j);
    off += pv.cols;
  }
  NodeId out = push(std::move(y));
  nodes_[out].back = [parts, out](Tape& t) {
    const Matrix& g = t.nodes_[out].grad;
    int off2 = 0;
    for (NodeId p : parts) {
      Matrix& dp = t.grad_mut(p);
      for (int i = 0; i < dp.rows; ++i)
        for (int j = 0; j < dp.cols; ++j) dp.at(i, j) += g.at(i, off2 + j);
      off2 += dp.cols;
    }
  };
  return out;
}

Tape::NodeId Tape::concat_rows(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw InputError("concat_rows: no parts");
  int cols = nodes_[parts[0]].value.cols;
  int rows = 0;
  for (NodeId p : parts) {
    check_id(p);
    if (nodes_[p].value.cols != cols)
      throw ShapeError("concat_rows: column mismatch");
    rows += nodes_[p].value.rows;
  }
  Matrix y(rows, cols);
  int off = 0;
  for (NodeId p : parts) {
    const Matrix& pv = nodes_[p].value;
    for (int i = 0; i < pv.rows; ++i)
      for (int j = 0; j < cols; ++j) y.at(off + i, j) = pv.at(i, j);
    off += pv.rows;
  }
  NodeId out = push(std::move(y));
  nodes_[out].back = [parts, out](Tape& t) {
    const Matrix& g = t.nodes_[out].grad;
    int off2 = 0;
    for (NodeId p : parts) {
      Matrix& dp = t.grad_mut(p);
      for (int i = 0; i < dp.rows; ++i)
        for (int j = 0; j < dp.cols; ++j) dp.at(i, j) += g.at(off2 + i, j);
      off2 += dp.rows;
    }
  };
  return out;
}

Tape::NodeId Tape::sum_all(NodeId a) {
  check_id(a);
  const Matrix& av = nodes_[a].value;
  double s = 0.0;
  for (double v : av.data) s += v;
  Matrix y(1, 1);
  y.at(0, 0) = s;
  NodeId out = push(std::move(y));
  nodes_[out].back = [a, out](Tape& t) {
    double g = t.nodes_[out].grad.at(0, 0);
    Matrix& da = t.grad_mut(a);
    for (auto& v : da.data) v += g;
  };
  return out;
}

Tape::NodeId Tape::cross_entropy(NodeId logits, std::vector<int> targets) {
  check_id(logits);
  const Matrix& lv = nodes_[logits].value;
  Matrix y(1, 1);
  y.at(0, 0) = loralab::cross_entropy(lv, targets);
  NodeId out = push(std::move(y));
  nodes_[out].back = [logits, out, targets = std::move(targets)](Tape& t) {
    const Matrix& lv2 = t.nodes_[logits].value;
    double g = t.nodes_[out].grad.at(0, 0);
    Matrix probs = loralab::softmax_rows(lv2);
    Matrix& dl = t.grad_mut(logits);
    const double inv_n = lv2.rows > 0 ? 1.0 / lv2.rows : 0.0;
    for (int i = 0; i < lv2.rows; ++i) {
      for (int j = 0; j < lv2.cols; ++j)
        dl.at(i, j) += g * inv_n * probs.at(i, j);
      dl.at(i, targets[i]) -= g * inv_n;
    }
  };
  return out;
}

void Tape::backward(NodeId loss) {
  check_id(loss);
  if (ran_backward_) throw StateError("tape: backward already ran");
  const Matrix& lv = nodes_[loss].value;
  if (lv.rows != 1 || lv.cols != 1)
    throw ShapeError("backward: loss must be 1x1, got " + lv.shape_str());
  ran_backward_ = true;
  nodes_[loss].grad.at(0, 0) = 1.0;
  for (NodeId id = loss; id >= 0; --id)
    if (nodes_[id].back) nodes_[id].back(*this);
}

}  // namespace loralab
