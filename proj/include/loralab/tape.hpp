#pragma once

#include <functional>
#include <span>
#include <vector>

#include "loralab/matrix.hpp"

namespace loralab {

// Reverse-mode gradient tape over Matrix primitives. Forward calls append
// nodes; backward() replays the recorded ops in exact reverse order of the
// forward pass. One tape == one forward/backward episode; tapes are cheap to
// construct and not thread-safe.
class Tape {
 public:
  using NodeId = int;

  // Leaf node. param_key is an opaque identity used by callers to map leaf
  // gradients back to their parameters; leaves without a key are constants
  // (their gradients are still accumulated but nobody reads them).
  NodeId leaf(Matrix value, const void* param_key = nullptr);

  NodeId add(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  NodeId hadamard(NodeId a, NodeId b);
  NodeId matmul(NodeId a, NodeId b);     // a·b
  NodeId matmul_nt(NodeId a, NodeId b);  // a·bᵀ
  NodeId col_scale(NodeId a, NodeId d);  // column j scaled by d[0][j]
  NodeId softmax_rows(NodeId a);
  NodeId gelu(NodeId a);
  // Per-row normalization with learned gain/bias (both 1×cols).
  NodeId layer_norm(NodeId x, NodeId gain, NodeId bias, double eps = 1e-5);
  // Rows of `table` selected by ids; duplicate ids accumulate gradient.
  NodeId gather_rows(NodeId table, std::vector<int> ids);
  NodeId slice_cols(NodeId a, int col_begin, int col_end);
  NodeId concat_cols(const std::vector<NodeId>& parts);
  NodeId concat_rows(const std::vector<NodeId>& parts);
  NodeId sum_all(NodeId a);  // 1×1
  // Mean negative log-probability of targets under row-softmax; 1×1 node.
  NodeId cross_entropy(NodeId logits, std::vector<int> targets);

  const Matrix& value(NodeId id) const { return nodes_[id].value; }
  const Matrix& grad(NodeId id) const { return nodes_[id].grad; }
  size_t num_nodes() const { return nodes_.size(); }

  // Seeds d(loss)=1 and accumulates gradients into every node. `loss` must
  // be 1×1. May be called once per tape.
  void backward(NodeId loss);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(Tape&)> back;  // null for leaves
    const void* param_key = nullptr;
  };

  NodeId push(Matrix value, std::function<void(Tape&)> back = nullptr);
  Matrix& grad_mut(NodeId id) { return nodes_[id].grad; }
  void check_id(NodeId id) const;

  std::vector<Node> nodes_;
  bool ran_backward_ = false;
};

}  // namespace loralab
