#pragma once

#include <functional>
#include <vector>

#include "auvmae/losses.hpp"
#include "auvmae/types.hpp"

// Minimal reverse-mode differentiation over dense matrices, enough for a
// pre-norm transformer encoder/decoder and the training losses.
namespace auvmae::ad {

struct Var {
  int id = -1;
};

class Tape {
 public:
  /// With recording off, ops skip building backward closures (inference).
  explicit Tape(bool recording = true) : recording_(recording) {}

  Var constant(Matrix value) { return push(std::move(value), false, {}); }
  Var parameter(Matrix value) { return push(std::move(value), recording_, {}); }

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  bool recording() const { return recording_; }

  /// Gradient accumulated into `v` by the last backward pass; zeros if none.
  Matrix grad(Var v) const;

  void accumulate(Var v, const Matrix& g);

  /// Seeds d(root)/d(root) = 1 for a 1x1 root and propagates to all inputs.
  void backward(Var root);

  Var push(Matrix value, bool requires_grad, std::function<void(Tape&)> backward);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::function<void(Tape&)> backward;
  };
  std::vector<Node> nodes_;
  bool recording_;

  friend Matrix& grad_ref(Tape&, Var);
};

Var matmul(Tape& tape, Var a, Var b);
Var add(Tape& tape, Var a, Var b);
/// Adds a 1 x d row to every row of `a`.
Var add_row(Tape& tape, Var a, Var row);
Var gelu(Tape& tape, Var a);
Var sigmoid(Tape& tape, Var a);
/// Row-wise layer norm with 1 x d gain and bias.
Var layer_norm(Tape& tape, Var x, Var gain, Var bias, double eps = 1e-5);
/// Multi-head softmax self-attention on a packed n x 3d [Q | K | V] input.
Var self_attention(Tape& tape, Var qkv, int heads);
Var gather_rows(Tape& tape, Var x, std::vector<int> rows);
/// Builds a `total` x d matrix whose rows at `rows` come from `x` (in order)
/// and whose remaining rows are copies of the 1 x d `fill`.
Var scatter_rows(Tape& tape, Var x, std::vector<int> rows, int total, Var fill);
/// Mean of the rows of `x` sharing a group id; output has `groups` rows.
Var group_mean(Tape& tape, Var x, std::vector<int> group_of, int groups);
Var concat_rows(Tape& tape, const std::vector<Var>& parts);
/// A 1x1 node holding a precomputed loss whose gradient with respect to `x`
/// is `loss.grad`.
Var loss_node(Tape& tape, Var x, LossValue loss);
/// sum_k coeff_k * scalar_k over 1x1 nodes.
Var weighted_sum(Tape& tape, const std::vector<std::pair<double, Var>>& terms);

}  // namespace auvmae::ad
