#include "auvmae/autograd.hpp"

#include <cmath>

namespace auvmae::ad {

Matrix& grad_ref(Tape& tape, Var v) { return tape.nodes_[v.id].grad; }

Matrix Tape::grad(Var v) const {
  const Node& node = nodes_[v.id];
  if (node.grad.size() == 0) return Matrix::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& node = nodes_[v.id];
  if (!node.requires_grad) return;
  if (node.grad.size() == 0) node.grad = g;
  else node.grad += g;
}

Var Tape::push(Matrix value, bool requires_grad, std::function<void(Tape&)> backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad && recording_;
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var root) {
  if (!recording_) throw NumericError("backward on a non-recording tape");
  if (nodes_[root.id].value.size() != 1) throw NumericError("backward root must be a scalar");
  nodes_[root.id].grad = Matrix::Ones(1, 1);
  for (int id = root.id; id >= 0; --id) {
    Node& node = nodes_[id];
    if (node.backward && node.grad.size() != 0) node.backward(*this);
  }
}

namespace {

bool any_grad(const Tape& tape, std::initializer_list<Var> vars) {
  for (Var v : vars)
    if (tape.requires_grad(v)) return true;
  return false;
}

}  // namespace

Var matmul(Tape& tape, Var a, Var b) {
  Var out{static_cast<int>(tape.size())};
  return tape.push(tape.value(a) * tape.value(b), any_grad(tape, {a, b}), [a, b, out](Tape& t) {
    const Matrix& g = grad_ref(t, out);
    if (t.requires_grad(a)) t.accumulate(a, g * t.value(b).transpose());
    if (t.requires_grad(b)) t.accumulate(b, t.value(a).transpose() * g);
  });
}

Var add(Tape& tape, Var a, Var b) {
  Var out{static_cast<int>(tape.size())};
  return tape.push(tape.value(a) + tape.value(b), any_grad(tape, {a, b}), [a, b, out](Tape& t) {
    const Matrix& g = grad_ref(t, out);
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var add_row(Tape& tape, Var a, Var row) {
  Var out{static_cast<int>(tape.size())};
  Matrix value = tape.value(a);
  value.rowwise() += tape.value(row).row(0);
  return tape.push(std::move(value), any_grad(tape, {a, row}), [a, row, out](Tape& t) {
    const Matrix& g = grad_ref(t, out);
    t.accumulate(a, g);
    if (t.requires_grad(row)) t.accumulate(row, g.colwise().sum());
  });
}

Var gelu(Tape& tape, Var a) {
  // tanh approximation
  constexpr double k = 0.7978845608028654;  // sqrt(2 / pi)
  Var out{static_cast<int>(tape.size())};
  const Matrix& x = tape.value(a);
  Matrix value = x.unaryExpr([](double v) {
    return 0.5 * v * (1.0 + std::tanh(k * (v + 0.044715 * v * v * v)));
  });
  return tape.push(std::move(value), tape.requires_grad(a), [a, out](Tape& t) {
    const Matrix& x = t.value(a);
    const Matrix& g = grad_ref(t, out);
    Matrix d = x.unaryExpr([](double v) {
      const double u = k * (v + 0.044715 * v * v * v);
      const double th = std::tanh(u);
      return 0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * k * (1.0 + 3.0 * 0.044715 * v * v);
    });
    t.accumulate(a, g.cwiseProduct(d));
  });
}

Var sigmoid(Tape& tape, Var a) {
  Var out{static_cast<int>(tape.size())};
  Matrix value = tape.value(a).unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  return tape.push(std::move(value), tape.requires_grad(a), [a, out](Tape& t) {
    const Matrix& y = t.value(out);
    t.accumulate(a, grad_ref(t, out).cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Var layer_norm(Tape& tape, Var x, Var gain, Var bias, double eps) {
  const Matrix& in = tape.value(x);
  const Eigen::Index d = in.cols();
  Vector mean = in.rowwise().mean();
  Matrix centered = in.colwise() - mean;
  Vector inv_std = ((centered.array().square().rowwise().sum() / static_cast<double>(d)) + eps)
                       .rsqrt()
                       .matrix();
  Matrix normalized = centered.array().colwise() * inv_std.array();
  Matrix value = normalized.array().rowwise() * tape.value(gain).row(0).array();
  value.rowwise() += tape.value(bias).row(0);
  Var out{static_cast<int>(tape.size())};
  return tape.push(std::move(value), any_grad(tape, {x, gain, bias}),
                   [x, gain, bias, out, normalized = std::move(normalized),
                    inv_std = std::move(inv_std)](Tape& t) {
                     const Matrix& g = grad_ref(t, out);
                     if (t.requires_grad(gain))
                       t.accumulate(gain, g.cwiseProduct(normalized).colwise().sum());
                     if (t.requires_grad(bias)) t.accumulate(bias, g.colwise().sum());
                     if (!t.requires_grad(x)) return;
                     const double dd = static_cast<double>(normalized.cols());
                     Matrix gn = g.array().rowwise() * t.value(gain).row(0).array();
                     Vector mean_gn = gn.rowwise().mean();
                     Vector mean_gn_n = gn.cwiseProduct(normalized).rowwise().sum() / dd;
                     Matrix dx = gn;
                     dx.colwise() -= mean_gn;
                     dx -= (normalized.array().colwise() * mean_gn_n.array()).matrix();
                     dx = dx.array().colwise() * inv_std.array();
                     t.accumulate(x, dx);
                   });
}

Var self_attention(Tape& tape, Var qkv, int heads) {
  const Matrix& in = tape.value(qkv);
  const Eigen::Index n = in.rows();
  const Eigen::Index d = in.cols() / 3;
  if (in.cols() != 3 * d || d % heads != 0)
    throw NumericError("self_attention: width not divisible by heads");
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix value(n, d);
  std::vector<Matrix> attn(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const auto q = in.middleCols(h * dh, dh);
    const auto k = in.middleCols(d + h * dh, dh);
    const auto v = in.middleCols(2 * d + h * dh, dh);
    Matrix scores = (q * k.transpose()) * scale;
    Vector row_max = scores.rowwise().maxCoeff();
    scores = (scores.colwise() - row_max).array().exp().matrix();
    Vector row_sum = scores.rowwise().sum();
    scores = scores.array().colwise() / row_sum.array();
    value.middleCols(h * dh, dh) = scores * v;
    attn[h] = std::move(scores);
  }
  Var out{static_cast<int>(tape.size())};
  return tape.push(std::move(value), tape.requires_grad(qkv),
                   [qkv, out, heads, d, dh, scale, attn = std::move(attn)](Tape& t) {
                     const Matrix& in = t.value(qkv);
                     const Matrix& g = grad_ref(t, out);
                     Matrix dqkv(in.rows(), in.cols());
                     for (int h = 0; h < heads; ++h) {
                       const auto q = in.middleCols(h * dh, dh);
                       const auto k = in.middleCols(d + h * dh, dh);
                       const auto v = in.middleCols(2 * d + h * dh, dh);
                       const auto go = g.middleCols(h * dh, dh);
                       const Matrix& a = attn[h];
                       dqkv.middleCols(2 * d + h * dh, dh) = a.transpose() * go;
                       Matrix da = go * v.transpose();
                       Vector inner = da.cwiseProduct(a).rowwise().sum();
                       Matrix ds = a.cwiseProduct((da.colwise() - inner)) * scale;
                       dqkv.middleCols(h * dh, dh) = ds * k;
                       dqkv.middleCols(d + h * dh, dh) = ds.transpose() * q;
                     }
                     t.accumulate(qkv, dqkv);
                   });
}

Var gather_rows(Tape& tape, Var x, std::vector<int> rows) {
  const Matrix& in = tape.value(x);
  Matrix value(static_cast<Eigen::Index>(rows.size()), in.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) value.row(static_cast<Eigen::Index>(r)) = in.row(rows[r]);
  Var out{static_cast<int>(tape.size())};
  return tape.push(std::move(value), tape.requires_grad(x), [x, out, rows = std::move(rows)](Tape& t) {
    const Matrix& g = grad_ref(t, out);
    Matrix dx = Matrix::Zero(t.value(x).rows(), t.value(x).cols());
    for (std::size_t r = 0; r < rows.size(); ++r) dx.row(rows[r]) += g.row(static_cast<Eigen::Index>(r));
    t.accumulate(x, dx);
  });
}

Var scatter_rows(Tape& tape, Var x, std::vector<int> rows, int total, Var fill) {
  const Matrix& in = tape.value(x);
  Matrix value = tape.value(fill).row(0).replicate(total, 1);
  std::vector<bool> taken(static_cast<std::size_t>(total), false);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    value.row(rows[r]) = in.row(static_cast<Eigen::Index>(r));
    taken[rows[r]] = true;
  }
  Var out{static_cast<int>(tape.size())};
  return tape.push(std::move(value), any_grad(tape, {x, fill}),
                   [x, fill, out, rows = std::move(rows), taken = std::move(taken)](Tape& t) {
                     const Matrix& g = grad_ref(t, out);
                     if (t.requires_grad(x)) {
                       Matrix dx(static_cast<Eigen::Index>(rows.size()), g.cols());
                       for (std::size_t r = 0; r < rows.size(); ++r)
                         dx.row(static_cast<Eigen::Index>(r)) = g.row(rows[r]);
                       t.accumulate(x, dx);
                     }
                     if (t.requires_grad(fill)) {
                       Matrix df = Matrix::Zero(1, g.cols());
                       for (std::size_t r = 0; r < taken.size(); ++r)
                         if (!taken[r]) df += g.row(static_cast<Eigen::Index>(r));
                       t.accumulate(fill, df);
                     }
                   });
}

Var group_mean(Tape& tape, Var x, std::vector<int> group_of, int groups) {
  const Matrix& in = tape.value(x);
  Matrix value = Matrix::Zero(groups, in.cols());
  std::vector<int> counts(static_cast<std::size_t>(groups), 0);
  for (std::size_t r = 0; r < group_of.size(); ++r) {
    value.row(group_of[r]) += in.row(static_cast<Eigen::Index>(r));
    ++counts[group_of[r]];
  }
  for (int g = 0; g < groups; ++g) {
    if (counts[g] == 0) throw NumericError("group_mean: empty group");
    value.row(g) /= counts[g];
  }
  Var out{static_cast<int>(tape.size())};
  return tape.push(std::move(value), tape.requires_grad(x),
                   [x, out, group_of = std::move(group_of), counts = std::move(counts)](Tape& t) {
                     const Matrix& g = grad_ref(t, out);
                     Matrix dx(static_cast<Eigen::Index>(group_of.size()), g.cols());
                     for (std::size_t r = 0; r < group_of.size(); ++r)
                       dx.row(static_cast<Eigen::Index>(r)) = g.row(group_of[r]) / counts[group_of[r]];
                     t.accumulate(x, dx);
                   });
}

Var concat_rows(Tape& tape, const std::vector<Var>& parts) {
  Eigen::Index rows = 0;
  const Eigen::Index cols = tape.value(parts.front()).cols();
  bool grad = false;
  for (Var p : parts) {
    if (tape.value(p).cols() != cols) throw NumericError("concat_rows: column mismatch");
    rows += tape.value(p).rows();
    grad = grad || tape.requires_grad(p);
  }
  Matrix value(rows, cols);
  Eigen::Index offset = 0;
  for (Var p : parts) {
    value.middleRows(offset, tape.value(p).rows()) = tape.value(p);
    offset += tape.value(p).rows();
  }
  Var out{static_cast<int>(tape.size())};
  return tape.push(std::move(value), grad, [parts, out](Tape& t) {
    const Matrix& g = grad_ref(t, out);
    Eigen::Index offset = 0;
    for (Var p : parts) {
      const Eigen::Index r = t.value(p).rows();
      if (t.requires_grad(p)) t.accumulate(p, g.middleRows(offset, r));
      offset += r;
    }
  });
}

Var loss_node(Tape& tape, Var x, LossValue loss) {
  Matrix value(1, 1);
  value(0, 0) = loss.value;
  Var out{static_cast<int>(tape.size())};
  return tape.push(std::move(value), tape.requires_grad(x),
                   [x, out, grad = std::move(loss.grad)](Tape& t) {
                     t.accumulate(x, grad_ref(t, out)(0, 0) * grad);
                   });
}

Var weighted_sum(Tape& tape, const std::vector<std::pair<double, Var>>& terms) {
  Matrix value = Matrix::Zero(1, 1);
  bool grad = false;
  for (const auto& [c, v] : terms) {
    value(0, 0) += c * tape.value(v)(0, 0);
    grad = grad || tape.requires_grad(v);
  }
  Var out{static_cast<int>(tape.size())};
  return tape.push(std::move(value), grad, [terms, out](Tape& t) {
    const double g = grad_ref(t, out)(0, 0);
    for (const auto& [c, v] : terms) t.accumulate(v, Matrix::Constant(1, 1, c * g));
  });
}

}  // namespace auvmae::ad
