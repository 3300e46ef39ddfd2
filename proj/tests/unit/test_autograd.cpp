#include <random>

#include "doctest.h"
#include "auvmae/autograd.hpp"
#include "oracles.hpp"

using namespace auvmae;
using namespace auvmae::ad;

namespace {

// Reduces an output matrix to a scalar with fixed random weights so every
// output element contributes to the gradient.
struct Probe {
  Matrix w;
  double value(const Matrix& out) const { return (out.array() * w.array()).sum(); }
};

using Build = std::function<Var(Tape&, const std::vector<Var>&)>;

// Compares tape gradients with central differences for every input.
double max_grad_error(const Build& build, const std::vector<Matrix>& inputs, std::mt19937_64& rng) {
  Tape probe_tape(false);
  std::vector<Var> pv;
  for (const auto& m : inputs) pv.push_back(probe_tape.constant(m));
  const Matrix shape = probe_tape.value(build(probe_tape, pv));
  const Probe probe{oracle::random_probs(rng, shape.rows(), shape.cols(), -1, 1)};

  Tape tape;
  std::vector<Var> vars;
  for (const auto& m : inputs) vars.push_back(tape.parameter(m));
  const Var out = build(tape, vars);
  const Var loss = loss_node(tape, out, LossValue{probe.value(tape.value(out)), probe.w});
  tape.backward(loss);

  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto f = [&](const Matrix& x) {
      Tape t(false);
      std::vector<Var> vs;
      for (std::size_t m = 0; m < inputs.size(); ++m) vs.push_back(t.constant(m == k ? x : inputs[m]));
      return probe.value(t.value(build(t, vs)));
    };
    worst = std::max(worst, oracle::rel_error(tape.grad(vars[k]), oracle::numeric_grad(f, inputs[k], 1e-6)));
  }
  return worst;
}

}  // namespace

TEST_CASE("elementwise and linear ops match finite differences") {
  std::mt19937_64 rng(41);
  auto r = [&](int a, int b) { return oracle::random_probs(rng, a, b, -1.5, 1.5); };
  CHECK(max_grad_error([](Tape& t, auto& v) { return matmul(t, v[0], v[1]); }, {r(3, 4), r(4, 5)}, rng) < 1e-6);
  CHECK(max_grad_error([](Tape& t, auto& v) { return add(t, v[0], v[1]); }, {r(3, 4), r(3, 4)}, rng) < 1e-6);
  CHECK(max_grad_error([](Tape& t, auto& v) { return add_row(t, v[0], v[1]); }, {r(3, 4), r(1, 4)}, rng) < 1e-6);
  CHECK(max_grad_error([](Tape& t, auto& v) { return gelu(t, v[0]); }, {r(3, 4)}, rng) < 1e-6);
  CHECK(max_grad_error([](Tape& t, auto& v) { return sigmoid(t, v[0]); }, {r(3, 4)}, rng) < 1e-6);
  CHECK(max_grad_error([](Tape& t, auto& v) { return layer_norm(t, v[0], v[1], v[2]); }, {r(3, 6), r(1, 6), r(1, 6)},
                       rng) < 1e-5);
}

TEST_CASE("attention matches finite differences") {
  std::mt19937_64 rng(43);
  for (int heads : {1, 2, 4}) {
    const Matrix qkv = oracle::random_probs(rng, 5, 3 * 8, -1, 1);
    CHECK(max_grad_error([heads](Tape& t, auto& v) { return self_attention(t, v[0], heads); }, {qkv}, rng) < 1e-5);
  }
}

TEST_CASE("attention rows are convex combinations of values") {
  std::mt19937_64 rng(44);
  Matrix qkv = oracle::random_probs(rng, 4, 6, -1, 1);
  qkv.rightCols(2).setConstant(3.0);
  Tape t(false);
  const Matrix out = t.value(self_attention(t, t.constant(qkv), 1));
  for (Eigen::Index k = 0; k < out.size(); ++k) CHECK(out.data()[k] == doctest::Approx(3.0));
}

TEST_CASE("row routing ops match finite differences") {
  std::mt19937_64 rng(47);
  auto r = [&](int a, int b) { return oracle::random_probs(rng, a, b, -1, 1); };
  CHECK(max_grad_error([](Tape& t, auto& v) { return gather_rows(t, v[0], {2, 0, 2, 1}); }, {r(3, 4)}, rng) < 1e-6);
  CHECK(max_grad_error([](Tape& t, auto& v) { return scatter_rows(t, v[0], {4, 1}, 5, v[1]); }, {r(2, 3), r(1, 3)},
                       rng) < 1e-6);
  CHECK(max_grad_error([](Tape& t, auto& v) { return group_mean(t, v[0], {0, 1, 0, 1, 1}, 2); }, {r(5, 3)}, rng) <
        1e-6);
  CHECK(max_grad_error([](Tape& t, auto& v) { return concat_rows(t, {v[0], v[1]}); }, {r(2, 3), r(1, 3)}, rng) < 1e-6);
  CHECK(max_grad_error(
            [](Tape& t, auto& v) { return weighted_sum(t, {{2.0, v[0]}, {-0.5, v[1]}}); }, {r(1, 1), r(1, 1)}, rng) <
        1e-6);
}

TEST_CASE("scatter fills unlisted rows and gathers duplicate gradients") {
  Tape t;
  const Var x = t.parameter(Matrix::Constant(1, 2, 5.0));
  const Var fill = t.parameter(Matrix::Constant(1, 2, -1.0));
  const Var s = scatter_rows(t, x, {1}, 3, fill);
  CHECK(t.value(s)(0, 0) == -1.0);
  CHECK(t.value(s)(1, 1) == 5.0);
  const Var loss = loss_node(t, s, LossValue{0.0, Matrix::Ones(3, 2)});
  t.backward(loss);
  CHECK(t.grad(fill)(0, 0) == 2.0);
  CHECK(t.grad(x)(0, 0) == 1.0);
}

TEST_CASE("non-recording tape skips gradients") {
  Tape t(false);
  const Var a = t.parameter(Matrix::Ones(2, 2));
  CHECK_FALSE(t.requires_grad(a));
  CHECK_FALSE(t.recording());
}
