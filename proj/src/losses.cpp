#include "auvmae/losses.hpp"

#include <cmath>
#include <map>
#include <string>

namespace auvmae {

namespace {
// Gradient of sqrt(ss) uses sqrt(ss + eps) so that it stays finite at zero.
constexpr double kNormEpsilon = 1e-24;
}  // namespace

void LossWeights::validate() const {
  if (!(cls >= 0.0 && intra >= 0.0 && inter >= 0.0))
    throw UsageError("loss weights must be non-negative");
}

LossValue weighted_bce(const Matrix& p, const Matrix& y, const Vector& weights) {
  if (p.rows() != y.rows() || p.cols() != y.cols())
    throw NumericError("weighted_bce: prediction/label shape mismatch");
  if (weights.size() != p.cols()) throw NumericError("weighted_bce: weight length mismatch");
  if (p.rows() == 0) throw NumericError("weighted_bce: empty batch");
  const double inv_b = 1.0 / static_cast<double>(p.rows());
  LossValue out;
  out.grad = Matrix::Zero(p.rows(), p.cols());
  double sum = 0.0;
  for (Eigen::Index t = 0; t < p.rows(); ++t)
    for (Eigen::Index i = 0; i < p.cols(); ++i) {
      const double raw = p(t, i);
      const double q = std::clamp(raw, kBceEpsilon, 1.0 - kBceEpsilon);
      const double target = y(t, i);
      sum -= weights[i] * (target * std::log(q) + (1.0 - target) * std::log(1.0 - q));
      if (raw > kBceEpsilon && raw < 1.0 - kBceEpsilon)
        out.grad(t, i) = -weights[i] * (target / q - (1.0 - target) / (1.0 - q)) * inv_b;
    }
  out.value = sum * inv_b;
  return out;
}

IntraLoss intra_loss_on_hard(const Matrix& hard, const IntraKnowledge& prior,
                             const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>* defined) {
  const int n = prior.size();
  if (hard.cols() != n) throw NumericError("intra_loss: prior is " + std::to_string(n) + "x" +
                                           std::to_string(n) + " but batch has " +
                                           std::to_string(hard.cols()) + " AUs");
  const LearnedCooccurrence c = cooccurrence_from_hard(hard);
  Matrix residual = Matrix::Zero(n, n);  // C - K on participating entries
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> use(n, n);
  IntraLoss out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      use(i, j) = defined ? (*defined)(i, j) : (prior.defined(i, j) && c.defined(i, j));
      if (use(i, j)) {
        residual(i, j) = c.matrix(i, j) - prior.matrix(i, j);
        ++out.defined_entries;
      }
    }
  const double ss = residual.squaredNorm();
  out.loss.value = std::sqrt(ss);
  out.loss.grad = Matrix::Zero(hard.rows(), n);
  out.no_defined_entries = out.defined_entries == 0;
  if (out.no_defined_entries) return out;

  // dL/dC(i,j) = residual / ||residual||; C = num / den with
  //   num(i,j) = sum_b H(b,i) H(b,j),  den(i,j) = b - sum_b (1-H(b,i))(1-H(b,j)).
  const double inv_norm = 1.0 / std::sqrt(ss + kNormEpsilon);
  Matrix d_num = Matrix::Zero(n, n), d_den = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (!use(i, j)) continue;
      const double g = residual(i, j) * inv_norm;
      const double den = c.denominator(i, j);
      d_num(i, j) = g / den;
      d_den(i, j) = -g * c.numerator(i, j) / (den * den);
    }
  const Matrix off = Matrix::Ones(hard.rows(), n) - hard;
  // d num(i,j)/dH(b,k) = [k=i] H(b,j) + [k=j] H(b,i); d den/dH(b,k) likewise on (1-H).
  out.loss.grad = hard * (d_num + d_num.transpose()) + off * (d_den + d_den.transpose());
  return out;
}

IntraLoss intra_loss(const Matrix& p, const IntraKnowledge& prior) {
  const Matrix hard = StraightThrough::forward(p);
  IntraLoss out = intra_loss_on_hard(hard, prior);
  out.loss.grad = StraightThrough::backward(out.loss.grad);
  return out;
}

LossValue inter_loss(const Matrix& p_seq, const InterKnowledge& prior,
                     const std::vector<int>& segments) {
  const int n = prior.size();
  if (p_seq.cols() != n) throw NumericError("inter_loss: prior/prediction AU count mismatch");
  std::vector<int> segs = segments.empty() ? std::vector<int>{static_cast<int>(p_seq.rows())} : segments;
  int pairs = 0, rows = 0;
  for (int len : segs) {
    if (len < 2) throw NumericError("inter_loss: every sequence needs at least 2 frames");
    pairs += len - 1;
    rows += len;
  }
  if (rows != p_seq.rows()) throw NumericError("inter_loss: segment lengths do not sum to rows");
  for (Eigen::Index k = 0; k < p_seq.size(); ++k)
    if (!(p_seq.data()[k] >= 0.0 && p_seq.data()[k] <= 1.0))
      throw NumericError("inter_loss: probability outside [0, 1]");

  const double scale = 1.0 / pairs;
  std::vector<double> mean(static_cast<std::size_t>(n) * n * 16, 0.0);
  auto for_each_pair = [&](auto&& fn) {
    int offset = 0;
    for (int len : segs) {
      for (int t = offset; t + 1 < offset + len; ++t) fn(t);
      offset += len;
    }
  };
  for_each_pair([&](int t) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double f0[2] = {p_seq(t, i), 1.0 - p_seq(t, i)};
        const double f1[2] = {p_seq(t, j), 1.0 - p_seq(t, j)};
        const double f2[2] = {p_seq(t + 1, i), 1.0 - p_seq(t + 1, i)};
        const double f3[2] = {p_seq(t + 1, j), 1.0 - p_seq(t + 1, j)};
        double* cell = &mean[(static_cast<std::size_t>(i) * n + j) * 16];
        for (int s = 0; s < 16; ++s)
          cell[s] += scale * f0[s & 1] * f1[(s >> 1) & 1] * f2[(s >> 2) & 1] * f3[(s >> 3) & 1];
      }
  });

  std::vector<double> residual(mean.size(), 0.0);
  double ss = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (!prior.defined(i, j)) continue;
      for (int s = 0; s < 16; ++s) {
        const std::size_t k = (static_cast<std::size_t>(i) * n + j) * 16 + s;
        residual[k] = mean[k] - prior.tensor[k];
        ss += residual[k] * residual[k];
      }
    }
  LossValue out;
  out.value = std::sqrt(ss);
  out.grad = Matrix::Zero(p_seq.rows(), n);
  const double inv_norm = 1.0 / std::sqrt(ss + kNormEpsilon);
  // Each factor is x (bit 0) or 1 - x (bit 1); its derivative is +1 or -1.
  for_each_pair([&](int t) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (!prior.defined(i, j)) continue;
        const double f0[2] = {p_seq(t, i), 1.0 - p_seq(t, i)};
        const double f1[2] = {p_seq(t, j), 1.0 - p_seq(t, j)};
        const double f2[2] = {p_seq(t + 1, i), 1.0 - p_seq(t + 1, i)};
        const double f3[2] = {p_seq(t + 1, j), 1.0 - p_seq(t + 1, j)};
        const double* r = &residual[(static_cast<std::size_t>(i) * n + j) * 16];
        double g0 = 0, g1 = 0, g2 = 0, g3 = 0;
        for (int s = 0; s < 16; ++s) {
          const int b0 = s & 1, b1 = (s >> 1) & 1, b2 = (s >> 2) & 1, b3 = (s >> 3) & 1;
          const double w = r[s] * inv_norm * scale;
          g0 += w * (b0 ? -1.0 : 1.0) * f1[b1] * f2[b2] * f3[b3];
          g1 += w * f0[b0] * (b1 ? -1.0 : 1.0) * f2[b2] * f3[b3];
          g2 += w * f0[b0] * f1[b1] * (b2 ? -1.0 : 1.0) * f3[b3];
          g3 += w * f0[b0] * f1[b1] * f2[b2] * (b3 ? -1.0 : 1.0);
        }
        out.grad(t, i) += g0;
        out.grad(t, j) += g1;
        out.grad(t + 1, i) += g2;
        out.grad(t + 1, j) += g3;
      }
  });
  return out;
}

LossValue reconstruction_loss(const Matrix& original, const Matrix& reconstructed,
                              const std::vector<int>& block_of) {
  if (original.rows() != reconstructed.rows() || original.cols() != reconstructed.cols())
    throw NumericError("reconstruction_loss: token grids are not congruent");
  if (static_cast<Eigen::Index>(block_of.size()) != original.rows())
    throw NumericError("reconstruction_loss: block index length mismatch");
  if (original.rows() == 0) throw NumericError("reconstruction_loss: empty mask");
  std::map<int, int> per_block;
  for (int b : block_of) ++per_block[b];
  const double inv_blocks = 1.0 / static_cast<double>(per_block.size());
  LossValue out;
  out.grad = Matrix::Zero(original.rows(), original.cols());
  for (Eigen::Index k = 0; k < original.rows(); ++k) {
    const Eigen::RowVectorXd r = reconstructed.row(k) - original.row(k);
    const double ss = r.squaredNorm();
    const double weight = inv_blocks / per_block[block_of[k]];
    out.value += weight * std::sqrt(ss);
    out.grad.row(k) = weight * r / std::sqrt(ss + kNormEpsilon);
  }
  return out;
}

double total_loss(double cls, double intra, double inter, const LossWeights& weights) {
  return weights.cls * cls + weights.intra * intra + weights.inter * inter;
}

}  // namespace auvmae
