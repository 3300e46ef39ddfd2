#include "auvmae/knowledge.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace auvmae {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

IntraKnowledge estimate_intra_knowledge(const LabelDataset& dataset, double smoothing) {
  const auto& ids = shared_au_ids(dataset);
  const int n = static_cast<int>(ids.size());
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> both =
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> any = both;
  std::int64_t total = 0;
  for (const auto& seq : dataset) {
    total += seq.length();
    for (int t = 0; t < seq.length(); ++t)
      for (int i = 0; i < n; ++i) {
        const int a = seq.frames(t, i);
        for (int j = 0; j < n; ++j) {
          const int b = seq.frames(t, j);
          both(i, j) += a & b;
          any(i, j) += a | b;
        }
      }
  }
  if (total < 1) throw DataError("estimate_intra_knowledge: no frames");
  IntraKnowledge out;
  out.au_ids = ids;
  out.support = any;
  out.matrix.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // On the diagonal only the both-active cell can occur.
      const double cells = i == j ? 1.0 : 3.0;
      const double den = static_cast<double>(any(i, j)) + cells * smoothing;
      out.matrix(i, j) = den > 0.0 ? (static_cast<double>(both(i, j)) + smoothing) / den : kNaN;
    }
  return out;
}

InterKnowledge estimate_inter_knowledge(const LabelDataset& dataset, double smoothing) {
  const auto& ids = shared_au_ids(dataset);
  const int n = static_cast<int>(ids.size());
  InterKnowledge out;
  out.au_ids = ids;
  out.n = n;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n) * n * 16, 0);
  out.support = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (const auto& seq : dataset) {
    if (seq.length() < 2)
      throw DataError("estimate_inter_knowledge: clip '" + seq.clip_id + "' has fewer than 2 frames");
    for (int t = 0; t + 1 < seq.length(); ++t)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const int s = transition_state(seq.frames(t, i), seq.frames(t, j), seq.frames(t + 1, i),
                                         seq.frames(t + 1, j));
          ++counts[(static_cast<std::size_t>(i) * n + j) * 16 + s];
        }
    out.support.array() += seq.length() - 1;
  }
  out.tensor.assign(counts.size(), kNaN);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (out.support(i, j) == 0) continue;
      const double denom = static_cast<double>(out.support(i, j)) + 16.0 * smoothing;
      for (int s = 0; s < 16; ++s)
        out.at(i, j, s) =
            (static_cast<double>(counts[(static_cast<std::size_t>(i) * n + j) * 16 + s]) + smoothing) /
            denom;
    }
  return out;
}

double state_function(double x, int bit) {
  if (!(x >= 0.0 && x <= 1.0))
    throw NumericError("state_function: probability " + std::to_string(x) + " outside [0, 1]");
  if (bit != 0 && bit != 1) throw NumericError("state_function: bit must be 0 or 1");
  return bit == 1 ? 1.0 - x : x;
}

namespace {

void check_probabilities(const Eigen::Ref<const Matrix>& p, const char* what) {
  for (Eigen::Index k = 0; k < p.size(); ++k)
    if (!(p.data()[k] >= 0.0 && p.data()[k] <= 1.0))
      throw NumericError(std::string(what) + ": probability outside [0, 1]");
}

// Accumulates scale * S(p_t, p_next) into out.
void accumulate_state(const double* p_t, const double* p_next, int n, double scale,
                      std::vector<double>& out) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double f0[2] = {p_t[i], 1.0 - p_t[i]};
      const double f1[2] = {p_t[j], 1.0 - p_t[j]};
      const double f2[2] = {p_next[i], 1.0 - p_next[i]};
      const double f3[2] = {p_next[j], 1.0 - p_next[j]};
      double* cell = &out[(static_cast<std::size_t>(i) * n + j) * 16];
      for (int s = 0; s < 16; ++s)
        cell[s] += scale * f0[s & 1] * f1[(s >> 1) & 1] * f2[(s >> 2) & 1] * f3[(s >> 3) & 1];
    }
}

}  // namespace

StateTensor state_tensor(const Vector& p_t, const Vector& p_next) {
  if (p_t.size() != p_next.size()) throw NumericError("state_tensor: length mismatch");
  check_probabilities(p_t, "state_tensor");
  check_probabilities(p_next, "state_tensor");
  StateTensor out;
  out.n = static_cast<int>(p_t.size());
  out.tensor.assign(static_cast<std::size_t>(out.n) * out.n * 16, 0.0);
  accumulate_state(p_t.data(), p_next.data(), out.n, 1.0, out.tensor);
  return out;
}

StateTensor mean_state_tensor(const Matrix& p_seq) {
  if (p_seq.rows() < 2) throw NumericError("mean_state_tensor: need at least 2 frames");
  check_probabilities(p_seq, "mean_state_tensor");
  StateTensor out;
  out.n = static_cast<int>(p_seq.cols());
  out.tensor.assign(static_cast<std::size_t>(out.n) * out.n * 16, 0.0);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = p_seq;
  const double scale = 1.0 / static_cast<double>(p_seq.rows() - 1);
  for (Eigen::Index t = 0; t + 1 < p_seq.rows(); ++t)
    accumulate_state(rows.row(t).data(), rows.row(t + 1).data(), out.n, scale, out.tensor);
  return out;
}

LearnedCooccurrence cooccurrence_from_hard(const Matrix& hard) {
  const double b = static_cast<double>(hard.rows());
  const Matrix ones = Matrix::Ones(hard.rows(), hard.cols());
  const Matrix off = ones - hard;
  LearnedCooccurrence out;
  out.numerator = hard.transpose() * hard;
  out.denominator = Matrix::Constant(hard.cols(), hard.cols(), b) - off.transpose() * off;
  out.matrix.resize(hard.cols(), hard.cols());
  for (Eigen::Index i = 0; i < hard.cols(); ++i)
    for (Eigen::Index j = 0; j < hard.cols(); ++j)
      out.matrix(i, j) = out.denominator(i, j) > 0.0 ? out.numerator(i, j) / out.denominator(i, j)
                                                     : kNaN;
  return out;
}

LearnedCooccurrence learned_cooccurrence(const Matrix& p) {
  if (p.rows() < 1) throw NumericError("learned_cooccurrence: empty batch");
  check_probabilities(p, "learned_cooccurrence");
  return cooccurrence_from_hard((p.array() > 0.5).cast<double>().matrix());
}

}  // namespace auvmae
