#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "auvmae/label_data.hpp"
#include "auvmae/types.hpp"

namespace auvmae {

inline constexpr int kTransitionStates = 16;

/// Pairwise co-occurrence prior: matrix(i, j) = P(i=1, j=1 | i=1 or j=1).
/// Entries with support(i, j) == 0 are undefined and hold NaN.
struct IntraKnowledge {
  std::vector<int> au_ids;
  Matrix matrix;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> support;

  int size() const { return static_cast<int>(matrix.rows()); }
  bool defined(int i, int j) const { return !std::isnan(matrix(i, j)); }
};

/// Pairwise 16-state transition prior. State s has bits s3 s2 s1 s0 with
///   s0 <-> AU i at t, s1 <-> AU j at t, s2 <-> AU i at t+1, s3 <-> AU j at t+1,
/// and a bit value of 1 denoting an INACTIVE label, so that the state matches
/// the factor 1 - x of the state function. State 0 is "both active, stays
/// active"; state 15 is "both inactive, stays inactive".
struct InterKnowledge {
  std::vector<int> au_ids;
  int n = 0;
  std::vector<double> tensor;  // n * n * 16, row-major (i, j, s)
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> support;

  int size() const { return n; }
  double& at(int i, int j, int s) { return tensor[(static_cast<std::size_t>(i) * n + j) * 16 + s]; }
  double at(int i, int j, int s) const {
    return tensor[(static_cast<std::size_t>(i) * n + j) * 16 + s];
  }
  bool defined(int i, int j) const { return support(i, j) > 0; }
};

/// Soft transition statistics from predicted probabilities, same layout and
/// bit convention as InterKnowledge.
struct StateTensor {
  int n = 0;
  std::vector<double> tensor;

  double at(int i, int j, int s) const {
    return tensor[(static_cast<std::size_t>(i) * n + j) * 16 + s];
  }
  double& at(int i, int j, int s) { return tensor[(static_cast<std::size_t>(i) * n + j) * 16 + s]; }
};

struct LearnedCooccurrence {
  Matrix matrix;  // NaN where the denominator is zero
  Matrix numerator;
  Matrix denominator;

  bool defined(int i, int j) const { return denominator(i, j) > 0.0; }
};

/// Transition state index for labels (a_t, b_t) -> (a_next, b_next).
constexpr int transition_state(int a_t, int b_t, int a_next, int b_next) {
  return (1 - a_t) | ((1 - b_t) << 1) | ((1 - a_next) << 2) | ((1 - b_next) << 3);
}

/// `smoothing` adds a pseudo-count to each of the three non-"00" states.
IntraKnowledge estimate_intra_knowledge(const LabelDataset& dataset, double smoothing = 0.0);

/// Counts transitions inside each clip only; `smoothing` adds a pseudo-count
/// to each of the 16 states on pairs that have support.
InterKnowledge estimate_inter_knowledge(const LabelDataset& dataset, double smoothing = 0.0);

/// 1 - x when bit == 1, x when bit == 0.
double state_function(double x, int bit);

StateTensor state_tensor(const Vector& p_t, const Vector& p_next);

/// Mean of state_tensor over consecutive rows of `p_seq` (rows are frames).
StateTensor mean_state_tensor(const Matrix& p_seq);

/// Co-occurrence of already-hardened (0/1, or real-valued for gradient
/// checks) predictions, rows are frames.
LearnedCooccurrence cooccurrence_from_hard(const Matrix& hard);

/// Hardens p with [p > 0.5] and computes the batch co-occurrence.
LearnedCooccurrence learned_cooccurrence(const Matrix& p);

}  // namespace auvmae
