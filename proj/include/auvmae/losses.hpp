#pragma once

#include <optional>
#include <vector>

#include "auvmae/knowledge.hpp"
#include "auvmae/label_data.hpp"
#include "auvmae/types.hpp"

namespace auvmae {

struct LossWeights {
  double cls = 1.0;
  double intra = 0.01;
  double inter = 0.01;

  void validate() const;
};

struct LossReport {
  long step = 0;
  double total = 0.0;
  double cls = 0.0;
  double intra = 0.0;
  double inter = 0.0;
  std::optional<double> recon;
};

/// A scalar loss together with its gradient with respect to the input it was
/// evaluated on.
struct LossValue {
  double value = 0.0;
  Matrix grad;
};

inline constexpr double kBceEpsilon = 1e-7;

/// Forward is [p > 0.5]; backward passes the upstream gradient unchanged.
struct StraightThrough {
  static Matrix forward(const Matrix& p) { return (p.array() > 0.5).cast<double>().matrix(); }
  static Matrix backward(const Matrix& upstream) { return upstream; }
};

/// -sum_i w_i [y log p + (1 - y) log(1 - p)], averaged over rows (frames).
/// p is clamped to [eps, 1 - eps]; the gradient is zero where clamping binds.
LossValue weighted_bce(const Matrix& p, const Matrix& y, const Vector& weights);

struct IntraLoss {
  LossValue loss;
  int defined_entries = 0;
  bool no_defined_entries = false;
};

/// ||K_intra - C||_F over entries defined in both, with C the co-occurrence of
/// [p > 0.5]. The gradient is taken through the straight-through operator.
IntraLoss intra_loss(const Matrix& p, const IntraKnowledge& prior);

/// The same loss evaluated on a real-valued stand-in for the hardened batch.
/// `defined` fixes which entries participate (entries are otherwise compared
/// where the prior is defined and the denominator is positive).
IntraLoss intra_loss_on_hard(const Matrix& hard, const IntraKnowledge& prior,
                             const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>* defined = nullptr);

/// ||K_inter - mean_t S(p_t, p_{t+1})||_F over defined prior pairs. `segments`
/// lists the row count of each clip stacked in `p_seq`; transitions never
/// cross segments. An empty `segments` treats p_seq as one clip.
LossValue inter_loss(const Matrix& p_seq, const InterKnowledge& prior,
                     const std::vector<int>& segments = {});

/// Mean over temporal blocks of the mean L2 norm of the residual of each
/// masked token in that block. `block_of` gives the block of each row.
LossValue reconstruction_loss(const Matrix& original, const Matrix& reconstructed,
                              const std::vector<int>& block_of);

double total_loss(double cls, double intra, double inter, const LossWeights& weights);

}  // namespace auvmae
