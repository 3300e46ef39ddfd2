#pragma once

#include <cstdint>
#include <vector>

#include "auvmae/knowledge.hpp"
#include "auvmae/label_data.hpp"
#include "auvmae/model.hpp"

namespace auvmae {

struct ConfusionCounts {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct MetricReport {
  std::vector<int> au_ids;
  Vector per_au_f1;
  double avg_f1 = 0.0;
  Vector per_au_acc;
  double avg_acc = 0.0;
  std::vector<ConfusionCounts> counts;
};

/// F1 from counts; 0 when precision or recall is undefined or both are 0.
double f1_from_counts(const ConfusionCounts& c);

/// Binarizes probabilities with p > threshold and scores each AU column.
/// `probs[k]` pairs with `labels[k]` row for row.
MetricReport f1_scores(const std::vector<Matrix>& probs, const LabelDataset& labels,
                       double threshold = 0.5);

/// Frobenius distances between prior and learned knowledge over entries
/// defined on both sides, plus the matrices for side-by-side plotting.
struct KnowledgeDivergence {
  double intra = 0.0;
  double inter = 0.0;
  Matrix prior_intra;
  Matrix learned_intra;
  StateTensor learned_inter;
};

KnowledgeDivergence knowledge_divergence(const IntraKnowledge& prior_intra,
                                         const InterKnowledge& prior_inter,
                                         const LearnedCooccurrence& learned_intra,
                                         const StateTensor& learned_inter);

/// Learned statistics of a set of per-clip predictions: co-occurrence of the
/// hardened predictions over all frames and the state tensor averaged over
/// every consecutive pair inside each clip.
std::pair<LearnedCooccurrence, StateTensor> learned_knowledge(const std::vector<Matrix>& probs);

/// F1 of the best constant predictor per AU (always-on, since always-off
/// scores 0) averaged over AUs.
double constant_predictor_f1(const LabelDataset& labels);

}  // namespace auvmae
