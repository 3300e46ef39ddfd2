#include "auvmae/eval.hpp"

#include <cmath>

namespace auvmae {

double f1_from_counts(const ConfusionCounts& c) {
  if (c.tp + c.fp == 0 || c.tp + c.fn == 0) return 0.0;
  const double precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

MetricReport f1_scores(const std::vector<Matrix>& probs, const LabelDataset& labels,
                       double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw UsageError("threshold must lie in (0, 1)");
  if (probs.size() != labels.size())
    throw DataError("f1_scores: " + std::to_string(probs.size()) + " prediction sets for " +
                    std::to_string(labels.size()) + " label sequences");
  MetricReport report;
  report.au_ids = shared_au_ids(labels);
  const int n = static_cast<int>(report.au_ids.size());
  report.counts.assign(static_cast<std::size_t>(n), {});
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const Matrix& p = probs[k];
    const LabelSequence& y = labels[k];
    if (p.rows() != y.length() || p.cols() != n)
      throw DataError("f1_scores: clip '" + y.clip_id + "' has " + std::to_string(p.rows()) + "x" +
                      std::to_string(p.cols()) + " predictions for " + std::to_string(y.length()) +
                      "x" + std::to_string(n) + " labels");
    for (Eigen::Index t = 0; t < p.rows(); ++t)
      for (int i = 0; i < n; ++i) {
        const bool predicted = p(t, i) > threshold;
        const bool actual = y.frames(t, i) != 0;
        auto& c = report.counts[i];
        if (predicted && actual) ++c.tp;
        else if (predicted) ++c.fp;
        else if (actual) ++c.fn;
        else ++c.tn;
      }
  }
  report.per_au_f1.resize(n);
  report.per_au_acc.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& c = report.counts[i];
    const std::int64_t total = c.tp + c.fp + c.fn + c.tn;
    report.per_au_f1[i] = f1_from_counts(c);
    report.per_au_acc[i] = total > 0 ? static_cast<double>(c.tp + c.tn) / static_cast<double>(total) : 0.0;
  }
  report.avg_f1 = report.per_au_f1.mean();
  report.avg_acc = report.per_au_acc.mean();
  return report;
}

KnowledgeDivergence knowledge_divergence(const IntraKnowledge& prior_intra,
                                         const InterKnowledge& prior_inter,
                                         const LearnedCooccurrence& learned_intra,
                                         const StateTensor& learned_inter) {
  const int n = prior_intra.size();
  if (learned_intra.matrix.rows() != n || prior_inter.size() != n || learned_inter.n != n)
    throw DataError("knowledge_divergence: dimension mismatch");
  KnowledgeDivergence out;
  out.prior_intra = prior_intra.matrix;
  out.learned_intra = learned_intra.matrix;
  out.learned_inter = learned_inter;
  double ss_intra = 0.0, ss_inter = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (prior_intra.defined(i, j) && learned_intra.defined(i, j)) {
        const double r = prior_intra.matrix(i, j) - learned_intra.matrix(i, j);
        ss_intra += r * r;
      }
      if (prior_inter.defined(i, j))
        for (int s = 0; s < 16; ++s) {
          const double r = prior_inter.at(i, j, s) - learned_inter.at(i, j, s);
          ss_inter += r * r;
        }
    }
  out.intra = std::sqrt(ss_intra);
  out.inter = std::sqrt(ss_inter);
  return out;
}

std::pair<LearnedCooccurrence, StateTensor> learned_knowledge(const std::vector<Matrix>& probs) {
  if (probs.empty()) throw DataError("learned_knowledge: no predictions");
  Eigen::Index rows = 0;
  const Eigen::Index n = probs.front().cols();
  int pairs = 0;
  for (const auto& p : probs) {
    if (p.cols() != n) throw DataError("learned_knowledge: AU count mismatch");
    if (p.rows() < 2) throw DataError("learned_knowledge: clip with fewer than 2 frames");
    rows += p.rows();
    pairs += static_cast<int>(p.rows()) - 1;
  }
  Matrix stacked(rows, n);
  Eigen::Index offset = 0;
  StateTensor mean;
  mean.n = static_cast<int>(n);
  mean.tensor.assign(static_cast<std::size_t>(n * n * 16), 0.0);
  for (const auto& p : probs) {
    stacked.middleRows(offset, p.rows()) = p;
    offset += p.rows();
    // mean_state_tensor averages within one clip; reweight to a global mean.
    const StateTensor clip = mean_state_tensor(p);
    const double w = static_cast<double>(p.rows() - 1) / pairs;
    for (std::size_t k = 0; k < mean.tensor.size(); ++k) mean.tensor[k] += w * clip.tensor[k];
  }
  return {learned_cooccurrence(stacked), std::move(mean)};
}

double constant_predictor_f1(const LabelDataset& labels) {
  const RateVector rates = occurrence_rates(labels);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rates.rates.size(); ++i) {
    const double r = rates.rates[i];
    sum += r > 0 ? 2.0 * r / (1.0 + r) : 0.0;
  }
  return sum / static_cast<double>(rates.rates.size());
}

}  // namespace auvmae
