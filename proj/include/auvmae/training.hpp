#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "auvmae/knowledge.hpp"
#include "auvmae/label_data.hpp"
#include "auvmae/losses.hpp"
#include "auvmae/model.hpp"

namespace auvmae {

using StepCallback = std::function<void(const LossReport&)>;

/// Adam over a named parameter map.
class Adam {
 public:
  Adam(double learning_rate, double beta1, double beta2, double epsilon)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  void step(ParamMap& params, const std::map<std::string, Matrix>& grads);
  std::int64_t steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::map<std::string, Matrix> m_, v_;
};

/// Masked reconstruction pretraining with per-step tube masks at
/// `config.pretrain_mask_ratio`. `downsample_rate` must match the subtask the
/// weights will be finetuned for (4 for frame level, 1 otherwise).
Checkpoint pretrain(const std::vector<VideoClip>& corpus, const ModelConfig& config,
                    int downsample_rate, const StepCallback& on_step = {});

struct Priors {
  IntraKnowledge intra;
  InterKnowledge inter;
};

/// Finetunes the encoder plus a fresh classifier head on one subtask level,
/// minimizing lambda_cls * BCE + lambda_intra * L_intra + lambda_inter * L_inter.
Checkpoint finetune(const std::vector<LabeledClip>& dataset, const Priors& priors,
                    const WeightVector& weights, Level level, const Checkpoint& init,
                    const ModelConfig& config, const StepCallback& on_step = {});

/// Deterministic per-frame probabilities for the clip's original length. The
/// mask seed only matters at patch level.
PredictionBatch predict(const Checkpoint& checkpoint, const VideoClip& clip, Level level,
                        std::uint64_t mask_seed = 0);

/// Loss terms for one batch without updating anything; used by tests and
/// diagnostics. Returns the tape gradient with respect to every parameter.
struct BatchEvaluation {
  LossReport report;
  std::map<std::string, Matrix> grads;
};

BatchEvaluation evaluate_finetune_batch(const std::vector<const LabeledClip*>& batch,
                                        const Priors& priors, const WeightVector& weights,
                                        Level level, const ParamMap& params,
                                        const ModelConfig& config, std::uint64_t mask_seed);

}  // namespace auvmae
