#include "auvmae/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "auvmae/rng.hpp"

namespace auvmae {

void Adam::step(ParamMap& params, const std::map<std::string, Matrix>& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (const auto& [name, g] : grads) {
    Matrix& p = params.at(name);
    auto [m_it, m_new] = m_.try_emplace(name, Matrix::Zero(p.rows(), p.cols()));
    auto [v_it, v_new] = v_.try_emplace(name, Matrix::Zero(p.rows(), p.cols()));
    Matrix& m = m_it->second;
    Matrix& v = v_it->second;
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseAbs2();
    p.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  }
}

namespace {

std::map<std::string, Matrix> collect_grads(const ad::Tape& tape, const ParamBinding& binding) {
  std::map<std::string, Matrix> grads;
  for (const auto& [name, var] : binding.bound()) grads.emplace(name, tape.grad(var));
  return grads;
}

void check_finite(const LossReport& report, const char* stage) {
  if (!std::isfinite(report.total)) {
    std::ostringstream msg;
    msg << stage << " diverged at step " << report.step << ": total=" << report.total
        << " cls=" << report.cls << " intra=" << report.intra << " inter=" << report.inter;
    if (report.recon) msg << " recon=" << *report.recon;
    throw NumericError(msg.str());
  }
}

// Draws batches by walking seeded per-epoch permutations.
class BatchSampler {
 public:
  BatchSampler(std::size_t size, std::uint64_t seed, std::string purpose)
      : size_(size), seed_(seed), purpose_(std::move(purpose)) {}

  std::vector<std::size_t> next(int batch) {
    std::vector<std::size_t> out;
    while (static_cast<int>(out.size()) < batch) {
      if (cursor_ == order_.size()) reshuffle();
      out.push_back(order_[cursor_++]);
    }
    return out;
  }

 private:
  void reshuffle() {
    order_.resize(size_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    Rng rng = make_rng(seed_, purpose_, epoch_++);
    std::shuffle(order_.begin(), order_.end(), rng);
    cursor_ = 0;
  }
  std::size_t size_;
  std::uint64_t seed_;
  std::string purpose_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::uint64_t epoch_ = 0;
};

}  // namespace

Checkpoint pretrain(const std::vector<VideoClip>& corpus, const ModelConfig& config,
                    int downsample_rate, const StepCallback& on_step) {
  config.validate();
  if (corpus.empty()) throw DataError("pretrain: empty corpus");
  Checkpoint ckpt;
  ckpt.config = config;
  ckpt.stage = "pretrain";
  ckpt.downsample_rate = downsample_rate;
  ckpt.level = downsample_rate > 1 ? Level::frame : Level::video;
  ckpt.params = init_encoder_params(config, config.seed);
  ckpt.params.merge(init_decoder_params(config, config.seed));

  Adam adam(config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_epsilon);
  BatchSampler sampler(corpus.size(), config.seed, "pretrain/order");
  const int batch = std::min<int>(config.batch_size, static_cast<int>(corpus.size()));
  for (int step = 0; step < config.pretrain_steps; ++step) {
    ad::Tape tape;
    ParamBinding binding(tape, ckpt.params);
    std::vector<std::pair<double, ad::Var>> terms;
    const auto picks = sampler.next(batch);
    for (std::size_t k = 0; k < picks.size(); ++k) {
      const std::uint64_t mask_seed = derive_seed(config.seed, "pretrain/mask",
                                                  static_cast<std::uint64_t>(step) * batch + k);
      const ModelInput input = prepare_input(corpus[picks[k]], config, downsample_rate,
                                             config.pretrain_mask_ratio, mask_seed);
      ad::Var latents = encode(binding, config, input.grid, input.mask);
      ad::Var recon = decode_reconstruct(binding, config, latents, input.mask);
      const std::vector<int> masked = input.mask.masked_indices();
      Matrix target(static_cast<Eigen::Index>(masked.size()), input.grid.tokens.cols());
      std::vector<int> block_of(masked.size());
      for (std::size_t r = 0; r < masked.size(); ++r) {
        target.row(static_cast<Eigen::Index>(r)) = input.grid.tokens.row(masked[r]);
        block_of[r] = masked[r] / input.mask.spatial;
      }
      LossValue loss = reconstruction_loss(target, tape.value(recon), block_of);
      terms.emplace_back(1.0 / static_cast<double>(picks.size()),
                         ad::loss_node(tape, recon, std::move(loss)));
    }
    ad::Var total = ad::weighted_sum(tape, terms);
    LossReport report;
    report.step = step;
    report.total = tape.value(total)(0, 0);
    report.recon = report.total;
    check_finite(report, "pretrain");
    tape.backward(total);
    adam.step(ckpt.params, collect_grads(tape, binding));
    if (on_step) on_step(report);
  }
  ckpt.step = config.pretrain_steps;
  return ckpt;
}

BatchEvaluation evaluate_finetune_batch(const std::vector<const LabeledClip*>& batch,
                                        const Priors& priors, const WeightVector& weights,
                                        Level level, const ParamMap& params,
                                        const ModelConfig& config, std::uint64_t mask_seed) {
  ad::Tape tape;
  ParamBinding binding(tape, params);
  const int rate = config.downsample_rate(level);
  const double ratio = level == Level::patch ? config.patch_mask_ratio : 0.0;
  std::vector<ad::Var> logits;
  std::vector<int> segments;
  Eigen::Index rows = 0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const ModelInput input =
        prepare_input(batch[k]->video, config, rate, ratio, derive_seed(mask_seed, "clip", k));
    ad::Var latents = encode(binding, config, input.grid, input.mask);
    logits.push_back(classify_logits(binding, config, latents, input));
    if (batch[k]->labels.length() != input.original_frames)
      throw DataError("clip '" + batch[k]->labels.clip_id + "': label/video length mismatch");
    segments.push_back(input.original_frames);
    rows += input.original_frames;
  }
  ad::Var probs = ad::sigmoid(tape, ad::concat_rows(tape, logits));
  Matrix targets(rows, config.au_count);
  Eigen::Index offset = 0;
  for (const auto* clip : batch) {
    targets.middleRows(offset, clip->labels.length()) = clip->labels.frames.cast<double>();
    offset += clip->labels.length();
  }
  const Matrix& p = tape.value(probs);
  LossValue cls = weighted_bce(p, targets, weights.weights);
  IntraLoss intra = intra_loss(p, priors.intra);
  LossValue inter = inter_loss(p, priors.inter, segments);

  BatchEvaluation out;
  out.report.cls = cls.value;
  out.report.intra = intra.loss.value;
  out.report.inter = inter.value;
  const LossWeights& w = config.loss_weights;
  std::vector<std::pair<double, ad::Var>> terms = {{w.cls, ad::loss_node(tape, probs, std::move(cls))}};
  if (w.intra > 0) terms.emplace_back(w.intra, ad::loss_node(tape, probs, std::move(intra.loss)));
  if (w.inter > 0) terms.emplace_back(w.inter, ad::loss_node(tape, probs, std::move(inter)));
  ad::Var total = ad::weighted_sum(tape, terms);
  out.report.total = tape.value(total)(0, 0);
  if (std::isfinite(out.report.total)) {
    tape.backward(total);
    out.grads = collect_grads(tape, binding);
  }
  return out;
}

Checkpoint finetune(const std::vector<LabeledClip>& dataset, const Priors& priors,
                    const WeightVector& weights, Level level, const Checkpoint& init,
                    const ModelConfig& config_in, const StepCallback& on_step) {
  if (dataset.empty()) throw DataError("finetune: empty dataset");
  ModelConfig config = config_in;
  config.au_count = dataset.front().labels.au_count();
  config.validate();
  if (priors.intra.size() != config.au_count || priors.inter.size() != config.au_count)
    throw DataError("finetune: priors are dimensioned for " + std::to_string(priors.intra.size()) +
                    " AUs but the dataset has " + std::to_string(config.au_count));
  if (weights.weights.size() != config.au_count)
    throw DataError("finetune: class weight length does not match AU count");

  Checkpoint ckpt;
  ckpt.config = config;
  ckpt.stage = "finetune";
  ckpt.level = level;
  ckpt.downsample_rate = config.downsample_rate(level);
  for (const auto& [name, value] : init.params)
    if (name.rfind("encoder.", 0) == 0) ckpt.params.emplace(name, value);
  if (ckpt.params.empty()) throw DataError("finetune: initial checkpoint has no encoder weights");
  ckpt.params.merge(init_head_params(config, config.tubelet.temporal * ckpt.downsample_rate,
                                     derive_seed(config.seed, "finetune/head")));

  Adam adam(config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_epsilon);
  BatchSampler sampler(dataset.size(), config.seed, "finetune/order");
  const int batch_size = std::min<int>(config.batch_size, static_cast<int>(dataset.size()));
  for (int step = 0; step < config.finetune_steps; ++step) {
    std::vector<const LabeledClip*> batch;
    for (std::size_t idx : sampler.next(batch_size)) batch.push_back(&dataset[idx]);
    BatchEvaluation eval =
        evaluate_finetune_batch(batch, priors, weights, level, ckpt.params, config,
                                derive_seed(config.seed, "finetune/mask", static_cast<std::uint64_t>(step)));
    eval.report.step = step;
    check_finite(eval.report, "finetune");
    adam.step(ckpt.params, eval.grads);
    if (on_step) on_step(eval.report);
  }
  ckpt.step = config.finetune_steps;
  return ckpt;
}

PredictionBatch predict(const Checkpoint& checkpoint, const VideoClip& clip, Level level,
                        std::uint64_t mask_seed) {
  const ModelConfig& config = checkpoint.config;
  if (checkpoint.stage != "finetune") throw UsageError("predict needs a finetuned checkpoint");
  ad::Tape tape(false);
  ParamBinding binding(tape, checkpoint.params);
  const double ratio = level == Level::patch ? config.patch_mask_ratio : 0.0;
  const ModelInput input = prepare_input(clip, config, config.downsample_rate(level), ratio, mask_seed);
  ad::Var latents = encode(binding, config, input.grid, input.mask);
  return classify(binding, config, latents, input, level);
}

}  // namespace auvmae
