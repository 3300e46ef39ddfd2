#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "auvmae/autograd.hpp"
#include "auvmae/losses.hpp"
#include "auvmae/video.hpp"

namespace auvmae {

enum class Level { video, frame, patch };

std::string to_string(Level level);
Level parse_level(const std::string& name);

struct ModelConfig {
  int frames = 16;
  int height = 32;
  int width = 32;
  int channels = 1;
  TubeletSpec tubelet{2, 8};
  int embed_dim = 64;
  int encoder_depth = 4;
  int decoder_depth = 2;
  int heads = 4;
  int mlp_ratio = 2;
  int au_count = 0;
  int frame_downsample_rate = 4;
  double pretrain_mask_ratio = 0.9;
  double patch_mask_ratio = 0.5;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int batch_size = 4;
  int pretrain_steps = 200;
  int finetune_steps = 300;
  LossWeights loss_weights;
  std::uint64_t seed = 0;

  int token_dim() const { return tubelet.temporal * tubelet.spatial * tubelet.spatial * channels; }
  /// Temporal downsampling applied to the input at a subtask level.
  int downsample_rate(Level level) const { return level == Level::frame ? frame_downsample_rate : 1; }
  void validate() const;
};

using ParamMap = std::map<std::string, Matrix>;

/// Trained weights plus the configuration they were built for. `stage` is
/// "pretrain" or "finetune"; `downsample_rate` is the temporal rate the
/// weights were trained at and `level` the subtask for finetuned heads.
struct Checkpoint {
  ModelConfig config;
  ParamMap params;
  std::int64_t step = 0;
  std::string stage = "pretrain";
  Level level = Level::video;
  int downsample_rate = 1;
};

/// Per-frame sigmoid outputs, always one row per frame of the source clip.
struct PredictionBatch {
  Matrix probs;
  Level level = Level::video;
};

/// Fixed 1-D sinusoidal embedding over flattened token positions.
Matrix sinusoidal_positions(int count, int dim);

ParamMap init_encoder_params(const ModelConfig& config, std::uint64_t seed);
ParamMap init_decoder_params(const ModelConfig& config, std::uint64_t seed);
/// `span` is the number of original frames covered by one temporal block.
ParamMap init_head_params(const ModelConfig& config, int span, std::uint64_t seed);

/// Registers parameters on a tape the first time they are used.
class ParamBinding {
 public:
  ParamBinding(ad::Tape& tape, const ParamMap& params) : tape_(tape), params_(params) {}

  ad::Var operator[](const std::string& name);
  const std::map<std::string, ad::Var>& bound() const { return bound_; }
  ad::Tape& tape() { return tape_; }

 private:
  ad::Tape& tape_;
  const ParamMap& params_;
  std::map<std::string, ad::Var> bound_;
};

/// A clip prepared for one subtask level: tokens, visibility, and the mapping
/// from temporal blocks back to original frames.
struct ModelInput {
  TokenGrid grid;
  MaskSpec mask;
  int original_frames = 0;
  int frames_per_block = 0;  // original frames covered by one temporal block
};

ModelInput prepare_input(const VideoClip& clip, const ModelConfig& config, int downsample_rate,
                         double mask_ratio, std::uint64_t mask_seed);

/// One latent row per visible token, in `order` (defaults to ascending token
/// index). Position embeddings follow the original grid coordinates.
ad::Var encode(ParamBinding& params, const ModelConfig& config, const TokenGrid& grid,
               const MaskSpec& mask, const std::vector<int>* order = nullptr);

/// Reconstructed tubelet vectors for the masked tokens in ascending order.
ad::Var decode_reconstruct(ParamBinding& params, const ModelConfig& config, ad::Var latents,
                           const MaskSpec& mask);

/// Pre-sigmoid logits, original_frames x N.
ad::Var classify_logits(ParamBinding& params, const ModelConfig& config, ad::Var latents,
                        const ModelInput& input);

PredictionBatch classify(ParamBinding& params, const ModelConfig& config, ad::Var latents,
                         const ModelInput& input, Level level);

}  // namespace auvmae
