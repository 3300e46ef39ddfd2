#include "auvmae/model.hpp"

#include <cmath>
#include <random>

#include "auvmae/rng.hpp"

namespace auvmae {

std::string to_string(Level level) {
  switch (level) {
    case Level::video: return "video";
    case Level::frame: return "frame";
    case Level::patch: return "patch";
  }
  return "video";
}

Level parse_level(const std::string& name) {
  if (name == "video") return Level::video;
  if (name == "frame") return Level::frame;
  if (name == "patch") return Level::patch;
  throw UsageError("unknown level '" + name + "' (expected video, frame or patch)");
}

void ModelConfig::validate() const {
  auto positive = [](int v, const char* what) {
    if (v <= 0) throw UsageError(std::string("model config: ") + what + " must be positive");
  };
  positive(frames, "frames");
  positive(height, "height");
  positive(width, "width");
  positive(channels, "channels");
  positive(tubelet.temporal, "tubelet temporal size");
  positive(tubelet.spatial, "tubelet spatial size");
  positive(embed_dim, "embed_dim");
  positive(encoder_depth, "encoder_depth");
  positive(decoder_depth, "decoder_depth");
  positive(heads, "heads");
  positive(mlp_ratio, "mlp_ratio");
  positive(frame_downsample_rate, "frame_downsample_rate");
  positive(batch_size, "batch_size");
  if (embed_dim % heads != 0) throw UsageError("model config: embed_dim must divide into heads");
  if (!(pretrain_mask_ratio >= 0 && pretrain_mask_ratio < 1) ||
      !(patch_mask_ratio >= 0 && patch_mask_ratio < 1))
    throw UsageError("model config: mask ratios must lie in [0, 1)");
  if (!(learning_rate > 0)) throw UsageError("model config: learning rate must be positive");
  loss_weights.validate();
}

Matrix sinusoidal_positions(int count, int dim) {
  Matrix out(count, dim);
  for (int pos = 0; pos < count; ++pos)
    for (int k = 0; k < dim; ++k) {
      const double freq = std::pow(10000.0, -2.0 * (k / 2) / dim);
      out(pos, k) = (k % 2 == 0) ? std::sin(pos * freq) : std::cos(pos * freq);
    }
  return out;
}

namespace {

Matrix xavier(int rows, int cols, Rng& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double limit = std::sqrt(6.0 / (rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = limit * dist(rng);
  return m;
}

Matrix small_normal(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 0.02);
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = dist(rng);
  return m;
}

void add_linear(ParamMap& p, const std::string& name, int in, int out, Rng& rng) {
  p[name + ".weight"] = xavier(in, out, rng);
  p[name + ".bias"] = Matrix::Zero(1, out);
}

void add_norm(ParamMap& p, const std::string& name, int dim) {
  p[name + ".gain"] = Matrix::Ones(1, dim);
  p[name + ".bias"] = Matrix::Zero(1, dim);
}

void add_blocks(ParamMap& p, const std::string& prefix, int depth, const ModelConfig& c, Rng& rng) {
  const int d = c.embed_dim;
  for (int k = 0; k < depth; ++k) {
    const std::string b = prefix + ".block" + std::to_string(k);
    add_norm(p, b + ".ln1", d);
    add_linear(p, b + ".attn.qkv", d, 3 * d, rng);
    add_linear(p, b + ".attn.proj", d, d, rng);
    add_norm(p, b + ".ln2", d);
    add_linear(p, b + ".mlp.fc1", d, c.mlp_ratio * d, rng);
    add_linear(p, b + ".mlp.fc2", c.mlp_ratio * d, d, rng);
  }
}

ad::Var linear(ParamBinding& p, const std::string& name, ad::Var x) {
  auto& tape = p.tape();
  return ad::add_row(tape, ad::matmul(tape, x, p[name + ".weight"]), p[name + ".bias"]);
}

ad::Var norm(ParamBinding& p, const std::string& name, ad::Var x) {
  return ad::layer_norm(p.tape(), x, p[name + ".gain"], p[name + ".bias"]);
}

ad::Var transformer_block(ParamBinding& p, const std::string& b, ad::Var x, int heads) {
  auto& tape = p.tape();
  ad::Var h = norm(p, b + ".ln1", x);
  h = ad::self_attention(tape, linear(p, b + ".attn.qkv", h), heads);
  x = ad::add(tape, x, linear(p, b + ".attn.proj", h));
  h = norm(p, b + ".ln2", x);
  h = linear(p, b + ".mlp.fc2", ad::gelu(tape, linear(p, b + ".mlp.fc1", h)));
  return ad::add(tape, x, h);
}

}  // namespace

ParamMap init_encoder_params(const ModelConfig& config, std::uint64_t seed) {
  Rng rng = make_rng(seed, "init/encoder");
  ParamMap p;
  add_linear(p, "encoder.embed", config.token_dim(), config.embed_dim, rng);
  add_blocks(p, "encoder", config.encoder_depth, config, rng);
  add_norm(p, "encoder.norm", config.embed_dim);
  return p;
}

ParamMap init_decoder_params(const ModelConfig& config, std::uint64_t seed) {
  Rng rng = make_rng(seed, "init/decoder");
  ParamMap p;
  add_linear(p, "decoder.embed", config.embed_dim, config.embed_dim, rng);
  p["decoder.mask_token"] = small_normal(1, config.embed_dim, rng);
  add_blocks(p, "decoder", config.decoder_depth, config, rng);
  add_norm(p, "decoder.norm", config.embed_dim);
  add_linear(p, "decoder.pred", config.embed_dim, config.token_dim(), rng);
  return p;
}

ParamMap init_head_params(const ModelConfig& config, int span, std::uint64_t seed) {
  if (config.au_count < 1) throw UsageError("classifier head needs au_count >= 1");
  Rng rng = make_rng(seed, "init/head");
  ParamMap p;
  p["head.frame_offset"] = small_normal(span, config.embed_dim, rng);
  add_norm(p, "head.norm", config.embed_dim);
  add_linear(p, "head.fc", config.embed_dim, config.au_count, rng);
  return p;
}

ad::Var ParamBinding::operator[](const std::string& name) {
  if (auto it = bound_.find(name); it != bound_.end()) return it->second;
  auto it = params_.find(name);
  if (it == params_.end()) throw DataError("missing parameter '" + name + "'");
  ad::Var v = tape_.parameter(it->second);
  bound_.emplace(name, v);
  return v;
}

ModelInput prepare_input(const VideoClip& clip, const ModelConfig& config, int downsample_rate,
                         double mask_ratio, std::uint64_t mask_seed) {
  if (clip.height != config.height || clip.width != config.width || clip.channels != config.channels)
    throw DataError("clip '" + clip.clip_id + "' is " + std::to_string(clip.height) + "x" +
                    std::to_string(clip.width) + "x" + std::to_string(clip.channels) +
                    " but the model expects " + std::to_string(config.height) + "x" +
                    std::to_string(config.width) + "x" + std::to_string(config.channels));
  ModelInput input;
  input.original_frames = clip.original_frames > 0 ? clip.original_frames : clip.frames;
  const VideoClip sampled = downsample_rate > 1 ? temporal_downsample(clip, downsample_rate) : clip;
  input.grid = tokenize(sampled, config.tubelet);
  input.frames_per_block = config.tubelet.temporal * sampled.downsample_rate;
  input.mask = mask_ratio > 0.0
                   ? make_tube_mask(input.grid.blocks, input.grid.spatial_positions(), mask_ratio, mask_seed)
                   : make_full_mask(input.grid.blocks, input.grid.spatial_positions());
  if (input.mask.visible_count() == 0)
    throw UsageError("mask ratio " + std::to_string(mask_ratio) + " leaves no visible tokens");
  return input;
}

ad::Var encode(ParamBinding& params, const ModelConfig& config, const TokenGrid& grid,
               const MaskSpec& mask, const std::vector<int>* order) {
  if (grid.token_dim() != config.token_dim() || grid.tokens.cols() != config.token_dim())
    throw NumericError("encode: token width does not match the model");
  if (static_cast<int>(mask.visible.size()) != grid.token_count())
    throw NumericError("encode: mask does not match token grid");
  auto& tape = params.tape();
  const std::vector<int> rows = order ? *order : mask.visible_indices();
  if (rows.empty()) throw NumericError("encode: no visible tokens");
  for (int r : rows)
    if (r < 0 || r >= grid.token_count() || !mask.visible[r])
      throw NumericError("encode: feed order references a non-visible token");
  Matrix tokens(static_cast<Eigen::Index>(rows.size()), grid.tokens.cols());
  const Matrix all_pos = sinusoidal_positions(grid.token_count(), config.embed_dim);
  Matrix pos(static_cast<Eigen::Index>(rows.size()), config.embed_dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    tokens.row(static_cast<Eigen::Index>(r)) = grid.tokens.row(rows[r]);
    pos.row(static_cast<Eigen::Index>(r)) = all_pos.row(rows[r]);
  }
  ad::Var x = linear(params, "encoder.embed", tape.constant(std::move(tokens)));
  x = ad::add(tape, x, tape.constant(std::move(pos)));
  for (int k = 0; k < config.encoder_depth; ++k)
    x = transformer_block(params, "encoder.block" + std::to_string(k), x, config.heads);
  return norm(params, "encoder.norm", x);
}

ad::Var decode_reconstruct(ParamBinding& params, const ModelConfig& config, ad::Var latents,
                           const MaskSpec& mask) {
  auto& tape = params.tape();
  const std::vector<int> visible = mask.visible_indices();
  if (tape.value(latents).rows() != static_cast<Eigen::Index>(visible.size()))
    throw NumericError("decode_reconstruct: latent count does not match the mask");
  const std::vector<int> masked = mask.masked_indices();
  if (masked.empty()) throw NumericError("decode_reconstruct: mask hides no tokens");
  const int total = static_cast<int>(mask.visible.size());
  ad::Var y = linear(params, "decoder.embed", latents);
  y = ad::scatter_rows(tape, y, visible, total, params["decoder.mask_token"]);
  y = ad::add(tape, y, tape.constant(sinusoidal_positions(total, config.embed_dim)));
  for (int k = 0; k < config.decoder_depth; ++k)
    y = transformer_block(params, "decoder.block" + std::to_string(k), y, config.heads);
  y = linear(params, "decoder.pred", norm(params, "decoder.norm", y));
  return ad::gather_rows(tape, y, masked);
}

ad::Var classify_logits(ParamBinding& params, const ModelConfig& config, ad::Var latents,
                        const ModelInput& input) {
  auto& tape = params.tape();
  const MaskSpec& mask = input.mask;
  const std::vector<int> visible = mask.visible_indices();
  if (tape.value(latents).rows() != static_cast<Eigen::Index>(visible.size()))
    throw NumericError("classify: latent count does not match the mask");
  std::vector<int> block_of(visible.size());
  for (std::size_t r = 0; r < visible.size(); ++r) block_of[r] = visible[r] / mask.spatial;
  ad::Var pooled = ad::group_mean(tape, latents, std::move(block_of), mask.blocks);

  const int span = input.frames_per_block;
  const ad::Var offsets = params["head.frame_offset"];
  const int table_rows = static_cast<int>(tape.value(offsets).rows());
  std::vector<int> frame_block(static_cast<std::size_t>(input.original_frames));
  std::vector<int> frame_offset(frame_block.size());
  for (int f = 0; f < input.original_frames; ++f) {
    const int block = std::min(f / span, mask.blocks - 1);
    frame_block[f] = block;
    frame_offset[f] = std::min(f - block * span, table_rows - 1);
  }
  ad::Var z = ad::add(tape, ad::gather_rows(tape, pooled, std::move(frame_block)),
                      ad::gather_rows(tape, offsets, std::move(frame_offset)));
  z = norm(params, "head.norm", z);
  ad::Var logits = linear(params, "head.fc", z);
  if (tape.value(logits).cols() != config.au_count)
    throw NumericError("classify: head width does not match au_count");
  return logits;
}

PredictionBatch classify(ParamBinding& params, const ModelConfig& config, ad::Var latents,
                         const ModelInput& input, Level level) {
  ad::Var probs = ad::sigmoid(params.tape(), classify_logits(params, config, latents, input));
  return PredictionBatch{params.tape().value(probs), level};
}

}  // namespace auvmae
