#include "auvmae/video.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <numeric>
#include <random>

namespace auvmae {

VideoClip::VideoClip(std::string id, int t, int h, int w, int c)
    : clip_id(std::move(id)),
      frames(t),
      height(h),
      width(w),
      channels(c),
      original_frames(t),
      pixels(static_cast<std::size_t>(t) * h * w * c, 0.0) {}

int MaskSpec::visible_count() const {
  return static_cast<int>(std::count(visible.begin(), visible.end(), true));
}

std::vector<int> MaskSpec::visible_indices() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(visible.size()); ++i)
    if (visible[i]) out.push_back(i);
  return out;
}

std::vector<int> MaskSpec::masked_indices() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(visible.size()); ++i)
    if (!visible[i]) out.push_back(i);
  return out;
}

TokenGrid tokenize(const VideoClip& video, TubeletSpec tubelet) {
  if (tubelet.temporal <= 0 || tubelet.spatial <= 0)
    throw DataError("tokenize: tubelet sizes must be positive");
  if (video.frames % tubelet.temporal != 0 || video.height % tubelet.spatial != 0 ||
      video.width % tubelet.spatial != 0)
    throw DataError("tokenize: clip " + std::to_string(video.frames) + "x" +
                    std::to_string(video.height) + "x" + std::to_string(video.width) +
                    " is not divisible by tubelet (" + std::to_string(tubelet.temporal) + "," +
                    std::to_string(tubelet.spatial) + ")");
  TokenGrid grid;
  grid.tubelet = tubelet;
  grid.blocks = video.frames / tubelet.temporal;
  grid.rows = video.height / tubelet.spatial;
  grid.cols = video.width / tubelet.spatial;
  grid.channels = video.channels;
  grid.tokens.resize(grid.token_count(), grid.token_dim());
  const int p = tubelet.spatial;
  for (int b = 0; b < grid.blocks; ++b)
    for (int r = 0; r < grid.rows; ++r)
      for (int c = 0; c < grid.cols; ++c) {
        const int token = (b * grid.rows + r) * grid.cols + c;
        int k = 0;
        for (int dt = 0; dt < tubelet.temporal; ++dt)
          for (int dy = 0; dy < p; ++dy)
            for (int dx = 0; dx < p; ++dx)
              for (int ch = 0; ch < video.channels; ++ch)
                grid.tokens(token, k++) =
                    video.at(b * tubelet.temporal + dt, r * p + dy, c * p + dx, ch);
      }
  return grid;
}

VideoClip detokenize(const TokenGrid& grid) {
  const int p = grid.tubelet.spatial;
  VideoClip video("", grid.blocks * grid.tubelet.temporal, grid.rows * p, grid.cols * p,
                  grid.channels);
  for (int b = 0; b < grid.blocks; ++b)
    for (int r = 0; r < grid.rows; ++r)
      for (int c = 0; c < grid.cols; ++c) {
        const int token = (b * grid.rows + r) * grid.cols + c;
        int k = 0;
        for (int dt = 0; dt < grid.tubelet.temporal; ++dt)
          for (int dy = 0; dy < p; ++dy)
            for (int dx = 0; dx < p; ++dx)
              for (int ch = 0; ch < grid.channels; ++ch)
                video.at(b * grid.tubelet.temporal + dt, r * p + dy, c * p + dx, ch) =
                    grid.tokens(token, k++);
      }
  return video;
}

int tube_masked_count(int spatial, double ratio) {
  if (!(ratio >= 0.0 && ratio < 1.0))
    throw UsageError("mask ratio must lie in [0, 1), got " + std::to_string(ratio));
  // The visible count is rounded half-to-even; the product is snapped to 1e-9
  // first so that e.g. (1 - 0.9) * 15 lands on 1.5 rather than 1.4999...
  const double visible_exact = (1.0 - ratio) * spatial;
  const double snapped = std::round(visible_exact * 1e9) / 1e9;
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const int visible = static_cast<int>(std::nearbyint(snapped));
  std::fesetround(saved);
  return spatial - visible;
}

MaskSpec make_tube_mask(int blocks, int spatial, double ratio, std::uint64_t seed) {
  const int masked = tube_masked_count(spatial, ratio);
  std::vector<int> order(spatial);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> spatial_visible(spatial, true);
  for (int i = 0; i < masked; ++i) spatial_visible[order[i]] = false;

  MaskSpec mask;
  mask.kind = MaskKind::tube;
  mask.ratio = ratio;
  mask.seed = seed;
  mask.blocks = blocks;
  mask.spatial = spatial;
  mask.visible.resize(static_cast<std::size_t>(blocks) * spatial);
  for (int b = 0; b < blocks; ++b)
    for (int s = 0; s < spatial; ++s) mask.visible[b * spatial + s] = spatial_visible[s];
  return mask;
}

MaskSpec make_full_mask(int blocks, int spatial) {
  MaskSpec mask;
  mask.blocks = blocks;
  mask.spatial = spatial;
  mask.visible.assign(static_cast<std::size_t>(blocks) * spatial, true);
  return mask;
}

VideoClip temporal_downsample(const VideoClip& video, int rate) {
  if (rate <= 0) throw UsageError("downsample rate must be positive");
  if (video.frames % rate != 0)
    throw DataError("temporal_downsample: " + std::to_string(video.frames) +
                    " frames not divisible by rate " + std::to_string(rate));
  VideoClip out(video.clip_id, video.frames / rate, video.height, video.width, video.channels);
  out.original_frames = video.original_frames;
  out.downsample_rate = video.downsample_rate * rate;
  out.frame_rate = video.frame_rate / rate;
  const std::size_t fs = video.frame_size();
  for (int t = 0; t < out.frames; ++t)
    std::copy_n(video.pixels.begin() + static_cast<std::ptrdiff_t>(t * rate * fs), fs,
                out.pixels.begin() + static_cast<std::ptrdiff_t>(t * fs));
  return out;
}

}  // namespace auvmae
