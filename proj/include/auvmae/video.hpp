#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "auvmae/types.hpp"

namespace auvmae {

/// A T x H x W x C clip with pixel values in [0, 1], stored frame-major
/// (t, y, x, c). `original_frames` is the frame count of the clip this one was
/// temporally downsampled from; predictions are always emitted for that many
/// frames.
struct VideoClip {
  std::string clip_id;
  int frames = 0;
  int height = 0;
  int width = 0;
  int channels = 1;
  int original_frames = 0;
  int downsample_rate = 1;
  double frame_rate = 30.0;
  std::vector<double> pixels;

  VideoClip() = default;
  VideoClip(std::string id, int t, int h, int w, int c);

  std::size_t frame_size() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  double& at(int t, int y, int x, int c = 0) {
    return pixels[((static_cast<std::size_t>(t) * height + y) * width + x) * channels + c];
  }
  double at(int t, int y, int x, int c = 0) const {
    return pixels[((static_cast<std::size_t>(t) * height + y) * width + x) * channels + c];
  }
};

struct TubeletSpec {
  int temporal = 2;
  int spatial = 8;
};

/// Tubelet tokens laid out row-per-token in (temporal block, patch row,
/// patch column) order. Each row is the tubelet flattened as (dt, dy, dx, c).
struct TokenGrid {
  TubeletSpec tubelet;
  int blocks = 0;
  int rows = 0;
  int cols = 0;
  int channels = 1;
  Matrix tokens;

  int spatial_positions() const { return rows * cols; }
  int token_count() const { return blocks * rows * cols; }
  int token_dim() const { return tubelet.temporal * tubelet.spatial * tubelet.spatial * channels; }
};

enum class MaskKind { none, tube };

/// Per-token visibility. For tube masks the spatial pattern repeats in every
/// temporal block.
struct MaskSpec {
  MaskKind kind = MaskKind::none;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  int blocks = 0;
  int spatial = 0;
  std::vector<bool> visible;

  int visible_count() const;
  int masked_count() const { return static_cast<int>(visible.size()) - visible_count(); }
  std::vector<int> visible_indices() const;
  std::vector<int> masked_indices() const;
};

TokenGrid tokenize(const VideoClip& video, TubeletSpec tubelet);
VideoClip detokenize(const TokenGrid& grid);

/// Number of masked spatial positions out of `spatial` for a given ratio.
int tube_masked_count(int spatial, double ratio);

MaskSpec make_tube_mask(int blocks, int spatial, double ratio, std::uint64_t seed);
MaskSpec make_full_mask(int blocks, int spatial);

VideoClip temporal_downsample(const VideoClip& video, int rate);

}  // namespace auvmae
