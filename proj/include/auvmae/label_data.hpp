#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "auvmae/types.hpp"
#include "auvmae/video.hpp"

namespace auvmae {

/// Per-frame binary AU annotations for one clip: `frames(t, i)` is the label
/// of AU `au_ids[i]` at frame t.
struct LabelSequence {
  std::string clip_id;
  std::vector<int> au_ids;
  BinaryMatrix frames;

  int length() const { return static_cast<int>(frames.rows()); }
  int au_count() const { return static_cast<int>(frames.cols()); }

  /// Throws DataError unless N >= 2, T >= 2, au_ids unique and ascending, and
  /// every entry is 0 or 1.
  void validate() const;
};

using LabelDataset = std::vector<LabelSequence>;

LabelDataset load_label_sequences(const std::filesystem::path& path);
LabelDataset parse_label_csv(const std::string& text);
std::string format_label_csv(const LabelDataset& dataset);
void save_label_sequences(const LabelDataset& dataset, const std::filesystem::path& path);

/// Throws DataError if sequences disagree on au_ids. Returns the shared ids.
const std::vector<int>& shared_au_ids(const LabelDataset& dataset);

struct RateVector {
  std::vector<int> au_ids;
  Vector rates;
  std::int64_t total_frames = 0;
};

struct WeightVector {
  Vector weights;
};

RateVector occurrence_rates(const LabelDataset& dataset);

/// w_i = N (1/r_i) / sum_j (1/r_j). A zero rate is an error.
WeightVector class_weights(const RateVector& rates);

struct AugmentPlan {
  std::vector<int> minority_aus;
  int majority_run_threshold = 15;
  std::uint64_t seed = 0;
  double crop_min_fraction = 0.8;

  void validate(const std::vector<int>& au_ids) const;
};

struct LabeledClip {
  VideoClip video;
  LabelSequence labels;
};

/// Half-open frame interval [begin, end).
struct FrameSpan {
  int begin = 0;
  int end = 0;
  int length() const { return end - begin; }
  bool operator==(const FrameSpan&) const = default;
};

/// Scans a label sequence and returns the minority-triggered sub-clips. A
/// sub-clip opens at the first frame with any minority AU active and closes on
/// the frame that completes `threshold` consecutive minority-free frames; the
/// scan then resumes. Sub-clips shorter than 2 frames are dropped.
std::vector<FrameSpan> minority_subclips(const LabelSequence& labels,
                                         const std::vector<int>& minority_columns,
                                         int threshold);

/// Extracts minority sub-clips, applies seeded flip/crop to their pixels, and
/// returns the input dataset followed by the augmented clips.
std::vector<LabeledClip> augment_dataset(const std::vector<LabeledClip>& dataset,
                                         const AugmentPlan& plan);

/// Random horizontal flip plus crop-and-resize, labels untouched.
VideoClip flip_crop(const VideoClip& video, bool flip, double crop_fraction, double offset_y,
                    double offset_x);

}  // namespace auvmae
