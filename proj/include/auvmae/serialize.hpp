#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "auvmae/eval.hpp"
#include "auvmae/knowledge.hpp"
#include "auvmae/label_data.hpp"
#include "auvmae/losses.hpp"
#include "auvmae/model.hpp"
#include "auvmae/synth.hpp"

namespace auvmae {

using Json = nlohmann::json;

// Knowledge priors: {"au_ids", "k_intra", "k_intra_support", "k_inter"} with
// null for undefined entries. k_inter is nested [i][j][s].
Json knowledge_to_json(const IntraKnowledge& intra, const InterKnowledge& inter);
std::pair<IntraKnowledge, InterKnowledge> knowledge_from_json(const Json& doc);

Json augment_plan_to_json(const AugmentPlan& plan);
AugmentPlan augment_plan_from_json(const Json& doc);

Json generator_spec_to_json(const GeneratorSpec& cfg);
GeneratorSpec generator_spec_from_json(const Json& doc);
Json render_spec_to_json(const RenderSpec& cfg);
RenderSpec render_spec_from_json(const Json& doc);

Json model_config_to_json(const ModelConfig& config);
/// Missing keys keep their defaults.
ModelConfig model_config_from_json(const Json& doc, ModelConfig base = {});

/// One training-log line: {"step", "total", "cls", "intra", "inter"[, "recon"]}.
Json loss_report_to_json(const LossReport& report);

Json metric_report_to_json(const MetricReport& report);
MetricReport metric_report_from_json(const Json& doc);
/// One row per AU: au,f1,acc,tp,fp,fn,tn, followed by an "avg" row.
std::string metric_report_to_csv(const MetricReport& report);

Json divergence_to_json(const KnowledgeDivergence& divergence);

struct ClipPredictions {
  std::string clip_id;
  Matrix probs;
};
Json predictions_to_json(const std::vector<ClipPredictions>& preds, const std::vector<int>& au_ids,
                         Level level, std::uint64_t seed);
std::vector<ClipPredictions> predictions_from_json(const Json& doc);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& doc);

/// Checkpoint archive, all integers little-endian:
///   "AUVMCKPT" | u32 version=1 | i64 step | u32 L | L bytes JSON header
///   | u32 array count | per array (sorted by name):
///       u32 name length | name | u8 dtype (1 = float64) | u32 ndim
///       | u64 dims[ndim] | float64 data, row-major
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Video container, all integers little-endian:
///   "AUVMVID1" | u32 version=1 | u32 clip count | per clip:
///       u32 id length | id | u32 T | u32 H | u32 W | u32 C | f64 frame_rate
///       | T*H*W*C float32 pixels in (t, y, x, c) order
std::vector<std::uint8_t> encode_videos(const std::vector<VideoClip>& clips);
std::vector<VideoClip> decode_videos(const std::vector<std::uint8_t>& bytes);
void save_videos(const std::vector<VideoClip>& clips, const std::filesystem::path& path);
std::vector<VideoClip> load_videos(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

// Structural checks on emitted artifacts. Each returns an empty string when
// the document conforms, otherwise a description of the first violation.
std::string check_knowledge_json(const Json& doc);
std::string check_metrics_json(const Json& doc);
std::string check_log_line(const Json& doc);
std::string check_predictions_json(const Json& doc);

}  // namespace auvmae
