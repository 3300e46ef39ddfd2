#include "auvmae/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "auvmae/eval.hpp"
#include "auvmae/knowledge.hpp"
#include "auvmae/label_data.hpp"
#include "auvmae/report.hpp"
#include "auvmae/rng.hpp"
#include "auvmae/serialize.hpp"
#include "auvmae/synth.hpp"
#include "auvmae/training.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;

namespace auvmae::cli {

namespace {

void apply_thread_cap() {
  const char* env = std::getenv("AUVMAE_THREADS");
  if (!env) return;
  const int threads = std::atoi(env);
  if (threads < 1) throw UsageError("AUVMAE_THREADS must be a positive integer");
  Eigen::setNbThreads(threads);
#ifdef _OPENMP
  omp_set_num_threads(threads);
#endif
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::vector<VideoClip> load_all_videos(const std::vector<std::string>& paths) {
  std::vector<VideoClip> clips;
  for (const auto& p : paths) {
    auto part = load_videos(p);
    clips.insert(clips.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  if (clips.empty()) throw DataError("no video clips loaded");
  return clips;
}

// Trims trailing frames so the length is a multiple of `multiple`; drops
// clips that are too short.
std::vector<LabeledClip> fit_lengths(std::vector<LabeledClip> clips, int multiple) {
  std::vector<LabeledClip> out;
  for (auto& c : clips) {
    const int keep = (c.video.frames / multiple) * multiple;
    if (keep < 2) continue;
    if (keep != c.video.frames) {
      c.video.pixels.resize(static_cast<std::size_t>(keep) * c.video.frame_size());
      c.video.frames = keep;
      c.video.original_frames = keep;
      c.labels.frames.conservativeResize(keep, Eigen::NoChange);
    }
    out.push_back(std::move(c));
  }
  if (out.empty()) throw DataError("no clip is long enough for the configured tubelet and rate");
  return out;
}

std::vector<LabeledClip> join(const std::vector<VideoClip>& videos, const LabelDataset& labels) {
  std::map<std::string, const VideoClip*> by_id;
  for (const auto& v : videos) by_id.emplace(v.clip_id, &v);
  std::vector<LabeledClip> out;
  for (const auto& l : labels) {
    auto it = by_id.find(l.clip_id);
    if (it == by_id.end()) throw DataError("no video for labelled clip '" + l.clip_id + "'");
    if (it->second->frames != l.length())
      throw DataError("clip '" + l.clip_id + "' has " + std::to_string(it->second->frames) +
                      " video frames but " + std::to_string(l.length()) + " label frames");
    out.push_back({*it->second, l});
  }
  return out;
}

class LogWriter {
 public:
  explicit LogWriter(const fs::path& path) : out_(path) {
    if (!out_) throw DataError("cannot write log " + path.string());
  }
  void operator()(const LossReport& r) { out_ << loss_report_to_json(r).dump() << '\n'; }

 private:
  std::ofstream out_;
};

ModelConfig base_config(const std::string& config_path, std::uint64_t seed) {
  ModelConfig config;
  if (!config_path.empty()) config = model_config_from_json(read_json_file(config_path));
  config.seed = seed;
  return config;
}

struct Options {
  std::uint64_t seed = 0;
  std::string generator, render, out, labels, priors, checkpoint, config, log, plan, predictions, csv;
  std::vector<std::string> videos, metrics;
  std::string level;
  double mask_ratio = -1;
  int downsample_rate = 0;
  double lambda_intra = -1, lambda_inter = -1;
  int frames = 4096, clip_length = 16, steps = -1, batch_size = 0;
  double test_fraction = 0.25, smoothing = 0.0;
};

int cmd_synth(const Options& o) {
  const GeneratorSpec cfg =
      o.generator.empty() ? default_generator_spec(o.seed) : generator_spec_from_json(read_json_file(o.generator));
  const RenderSpec render =
      o.render.empty() ? default_render_spec(cfg.au_count()) : render_spec_from_json(read_json_file(o.render));
  render.validate(cfg.au_count());
  if (o.clip_length < 2) throw UsageError("--clip-length must be at least 2");
  const int clips = o.frames / o.clip_length;
  const int test = static_cast<int>(std::lround(clips * o.test_fraction));
  if (clips - test < 1) throw UsageError("--frames too small for one training clip");
  const fs::path dir = o.out;
  fs::create_directories(dir);
  auto write_split = [&](const std::string& name, int count) {
    const auto data = synthesize_dataset(cfg, render, count, o.clip_length, derive_seed(o.seed, "synth/" + name), name);
    LabelDataset labels;
    std::vector<VideoClip> videos;
    for (const auto& c : data) {
      labels.push_back(c.labels);
      videos.push_back(c.video);
    }
    if (!labels.empty()) save_label_sequences(labels, dir / (name + ".csv"));
    save_videos(videos, dir / (name + ".vid"));
  };
  write_split("train", clips - test);
  if (test > 0) write_split("test", test);
  write_json_file(dir / "generator.json", generator_spec_to_json(cfg));
  write_json_file(dir / "render.json", render_spec_to_json(render));
  write_json_file(dir / "manifest.json", Json{{"seed", o.seed},
                                              {"clip_length", o.clip_length},
                                              {"train_clips", clips - test},
                                              {"test_clips", test},
                                              {"au_ids", cfg.au_ids}});
  std::cout << "wrote " << clips - test << " train and " << test << " test clips to " << dir.string() << '\n';
  return kOk;
}

int cmd_estimate(const Options& o) {
  const LabelDataset labels = load_label_sequences(o.labels);
  for (const auto& l : labels) l.validate();
  const IntraKnowledge intra = estimate_intra_knowledge(labels, o.smoothing);
  const InterKnowledge inter = estimate_inter_knowledge(labels, o.smoothing);
  Json doc = knowledge_to_json(intra, inter);
  doc["seed"] = o.seed;
  const RateVector rates = occurrence_rates(labels);
  doc["occurrence_rates"] = std::vector<double>(rates.rates.data(), rates.rates.data() + rates.rates.size());
  ensure_parent(o.out);
  write_json_file(o.out, doc);
  std::cout << "wrote priors for " << intra.size() << " AUs from " << rates.total_frames << " frames to " << o.out
            << '\n';
  return kOk;
}

int cmd_pretrain(const Options& o) {
  ModelConfig config = base_config(o.config, o.seed);
  if (o.mask_ratio >= 0) config.pretrain_mask_ratio = o.mask_ratio;
  if (o.steps >= 0) config.pretrain_steps = o.steps;
  if (o.batch_size > 0) config.batch_size = o.batch_size;
  int rate = 1;
  if (!o.level.empty()) {
    if (o.downsample_rate > 0 && parse_level(o.level) == Level::frame) config.frame_downsample_rate = o.downsample_rate;
    rate = config.downsample_rate(parse_level(o.level));
  } else if (o.downsample_rate > 0) {
    rate = o.downsample_rate;
  }
  std::vector<VideoClip> corpus;
  const int multiple = config.tubelet.temporal * rate;
  for (auto& clip : load_all_videos(o.videos)) {
    const int keep = (clip.frames / multiple) * multiple;
    if (keep < multiple) continue;
    clip.pixels.resize(static_cast<std::size_t>(keep) * clip.frame_size());
    clip.frames = clip.original_frames = keep;
    corpus.push_back(std::move(clip));
  }
  ensure_parent(o.out);
  LogWriter log(o.log.empty() ? o.out + ".log.jsonl" : o.log);
  double first = 0, last = 0;
  const Checkpoint ckpt = pretrain(corpus, config, rate, [&](const LossReport& r) {
    if (r.step == 0) first = r.total;
    last = r.total;
    log(r);
  });
  save_checkpoint(ckpt, o.out);
  std::cout << "pretrained " << ckpt.step << " steps at downsample rate " << rate << ": recon " << first << " -> "
            << last << '\n';
  return kOk;
}

int cmd_finetune(const Options& o) {
  const Checkpoint init = load_checkpoint(o.checkpoint);
  ModelConfig config = o.config.empty() ? init.config : base_config(o.config, o.seed);
  config.seed = o.seed;
  if (o.steps >= 0) config.finetune_steps = o.steps;
  if (o.batch_size > 0) config.batch_size = o.batch_size;
  if (o.lambda_intra >= 0) config.loss_weights.intra = o.lambda_intra;
  if (o.lambda_inter >= 0) config.loss_weights.inter = o.lambda_inter;
  const Level level = o.level.empty() ? init.level : parse_level(o.level);
  if (o.mask_ratio >= 0) config.patch_mask_ratio = o.mask_ratio;
  if (o.downsample_rate > 0) config.frame_downsample_rate = o.downsample_rate;
  if (config.downsample_rate(level) != init.downsample_rate)
    std::cerr << "warning: checkpoint was pretrained at downsample rate " << init.downsample_rate
              << " but the " << to_string(level) << " level uses " << config.downsample_rate(level) << '\n';

  const LabelDataset labels = load_label_sequences(o.labels);
  for (const auto& l : labels) l.validate();
  auto dataset = fit_lengths(join(load_all_videos(o.videos), labels),
                             config.tubelet.temporal * config.downsample_rate(level));
  auto [intra, inter] = knowledge_from_json(read_json_file(o.priors));
  if (intra.au_ids != labels.front().au_ids) throw DataError("priors were estimated for different AU ids");
  LabelDataset kept;
  for (const auto& c : dataset) kept.push_back(c.labels);
  const WeightVector weights = class_weights(occurrence_rates(kept));

  ensure_parent(o.out);
  LogWriter log(o.log.empty() ? o.out + ".log.jsonl" : o.log);
  LossReport last;
  const Checkpoint ckpt =
      finetune(dataset, Priors{std::move(intra), std::move(inter)}, weights, level, init, config,
               [&](const LossReport& r) {
                 last = r;
                 log(r);
               });
  save_checkpoint(ckpt, o.out);
  std::cout << "finetuned " << to_string(level) << " level for " << ckpt.step << " steps: total " << last.total
            << " cls " << last.cls << " intra " << last.intra << " inter " << last.inter << '\n';
  return kOk;
}

std::vector<ClipPredictions> run_predictions(const Checkpoint& ckpt, const std::vector<VideoClip>& videos,
                                             Level level, std::uint64_t seed) {
  std::vector<ClipPredictions> preds;
  for (std::size_t k = 0; k < videos.size(); ++k) {
    VideoClip clip = videos[k];
    const int multiple = ckpt.config.tubelet.temporal * ckpt.config.downsample_rate(level);
    const int keep = (clip.frames / multiple) * multiple;
    if (keep != clip.frames) {
      clip.pixels.resize(static_cast<std::size_t>(keep) * clip.frame_size());
      clip.frames = clip.original_frames = keep;
    }
    const PredictionBatch batch = predict(ckpt, clip, level, derive_seed(seed, "predict/mask", k));
    preds.push_back({clip.clip_id, batch.probs});
  }
  return preds;
}

int cmd_predict(const Options& o) {
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  const Level level = o.level.empty() ? ckpt.level : parse_level(o.level);
  const auto preds = run_predictions(ckpt, load_all_videos(o.videos), level, o.seed);
  std::vector<int> au_ids;
  ensure_parent(o.out);
  Json doc = predictions_to_json(preds, au_ids, level, o.seed);
  doc["au_ids"] = Json::array();
  for (int k = 0; k < ckpt.config.au_count; ++k) doc["au_ids"].push_back(k);
  if (!o.labels.empty()) doc["au_ids"] = load_label_sequences(o.labels).front().au_ids;
  write_json_file(o.out, doc);
  std::cout << "wrote predictions for " << preds.size() << " clips to " << o.out << '\n';
  return kOk;
}

int cmd_eval(const Options& o) {
  const LabelDataset labels = load_label_sequences(o.labels);
  std::vector<ClipPredictions> preds;
  Level level = Level::video;
  if (!o.predictions.empty()) {
    const Json doc = read_json_file(o.predictions);
    preds = predictions_from_json(doc);
    level = parse_level(doc["level"].get<std::string>());
  } else {
    if (o.checkpoint.empty() || o.videos.empty())
      throw UsageError("eval needs --predictions or both --checkpoint and --videos");
    const Checkpoint ckpt = load_checkpoint(o.checkpoint);
    level = o.level.empty() ? ckpt.level : parse_level(o.level);
    preds = run_predictions(ckpt, load_all_videos(o.videos), level, o.seed);
  }
  std::map<std::string, const Matrix*> by_id;
  for (const auto& p : preds) by_id.emplace(p.clip_id, &p.probs);
  std::vector<Matrix> probs;
  LabelDataset aligned;
  for (const auto& l : labels) {
    auto it = by_id.find(l.clip_id);
    if (it == by_id.end()) throw DataError("no predictions for clip '" + l.clip_id + "'");
    LabelSequence trimmed = l;
    if (it->second->rows() < l.length()) trimmed.frames.conservativeResize(it->second->rows(), Eigen::NoChange);
    probs.push_back(*it->second);
    aligned.push_back(std::move(trimmed));
  }
  const MetricReport report = f1_scores(probs, aligned);
  Json doc = metric_report_to_json(report);
  doc["level"] = to_string(level);
  doc["seed"] = o.seed;
  doc["constant_predictor_f1"] = constant_predictor_f1(aligned);
  if (!o.priors.empty()) {
    const auto [intra, inter] = knowledge_from_json(read_json_file(o.priors));
    const auto [learned_intra, learned_inter] = learned_knowledge(probs);
    doc["knowledge_divergence"] = divergence_to_json(knowledge_divergence(intra, inter, learned_intra, learned_inter));
  }
  ensure_parent(o.out);
  write_json_file(o.out, doc);
  if (!o.csv.empty()) {
    std::ofstream csv(o.csv);
    csv << metric_report_to_csv(report);
  }
  std::cout << to_string(level) << "-level avg F1 " << report.avg_f1 << " avg ACC " << report.avg_acc << '\n';
  return kOk;
}

int cmd_augment(const Options& o, bool seed_given) {
  AugmentPlan plan = augment_plan_from_json(read_json_file(o.plan));
  if (seed_given) plan.seed = o.seed;
  const LabelDataset labels = load_label_sequences(o.labels);
  const auto dataset = join(load_all_videos(o.videos), labels);
  const RateVector before = occurrence_rates(labels);
  const auto augmented = augment_dataset(dataset, plan);
  LabelDataset out_labels;
  std::vector<VideoClip> out_videos;
  for (const auto& c : augmented) {
    out_labels.push_back(c.labels);
    out_videos.push_back(c.video);
  }
  const RateVector after = occurrence_rates(out_labels);
  const fs::path dir = o.out;
  fs::create_directories(dir);
  save_label_sequences(out_labels, dir / "augmented.csv");
  save_videos(out_videos, dir / "augmented.vid");
  Json summary{{"seed", plan.seed},
               {"plan", augment_plan_to_json(plan)},
               {"au_ids", before.au_ids},
               {"clips_before", dataset.size()},
               {"clips_after", augmented.size()},
               {"rates_before", std::vector<double>(before.rates.data(), before.rates.data() + before.rates.size())},
               {"rates_after", std::vector<double>(after.rates.data(), after.rates.data() + after.rates.size())}};
  write_json_file(dir / "augment_summary.json", summary);
  std::cout << "augmented " << dataset.size() << " clips to " << augmented.size() << '\n';
  return kOk;
}

int cmd_report(const Options& o) {
  const fs::path dir = o.out;
  fs::create_directories(dir);
  Json summary{{"seed", o.seed}, {"runs", Json::array()}};
  if (!o.priors.empty()) {
    const auto [intra, inter] = knowledge_from_json(read_json_file(o.priors));
    std::ofstream(dir / "intra_prior.svg") << intra_heatmap_svg(intra.matrix, intra.au_ids, "Prior intra-frame knowledge");
    std::ofstream(dir / "inter_prior.svg")
        << inter_heatmap_svg(inter.tensor, inter.n, inter.au_ids, "Prior inter-frame knowledge");
  }
  std::vector<std::pair<std::string, MetricReport>> rows;
  for (const auto& item : o.metrics) {
    std::string name, path = item;
    if (auto eq = item.find('='); eq != std::string::npos) {
      name = item.substr(0, eq);
      path = item.substr(eq + 1);
    }
    const Json doc = read_json_file(path);
    if (name.empty()) name = doc.value("level", fs::path(path).stem().string());
    rows.emplace_back(name, metric_report_from_json(doc));
    Json run{{"name", name}, {"avg_f1", doc["avg_f1"]}, {"avg_acc", doc["avg_acc"]}};
    if (doc.contains("knowledge_divergence")) {
      const Json& kd = doc["knowledge_divergence"];
      run["divergence_intra"] = kd["intra"];
      run["divergence_inter"] = kd["inter"];
      const auto& ids = rows.back().second.au_ids;
      const int n = static_cast<int>(ids.size());
      Matrix learned(n, n);
      std::vector<double> tensor;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const Json& v = kd["learned_intra"][i][j];
          learned(i, j) = v.is_null() ? std::nan("") : v.get<double>();
          for (int s = 0; s < 16; ++s) tensor.push_back(kd["learned_inter"][i][j][s].get<double>());
        }
      std::ofstream(dir / ("intra_learned_" + name + ".svg"))
          << intra_heatmap_svg(learned, ids, "Learned intra-frame knowledge (" + name + ")");
      std::ofstream(dir / ("inter_learned_" + name + ".svg"))
          << inter_heatmap_svg(tensor, n, ids, "Learned inter-frame knowledge (" + name + ")");
    }
    summary["runs"].push_back(std::move(run));
  }
  if (!rows.empty()) {
    std::ofstream(dir / "metrics_f1.md") << metrics_table_markdown(rows, false);
    std::ofstream(dir / "metrics_acc.md") << metrics_table_markdown(rows, true);
    std::ofstream(dir / "metrics.csv") << metrics_table_csv(rows);
    std::cout << metrics_table_markdown(rows, false);
  }
  write_json_file(dir / "report.json", summary);
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"auvmae: knowledge-guided AU detection with a toy masked video autoencoder"};
  app.require_subcommand(1);
  Options o;

  auto add_seed = [&](CLI::App* sub) {
    return sub->add_option("--seed", o.seed, "Master seed; every random stream is derived from it");
  };

  auto* synth = app.add_subcommand("synth", "Sample synthetic labels from a Markov generator and render videos");
  synth->add_option("--generator", o.generator, "Generator JSON (default: built-in N=4 chain)");
  synth->add_option("--render", o.render, "Render settings JSON (default: one band per AU)");
  synth->add_option("--frames", o.frames, "Total frame budget across all clips")->capture_default_str();
  synth->add_option("--clip-length", o.clip_length, "Frames per clip")->capture_default_str();
  synth->add_option("--test-fraction", o.test_fraction, "Fraction of clips held out")->capture_default_str();
  synth->add_option("--out", o.out, "Output directory")->required();
  add_seed(synth);

  auto* estimate = app.add_subcommand("estimate-knowledge", "Estimate intra/inter-frame AU-pair priors");
  estimate->add_option("--labels", o.labels, "Label CSV")->required();
  estimate->add_option("--out", o.out, "Output priors JSON")->required();
  estimate->add_option("--smoothing", o.smoothing, "Pseudo-count per state")->capture_default_str();
  add_seed(estimate);

  auto* pre = app.add_subcommand("pretrain", "Masked video reconstruction pretraining");
  pre->add_option("--videos", o.videos, "Video container(s)")->required();
  pre->add_option("--level", o.level, "Target finetuning level; sets the temporal downsample rate")
      ->check(CLI::IsMember({"video", "frame", "patch"}));
  pre->add_option("--downsample-rate", o.downsample_rate, "Temporal downsample rate override");
  pre->add_option("--mask-ratio", o.mask_ratio, "Tube mask ratio (default 0.9)");
  pre->add_option("--steps", o.steps, "Optimizer steps");
  pre->add_option("--batch-size", o.batch_size, "Clips per step");
  pre->add_option("--config", o.config, "Model config JSON");
  pre->add_option("--out", o.out, "Output checkpoint")->required();
  pre->add_option("--log", o.log, "Training log (JSON lines); default <out>.log.jsonl");
  add_seed(pre);

  auto* fine = app.add_subcommand("finetune", "Finetune AU classification at one subtask level");
  fine->add_option("--labels", o.labels, "Training label CSV")->required();
  fine->add_option("--videos", o.videos, "Training video container(s)")->required();
  fine->add_option("--priors", o.priors, "Priors JSON from estimate-knowledge")->required();
  fine->add_option("--checkpoint", o.checkpoint, "Pretrained checkpoint")->required();
  fine->add_option("--level", o.level, "Subtask level")->check(CLI::IsMember({"video", "frame", "patch"}));
  fine->add_option("--mask-ratio", o.mask_ratio, "Patch-level tube mask ratio (default 0.5)");
  fine->add_option("--downsample-rate", o.downsample_rate, "Frame-level downsample rate (default 4)");
  fine->add_option("--lambda-intra", o.lambda_intra, "Weight of the intra-frame knowledge loss (default 0.01)");
  fine->add_option("--lambda-inter", o.lambda_inter, "Weight of the inter-frame knowledge loss (default 0.01)");
  fine->add_option("--steps", o.steps, "Optimizer steps");
  fine->add_option("--batch-size", o.batch_size, "Clips per step");
  fine->add_option("--config", o.config, "Model config JSON (default: the checkpoint's)");
  fine->add_option("--out", o.out, "Output checkpoint")->required();
  fine->add_option("--log", o.log, "Training log (JSON lines); default <out>.log.jsonl");
  add_seed(fine);

  auto* pred = app.add_subcommand("predict", "Per-frame AU probabilities for every clip");
  pred->add_option("--checkpoint", o.checkpoint, "Finetuned checkpoint")->required();
  pred->add_option("--videos", o.videos, "Video container(s)")->required();
  pred->add_option("--labels", o.labels, "Label CSV used only to record AU ids");
  pred->add_option("--level", o.level, "Input level (default: the checkpoint's)")
      ->check(CLI::IsMember({"video", "frame", "patch"}));
  pred->add_option("--out", o.out, "Output predictions JSON")->required();
  add_seed(pred);

  auto* ev = app.add_subcommand("eval", "F1/accuracy and knowledge divergence");
  ev->add_option("--labels", o.labels, "Ground-truth label CSV")->required();
  ev->add_option("--predictions", o.predictions, "Predictions JSON from predict");
  ev->add_option("--checkpoint", o.checkpoint, "Finetuned checkpoint (instead of --predictions)");
  ev->add_option("--videos", o.videos, "Video container(s) (with --checkpoint)");
  ev->add_option("--level", o.level, "Input level (with --checkpoint)")->check(CLI::IsMember({"video", "frame", "patch"}));
  ev->add_option("--priors", o.priors, "Priors JSON; adds learned-vs-prior knowledge divergence");
  ev->add_option("--csv", o.csv, "Optional per-AU CSV export");
  ev->add_option("--out", o.out, "Output metrics JSON")->required();
  add_seed(ev);

  auto* aug = app.add_subcommand("augment", "Minority-AU clip interception with flip/crop");
  aug->add_option("--labels", o.labels, "Label CSV")->required();
  aug->add_option("--videos", o.videos, "Video container(s)")->required();
  aug->add_option("--plan", o.plan, "Augment plan JSON")->required();
  aug->add_option("--out", o.out, "Output directory")->required();
  auto* aug_seed = add_seed(aug);

  auto* rep = app.add_subcommand("report", "Knowledge heatmaps and per-AU metric tables");
  rep->add_option("--metrics", o.metrics, "Metrics JSON files, optionally name=path");
  rep->add_option("--priors", o.priors, "Priors JSON");
  rep->add_option("--out", o.out, "Output directory")->required();
  add_seed(rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    apply_thread_cap();
    if (*synth) return cmd_synth(o);
    if (*estimate) return cmd_estimate(o);
    if (*pre) return cmd_pretrain(o);
    if (*fine) return cmd_finetune(o);
    if (*pred) return cmd_predict(o);
    if (*ev) return cmd_eval(o);
    if (*aug) return cmd_augment(o, aug_seed->count() > 0);
    if (*rep) return cmd_report(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace auvmae::cli
