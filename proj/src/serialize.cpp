#include "auvmae/serialize.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace auvmae {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Json nullable(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

double from_nullable(const Json& v) { return v.is_null() ? kNaN : v.get<double>(); }

template <typename T>
T require(const Json& doc, const char* key) {
  if (!doc.contains(key)) throw DataError(std::string("missing key '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("key '") + key + "': " + e.what());
  }
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(nullable(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& rows, const char* what) {
  if (!rows.is_array() || rows.empty()) throw DataError(std::string(what) + " must be a nonempty array");
  const std::size_t cols = rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != cols)
      throw DataError(std::string(what) + " is not rectangular");
    for (std::size_t c = 0; c < cols; ++c) {
      const Json& v = rows[r][c];
      if (!v.is_null() && !v.is_number()) throw DataError(std::string(what) + " has a non-numeric entry");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = from_nullable(v);
    }
  }
  return m;
}

// Little-endian byte stream helpers.
class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  template <typename T>
  void le(T value) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    U u = static_cast<U>(value);
    for (std::size_t k = 0; k < sizeof(T); ++k) out_.push_back(static_cast<std::uint8_t>(u >> (8 * k)));
  }
  void f64(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    le(u);
  }
  void f32(float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    le(u);
  }
  void str(const std::string& s) {
    le(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& in, const char* what) : in_(in), what_(what) {}
  void need(std::size_t n) {
    if (pos_ + n > in_.size()) throw DataError(std::string(what_) + ": truncated file");
  }
  template <typename T>
  T le() {
    need(sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k)
      u |= static_cast<std::make_unsigned_t<T>>(in_[pos_ + k]) << (8 * k);
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  double f64() {
    const auto u = le<std::uint64_t>();
    double v;
    std::memcpy(&v, &u, 8);
    return v;
  }
  float f32() {
    const auto u = le<std::uint32_t>();
    float v;
    std::memcpy(&v, &u, 4);
    return v;
  }
  std::string str() {
    const auto n = le<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::string fixed(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::vector<std::uint8_t>& in_;
  const char* what_;
  std::size_t pos_ = 0;
};

}  // namespace

Json knowledge_to_json(const IntraKnowledge& intra, const InterKnowledge& inter) {
  const int n = intra.size();
  Json support = Json::array();
  for (int i = 0; i < n; ++i) {
    Json row = Json::array();
    for (int j = 0; j < n; ++j) row.push_back(intra.support(i, j));
    support.push_back(std::move(row));
  }
  Json k_inter = Json::array();
  for (int i = 0; i < n; ++i) {
    Json row = Json::array();
    for (int j = 0; j < n; ++j) {
      Json cell = Json::array();
      for (int s = 0; s < 16; ++s) cell.push_back(inter.defined(i, j) ? nullable(inter.at(i, j, s)) : Json(nullptr));
      row.push_back(std::move(cell));
    }
    k_inter.push_back(std::move(row));
  }
  Json doc;
  doc["au_ids"] = intra.au_ids;
  doc["k_intra"] = matrix_to_json(intra.matrix);
  doc["k_intra_support"] = std::move(support);
  doc["k_inter"] = std::move(k_inter);
  return doc;
}

std::pair<IntraKnowledge, InterKnowledge> knowledge_from_json(const Json& doc) {
  if (const std::string problem = check_knowledge_json(doc); !problem.empty())
    throw DataError("knowledge file: " + problem);
  IntraKnowledge intra;
  intra.au_ids = doc["au_ids"].get<std::vector<int>>();
  const int n = static_cast<int>(intra.au_ids.size());
  intra.matrix = matrix_from_json(doc["k_intra"], "k_intra");
  intra.support.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) intra.support(i, j) = doc["k_intra_support"][i][j].get<std::int64_t>();
  InterKnowledge inter;
  inter.au_ids = intra.au_ids;
  inter.n = n;
  inter.tensor.assign(static_cast<std::size_t>(n) * n * 16, kNaN);
  inter.support = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Json& cell = doc["k_inter"][i][j];
      if (cell[0].is_null()) continue;
      inter.support(i, j) = 1;
      for (int s = 0; s < 16; ++s) inter.at(i, j, s) = cell[s].get<double>();
    }
  return {std::move(intra), std::move(inter)};
}

std::string check_knowledge_json(const Json& doc) {
  if (!doc.is_object()) return "document is not an object";
  for (const char* key : {"au_ids", "k_intra", "k_intra_support", "k_inter"})
    if (!doc.contains(key)) return std::string("missing key '") + key + "'";
  if (!doc["au_ids"].is_array()) return "au_ids must be an array";
  const std::size_t n = doc["au_ids"].size();
  if (n < 2) return "need at least 2 AUs";
  const Json& k = doc["k_intra"];
  const Json& sup = doc["k_intra_support"];
  const Json& inter = doc["k_inter"];
  if (!k.is_array() || k.size() != n || !sup.is_array() || sup.size() != n || !inter.is_array() ||
      inter.size() != n)
    return "matrices must have one row per AU";
  for (std::size_t i = 0; i < n; ++i) {
    if (!k[i].is_array() || k[i].size() != n || !sup[i].is_array() || sup[i].size() != n ||
        !inter[i].is_array() || inter[i].size() != n)
      return "matrices must be N x N";
    for (std::size_t j = 0; j < n; ++j) {
      if (!sup[i][j].is_number_integer() || sup[i][j].get<std::int64_t>() < 0)
        return "k_intra_support entries must be non-negative integers";
      const bool supported = sup[i][j].get<std::int64_t>() > 0;
      if (supported && !k[i][j].is_number()) return "k_intra must be numeric where support is positive";
      if (!k[i][j].is_null() && !k[i][j].is_number()) return "k_intra entries must be numbers or null";
      if (k[i][j].is_number()) {
        const double v = k[i][j].get<double>();
        if (v < 0 || v > 1) return "k_intra entry outside [0, 1]";
        if (!k[j][i].is_number() || std::abs(k[j][i].get<double>() - v) > 1e-12) return "k_intra is not symmetric";
        if (i == j && std::abs(v - 1.0) > 1e-12) return "k_intra diagonal must be 1 where defined";
      }
      const Json& cell = inter[i][j];
      if (!cell.is_array() || cell.size() != 16) return "k_inter cells must hold 16 states";
      if (cell[0].is_null()) {
        for (const auto& v : cell)
          if (!v.is_null()) return "k_inter cell mixes null and numbers";
        continue;
      }
      double sum = 0;
      for (const auto& v : cell) {
        if (!v.is_number()) return "k_inter cell mixes null and numbers";
        const double x = v.get<double>();
        if (x < 0 || x > 1) return "k_inter entry outside [0, 1]";
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-9) return "k_inter cell does not sum to 1";
    }
  }
  return {};
}

Json augment_plan_to_json(const AugmentPlan& plan) {
  return Json{{"minority_aus", plan.minority_aus},
              {"majority_run_threshold", plan.majority_run_threshold},
              {"seed", plan.seed},
              {"crop_min_fraction", plan.crop_min_fraction}};
}

AugmentPlan augment_plan_from_json(const Json& doc) {
  AugmentPlan plan;
  plan.minority_aus = require<std::vector<int>>(doc, "minority_aus");
  plan.majority_run_threshold = doc.value("majority_run_threshold", 15);
  plan.seed = doc.value("seed", std::uint64_t{0});
  plan.crop_min_fraction = doc.value("crop_min_fraction", 0.8);
  return plan;
}

Json generator_spec_to_json(const GeneratorSpec& cfg) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < cfg.joint_transition.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < cfg.joint_transition.cols(); ++c) row.push_back(cfg.joint_transition(r, c));
    rows.push_back(std::move(row));
  }
  return Json{{"au_ids", cfg.au_ids},
              {"joint_transition", std::move(rows)},
              {"initial", std::vector<double>(cfg.initial.data(), cfg.initial.data() + cfg.initial.size())},
              {"seed", cfg.seed}};
}

GeneratorSpec generator_spec_from_json(const Json& doc) {
  GeneratorSpec cfg;
  cfg.au_ids = require<std::vector<int>>(doc, "au_ids");
  cfg.joint_transition = matrix_from_json(doc.at("joint_transition"), "joint_transition");
  const auto initial = require<std::vector<double>>(doc, "initial");
  cfg.initial = Eigen::Map<const Vector>(initial.data(), static_cast<Eigen::Index>(initial.size()));
  cfg.seed = doc.value("seed", std::uint64_t{0});
  cfg.validate();
  return cfg;
}

Json render_spec_to_json(const RenderSpec& cfg) {
  Json regions = Json::array();
  for (const Region& r : cfg.regions)
    regions.push_back(Json{{"y0", r.y0}, {"x0", r.x0}, {"height", r.height}, {"width", r.width}});
  return Json{{"height", cfg.height},          {"width", cfg.width},
              {"channels", cfg.channels},      {"regions", std::move(regions)},
              {"on_intensity", cfg.on_intensity}, {"off_intensity", cfg.off_intensity},
              {"noise_sigma", cfg.noise_sigma}};
}

RenderSpec render_spec_from_json(const Json& doc) {
  RenderSpec cfg;
  cfg.height = require<int>(doc, "height");
  cfg.width = require<int>(doc, "width");
  cfg.channels = doc.value("channels", 1);
  for (const Json& r : doc.at("regions"))
    cfg.regions.push_back(Region{require<int>(r, "y0"), require<int>(r, "x0"), require<int>(r, "height"),
                                  require<int>(r, "width")});
  cfg.on_intensity = require<std::vector<double>>(doc, "on_intensity");
  cfg.off_intensity = require<std::vector<double>>(doc, "off_intensity");
  cfg.noise_sigma = doc.value("noise_sigma", 0.0);
  return cfg;
}

Json model_config_to_json(const ModelConfig& c) {
  return Json{{"frames", c.frames},
              {"height", c.height},
              {"width", c.width},
              {"channels", c.channels},
              {"tubelet_temporal", c.tubelet.temporal},
              {"tubelet_spatial", c.tubelet.spatial},
              {"embed_dim", c.embed_dim},
              {"encoder_depth", c.encoder_depth},
              {"decoder_depth", c.decoder_depth},
              {"heads", c.heads},
              {"mlp_ratio", c.mlp_ratio},
              {"au_count", c.au_count},
              {"frame_downsample_rate", c.frame_downsample_rate},
              {"pretrain_mask_ratio", c.pretrain_mask_ratio},
              {"patch_mask_ratio", c.patch_mask_ratio},
              {"learning_rate", c.learning_rate},
              {"adam_beta1", c.adam_beta1},
              {"adam_beta2", c.adam_beta2},
              {"adam_epsilon", c.adam_epsilon},
              {"batch_size", c.batch_size},
              {"pretrain_steps", c.pretrain_steps},
              {"finetune_steps", c.finetune_steps},
              {"lambda_cls", c.loss_weights.cls},
              {"lambda_intra", c.loss_weights.intra},
              {"lambda_inter", c.loss_weights.inter},
              {"seed", c.seed}};
}

ModelConfig model_config_from_json(const Json& doc, ModelConfig c) {
  if (!doc.is_object()) throw DataError("model config must be a JSON object");
  static const std::set<std::string> known{
      "frames", "height", "width", "channels", "tubelet_temporal", "tubelet_spatial", "embed_dim",
      "encoder_depth", "decoder_depth", "heads", "mlp_ratio", "au_count", "frame_downsample_rate",
      "pretrain_mask_ratio", "patch_mask_ratio", "learning_rate", "adam_beta1", "adam_beta2",
      "adam_epsilon", "batch_size", "pretrain_steps", "finetune_steps", "lambda_cls", "lambda_intra",
      "lambda_inter", "seed"};
  for (const auto& [key, value] : doc.items())
    if (!known.count(key)) throw DataError("model config: unknown key '" + key + "'");
  try {
    c.frames = doc.value("frames", c.frames);
    c.height = doc.value("height", c.height);
    c.width = doc.value("width", c.width);
    c.channels = doc.value("channels", c.channels);
    c.tubelet.temporal = doc.value("tubelet_temporal", c.tubelet.temporal);
    c.tubelet.spatial = doc.value("tubelet_spatial", c.tubelet.spatial);
    c.embed_dim = doc.value("embed_dim", c.embed_dim);
    c.encoder_depth = doc.value("encoder_depth", c.encoder_depth);
    c.decoder_depth = doc.value("decoder_depth", c.decoder_depth);
    c.heads = doc.value("heads", c.heads);
    c.mlp_ratio = doc.value("mlp_ratio", c.mlp_ratio);
    c.au_count = doc.value("au_count", c.au_count);
    c.frame_downsample_rate = doc.value("frame_downsample_rate", c.frame_downsample_rate);
    c.pretrain_mask_ratio = doc.value("pretrain_mask_ratio", c.pretrain_mask_ratio);
    c.patch_mask_ratio = doc.value("patch_mask_ratio", c.patch_mask_ratio);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.adam_beta1 = doc.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = doc.value("adam_beta2", c.adam_beta2);
    c.adam_epsilon = doc.value("adam_epsilon", c.adam_epsilon);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.pretrain_steps = doc.value("pretrain_steps", c.pretrain_steps);
    c.finetune_steps = doc.value("finetune_steps", c.finetune_steps);
    c.loss_weights.cls = doc.value("lambda_cls", c.loss_weights.cls);
    c.loss_weights.intra = doc.value("lambda_intra", c.loss_weights.intra);
    c.loss_weights.inter = doc.value("lambda_inter", c.loss_weights.inter);
    c.seed = doc.value("seed", c.seed);
  } catch (const Json::exception& e) {
    throw DataError(std::string("model config: ") + e.what());
  }
  return c;
}

Json loss_report_to_json(const LossReport& r) {
  Json doc{{"step", r.step}, {"total", r.total}, {"cls", r.cls}, {"intra", r.intra}, {"inter", r.inter}};
  if (r.recon) doc["recon"] = *r.recon;
  return doc;
}

std::string check_log_line(const Json& doc) {
  if (!doc.is_object()) return "log line is not an object";
  if (!doc.contains("step") || !doc["step"].is_number_integer()) return "missing integer 'step'";
  for (const char* key : {"total", "cls", "intra", "inter"})
    if (!doc.contains(key) || !doc[key].is_number()) return std::string("missing numeric '") + key + "'";
  return {};
}

Json metric_report_to_json(const MetricReport& r) {
  Json counts = Json::array();
  for (std::size_t i = 0; i < r.counts.size(); ++i)
    counts.push_back(Json{{"au", r.au_ids[i]},
                          {"tp", r.counts[i].tp},
                          {"fp", r.counts[i].fp},
                          {"fn", r.counts[i].fn},
                          {"tn", r.counts[i].tn}});
  return Json{{"au_ids", r.au_ids},
              {"per_au_f1", std::vector<double>(r.per_au_f1.data(), r.per_au_f1.data() + r.per_au_f1.size())},
              {"avg_f1", r.avg_f1},
              {"per_au_acc", std::vector<double>(r.per_au_acc.data(), r.per_au_acc.data() + r.per_au_acc.size())},
              {"avg_acc", r.avg_acc},
              {"counts", std::move(counts)}};
}

MetricReport metric_report_from_json(const Json& doc) {
  if (const std::string problem = check_metrics_json(doc); !problem.empty())
    throw DataError("metrics file: " + problem);
  MetricReport r;
  r.au_ids = doc["au_ids"].get<std::vector<int>>();
  const auto f1 = doc["per_au_f1"].get<std::vector<double>>();
  const auto acc = doc["per_au_acc"].get<std::vector<double>>();
  r.per_au_f1 = Eigen::Map<const Vector>(f1.data(), static_cast<Eigen::Index>(f1.size()));
  r.per_au_acc = Eigen::Map<const Vector>(acc.data(), static_cast<Eigen::Index>(acc.size()));
  r.avg_f1 = doc["avg_f1"].get<double>();
  r.avg_acc = doc["avg_acc"].get<double>();
  for (const auto& c : doc["counts"])
    r.counts.push_back({c["tp"].get<std::int64_t>(), c["fp"].get<std::int64_t>(), c["fn"].get<std::int64_t>(),
                        c["tn"].get<std::int64_t>()});
  return r;
}

std::string check_metrics_json(const Json& doc) {
  if (!doc.is_object()) return "document is not an object";
  for (const char* key : {"au_ids", "per_au_f1", "avg_f1", "per_au_acc", "avg_acc", "counts"})
    if (!doc.contains(key)) return std::string("missing key '") + key + "'";
  const std::size_t n = doc["au_ids"].size();
  if (n == 0) return "au_ids is empty";
  if (doc["per_au_f1"].size() != n || doc["per_au_acc"].size() != n || doc["counts"].size() != n)
    return "per-AU arrays must have one entry per AU";
  double f1_sum = 0, acc_sum = 0;
  std::int64_t total = -1;
  for (std::size_t i = 0; i < n; ++i) {
    const double f1 = doc["per_au_f1"][i].get<double>();
    const double acc = doc["per_au_acc"][i].get<double>();
    if (f1 < 0 || f1 > 1 || acc < 0 || acc > 1) return "F1/ACC outside [0, 1]";
    f1_sum += f1;
    acc_sum += acc;
    const Json& c = doc["counts"][i];
    for (const char* key : {"tp", "fp", "fn", "tn"})
      if (!c.contains(key) || !c[key].is_number_integer() || c[key].get<std::int64_t>() < 0)
        return "counts must hold non-negative integers tp/fp/fn/tn";
    const std::int64_t sum = c["tp"].get<std::int64_t>() + c["fp"].get<std::int64_t>() +
                             c["fn"].get<std::int64_t>() + c["tn"].get<std::int64_t>();
    if (total >= 0 && sum != total) return "counts do not sum to the same frame total per AU";
    total = sum;
  }
  if (std::abs(f1_sum / n - doc["avg_f1"].get<double>()) > 1e-12) return "avg_f1 is not the mean of per_au_f1";
  if (std::abs(acc_sum / n - doc["avg_acc"].get<double>()) > 1e-12) return "avg_acc is not the mean of per_au_acc";
  return {};
}

std::string metric_report_to_csv(const MetricReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "au,f1,acc,tp,fp,fn,tn\n";
  for (std::size_t i = 0; i < r.au_ids.size(); ++i) {
    const auto& c = r.counts[i];
    out << r.au_ids[i] << ',' << r.per_au_f1[static_cast<Eigen::Index>(i)] << ','
        << r.per_au_acc[static_cast<Eigen::Index>(i)] << ',' << c.tp << ',' << c.fp << ',' << c.fn << ','
        << c.tn << '\n';
  }
  out << "avg," << r.avg_f1 << ',' << r.avg_acc << ",,,,\n";
  return out.str();
}

Json divergence_to_json(const KnowledgeDivergence& d) {
  const int n = static_cast<int>(d.prior_intra.rows());
  Json learned_inter = Json::array();
  for (int i = 0; i < n; ++i) {
    Json row = Json::array();
    for (int j = 0; j < n; ++j) {
      Json cell = Json::array();
      for (int s = 0; s < 16; ++s) cell.push_back(d.learned_inter.at(i, j, s));
      row.push_back(std::move(cell));
    }
    learned_inter.push_back(std::move(row));
  }
  return Json{{"intra", d.intra},
              {"inter", d.inter},
              {"prior_intra", matrix_to_json(d.prior_intra)},
              {"learned_intra", matrix_to_json(d.learned_intra)},
              {"learned_inter", std::move(learned_inter)}};
}

Json predictions_to_json(const std::vector<ClipPredictions>& preds, const std::vector<int>& au_ids,
                         Level level, std::uint64_t seed) {
  Json clips = Json::array();
  for (const auto& p : preds) clips.push_back(Json{{"clip_id", p.clip_id}, {"probs", matrix_to_json(p.probs)}});
  return Json{{"au_ids", au_ids}, {"level", to_string(level)}, {"seed", seed}, {"clips", std::move(clips)}};
}

std::vector<ClipPredictions> predictions_from_json(const Json& doc) {
  if (const std::string problem = check_predictions_json(doc); !problem.empty())
    throw DataError("predictions file: " + problem);
  std::vector<ClipPredictions> out;
  for (const auto& c : doc["clips"])
    out.push_back({c["clip_id"].get<std::string>(), matrix_from_json(c["probs"], "probs")});
  return out;
}

std::string check_predictions_json(const Json& doc) {
  if (!doc.is_object()) return "document is not an object";
  for (const char* key : {"au_ids", "level", "clips"})
    if (!doc.contains(key)) return std::string("missing key '") + key + "'";
  const std::size_t n = doc["au_ids"].size();
  for (const auto& c : doc["clips"]) {
    if (!c.contains("clip_id") || !c.contains("probs")) return "clip entries need clip_id and probs";
    for (const auto& row : c["probs"]) {
      if (row.size() != n) return "prediction rows must have one entry per AU";
      for (const auto& v : row)
        if (!v.is_number() || v.get<double>() < 0 || v.get<double>() > 1) return "probabilities must lie in [0, 1]";
    }
  }
  return {};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes("AUVMCKPT", 8);
  w.le(std::uint32_t{1});
  w.le(static_cast<std::int64_t>(ckpt.step));
  const Json header{{"model", model_config_to_json(ckpt.config)},
                    {"stage", ckpt.stage},
                    {"level", to_string(ckpt.level)},
                    {"downsample_rate", ckpt.downsample_rate}};
  w.str(header.dump());
  w.le(static_cast<std::uint32_t>(ckpt.params.size()));
  for (const auto& [name, m] : ckpt.params) {
    w.str(name);
    w.le(std::uint8_t{1});
    w.le(std::uint32_t{2});
    w.le(static_cast<std::uint64_t>(m.rows()));
    w.le(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
  }
  return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes, "checkpoint");
  if (r.fixed(8) != "AUVMCKPT") throw DataError("checkpoint: bad magic");
  if (const auto version = r.le<std::uint32_t>(); version != 1)
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.step = r.le<std::int64_t>();
  Json header;
  try {
    header = Json::parse(r.str());
  } catch (const Json::exception& e) {
    throw DataError(std::string("checkpoint header: ") + e.what());
  }
  ckpt.config = model_config_from_json(header.at("model"));
  ckpt.stage = require<std::string>(header, "stage");
  ckpt.level = parse_level(require<std::string>(header, "level"));
  ckpt.downsample_rate = require<int>(header, "downsample_rate");
  const auto count = r.le<std::uint32_t>();
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name = r.str();
    if (r.le<std::uint8_t>() != 1) throw DataError("checkpoint: array '" + name + "' has unknown dtype");
    if (r.le<std::uint32_t>() != 2) throw DataError("checkpoint: array '" + name + "' is not 2-D");
    const auto rows = r.le<std::uint64_t>();
    const auto cols = r.le<std::uint64_t>();
    r.need(rows * cols * 8);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64();
    ckpt.params.emplace(std::move(name), std::move(m));
  }
  if (!r.done()) throw DataError("checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_bytes(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(read_bytes(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_videos(const std::vector<VideoClip>& clips) {
  Writer w;
  w.bytes("AUVMVID1", 8);
  w.le(std::uint32_t{1});
  w.le(static_cast<std::uint32_t>(clips.size()));
  for (const auto& c : clips) {
    w.str(c.clip_id);
    w.le(static_cast<std::uint32_t>(c.frames));
    w.le(static_cast<std::uint32_t>(c.height));
    w.le(static_cast<std::uint32_t>(c.width));
    w.le(static_cast<std::uint32_t>(c.channels));
    w.f64(c.frame_rate);
    for (double px : c.pixels) w.f32(static_cast<float>(px));
  }
  return w.take();
}

std::vector<VideoClip> decode_videos(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes, "video container");
  if (r.fixed(8) != "AUVMVID1") throw DataError("video container: bad magic");
  if (const auto version = r.le<std::uint32_t>(); version != 1)
    throw DataError("video container: unsupported version " + std::to_string(version));
  const auto count = r.le<std::uint32_t>();
  std::vector<VideoClip> clips;
  clips.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string id = r.str();
    const int t = static_cast<int>(r.le<std::uint32_t>());
    const int h = static_cast<int>(r.le<std::uint32_t>());
    const int w = static_cast<int>(r.le<std::uint32_t>());
    const int c = static_cast<int>(r.le<std::uint32_t>());
    VideoClip clip(std::move(id), t, h, w, c);
    clip.frame_rate = r.f64();
    r.need(clip.pixels.size() * 4);
    for (double& px : clip.pixels) px = r.f32();
    clips.push_back(std::move(clip));
  }
  if (!r.done()) throw DataError("video container: trailing bytes");
  return clips;
}

void save_videos(const std::vector<VideoClip>& clips, const std::filesystem::path& path) {
  write_bytes(path, encode_videos(clips));
}

std::vector<VideoClip> load_videos(const std::filesystem::path& path) {
  try {
    return decode_videos(read_bytes(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace auvmae
