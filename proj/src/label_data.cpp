#include "auvmae/label_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "auvmae/rng.hpp"

namespace auvmae {

void LabelSequence::validate() const {
  const std::string where = "label sequence '" + clip_id + "': ";
  if (au_count() < 2) throw DataError(where + "needs at least 2 AUs");
  if (length() < 2) throw DataError(where + "needs at least 2 frames");
  if (static_cast<int>(au_ids.size()) != au_count())
    throw DataError(where + "au_ids length does not match label columns");
  for (std::size_t i = 1; i < au_ids.size(); ++i)
    if (au_ids[i] <= au_ids[i - 1]) throw DataError(where + "au_ids must be unique and ascending");
  for (Eigen::Index t = 0; t < frames.rows(); ++t)
    for (Eigen::Index i = 0; i < frames.cols(); ++i)
      if (frames(t, i) > 1) throw DataError(where + "non-binary label");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_int(const std::string& s, long long& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !s.empty();
}

}  // namespace

LabelDataset parse_label_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<int> au_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "clip_id" || header[1] != "frame")
      throw DataError("line " + std::to_string(line_no) +
                      ": header must be 'clip_id,frame,au_<id>,...'");
    for (std::size_t k = 2; k < header.size(); ++k) {
      long long id = 0;
      if (header[k].rfind("au_", 0) != 0 || !parse_int(header[k].substr(3), id))
        throw DataError("line " + std::to_string(line_no) + ": bad AU column '" + header[k] + "'");
      au_ids.push_back(static_cast<int>(id));
    }
    break;
  }
  if (au_ids.empty()) throw DataError("label file is empty");
  for (std::size_t i = 1; i < au_ids.size(); ++i)
    if (au_ids[i] <= au_ids[i - 1])
      throw DataError("line " + std::to_string(line_no) + ": AU columns must be unique and ascending");

  const std::size_t n = au_ids.size();
  std::vector<std::string> order;
  std::map<std::string, std::map<long long, std::vector<std::uint8_t>>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (cells.size() != n + 2)
      throw DataError(where + "expected " + std::to_string(n + 2) + " cells, got " +
                      std::to_string(cells.size()));
    if (cells[0].empty()) throw DataError(where + "empty clip_id");
    long long frame = 0;
    if (!parse_int(cells[1], frame) || frame < 0)
      throw DataError(where + "frame must be a non-negative integer");
    std::vector<std::uint8_t> labels(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (cells[k + 2] == "0") labels[k] = 0;
      else if (cells[k + 2] == "1") labels[k] = 1;
      else throw DataError(where + "label value '" + cells[k + 2] + "' is not 0 or 1");
    }
    auto [clip_it, fresh] = rows.try_emplace(cells[0]);
    if (fresh) order.push_back(cells[0]);
    if (!clip_it->second.emplace(frame, std::move(labels)).second)
      throw DataError(where + "duplicate frame " + std::to_string(frame) + " for clip '" +
                      cells[0] + "'");
  }

  LabelDataset dataset;
  for (const auto& id : order) {
    const auto& frames = rows.at(id);
    LabelSequence seq;
    seq.clip_id = id;
    seq.au_ids = au_ids;
    seq.frames.resize(static_cast<Eigen::Index>(frames.size()), static_cast<Eigen::Index>(n));
    long long expected = 0;
    for (const auto& [frame, labels] : frames) {
      if (frame != expected)
        throw DataError("clip '" + id + "': frames must be contiguous from 0, missing frame " +
                        std::to_string(expected));
      for (std::size_t k = 0; k < n; ++k) seq.frames(frame, static_cast<Eigen::Index>(k)) = labels[k];
      ++expected;
    }
    dataset.push_back(std::move(seq));
  }
  return dataset;
}

LabelDataset load_label_sequences(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open label file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_label_csv(buffer.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string format_label_csv(const LabelDataset& dataset) {
  if (dataset.empty()) throw DataError("cannot write an empty label dataset");
  const auto& ids = shared_au_ids(dataset);
  std::ostringstream out;
  out << "clip_id,frame";
  for (int id : ids) out << ",au_" << id;
  out << '\n';
  for (const auto& seq : dataset) {
    for (int t = 0; t < seq.length(); ++t) {
      out << seq.clip_id << ',' << t;
      for (int i = 0; i < seq.au_count(); ++i) out << ',' << static_cast<int>(seq.frames(t, i));
      out << '\n';
    }
  }
  return out.str();
}

void save_label_sequences(const LabelDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write label file " + path.string());
  out << format_label_csv(dataset);
}

const std::vector<int>& shared_au_ids(const LabelDataset& dataset) {
  if (dataset.empty()) throw DataError("empty label dataset");
  for (const auto& seq : dataset)
    if (seq.au_ids != dataset.front().au_ids)
      throw DataError("clip '" + seq.clip_id + "' has different AU ids than '" +
                      dataset.front().clip_id + "'");
  return dataset.front().au_ids;
}

RateVector occurrence_rates(const LabelDataset& dataset) {
  RateVector out;
  out.au_ids = shared_au_ids(dataset);
  const auto n = static_cast<Eigen::Index>(out.au_ids.size());
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> positives =
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>::Zero(n);
  for (const auto& seq : dataset) {
    positives += seq.frames.cast<std::int64_t>().colwise().sum().transpose();
    out.total_frames += seq.length();
  }
  if (out.total_frames < 1) throw DataError("occurrence_rates: no frames");
  out.rates = positives.cast<double>() / static_cast<double>(out.total_frames);
  return out;
}

WeightVector class_weights(const RateVector& rates) {
  const auto n = rates.rates.size();
  if (n == 0) throw DataError("class_weights: empty rate vector");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(rates.rates[i] > 0.0)) {
      const std::string id = i < static_cast<Eigen::Index>(rates.au_ids.size())
                                 ? std::to_string(rates.au_ids[i])
                                 : std::to_string(i);
      throw DataError("class_weights: AU " + id +
                      " never occurs; drop it before computing weights");
    }
  const Vector inverse = rates.rates.cwiseInverse();
  WeightVector w;
  w.weights = static_cast<double>(n) * inverse / inverse.sum();
  return w;
}

void AugmentPlan::validate(const std::vector<int>& au_ids) const {
  if (minority_aus.empty()) throw UsageError("augment plan: minority_aus must be nonempty");
  std::set<int> unique(minority_aus.begin(), minority_aus.end());
  if (unique.size() != minority_aus.size())
    throw UsageError("augment plan: minority_aus has duplicates");
  if (unique.size() >= au_ids.size())
    throw UsageError("augment plan: minority_aus must be a strict subset of the AU ids");
  for (int id : minority_aus)
    if (std::find(au_ids.begin(), au_ids.end(), id) == au_ids.end())
      throw UsageError("augment plan: unknown minority AU " + std::to_string(id));
  if (majority_run_threshold < 1) throw UsageError("augment plan: threshold must be >= 1");
  if (!(crop_min_fraction > 0.0 && crop_min_fraction <= 1.0))
    throw UsageError("augment plan: crop_min_fraction must lie in (0, 1]");
}

std::vector<FrameSpan> minority_subclips(const LabelSequence& labels,
                                         const std::vector<int>& minority_columns,
                                         int threshold) {
  auto minority_active = [&](int t) {
    for (int col : minority_columns)
      if (labels.frames(t, col)) return true;
    return false;
  };
  std::vector<FrameSpan> spans;
  const int length = labels.length();
  int t = 0;
  while (t < length) {
    if (!minority_active(t)) {
      ++t;
      continue;
    }
    const int begin = t;
    int quiet = 0;
    int end = length;
    for (++t; t < length; ++t) {
      quiet = minority_active(t) ? 0 : quiet + 1;
      if (quiet == threshold) {
        end = t + 1;
        ++t;
        break;
      }
    }
    if (end - begin >= 2) spans.push_back({begin, end});
  }
  return spans;
}

VideoClip flip_crop(const VideoClip& video, bool flip, double crop_fraction, double offset_y,
                    double offset_x) {
  const int crop_h = std::max(1, static_cast<int>(std::lround(crop_fraction * video.height)));
  const int crop_w = std::max(1, static_cast<int>(std::lround(crop_fraction * video.width)));
  const double y0 = offset_y * (video.height - crop_h);
  const double x0 = offset_x * (video.width - crop_w);
  VideoClip out = video;
  auto sample = [&](int t, double y, double x, int c) {
    y = std::clamp(y, 0.0, video.height - 1.0);
    x = std::clamp(x, 0.0, video.width - 1.0);
    const int yi = std::min(static_cast<int>(y), video.height - 1);
    const int xi = std::min(static_cast<int>(x), video.width - 1);
    const int yj = std::min(yi + 1, video.height - 1);
    const int xj = std::min(xi + 1, video.width - 1);
    const double fy = y - yi, fx = x - xi;
    return (1 - fy) * ((1 - fx) * video.at(t, yi, xi, c) + fx * video.at(t, yi, xj, c)) +
           fy * ((1 - fx) * video.at(t, yj, xi, c) + fx * video.at(t, yj, xj, c));
  };
  // Pixel centers of the output map linearly onto the crop window.
  const double sy = static_cast<double>(crop_h) / video.height;
  const double sx = static_cast<double>(crop_w) / video.width;
  for (int t = 0; t < video.frames; ++t)
    for (int y = 0; y < video.height; ++y)
      for (int x = 0; x < video.width; ++x) {
        const int src_x = flip ? video.width - 1 - x : x;
        const double cy = y0 + (y + 0.5) * sy - 0.5;
        const double cx = x0 + (src_x + 0.5) * sx - 0.5;
        for (int c = 0; c < video.channels; ++c) out.at(t, y, x, c) = sample(t, cy, cx, c);
      }
  return out;
}

std::vector<LabeledClip> augment_dataset(const std::vector<LabeledClip>& dataset,
                                         const AugmentPlan& plan) {
  std::vector<LabeledClip> out = dataset;
  if (dataset.empty()) return out;
  const auto& au_ids = dataset.front().labels.au_ids;
  plan.validate(au_ids);
  std::vector<int> columns;
  for (int id : plan.minority_aus)
    columns.push_back(static_cast<int>(std::find(au_ids.begin(), au_ids.end(), id) - au_ids.begin()));

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> fraction(plan.crop_min_fraction, 1.0);
  for (std::size_t k = 0; k < dataset.size(); ++k) {
    const auto& [video, labels] = dataset[k];
    if (labels.au_ids != au_ids)
      throw DataError("augment_dataset: clip '" + labels.clip_id + "' has different AU ids");
    if (video.frames != labels.length())
      throw DataError("augment_dataset: clip '" + labels.clip_id + "' has " +
                      std::to_string(video.frames) + " video frames but " +
                      std::to_string(labels.length()) + " label frames");
    const auto spans = minority_subclips(labels, columns, plan.majority_run_threshold);
    for (std::size_t s = 0; s < spans.size(); ++s) {
      const FrameSpan span = spans[s];
      Rng rng = make_rng(plan.seed, "augment/" + labels.clip_id, s);
      const std::string id = labels.clip_id + "_aug" + std::to_string(s);

      VideoClip sub(id, span.length(), video.height, video.width, video.channels);
      sub.frame_rate = video.frame_rate;
      const std::size_t fs = video.frame_size();
      std::copy_n(video.pixels.begin() + static_cast<std::ptrdiff_t>(span.begin * fs),
                  span.length() * fs, sub.pixels.begin());
      const bool flip = unit(rng) < 0.5;
      const double crop = fraction(rng);
      const double oy = unit(rng), ox = unit(rng);
      LabeledClip aug{flip_crop(sub, flip, crop, oy, ox), {}};
      aug.video.clip_id = id;
      aug.labels.clip_id = id;
      aug.labels.au_ids = au_ids;
      aug.labels.frames = labels.frames.middleRows(span.begin, span.length());
      out.push_back(std::move(aug));
    }
  }
  return out;
}

}  // namespace auvmae
