#include "auvmae/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "auvmae/rng.hpp"

namespace auvmae {

void GeneratorSpec::validate() const {
  const int n = au_count();
  if (n < 2 || n > 8) throw DataError("generator: N must lie in [2, 8]");
  const Eigen::Index states = Eigen::Index{1} << n;
  if (joint_transition.rows() != states || joint_transition.cols() != states)
    throw DataError("generator: joint_transition must be 2^N x 2^N");
  if (initial.size() != states) throw DataError("generator: initial must have 2^N entries");
  for (Eigen::Index s = 0; s < states; ++s) {
    if ((joint_transition.row(s).array() < 0).any())
      throw DataError("generator: negative transition probability");
    if (std::abs(joint_transition.row(s).sum() - 1.0) > 1e-12)
      throw DataError("generator: transition row " + std::to_string(s) + " does not sum to 1");
  }
  if ((initial.array() < 0).any() || std::abs(initial.sum() - 1.0) > 1e-12)
    throw DataError("generator: initial distribution does not sum to 1");
}

void RenderSpec::validate(int au_count) const {
  if (height <= 0 || width <= 0 || channels <= 0) throw DataError("render: bad frame size");
  if (static_cast<int>(regions.size()) != au_count ||
      static_cast<int>(on_intensity.size()) != au_count ||
      static_cast<int>(off_intensity.size()) != au_count)
    throw DataError("render: need one region and intensity pair per AU");
  for (const Region& r : regions)
    if (r.y0 < 0 || r.x0 < 0 || r.height <= 0 || r.width <= 0 || r.y0 + r.height > height ||
        r.x0 + r.width > width)
      throw DataError("render: region out of bounds");
  if (noise_sigma < 0) throw DataError("render: negative noise level");
}

GeneratorSpec default_generator_spec(std::uint64_t seed, const DefaultChainParams& c) {
  GeneratorSpec cfg;
  cfg.au_ids = {6, 12, 15, 17};
  cfg.seed = seed;
  const int states = 16;
  cfg.joint_transition = Matrix::Zero(states, states);
  auto bit = [](int x, int k) { return (x >> k) & 1; };
  auto sticky = [](int prev, int next, double stay, double onset) {
    const double p_on = prev ? stay : onset;
    return next ? p_on : 1.0 - p_on;
  };
  for (int x = 0; x < states; ++x)
    for (int y = 0; y < states; ++y) {
      const int a0 = bit(x, 0), a1 = bit(x, 1), a2 = bit(x, 2), a3 = bit(x, 3);
      const int b0 = bit(y, 0), b1 = bit(y, 1), b2 = bit(y, 2), b3 = bit(y, 3);
      const double p0 = sticky(a0, b0, c.stay_0, c.onset_0);
      // AU1 copies AU0's next state, otherwise keeps its own with stay_1.
      const double keep1 = b1 == a1 ? c.stay_1 : 1.0 - c.stay_1;
      const double p1 = c.coupling * (b1 == b0 ? 1.0 : 0.0) + (1.0 - c.coupling) * keep1;
      const double p2 = sticky(a2, b2, c.stay_2, c.onset_2);
      // AU3 is suppressed while AU2 is on.
      const double own3 = sticky(a3, b3, c.stay_3, c.onset_3);
      const double p3 = b2 ? c.anti_coupling * (b3 == 0 ? 1.0 : 0.0) + (1.0 - c.anti_coupling) * own3
                           : own3;
      cfg.joint_transition(x, y) = p0 * p1 * p2 * p3;
    }
  cfg.initial = stationary_distribution(cfg.joint_transition);
  return cfg;
}

RenderSpec default_render_spec(int au_count) {
  RenderSpec cfg;
  const int band = cfg.height / au_count;
  for (int k = 0; k < au_count; ++k) {
    cfg.regions.push_back(Region{k * band + 1, 4, band - 2, cfg.width - 8});
    cfg.on_intensity.push_back(0.8);
    cfg.off_intensity.push_back(0.3);
  }
  cfg.noise_sigma = 0.25;
  return cfg;
}

LabelSequence sample_sequence(const GeneratorSpec& cfg, int length, std::uint64_t seed,
                              const std::string& clip_id) {
  cfg.validate();
  if (length < 2) throw DataError("sample_sequence: need at least 2 frames");
  const int n = cfg.au_count();
  Rng rng(seed);
  auto draw = [&](const auto& probs) {
    std::discrete_distribution<int> dist(probs.data(), probs.data() + probs.size());
    return dist(rng);
  };
  std::vector<std::discrete_distribution<int>> rows;
  for (Eigen::Index s = 0; s < cfg.joint_transition.rows(); ++s) {
    const Vector row = cfg.joint_transition.row(s).transpose();
    rows.emplace_back(row.data(), row.data() + row.size());
  }
  LabelSequence seq;
  seq.clip_id = clip_id;
  seq.au_ids = cfg.au_ids;
  seq.frames.resize(length, n);
  int state = draw(cfg.initial);
  for (int t = 0; t < length; ++t) {
    if (t > 0) state = rows[state](rng);
    for (int k = 0; k < n; ++k) seq.frames(t, k) = static_cast<std::uint8_t>((state >> k) & 1);
  }
  return seq;
}

Vector stationary_distribution(const Matrix& transition) {
  const Eigen::Index states = transition.rows();
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(states, 1.0 / static_cast<double>(states));
  for (int iter = 0; iter < 100000; ++iter) {
    Eigen::RowVectorXd next = pi * transition;
    next /= next.sum();
    const double change = (next - pi).cwiseAbs().sum();
    pi = next;
    if (change < 1e-12) return pi.transpose();
  }
  throw NumericError("stationary_distribution: power iteration did not converge (non-ergodic chain?)");
}

std::pair<IntraKnowledge, InterKnowledge> analytic_knowledge(const GeneratorSpec& cfg) {
  cfg.validate();
  const int n = cfg.au_count();
  const Eigen::Index states = cfg.joint_transition.rows();
  const Vector pi = stationary_distribution(cfg.joint_transition);

  IntraKnowledge intra;
  intra.au_ids = cfg.au_ids;
  intra.matrix = Matrix::Zero(n, n);
  intra.support = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double both = 0, any = 0;
      for (Eigen::Index x = 0; x < states; ++x) {
        const int a = (x >> i) & 1, b = (x >> j) & 1;
        if (a && b) both += pi[x];
        if (a || b) any += pi[x];
      }
      // Support is a flag here: 1 where the conditioning event has mass.
      intra.support(i, j) = any > 0 ? 1 : 0;
      intra.matrix(i, j) = any > 0 ? both / any : std::numeric_limits<double>::quiet_NaN();
    }

  InterKnowledge inter;
  inter.au_ids = cfg.au_ids;
  inter.n = n;
  inter.tensor.assign(static_cast<std::size_t>(n) * n * 16, 0.0);
  inter.support = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Ones(n, n);
  for (Eigen::Index x = 0; x < states; ++x)
    for (Eigen::Index y = 0; y < states; ++y) {
      const double mass = pi[x] * cfg.joint_transition(x, y);
      if (mass == 0.0) continue;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          inter.at(i, j, transition_state((x >> i) & 1, (x >> j) & 1, (y >> i) & 1, (y >> j) & 1)) += mass;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double sum = 0;
      for (int s = 0; s < 16; ++s) sum += inter.at(i, j, s);
      for (int s = 0; s < 16; ++s) inter.at(i, j, s) /= sum;
    }
  return {std::move(intra), std::move(inter)};
}

VideoClip render_video(const LabelSequence& labels, const RenderSpec& cfg, std::uint64_t seed) {
  cfg.validate(labels.au_count());
  VideoClip clip(labels.clip_id, labels.length(), cfg.height, cfg.width, cfg.channels);
  for (int t = 0; t < labels.length(); ++t)
    for (int k = 0; k < labels.au_count(); ++k) {
      const Region& r = cfg.regions[k];
      const double v = labels.frames(t, k) ? cfg.on_intensity[k] : cfg.off_intensity[k];
      for (int y = r.y0; y < r.y0 + r.height; ++y)
        for (int x = r.x0; x < r.x0 + r.width; ++x)
          for (int c = 0; c < cfg.channels; ++c) clip.at(t, y, x, c) += v;
    }
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (double& px : clip.pixels) {
    if (cfg.noise_sigma > 0) px += cfg.noise_sigma * noise(rng);
    px = std::clamp(px, 0.0, 1.0);
  }
  return clip;
}

std::vector<LabeledClip> synthesize_dataset(const GeneratorSpec& cfg, const RenderSpec& render,
                                            int clips, int frames, std::uint64_t seed,
                                            const std::string& prefix) {
  std::vector<LabeledClip> out;
  out.reserve(static_cast<std::size_t>(clips));
  for (int k = 0; k < clips; ++k) {
    const std::string id = prefix + "_" + std::to_string(k);
    LabelSequence labels = sample_sequence(cfg, frames, derive_seed(seed, "synth/labels", k), id);
    VideoClip video = render_video(labels, render, derive_seed(seed, "synth/pixels", k));
    out.push_back({std::move(video), std::move(labels)});
  }
  return out;
}

}  // namespace auvmae
