#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "auvmae/knowledge.hpp"
#include "auvmae/label_data.hpp"
#include "auvmae/video.hpp"

namespace auvmae {

/// Joint Markov chain over the 2^N AU configurations. Joint state x has AU k
/// active iff bit k of x is set.
struct GeneratorSpec {
  std::vector<int> au_ids;
  Matrix joint_transition;  // 2^N x 2^N, row-stochastic
  Vector initial;           // length 2^N
  std::uint64_t seed = 0;

  int au_count() const { return static_cast<int>(au_ids.size()); }
  void validate() const;
};

struct Region {
  int y0 = 0, x0 = 0, height = 0, width = 0;
};

struct RenderSpec {
  int height = 32;
  int width = 32;
  int channels = 1;
  std::vector<Region> regions;  // one per AU
  std::vector<double> on_intensity;
  std::vector<double> off_intensity;
  double noise_sigma = 0.0;

  void validate(int au_count) const;
};

/// Parameters of the default verification chain, built factor by factor:
///   a0' ~ sticky(a0)             a1' follows a0' with probability `coupling`
///   a2' ~ sticky(a2)             a3' avoids a2' with probability `anti_coupling`
struct DefaultChainParams {
  double stay_0 = 0.92;
  double onset_0 = 0.04;
  double coupling = 0.85;
  double stay_1 = 0.5;
  double stay_2 = 0.9;
  double onset_2 = 0.05;
  double anti_coupling = 0.9;
  double stay_3 = 0.6;
  double onset_3 = 0.3;
};

/// N = 4 chain with one strongly coupled pair (AU index 0/1) and one
/// anti-correlated pair (AU index 2/3).
GeneratorSpec default_generator_spec(std::uint64_t seed = 0, const DefaultChainParams& params = {});

/// Four horizontal bands, each spanning most of one patch row.
RenderSpec default_render_spec(int au_count = 4);

LabelSequence sample_sequence(const GeneratorSpec& cfg, int length, std::uint64_t seed,
                              const std::string& clip_id = "clip");

/// Stationary distribution by power iteration (1e-12 L1 tolerance, at most
/// 1e5 iterations). Throws NumericError if it does not converge.
Vector stationary_distribution(const Matrix& transition);

std::pair<IntraKnowledge, InterKnowledge> analytic_knowledge(const GeneratorSpec& cfg);

VideoClip render_video(const LabelSequence& labels, const RenderSpec& cfg, std::uint64_t seed);

/// Convenience: sample `clips` sequences of `frames` frames and render them.
/// Clip k uses seeds derived from (seed, k).
std::vector<LabeledClip> synthesize_dataset(const GeneratorSpec& cfg, const RenderSpec& render,
                                            int clips, int frames, std::uint64_t seed,
                                            const std::string& prefix = "clip");

}  // namespace auvmae
