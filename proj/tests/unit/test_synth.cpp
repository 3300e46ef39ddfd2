#include "doctest.h"
#include "auvmae/synth.hpp"

using namespace auvmae;

TEST_CASE("default generator is a valid chain with the intended couplings") {
  const GeneratorSpec cfg = default_generator_spec(1);
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.au_ids == std::vector<int>{6, 12, 15, 17});
  const auto [intra, inter] = analytic_knowledge(cfg);
  // Coupled pair co-occurs much more often than the anti-coupled pair.
  CHECK(intra.matrix(0, 1) > 0.5);
  CHECK(intra.matrix(2, 3) < 0.1);
  for (int i = 0; i < 4; ++i) {
    CHECK(intra.matrix(i, i) == doctest::Approx(1.0));
    for (int j = 0; j < 4; ++j) {
      CHECK(intra.matrix(i, j) == doctest::Approx(intra.matrix(j, i)));
      double sum = 0.0;
      for (int s = 0; s < 16; ++s) sum += inter.at(i, j, s);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("stationary distribution of a two-state chain") {
  Matrix p(2, 2);
  p << 0.9, 0.1, 0.3, 0.7;
  const Vector pi = stationary_distribution(p);
  CHECK(pi[0] == doctest::Approx(0.75));
  CHECK(pi[1] == doctest::Approx(0.25));
}

TEST_CASE("sampled statistics approach the analytic knowledge") {
  const GeneratorSpec cfg = default_generator_spec(2);
  const LabelDataset ds{sample_sequence(cfg, 20000, 99)};
  const auto [intra, inter] = analytic_knowledge(cfg);
  const IntraKnowledge est = estimate_intra_knowledge(ds);
  const InterKnowledge est_inter = estimate_inter_knowledge(ds);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(est.matrix(i, j) - intra.matrix(i, j)) < 0.04);
      for (int s = 0; s < 16; ++s) CHECK(std::abs(est_inter.at(i, j, s) - inter.at(i, j, s)) < 0.04);
    }
}

TEST_CASE("sampling and rendering are deterministic per seed") {
  const GeneratorSpec cfg = default_generator_spec();
  const RenderSpec render = default_render_spec();
  const auto a = synthesize_dataset(cfg, render, 2, 16, 7);
  const auto b = synthesize_dataset(cfg, render, 2, 16, 7);
  const auto c = synthesize_dataset(cfg, render, 2, 16, 8);
  CHECK(a[1].labels.frames == b[1].labels.frames);
  CHECK(a[1].video.pixels == b[1].video.pixels);
  CHECK(a[1].video.pixels != c[1].video.pixels);
  CHECK(a[0].video.frames == 16);
  CHECK(a[0].video.height == render.height);
}

TEST_CASE("noise-free render reflects the active regions") {
  RenderSpec render = default_render_spec(2);
  render.noise_sigma = 0.0;
  LabelSequence s;
  s.clip_id = "x";
  s.au_ids = {1, 2};
  s.frames.resize(2, 2);
  s.frames << 1, 0, 0, 1;
  const VideoClip v = render_video(s, render, 0);
  const Region r0 = render.regions[0], r1 = render.regions[1];
  CHECK(v.at(0, r0.y0, r0.x0) == doctest::Approx(render.on_intensity[0]));
  CHECK(v.at(0, r1.y0, r1.x0) == doctest::Approx(render.off_intensity[1]));
  CHECK(v.at(1, r0.y0, r0.x0) == doctest::Approx(render.off_intensity[0]));
  CHECK(v.at(1, r1.y0, r1.x0) == doctest::Approx(render.on_intensity[1]));
}

TEST_CASE("invalid generator specs are rejected") {
  GeneratorSpec cfg = default_generator_spec();
  cfg.joint_transition(0, 0) += 0.1;
  CHECK_THROWS_AS(cfg.validate(), DataError);
  GeneratorSpec tiny = default_generator_spec();
  tiny.au_ids = {1};
  CHECK_THROWS_AS(tiny.validate(), DataError);
}
