#include <random>
#include <set>

#include "doctest.h"
#include "auvmae/rng.hpp"
#include "auvmae/video.hpp"

using namespace auvmae;

namespace {

VideoClip ramp_clip(int t, int h, int w, int c) {
  VideoClip v("ramp", t, h, w, c);
  for (std::size_t k = 0; k < v.pixels.size(); ++k) v.pixels[k] = static_cast<double>(k);
  return v;
}

// round(0.1 * s) with ties to even, in integers.
int expected_visible(int s) {
  const int q = s / 10, r = s % 10;
  if (r > 5) return q + 1;
  if (r == 5) return q + (q % 2);
  return q;
}

}  // namespace

TEST_CASE("seed derivation is deterministic and purpose-sensitive") {
  CHECK(derive_seed(1, "a", 0) == derive_seed(1, "a", 0));
  CHECK(derive_seed(1, "a", 0) != derive_seed(1, "b", 0));
  CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
  CHECK(derive_seed(1, "a", 0) != derive_seed(2, "a", 0));
  Rng a = make_rng(9, "x"), b = make_rng(9, "x");
  CHECK(a() == b());
}

TEST_CASE("tokenize shapes and round trip") {
  const VideoClip v = ramp_clip(4, 16, 16, 2);
  const TokenGrid g = tokenize(v, {2, 8});
  CHECK(g.blocks == 2);
  CHECK(g.rows == 2);
  CHECK(g.cols == 2);
  CHECK(g.tokens.rows() == 8);
  CHECK(g.tokens.cols() == 2 * 8 * 8 * 2);
  const VideoClip back = detokenize(g);
  CHECK(back.pixels == v.pixels);
  // First token starts at pixel (0,0,0,0); second element is channel 1 of the same pixel.
  CHECK(g.tokens(0, 0) == v.at(0, 0, 0, 0));
  CHECK(g.tokens(0, 1) == v.at(0, 0, 0, 1));
  // Token 1 is block 0, row 0, col 1.
  CHECK(g.tokens(1, 0) == v.at(0, 0, 8, 0));
  CHECK(g.tokens(2, 0) == v.at(0, 8, 0, 0));
  CHECK(g.tokens(4, 0) == v.at(2, 0, 0, 0));
}

TEST_CASE("tokenize rejects non-divisible shapes") {
  CHECK_THROWS_AS(tokenize(ramp_clip(3, 16, 16, 1), {2, 8}), DataError);
  CHECK_THROWS_AS(tokenize(ramp_clip(4, 12, 16, 1), {2, 8}), DataError);
}

TEST_CASE("tube mask leaves round(0.1 S) positions visible for every S") {
  CHECK(tube_masked_count(16, 0.9) == 14);
  for (int s = 4; s <= 256; ++s) {
    const MaskSpec m = make_tube_mask(3, s, 0.9, 1234 + s);
    const int visible_per_block = expected_visible(s);
    REQUIRE(m.visible.size() == static_cast<std::size_t>(3 * s));
    CHECK(m.visible_count() == 3 * visible_per_block);
    for (int b = 1; b < 3; ++b)
      for (int k = 0; k < s; ++k) CHECK(m.visible[b * s + k] == m.visible[k]);
    const MaskSpec again = make_tube_mask(3, s, 0.9, 1234 + s);
    CHECK(again.visible == m.visible);
  }
}

TEST_CASE("tube mask varies with seed and index helpers agree") {
  std::set<std::vector<bool>> seen;
  for (std::uint64_t seed = 0; seed < 20; ++seed) seen.insert(make_tube_mask(2, 64, 0.5, seed).visible);
  CHECK(seen.size() > 10);
  const MaskSpec m = make_tube_mask(2, 16, 0.5, 3);
  CHECK(m.visible_indices().size() + m.masked_indices().size() == 32);
  CHECK(m.masked_count() == 16);
  for (int k : m.visible_indices()) CHECK(m.visible[k]);
  CHECK_THROWS_AS(make_tube_mask(2, 16, 1.0, 0), UsageError);
  CHECK_THROWS_AS(make_tube_mask(2, 16, -0.1, 0), UsageError);
  CHECK(make_full_mask(2, 4).visible_count() == 8);
  CHECK(make_tube_mask(2, 16, 0.0, 1).visible_count() == 32);
}

TEST_CASE("temporal downsample keeps every rate-th frame") {
  VideoClip v("clip", 16, 2, 2, 1);
  for (int t = 0; t < 16; ++t)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) v.at(t, y, x) = t;
  const VideoClip d = temporal_downsample(v, 4);
  CHECK(d.frames == 4);
  CHECK(d.original_frames == 16);
  CHECK(d.downsample_rate == 4);
  for (int t = 0; t < 4; ++t) CHECK(d.at(t, 1, 1) == 4.0 * t);
  CHECK_THROWS_AS(temporal_downsample(v, 0), UsageError);
  CHECK_THROWS_AS(temporal_downsample(v, 3), DataError);
}
