#include <random>

#include "doctest.h"
#include "auvmae/label_data.hpp"
#include "oracles.hpp"

using namespace auvmae;

namespace {

LabelSequence seq_from_column(const std::vector<int>& minority, int n_aus = 2) {
  LabelSequence s;
  s.clip_id = "clip";
  for (int k = 0; k < n_aus; ++k) s.au_ids.push_back(k + 1);
  s.frames = BinaryMatrix::Zero(static_cast<int>(minority.size()), n_aus);
  for (std::size_t t = 0; t < minority.size(); ++t) {
    s.frames(t, 0) = static_cast<std::uint8_t>(minority[t]);
    s.frames(t, 1) = 1;
  }
  return s;
}

LabeledClip with_video(LabelSequence labels, int h = 8, int w = 8) {
  VideoClip v(labels.clip_id, labels.length(), h, w, 1);
  for (std::size_t k = 0; k < v.pixels.size(); ++k) v.pixels[k] = static_cast<double>(k % 17) / 17.0;
  return {std::move(v), std::move(labels)};
}

}  // namespace

TEST_CASE("label CSV round trip and strict parsing") {
  const std::string text =
      "clip_id,frame,au_1,au_4\n"
      "a,0,1,0\n"
      "a,1,0,1\n"
      "b,1,1,1\n"
      "b,0,0,0\n";
  const LabelDataset ds = parse_label_csv(text);
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].au_ids == std::vector<int>{1, 4});
  CHECK(ds[1].frames(0, 0) == 0);
  CHECK(ds[1].frames(1, 1) == 1);
  CHECK(parse_label_csv(format_label_csv(ds))[1].frames == ds[1].frames);

  CHECK_THROWS_WITH_AS(parse_label_csv("clip_id,frame,au_1,au_2\na,0,1,2\na,1,0,0\n"),
                       doctest::Contains("line 2"), DataError);
  CHECK_THROWS_AS(parse_label_csv("clip_id,frame,au_1,au_2\na,0,1,0\na,0,0,0\n"), DataError);
  CHECK_THROWS_AS(parse_label_csv("clip_id,frame,au_1,au_2\na,0,1\n"), DataError);
  CHECK_THROWS_AS(parse_label_csv("clip_id,frame,au_1,au_2\na,0,1,0\na,2,0,0\n"), DataError);
  CHECK_THROWS_AS(parse_label_csv(""), DataError);
}

TEST_CASE("occurrence rates and class weights") {
  LabelSequence s;
  s.clip_id = "x";
  s.au_ids = {1, 2};
  s.frames.resize(4, 2);
  s.frames << 1, 1, 1, 0, 1, 0, 0, 0;  // rates 0.75 and 0.25
  const RateVector r = occurrence_rates({s});
  CHECK(r.rates[0] == 0.75);
  CHECK(r.rates[1] == 0.25);
}

TEST_CASE("class weights worked example and invariants") {
  RateVector r{{1, 2}, Vector(2), 10};
  r.rates << 1.0 / 3.0, 2.0 / 3.0;
  const WeightVector w = class_weights(r);
  CHECK(w.weights[0] == doctest::Approx(4.0 / 3.0));
  CHECK(w.weights[1] == doctest::Approx(2.0 / 3.0));
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    RateVector rr{{}, Vector(2 + trial % 7), 10};
    for (int i = 0; i < rr.rates.size(); ++i) {
      rr.au_ids.push_back(i);
      rr.rates[i] = u(rng);
    }
    CHECK(std::abs(class_weights(rr).weights.sum() - rr.rates.size()) <= 1e-9);
  }
  RateVector zero{{1, 2}, Vector(2), 10};
  zero.rates << 0.5, 0.0;
  CHECK_THROWS_AS(class_weights(zero), DataError);
}

TEST_CASE("minority sub-clip interception matches the hand simulation") {
  std::vector<int> col(40, 0);
  col[10] = 1;
  const auto spans = minority_subclips(seq_from_column(col), {0}, 15);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == FrameSpan{10, 26});

  // Two bursts separated by fewer than 15 quiet frames stay in one span.
  std::vector<int> merged(60, 0);
  merged[5] = merged[15] = 1;
  const auto one = minority_subclips(seq_from_column(merged), {0}, 15);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == FrameSpan{5, 31});

  // A span still open at the end of the clip is closed there.
  std::vector<int> tail(20, 0);
  tail[12] = 1;
  const auto open = minority_subclips(seq_from_column(tail), {0}, 15);
  REQUIRE(open.size() == 1);
  CHECK(open[0] == FrameSpan{12, 20});

  // A lone final frame is too short to keep.
  std::vector<int> last(20, 0);
  last[19] = 1;
  CHECK(minority_subclips(seq_from_column(last), {0}, 15).empty());
  CHECK(minority_subclips(seq_from_column(std::vector<int>(30, 0)), {0}, 15).empty());
}

TEST_CASE("augmentation raises every minority rate on an imbalanced set") {
  std::mt19937_64 rng(37);
  std::bernoulli_distribution rare(0.03), common(0.6);
  std::vector<LabeledClip> data;
  for (int c = 0; c < 6; ++c) {
    LabelSequence s;
    s.clip_id = "c" + std::to_string(c);
    s.au_ids = {1, 2, 4, 6};
    s.frames.resize(120, 4);
    for (int t = 0; t < 120; ++t) {
      s.frames(t, 0) = rare(rng);
      s.frames(t, 1) = rare(rng);
      s.frames(t, 2) = common(rng);
      s.frames(t, 3) = common(rng);
    }
    data.push_back(with_video(std::move(s)));
  }
  AugmentPlan plan;
  plan.minority_aus = {1, 2};
  plan.seed = 5;
  LabelDataset before;
  for (const auto& d : data) before.push_back(d.labels);
  const auto out = augment_dataset(data, plan);
  CHECK(out.size() > data.size());
  LabelDataset after;
  for (const auto& d : out) after.push_back(d.labels);
  const RateVector rb = occurrence_rates(before), ra = occurrence_rates(after);
  CHECK(ra.rates[0] > rb.rates[0]);
  CHECK(ra.rates[1] > rb.rates[1]);
  for (std::size_t k = data.size(); k < out.size(); ++k) {
    CHECK(out[k].video.frames == out[k].labels.length());
    CHECK(out[k].video.height == 8);
    CHECK(out[k].labels.clip_id.find("_aug") != std::string::npos);
  }
  // Deterministic per seed.
  const auto again = augment_dataset(data, plan);
  REQUIRE(again.size() == out.size());
  CHECK(again.back().video.pixels == out.back().video.pixels);
}

TEST_CASE("augment plan validation") {
  AugmentPlan plan;
  CHECK_THROWS_AS(plan.validate({1, 2}), UsageError);
  plan.minority_aus = {1, 2};
  CHECK_THROWS_AS(plan.validate({1, 2}), UsageError);
  plan.minority_aus = {3};
  CHECK_THROWS_AS(plan.validate({1, 2}), UsageError);
  plan.minority_aus = {1};
  CHECK_NOTHROW(plan.validate({1, 2}));
  plan.majority_run_threshold = 0;
  CHECK_THROWS_AS(plan.validate({1, 2}), UsageError);
}

TEST_CASE("flip and full crop") {
  VideoClip v("v", 1, 2, 3, 1);
  for (int x = 0; x < 3; ++x) v.at(0, 0, x) = v.at(0, 1, x) = x;
  const VideoClip f = flip_crop(v, true, 1.0, 0.0, 0.0);
  CHECK(f.at(0, 0, 0) == doctest::Approx(2.0));
  CHECK(f.at(0, 1, 2) == doctest::Approx(0.0));
  const VideoClip same = flip_crop(v, false, 1.0, 0.0, 0.0);
  for (std::size_t k = 0; k < v.pixels.size(); ++k) CHECK(same.pixels[k] == doctest::Approx(v.pixels[k]));
}
