// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "auvmae/eval.hpp"
#include "auvmae/knowledge.hpp"
#include "auvmae/losses.hpp"
#include "auvmae/rng.hpp"
#include "auvmae/serialize.hpp"
#include "auvmae/synth.hpp"
#include "auvmae/training.hpp"
#include "oracles.hpp"

using namespace auvmae;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

// ---------------------------------------------------------------- 1
Outcome knowledge_oracles() {
  Outcome o;
  std::mt19937_64 rng(1001);
  int compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const LabelDataset ds = oracle::random_dataset(rng, 5, 50);
    const IntraKnowledge k = estimate_intra_knowledge(ds);
    const InterKnowledge inter = estimate_inter_knowledge(ds);
    const auto ref = oracle::intra_counts(ds);
    const auto iref = oracle::inter_counts(ds);
    const int n = k.size();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const auto& r = ref[i][j];
        o.require(k.support(i, j) == r.den, "intra support");
        if (r.den == 0) {
          o.require(std::isnan(k.matrix(i, j)), "undefined intra entry");
        } else {
          // Exact rational check: value * den reproduces the integer count and the
          // value is the correctly rounded quotient.
          o.require(k.matrix(i, j) == static_cast<double>(r.num) / static_cast<double>(r.den), "intra ratio");
          o.require(std::llround(k.matrix(i, j) * r.den) == r.num, "intra numerator");
        }
        o.require(inter.support(i, j) == iref.transitions, "inter support");
        for (int s = 0; s < 16; ++s) {
          const double expect = static_cast<double>(iref.counts[(static_cast<std::size_t>(i) * n + j) * 16 + s]) /
                                static_cast<double>(iref.transitions);
          o.require(std::abs(inter.at(i, j, s) - expect) <= 1e-12, "inter entry");
          ++compared;
        }
      }
  }
  o.detail << "100 datasets, " << compared << " inter entries compared";
  return o;
}

// ---------------------------------------------------------------- 2
Outcome normalization() {
  Outcome o;
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_state = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Vector a(1), b(1);
    a << u(rng);
    b << u(rng);
    const StateTensor st = state_tensor(a, b);
    double sum = 0.0;
    for (double v : st.tensor) sum += v;
    worst_state = std::max(worst_state, std::abs(sum - 1.0));
  }
  o.require(worst_state <= 1e-12, "state tensor sum");
  double worst_inter = 0.0, worst_weights = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const LabelDataset ds = oracle::random_dataset(rng, 5, 50);
    const InterKnowledge inter = estimate_inter_knowledge(ds);
    const IntraKnowledge intra = estimate_intra_knowledge(ds);
    for (int i = 0; i < inter.n; ++i)
      for (int j = 0; j < inter.n; ++j) {
        double sum = 0.0;
        for (int s = 0; s < 16; ++s) sum += inter.at(i, j, s);
        worst_inter = std::max(worst_inter, std::abs(sum - 1.0));
        if (intra.defined(i, j)) o.require(intra.matrix(i, j) == intra.matrix(j, i), "intra symmetry");
        if (i == j && intra.defined(i, i)) o.require(intra.matrix(i, i) == 1.0, "intra unit diagonal");
      }
    RateVector rates = occurrence_rates(ds);
    if ((rates.rates.array() > 0.0).all()) {
      const WeightVector w = class_weights(rates);
      worst_weights = std::max(worst_weights, std::abs(w.weights.sum() - static_cast<double>(rates.rates.size())));
    }
  }
  o.require(worst_inter <= 1e-9, "inter per-pair sum");
  o.require(worst_weights <= 1e-9, "class weight sum");
  o.detail << "max |sum S - 1| " << worst_state << ", max |sum K_inter - 1| " << worst_inter
           << ", max |sum w - N| " << worst_weights;
  return o;
}

// ---------------------------------------------------------------- 3
InterKnowledge random_inter(std::mt19937_64& rng, int n) {
  InterKnowledge k;
  k.n = n;
  for (int i = 0; i < n; ++i) k.au_ids.push_back(i);
  k.support = decltype(k.support)::Constant(n, n, 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int p = 0; p < n * n; ++p) {
    std::vector<double> cell(16);
    double sum = 0;
    for (double& v : cell) sum += (v = u(rng));
    for (double v : cell) k.tensor.push_back(v / sum);
  }
  return k;
}

Outcome gradients() {
  Outcome o;
  std::mt19937_64 rng(1003);
  std::uniform_int_distribution<int> small(2, 5), len(2, 10);
  double worst_bce = 0, worst_inter = 0, worst_recon = 0, worst_intra = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int b = len(rng), n = small(rng);
    const Matrix p = oracle::random_probs(rng, b, n, 0.05, 0.95);
    const Matrix y = oracle::random_probs(rng, b, n).unaryExpr([](double v) { return v > 0.5 ? 1.0 : 0.0; });
    const Vector w = oracle::random_probs(rng, n, 1, 0.2, 2.0);
    worst_bce = std::max(worst_bce, oracle::rel_error(weighted_bce(p, y, w).grad,
                                                      oracle::numeric_grad(
                                                          [&](const Matrix& q) { return weighted_bce(q, y, w).value; },
                                                          p, 1e-6)));
    const InterKnowledge prior = random_inter(rng, n);
    worst_inter = std::max(worst_inter, oracle::rel_error(inter_loss(p, prior).grad,
                                                          oracle::numeric_grad(
                                                              [&](const Matrix& q) { return inter_loss(q, prior).value; },
                                                              p, 1e-6)));
    const Matrix orig = oracle::random_probs(rng, b, 8, -1, 1), rec = oracle::random_probs(rng, b, 8, -1, 1);
    std::vector<int> blocks(b);
    for (int k = 0; k < b; ++k) blocks[k] = k % 3;
    worst_recon = std::max(
        worst_recon,
        oracle::rel_error(reconstruction_loss(orig, rec, blocks).grad,
                          oracle::numeric_grad(
                              [&](const Matrix& x) { return reconstruction_loss(orig, x, blocks).value; }, rec, 1e-6)));

    IntraKnowledge ip;
    for (int i = 0; i < n; ++i) ip.au_ids.push_back(i);
    ip.matrix = oracle::random_probs(rng, n, n, 0, 1);
    ip.matrix = ((ip.matrix + ip.matrix.transpose()) / 2).eval();
    ip.matrix.diagonal().setOnes();
    ip.support = decltype(ip.support)::Constant(n, n, 1);
    const Matrix hard = StraightThrough::forward(p);
    const LearnedCooccurrence c = cooccurrence_from_hard(hard);
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> use(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) use(i, j) = c.defined(i, j);
    if (!use.any()) continue;
    const IntraLoss il = intra_loss(p, ip);
    const Matrix fd = oracle::numeric_grad(
        [&](const Matrix& h) { return intra_loss_on_hard(h, ip, &use).loss.value; }, hard, 1e-6);
    worst_intra = std::max(worst_intra, oracle::rel_error(il.loss.grad, fd));
  }
  const Matrix up = oracle::random_probs(rng, 4, 3, -5, 5);
  o.require(StraightThrough::backward(up) == up, "straight-through backward identity");
  o.require(worst_bce < 1e-4, "bce gradient");
  o.require(worst_inter < 1e-4, "inter gradient");
  o.require(worst_recon < 1e-4, "reconstruction gradient");
  o.require(worst_intra < 1e-4, "intra gradient downstream of hardening");
  o.detail << "max rel err bce " << worst_bce << ", inter " << worst_inter << ", recon " << worst_recon
           << ", intra " << worst_intra;
  return o;
}

// ---------------------------------------------------------------- 4
Outcome spot_values() {
  Outcome o;
  LabelSequence s;
  s.clip_id = "x";
  s.au_ids = {1, 2};
  s.frames.resize(3, 2);
  s.frames << 1, 0, 1, 1, 0, 1;
  const double k = estimate_intra_knowledge({s}).matrix(0, 1);
  const double d = state_function(0.3, 1);
  const StateTensor st = state_tensor(Vector::Constant(2, 0.5), Vector::Constant(2, 0.5));
  bool sixteenth = true;
  for (double v : st.tensor) sixteenth = sixteenth && std::abs(v - 1.0 / 16.0) <= 1e-15;
  const double total = total_loss(2.0, 0.5, 0.3, LossWeights{});
  o.require(std::abs(k - 1.0 / 3.0) <= 1e-15, "K_intra = 1/3");
  o.require(std::abs(d - 0.7) <= 1e-15, "D(0.3, 1) = 0.7");
  o.require(sixteenth, "S = 1/16");
  o.require(std::abs(total - 2.008) <= 1e-12, "total = 2.008");
  o.detail << "K=" << k << " D=" << d << " total=" << total;
  return o;
}

// ---------------------------------------------------------------- 5
Outcome statistical_consistency() {
  Outcome o;
  const auto start = Clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const GeneratorSpec cfg = default_generator_spec(seed);
    const auto [intra, inter] = analytic_knowledge(cfg);
    const LabelDataset ds{sample_sequence(cfg, 100000, derive_seed(seed, "acceptance/consistency"))};
    const IntraKnowledge ei = estimate_intra_knowledge(ds);
    const InterKnowledge ek = estimate_inter_knowledge(ds);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        worst = std::max(worst, std::abs(ei.matrix(i, j) - intra.matrix(i, j)));
        for (int s = 0; s < 16; ++s) worst = std::max(worst, std::abs(ek.at(i, j, s) - inter.at(i, j, s)));
      }
  }
  const double secs = seconds_since(start);
  o.require(worst <= 0.02, "elementwise deviation");
  o.require(secs < 60.0, "runtime");
  o.detail << "max deviation " << worst << " over 5 seeds, " << secs << " s";
  return o;
}

// ---------------------------------------------------------------- 6, 7
struct LevelRun {
  double baseline_f1 = 0, knowledge_f1 = 0, constant_f1 = 0;
  double divergence_init = 0, divergence_trained = 0;
  bool shape_ok = true;
};

struct AblationSettings {
  int train_clips = 48;
  int test_clips = 16;
  int clip_frames = 16;
  int pretrain_steps = 200;
  int finetune_steps = 600;
};

double divergence_of(const std::vector<Matrix>& probs, const Priors& priors) {
  const auto [li, ls] = learned_knowledge(probs);
  const KnowledgeDivergence d = knowledge_divergence(priors.intra, priors.inter, li, ls);
  return d.intra + d.inter;
}

std::vector<Matrix> predict_all(const Checkpoint& ck, const std::vector<LabeledClip>& test, Level level,
                                std::uint64_t seed, bool* shape_ok) {
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < test.size(); ++k) {
    Matrix p = predict(ck, test[k].video, level, derive_seed(seed, "acceptance/predict", k)).probs;
    if (shape_ok)
      *shape_ok = *shape_ok && p.rows() == test[k].video.original_frames && p.cols() == test[k].labels.au_count();
    out.push_back(std::move(p));
  }
  return out;
}

std::map<std::pair<std::uint64_t, Level>, LevelRun> run_ablation(const AblationSettings& cfg, double* secs) {
  const auto start = Clock::now();
  std::map<std::pair<std::uint64_t, Level>, LevelRun> runs;
  const GeneratorSpec gen = default_generator_spec();
  const RenderSpec render = default_render_spec(gen.au_count());
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto train = synthesize_dataset(gen, render, cfg.train_clips, cfg.clip_frames,
                                          derive_seed(seed, "acceptance/train"), "train");
    const auto test = synthesize_dataset(gen, render, cfg.test_clips, cfg.clip_frames,
                                         derive_seed(seed, "acceptance/test"), "test");
    LabelDataset train_labels, test_labels;
    std::vector<VideoClip> corpus;
    for (const auto& c : train) {
      train_labels.push_back(c.labels);
      corpus.push_back(c.video);
    }
    for (const auto& c : test) test_labels.push_back(c.labels);
    const Priors priors{estimate_intra_knowledge(train_labels), estimate_inter_knowledge(train_labels)};
    const WeightVector weights = class_weights(occurrence_rates(train_labels));

    ModelConfig config;
    config.au_count = gen.au_count();
    config.seed = seed;
    config.pretrain_steps = cfg.pretrain_steps;
    config.finetune_steps = cfg.finetune_steps;
    for (Level level : {Level::video, Level::frame, Level::patch}) {
      LevelRun run;
      const Checkpoint pre = pretrain(corpus, config, config.downsample_rate(level));
      ModelConfig base = config, full = config;
      base.loss_weights = {1.0, 0.0, 0.0};
      full.loss_weights = {1.0, 0.01, 0.01};
      ModelConfig zero = full;
      zero.finetune_steps = 0;
      const Checkpoint init = finetune(train, priors, weights, level, pre, zero);
      run.divergence_init = divergence_of(predict_all(init, test, level, seed, nullptr), priors);

      const Checkpoint ck_base = finetune(train, priors, weights, level, pre, base);
      run.baseline_f1 = f1_scores(predict_all(ck_base, test, level, seed, &run.shape_ok), test_labels).avg_f1;
      const Checkpoint ck_full = finetune(train, priors, weights, level, pre, full);
      const auto probs = predict_all(ck_full, test, level, seed, &run.shape_ok);
      run.knowledge_f1 = f1_scores(probs, test_labels).avg_f1;
      run.divergence_trained = divergence_of(probs, priors);
      run.constant_f1 = constant_predictor_f1(test_labels);
      std::printf("  seed %llu %-5s baseline F1 %.4f  with knowledge F1 %.4f  constant F1 %.4f  divergence %.4f -> %.4f\n",
                  static_cast<unsigned long long>(seed), to_string(level).c_str(), run.baseline_f1, run.knowledge_f1,
                  run.constant_f1, run.divergence_init, run.divergence_trained);
      std::fflush(stdout);
      runs[{seed, level}] = run;
    }
  }
  *secs = seconds_since(start);
  return runs;
}

Outcome ablation(const std::map<std::pair<std::uint64_t, Level>, LevelRun>& runs, double secs) {
  Outcome o;
  for (Level level : {Level::video, Level::frame, Level::patch}) {
    int wins = 0, lower = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const LevelRun& r = runs.at({seed, level});
      wins += r.knowledge_f1 >= r.baseline_f1;
      lower += r.divergence_trained < r.divergence_init;
    }
    o.require(wins >= 2, to_string(level) + " F1 majority");
    o.require(lower >= 2, to_string(level) + " divergence majority");
    o.detail << to_string(level) << " " << wins << "/3 F1, " << lower << "/3 divergence; ";
  }
  o.require(secs < 1800.0, "grid runtime");
  o.detail << "grid " << secs << " s";
  return o;
}

Outcome multi_level(const std::map<std::pair<std::uint64_t, Level>, LevelRun>& runs) {
  Outcome o;
  for (Level level : {Level::video, Level::frame, Level::patch}) {
    double f1 = 0, constant = 0;
    bool shapes = true;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const LevelRun& r = runs.at({seed, level});
      f1 += r.knowledge_f1 / 3;
      constant += r.constant_f1 / 3;
      shapes = shapes && r.shape_ok;
      o.require(r.knowledge_f1 > r.constant_f1, to_string(level) + " beats constant predictor");
    }
    o.require(shapes, to_string(level) + " T x N shape");
    o.detail << to_string(level) << " F1 " << f1 << " vs constant " << constant << "; ";
  }
  return o;
}

// ---------------------------------------------------------------- 8
Outcome masking() {
  Outcome o;
  for (int s = 4; s <= 256; ++s) {
    const int q = s / 10, r = s % 10;
    const int visible = r > 5 ? q + 1 : (r == 5 ? q + q % 2 : q);
    for (std::uint64_t seed : {1ull, 99ull}) {
      const MaskSpec m = make_tube_mask(4, s, 0.9, seed + s);
      o.require(m.visible_count() == 4 * visible, "visible count at S=" + std::to_string(s));
      for (int b = 1; b < 4; ++b)
        for (int k = 0; k < s; ++k) o.require(m.visible[b * s + k] == m.visible[k], "tube consistency");
      o.require(make_tube_mask(4, s, 0.9, seed + s).visible == m.visible, "determinism");
    }
  }
  o.detail << "S = 4..256";
  return o;
}

// ---------------------------------------------------------------- 9
Outcome augmentation() {
  Outcome o;
  // Crafted example: minority AU active only in frame 10 of 40.
  LabelSequence crafted;
  crafted.clip_id = "crafted";
  crafted.au_ids = {1, 2};
  crafted.frames = BinaryMatrix::Zero(40, 2);
  crafted.frames(10, 0) = 1;
  crafted.frames.col(1).setOnes();
  const auto spans = minority_subclips(crafted, {0}, 15);
  o.require(spans.size() == 1 && spans[0] == FrameSpan{10, 26}, "crafted span [10, 26)");

  GeneratorSpec gen = default_generator_spec();
  // Imbalanced variant: AU 6 (and with it AU 12) become rare.
  DefaultChainParams rare;
  rare.onset_0 = 0.005;
  rare.stay_0 = 0.8;
  rare.onset_2 = 0.01;
  gen = default_generator_spec(3, rare);
  const RenderSpec render = default_render_spec(gen.au_count());
  const auto data = synthesize_dataset(gen, render, 12, 64, 31, "imb");
  LabelDataset before;
  for (const auto& c : data) before.push_back(c.labels);
  const RateVector rb = occurrence_rates(before);
  AugmentPlan plan;
  plan.minority_aus = {6, 12, 15};
  plan.seed = 17;
  const auto out = augment_dataset(data, plan);
  LabelDataset after;
  for (const auto& c : out) after.push_back(c.labels);
  const RateVector ra = occurrence_rates(after);
  for (int k = 0; k < 3; ++k) {
    o.require(ra.rates[k] > rb.rates[k], "AU" + std::to_string(gen.au_ids[k]) + " rate increases");
    o.detail << "AU" << gen.au_ids[k] << " " << rb.rates[k] << " -> " << ra.rates[k] << "; ";
  }
  o.detail << data.size() << " -> " << out.size() << " clips";
  return o;
}

// ---------------------------------------------------------------- 10
std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

Outcome end_to_end(const std::string& cli, const std::string& script) {
  Outcome o;
  const fs::path work = fs::temp_directory_path() / "auvmae_acceptance_pipeline";
  fs::remove_all(work);
  const auto start = Clock::now();
  const std::string cmd = "bash " + shell_quote(script) + " " + shell_quote(cli) + " " + shell_quote(work.string()) +
                          " 7 > " + shell_quote((fs::temp_directory_path() / "auvmae_pipeline.log").string()) + " 2>&1";
  const int rc = std::system(cmd.c_str());
  const double secs = seconds_since(start);
  o.require(rc == 0, "pipeline exit code " + std::to_string(rc));
  o.require(secs < 900.0, "runtime");
  if (rc == 0) {
    const Json priors = read_json_file(work / "priors.json");
    o.require(check_knowledge_json(priors).empty(), "priors schema: " + check_knowledge_json(priors));
    for (const std::string level : {"video", "frame", "patch"}) {
      const Json m = read_json_file(work / (level + ".metrics.json"));
      o.require(check_metrics_json(m).empty(), level + " metrics schema: " + check_metrics_json(m));
      o.require(m.value("level", "") == level && m.contains("seed"), level + " metrics level/seed");
      const Json p = read_json_file(work / (level + ".predictions.json"));
      o.require(check_predictions_json(p).empty(), level + " predictions schema: " + check_predictions_json(p));
      std::ifstream log(work / (level + ".log.jsonl"));
      std::string line;
      int lines = 0;
      while (std::getline(log, line)) {
        o.require(check_log_line(Json::parse(line)).empty(), level + " log line schema");
        ++lines;
      }
      o.require(lines > 0, level + " log nonempty");
      const Checkpoint ck = load_checkpoint(work / (level + ".ckpt"));
      o.require(ck.stage == "finetune" && to_string(ck.level) == level, level + " checkpoint header");
    }
    const Json report = read_json_file(work / "report" / "report.json");
    o.require(report.contains("runs") && report["runs"].size() == 3, "report runs");
    for (const char* f : {"intra_prior.svg", "inter_prior.svg", "metrics_f1.md", "metrics.csv"})
      o.require(fs::exists(work / "report" / f), std::string("report file ") + f);
  }
  o.detail << "exit " << rc << ", " << secs << " s";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli, script;
  for (int k = 1; k + 1 < argc; k += 2) {
    const std::string flag = argv[k];
    if (flag == "--cli") cli = argv[k + 1];
    if (flag == "--script") script = argv[k + 1];
  }
  if (cli.empty() || script.empty()) {
    std::cerr << "usage: acceptance --cli <auvmae> --script <pipeline.sh>\n";
    return 2;
  }
  int failures = 0;
  auto report = [&](int id, const std::string& name, Outcome o) {
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };
  report(1, "knowledge estimators match brute-force counters", knowledge_oracles());
  report(2, "normalization invariants", normalization());
  report(3, "gradient checks", gradients());
  report(4, "formula spot values", spot_values());
  report(5, "statistical consistency with the generator", statistical_consistency());
  report(8, "tube masking contract", masking());
  report(9, "augmentation raises minority rates", augmentation());
  double secs = 0;
  const auto runs = run_ablation(AblationSettings{}, &secs);
  report(6, "knowledge losses do not hurt F1 and reduce divergence", ablation(runs, secs));
  report(7, "all levels predict every original frame and beat a constant predictor", multi_level(runs));
  report(10, "scripted pipeline end to end", end_to_end(cli, script));
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
