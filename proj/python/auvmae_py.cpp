#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "auvmae/cli.hpp"
#include "auvmae/eval.hpp"
#include "auvmae/knowledge.hpp"
#include "auvmae/losses.hpp"
#include "auvmae/serialize.hpp"
#include "auvmae/synth.hpp"
#include "auvmae/video.hpp"

namespace py = pybind11;
using namespace auvmae;

namespace {

using Labels = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

LabelDataset to_dataset(const std::vector<Labels>& clips, const std::vector<int>& au_ids) {
  LabelDataset ds;
  for (std::size_t k = 0; k < clips.size(); ++k) {
    LabelSequence s;
    s.clip_id = "clip" + std::to_string(k);
    s.au_ids = au_ids;
    s.frames = clips[k];
    s.validate();
    ds.push_back(std::move(s));
  }
  return ds;
}

std::vector<int> default_ids(const std::vector<Labels>& clips, std::vector<int> ids) {
  if (!ids.empty() || clips.empty()) return ids;
  for (int k = 0; k < clips.front().cols(); ++k) ids.push_back(k);
  return ids;
}

py::array_t<double> inter_array(const std::vector<double>& tensor, int n) {
  py::array_t<double> out({n, n, 16});
  std::copy(tensor.begin(), tensor.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Knowledge estimation, losses, masking and metrics for AU detection.";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def(
      "estimate_intra_knowledge",
      [](const std::vector<Labels>& clips, std::vector<int> au_ids, double smoothing) {
        const auto k = estimate_intra_knowledge(to_dataset(clips, default_ids(clips, au_ids)), smoothing);
        return py::make_tuple(k.matrix, Eigen::MatrixXd(k.support.cast<double>()));
      },
      py::arg("clips"), py::arg("au_ids") = std::vector<int>{}, py::arg("smoothing") = 0.0,
      "Returns (K_intra, support). Undefined entries are NaN.");
  m.def(
      "estimate_inter_knowledge",
      [](const std::vector<Labels>& clips, std::vector<int> au_ids, double smoothing) {
        const auto k = estimate_inter_knowledge(to_dataset(clips, default_ids(clips, au_ids)), smoothing);
        return inter_array(k.tensor, k.n);
      },
      py::arg("clips"), py::arg("au_ids") = std::vector<int>{}, py::arg("smoothing") = 0.0,
      "Returns K_inter with shape (N, N, 16).");
  m.def("state_function", &state_function, py::arg("x"), py::arg("bit"));
  m.def("transition_state", [](int a, int b, int c, int d) { return transition_state(a, b, c, d); });
  m.def(
      "state_tensor",
      [](const Vector& p_t, const Vector& p_next) {
        const StateTensor s = state_tensor(p_t, p_next);
        return inter_array(s.tensor, s.n);
      },
      py::arg("p_t"), py::arg("p_next"));
  m.def(
      "mean_state_tensor",
      [](const Matrix& p) {
        const StateTensor s = mean_state_tensor(p);
        return inter_array(s.tensor, s.n);
      },
      py::arg("p_seq"));
  m.def(
      "learned_cooccurrence", [](const Matrix& p) { return learned_cooccurrence(p).matrix; }, py::arg("p"));

  m.def(
      "weighted_bce",
      [](const Matrix& p, const Matrix& y, const Vector& w) {
        const LossValue v = weighted_bce(p, y, w);
        return py::make_tuple(v.value, v.grad);
      },
      py::arg("p"), py::arg("y"), py::arg("weights"), "Returns (loss, dloss/dp).");
  m.def(
      "total_loss",
      [](double cls, double intra, double inter, double l_cls, double l_intra, double l_inter) {
        return total_loss(cls, intra, inter, LossWeights{l_cls, l_intra, l_inter});
      },
      py::arg("cls"), py::arg("intra"), py::arg("inter"), py::arg("lambda_cls") = 1.0,
      py::arg("lambda_intra") = 0.01, py::arg("lambda_inter") = 0.01);
  m.def(
      "class_weights",
      [](const Vector& rates) {
        RateVector r;
        r.rates = rates;
        for (int k = 0; k < rates.size(); ++k) r.au_ids.push_back(k);
        return class_weights(r).weights;
      },
      py::arg("rates"));

  m.def(
      "tube_mask",
      [](int blocks, int spatial, double ratio, std::uint64_t seed) {
        return make_tube_mask(blocks, spatial, ratio, seed).visible;
      },
      py::arg("blocks"), py::arg("spatial"), py::arg("ratio"), py::arg("seed"),
      "Visibility flags in (block, position) order.");

  m.def(
      "f1_scores",
      [](const std::vector<Matrix>& probs, const std::vector<Labels>& labels, double threshold) {
        const MetricReport r =
            f1_scores(probs, to_dataset(labels, default_ids(labels, {})), threshold);
        return py::make_tuple(r.per_au_f1, r.avg_f1, r.per_au_acc, r.avg_acc);
      },
      py::arg("probs"), py::arg("labels"), py::arg("threshold") = 0.5,
      "Returns (per_au_f1, avg_f1, per_au_acc, avg_acc).");

  m.def(
      "sample_labels",
      [](int length, std::uint64_t seed) {
        return Labels(sample_sequence(default_generator_spec(), length, seed).frames);
      },
      py::arg("length"), py::arg("seed"), "Samples the default four-AU generator.");
  m.def(
      "analytic_knowledge",
      []() {
        const auto [intra, inter] = analytic_knowledge(default_generator_spec());
        return py::make_tuple(intra.matrix, inter_array(inter.tensor, inter.n));
      },
      "Exact (K_intra, K_inter) of the default generator.");

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "auvmae");
        return cli::run(args);
      },
      py::arg("args"), "Runs a CLI subcommand in-process and returns its exit code.");
}
