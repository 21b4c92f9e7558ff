#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "loralab/checkpoint.hpp"
#include "loralab/cli.hpp"
#include "loralab/errors.hpp"
#include "loralab/model.hpp"
#include "loralab/nbest.hpp"
#include "loralab/perturb.hpp"
#include "loralab/schedule.hpp"
#include "loralab/vocab.hpp"

namespace py = pybind11;
using namespace loralab;

namespace {

RankSchedule make_schedule(int r_full, int r_init, int r_target, long t_warm,
                           long t_init, long t_final, long total) {
  RankSchedule s{r_full, r_init, r_target, t_warm, t_init, t_final, total};
  s.validate();
  return s;
}

// Keeps a loaded checkpoint alive for repeated scoring calls.
class ScoringModel {
 public:
  explicit ScoringModel(const std::string& path) : model_(load_model(path)) {}

  double pll(const std::string& sentence) const {
    return pseudo_log_likelihood(model_, sentence);
  }
  int vocab_size() const { return model_.config().vocab_size; }
  int n_layers() const { return model_.n_layers(); }

 private:
  TransformerModel model_;
};

}  // namespace

PYBIND11_MODULE(_loralab, m) {
  m.doc() =
      "Desk-scale workbench for low-rank adaptation strategies and N-best "
      "rescoring robustness";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError",
                                               PyExc_ArithmeticError);

  m.def(
      "main",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv = {"loralab"};
        for (const std::string& a : args) argv.push_back(a.c_str());
        return cli_main(int(argv.size()), argv.data());
      },
      py::arg("args"),
      "Run a workbench subcommand; returns the process exit code");

  m.def("tokenize", &tokenize, py::arg("text"),
        "Lowercased whitespace tokens");
  m.def("phonetic_key", &phonetic_key, py::arg("word"),
        "Metaphone-style key; homophones share keys");

  m.def(
      "wer",
      [](const std::string& ref, const std::string& hyp) {
        EditCount c = wer(ref, hyp);
        return py::make_tuple(c.errors, c.ref_len, c.rate());
      },
      py::arg("ref"), py::arg("hyp"),
      "(errors, reference_length, rate) for one sentence pair");
  m.def("delta_wer", &delta_wer, py::arg("wer"), py::arg("oracle_wer"));
  m.def("nprr", &nprr, py::arg("dwer_clean"), py::arg("dwer_perturbed"),
        "Relative delta-WER growth in percent");

  m.def(
      "rank_at_step",
      [](long t, int r_full, int r_init, int r_target, long t_warm,
         long t_init, long t_final, long total, const std::string& variant) {
        return rank_at_step(
            t, make_schedule(r_full, r_init, r_target, t_warm, t_init,
                             t_final, total),
            rank_variant_from_string(variant));
      },
      py::arg("t"), py::arg("r_full"), py::arg("r_init"), py::arg("r_target"),
      py::arg("t_warm"), py::arg("t_init"), py::arg("t_final"), py::arg("T"),
      py::arg("variant") = "continuous");
  m.def(
      "budget_at_step",
      [](long t, int r_full, int r_init, int r_target, long t_warm,
         long t_init, long t_final, long total, int num_matrices,
         const std::string& variant) {
        return budget_at_step(
            t, make_schedule(r_full, r_init, r_target, t_warm, t_init,
                             t_final, total),
            num_matrices, rank_variant_from_string(variant));
      },
      py::arg("t"), py::arg("r_full"), py::arg("r_init"), py::arg("r_target"),
      py::arg("t_warm"), py::arg("t_init"), py::arg("t_final"), py::arg("T"),
      py::arg("num_matrices"), py::arg("variant") = "continuous");
  m.def("sensitivity", &sensitivity, py::arg("weight"), py::arg("grad"),
        "|w * dL/dw|");

  py::class_<ScoringModel>(m, "Model",
                           "A trained checkpoint opened for scoring")
      .def(py::init<const std::string&>(), py::arg("checkpoint"))
      .def("pll", &ScoringModel::pll, py::arg("sentence"),
           "Pseudo-log-likelihood of a sentence")
      .def_property_readonly("vocab_size", &ScoringModel::vocab_size)
      .def_property_readonly("n_layers", &ScoringModel::n_layers);
}
