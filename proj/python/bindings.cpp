#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "c3/c3score.hpp"
#include "c3/evalsuite.hpp"
#include "c3/json.hpp"
#include "c3/risks.hpp"
#include "c3/synthdata.hpp"
#include "c3/trainer.hpp"

namespace py = pybind11;
using namespace c3;

namespace {

// Dicts cross the boundary as JSON text; the Python wrapper does the
// loads/dumps.
std::string score_json(const std::string& table) {
  const Json j = Json::parse(table);
  return score::score_report(score::table_from_json(j), score::counterfactual_from_json(j)).dump();
}

py::dict batch_dict(const synth::MultiModalBatch& b) {
  py::dict d;
  d["x"] = b.fused();
  d["labels"] = b.labels;
  d["env_tags"] = b.env_tags;
  return d;
}

py::dict generate(const std::string& synth_cfg) {
  const auto ds = synth::generate_dataset(synth_config_from_json(Json::parse(synth_cfg)));
  py::dict d;
  d["train"] = batch_dict(ds.train);
  d["eval"] = batch_dict(ds.eval);
  return d;
}

std::string train_and_evaluate(const std::string& synth_cfg, const std::string& train_cfg, bool baseline,
                               double noise_var, double noise_frac, std::size_t trials, std::uint64_t seed) {
  const auto ds = synth::generate_dataset(synth_config_from_json(Json::parse(synth_cfg)));
  auto cfg = train::train_config_from_json(Json::parse(train_cfg));
  const auto result = baseline ? train::fit_baseline(ds, cfg) : train::train(ds, cfg);
  eval::NoiseConfig noise{noise_var, noise_frac, trials};
  noise.validate();
  Json out = eval::to_json(eval::evaluate(result.model, ds, noise, seed));
  out["epochs_run"] = result.log.size();
  return out.dump();
}

std::string risk_report(const std::vector<double>& c, const std::vector<double>& cbar, const std::vector<int>& y) {
  return train::to_json(risk::make_report(c, cbar, y)).dump();
}

}  // namespace

PYBIND11_MODULE(_c3r, m) {
  // Translators run newest first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("score_json", &score_json, py::arg("table"));
  m.def("generate", &generate, py::arg("synth_config"));
  m.def("train_and_evaluate_json", &train_and_evaluate, py::arg("synth_config"), py::arg("train_config"),
        py::arg("baseline"), py::arg("noise_var"), py::arg("noise_frac"), py::arg("trials"), py::arg("seed"));
  m.def("risk_report_json", &risk_report, py::arg("scores_c"), py::arg("scores_cbar"), py::arg("labels"));
  m.def("distance_correlation", &eval::distance_correlation, py::arg("a"), py::arg("b"));
  m.def("log_confidence_term", &eval::log_confidence_term, py::arg("n"), py::arg("epsilon"));
}
