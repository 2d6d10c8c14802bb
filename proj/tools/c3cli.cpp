#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "c3/c3score.hpp"
#include "c3/errors.hpp"
#include "c3/evalsuite.hpp"
#include "c3/io.hpp"
#include "c3/json.hpp"
#include "c3/synthdata.hpp"
#include "c3/trainer.hpp"

namespace fs = std::filesystem;
using namespace c3;

namespace {

constexpr int kExitUser = 2;
constexpr int kExitNumeric = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string data;
  std::string checkpoint;
  std::string table;
  std::optional<double> omega;
  std::optional<std::size_t> epochs;
  std::optional<double> lambda1, lambda2, lambda3, lr;
  std::optional<std::size_t> batch_size;
  std::optional<double> noise_var, noise_frac;
  std::optional<std::size_t> trials;
  bool baseline = false;
  std::vector<std::string> runs;
  std::string sweep;
  std::vector<double> values;
};

Json load_config(const Options& o) {
  if (o.config.empty()) return Json::object();
  try {
    Json j = Json::parse(io::read_text(o.config));
    if (!j.is_object()) throw ConfigError(o.config + ": top level must be an object");
    reject_unknown_keys(j, {"synth", "train", "eval"}, o.config);
    return j;
  } catch (const Json::parse_error& e) {
    throw ConfigError(o.config + ": " + e.what());
  }
}

Json section(const Json& j, const char* key) { return j.contains(key) ? j[key] : Json::object(); }

synth::SynthConfig resolve_synth(const Options& o, const Json& file) {
  auto cfg = synth_config_from_json(section(file, "synth"));
  if (o.seed) cfg.seed = *o.seed;
  if (o.omega) cfg.omega = *o.omega;
  cfg.validate();
  return cfg;
}

train::TrainConfig resolve_train(const Options& o, const Json& file) {
  auto cfg = train::train_config_from_json(section(file, "train"));
  if (o.seed) cfg.seed = *o.seed;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.lambda1) cfg.lambda1 = *o.lambda1;
  if (o.lambda2) cfg.lambda2 = *o.lambda2;
  if (o.lambda3) cfg.lambda3 = *o.lambda3;
  if (o.lr) cfg.lr = *o.lr;
  if (o.batch_size) cfg.batch_size = *o.batch_size;
  if (o.baseline) cfg = train::baseline_config(cfg);
  cfg.validate();
  return cfg;
}

struct EvalSettings {
  eval::NoiseConfig noise;
  double epsilon = 0.05;
  std::uint64_t seed = 0;
};

EvalSettings resolve_eval(const Options& o, const Json& file) {
  EvalSettings s;
  const Json e = section(file, "eval");
  reject_unknown_keys(e, {"noise_var", "noise_frac", "trials", "epsilon", "seed"}, "eval config");
  if (e.contains("noise_var")) s.noise.variance = json_number(e, "noise_var");
  if (e.contains("noise_frac")) s.noise.fraction = json_number(e, "noise_frac");
  if (e.contains("trials")) s.noise.trials = json_uint(e, "trials");
  if (e.contains("epsilon")) s.epsilon = json_number(e, "epsilon");
  if (e.contains("seed")) s.seed = json_uint(e, "seed");
  if (o.noise_var) s.noise.variance = *o.noise_var;
  if (o.noise_frac) s.noise.fraction = *o.noise_frac;
  if (o.trials) s.noise.trials = *o.trials;
  if (o.seed) s.seed = *o.seed;
  s.noise.validate();
  if (!(s.epsilon > 0.0 && s.epsilon < 1.0)) throw ConfigError("eval epsilon must lie in (0,1)");
  return s;
}

Json to_json(const EvalSettings& s) {
  return {{"noise_var", s.noise.variance}, {"noise_frac", s.noise.fraction}, {"trials", s.noise.trials},
          {"epsilon", s.epsilon}, {"seed", s.seed}};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void require_out(const Options& o) {
  if (o.out.empty()) throw ConfigError("--out is required");
}

int cmd_gen(const Options& o) {
  require_out(o);
  const auto cfg = resolve_synth(o, load_config(o));
  synth::save_dataset(synth::generate_dataset(cfg), o.out);
  std::cout << "wrote dataset to " << o.out << "\n";
  return 0;
}

int cmd_train(const Options& o) {
  require_out(o);
  if (o.data.empty()) throw ConfigError("--data is required");
  const auto cfg = resolve_train(o, load_config(o));
  const auto ds = synth::load_dataset(o.data);
  const fs::path out = o.out;
  io::ensure_directory(out);
  io::write_text(out / "resolved_config.json",
                 Json{{"train", train::to_json(cfg)}, {"baseline", o.baseline}}.dump(2) + "\n");
  try {
    const auto res = train::train(ds, cfg);
    train::save_checkpoint(out / "checkpoint", res.model, cfg, res.log, utc_timestamp());
    io::write_text(out / "risk_log.csv", train::risk_log_csv(res.log, cfg));
  } catch (const train::DivergenceError& e) {
    train::save_checkpoint(out / "checkpoint", e.last_good, cfg, e.log, utc_timestamp());
    io::write_text(out / "risk_log.csv", train::risk_log_csv(e.log, cfg));
    throw;
  }
  std::cout << "wrote checkpoint and risk log to " << o.out << "\n";
  return 0;
}

int cmd_score(const Options& o) {
  Json j;
  try {
    j = Json::parse(io::read_text(o.table));
  } catch (const Json::parse_error& e) {
    throw ConfigError(o.table + ": " + e.what());
  }
  const auto table = score::table_from_json(j);
  const auto cf = score::counterfactual_from_json(j);
  const std::string text = score::score_report(table, cf).dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    io::write_text(o.out, text);
  }
  return 0;
}

int cmd_eval(const Options& o) {
  require_out(o);
  if (o.data.empty() || o.checkpoint.empty()) throw ConfigError("--data and --checkpoint are required");
  const auto settings = resolve_eval(o, load_config(o));
  const auto ck = train::load_checkpoint(o.checkpoint);
  const auto ds = synth::load_dataset(o.data);
  const auto report = eval::evaluate(ck.model, ds, settings.noise, settings.seed, settings.epsilon);

  const fs::path out = o.out;
  io::ensure_directory(out);
  io::write_text(out / "resolved_config.json",
                 Json{{"eval", to_json(settings)}, {"train", train::to_json(ck.config)}}.dump(2) + "\n");
  io::write_text(out / "report.json", eval::to_json(report).dump(2) + "\n");
  io::write_text(out / "correlation.csv", eval::correlation_csv(report.correlation));
  io::write_text(out / "accuracy.csv", eval::accuracy_csv(report.accuracy));
  io::write_text(out / "bounds.json", eval::to_json(report.bounds).dump(2) + "\n");
  std::cout << "wrote evaluation reports to " << o.out << "\n";
  return 0;
}

// Grouped bar chart: one group per row label, one bar per series.
std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& rows,
                          const std::vector<std::string>& series, const std::vector<std::vector<double>>& values) {
  const int bar = 14, gap = 18, left = 50, top = 30, height = 200;
  const int group = static_cast<int>(series.size()) * bar + gap;
  const int width = left + static_cast<int>(rows.size()) * group + 120;
  const char* colors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << top + height + 60 << "\">\n";
  s << "<text x=\"" << left << "\" y=\"18\" font-size=\"13\">" << title << "</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top + height << "\" x2=\"" << width - 110 << "\" y2=\"" << top + height
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = t / 4.0;
    const int y = top + height - static_cast<int>(v * height);
    s << "<text x=\"10\" y=\"" << y + 4 << "\" font-size=\"10\">" << io::format_double(v) << "</text>\n";
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int x0 = left + static_cast<int>(r) * group + gap / 2;
    for (std::size_t k = 0; k < series.size(); ++k) {
      const double v = std::clamp(values[r][k], 0.0, 1.0);
      const int h = static_cast<int>(v * height);
      s << "<rect x=\"" << x0 + static_cast<int>(k) * bar << "\" y=\"" << top + height - h << "\" width=\"" << bar - 2
        << "\" height=\"" << h << "\" fill=\"" << colors[k % 6] << "\"/>\n";
    }
    s << "<text x=\"" << x0 << "\" y=\"" << top + height + 14 << "\" font-size=\"10\">" << rows[r] << "</text>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const int y = top + 12 + static_cast<int>(k) * 16;
    s << "<rect x=\"" << width - 100 << "\" y=\"" << y - 10 << "\" width=\"10\" height=\"10\" fill=\"" << colors[k % 6]
      << "\"/><text x=\"" << width - 85 << "\" y=\"" << y << "\" font-size=\"11\">" << series[k] << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

const std::vector<std::string> kSummaryColumns = {"dcorr_snc", "dcorr_sc", "dcorr_nc", "dcorr_sp",
                                                  "clean", "avg", "worst", "eval_suf_plus_nec", "test_bound_ld1"};

std::vector<double> summary_values(const Json& report) {
  const Json& c = report.at("correlation");
  const Json& a = report.at("accuracy");
  return {c.at("dcorr_snc").get<double>(), c.at("dcorr_sc").get<double>(), c.at("dcorr_nc").get<double>(),
          c.at("dcorr_sp").get<double>(), a.at("clean").get<double>(), a.at("avg").get<double>(),
          a.at("worst").get<double>(), report.at("eval_suf_plus_nec").get<double>(),
          report.at("bounds").at("test_bound_ld1").get<double>()};
}

void write_summary(const fs::path& out, const std::string& stem, const std::string& key_column,
                   const std::vector<std::string>& keys, const std::vector<Json>& reports) {
  std::string csv = key_column;
  for (const auto& c : kSummaryColumns) csv += "," + c;
  csv += "\n";
  std::vector<std::vector<double>> bars;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto v = summary_values(reports[i]);
    csv += keys[i];
    for (double x : v) csv += "," + io::format_double(x);
    csv += "\n";
    bars.push_back({v[0], v[1], v[2], v[3]});
  }
  io::write_text(out / (stem + ".csv"), csv);
  io::write_text(out / (stem + ".svg"),
                 bar_chart_svg("distance correlation with ground-truth factors", keys, {"SNC", "SC", "NC", "SP"}, bars));
}

int cmd_report(const Options& o) {
  require_out(o);
  const fs::path out = o.out;
  io::ensure_directory(out);
  if (!o.runs.empty()) {
    std::vector<Json> reports;
    std::vector<std::string> names;
    for (const auto& run : o.runs) {
      try {
        reports.push_back(Json::parse(io::read_text(fs::path(run) / "report.json")));
      } catch (const Json::parse_error& e) {
        throw ConfigError(run + "/report.json: " + e.what());
      }
      names.push_back(fs::path(run).filename().string());
    }
    write_summary(out, "runs", "run", names, reports);
  }
  if (!o.sweep.empty()) {
    if (o.data.empty() || o.values.empty()) throw ConfigError("--sweep needs --data and --values");
    const Json file = load_config(o);
    const auto cfg = resolve_train(o, file);
    const auto settings = resolve_eval(o, file);
    const auto rows = eval::hyperparameter_sweep(synth::load_dataset(o.data), cfg, o.sweep, o.values, settings.noise);
    std::vector<Json> reports;
    std::vector<std::string> keys;
    for (const auto& r : rows) {
      reports.push_back(eval::to_json(r.report));
      keys.push_back(io::format_double(r.value));
    }
    write_summary(out, "sweep_" + o.sweep, o.sweep, keys, reports);
  }
  if (o.runs.empty() && o.sweep.empty()) throw ConfigError("report needs --runs or --sweep");
  std::cout << "wrote report to " << o.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal complete cause scoring, training and evaluation"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "JSON config file with synth/train/eval sections");
    cmd->add_option("--seed", o.seed, "Seed for every random stream of the command");
    cmd->add_option("--out", o.out, "Output directory (score: output file)");
  };
  auto add_train_flags = [&](CLI::App* cmd) {
    cmd->add_option("--epochs", o.epochs);
    cmd->add_option("--lambda1", o.lambda1);
    cmd->add_option("--lambda2", o.lambda2);
    cmd->add_option("--lambda3", o.lambda3);
    cmd->add_option("--lr", o.lr);
    cmd->add_option("--batch-size", o.batch_size);
    cmd->add_flag("--baseline", o.baseline, "Plain ERM: no regularizers, no monotonicity term, no adversary");
  };
  auto add_noise_flags = [&](CLI::App* cmd) {
    cmd->add_option("--noise-var", o.noise_var);
    cmd->add_option("--noise-frac", o.noise_frac);
    cmd->add_option("--trials", o.trials);
  };

  auto* gen = app.add_subcommand("gen", "Generate a synthetic multimodal dataset");
  add_common(gen);
  gen->add_option("--omega", o.omega, "Spurious strength");

  auto* tr = app.add_subcommand("train", "Train a model on a dataset directory");
  add_common(tr);
  tr->add_option("--data", o.data, "Dataset directory");
  add_train_flags(tr);

  auto* sc = app.add_subcommand("score", "Score a causal table");
  add_common(sc);
  sc->add_option("table", o.table, "Table JSON file")->required();

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_common(ev);
  ev->add_option("--data", o.data, "Dataset directory");
  ev->add_option("--checkpoint", o.checkpoint, "Checkpoint directory");
  add_noise_flags(ev);

  auto* rep = app.add_subcommand("report", "Aggregate eval runs or run a hyperparameter sweep");
  add_common(rep);
  rep->add_option("--runs", o.runs, "Eval output directories");
  rep->add_option("--sweep", o.sweep, "lambda1, lambda2, lambda3 or mon_weight");
  rep->add_option("--values", o.values, "Sweep values")->delimiter(',');
  rep->add_option("--data", o.data, "Dataset directory for the sweep");
  add_train_flags(rep);
  add_noise_flags(rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUser;
  }

  try {
    if (gen->parsed()) return cmd_gen(o);
    if (tr->parsed()) return cmd_train(o);
    if (sc->parsed()) return cmd_score(o);
    if (ev->parsed()) return cmd_eval(o);
    return cmd_report(o);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const train::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUser;
  }
}
