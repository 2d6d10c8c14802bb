#include "c3/evalsuite.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "c3/errors.hpp"
#include "c3/io.hpp"
#include "c3/regularizers.hpp"

namespace c3::eval {
namespace {

Matrix centered_distances(const Matrix& x) {
  const Index n = x.rows();
  Matrix d(n, n);
  for (Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).norm();
  }
  const Vector row_mean = d.rowwise().mean();
  const double grand = row_mean.mean();
  // d is symmetric, so column means equal row means.
  d.colwise() -= row_mean;
  d.rowwise() -= row_mean.transpose();
  d.array() += grand;
  return d;
}

}  // namespace

double distance_correlation(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("distance_correlation: row counts differ");
  if (a.rows() < 4) throw ContractError("distance_correlation: need at least 4 rows");
  require_finite(a, "distance_correlation: a");
  require_finite(b, "distance_correlation: b");
  const Matrix da = centered_distances(a);
  const Matrix db = centered_distances(b);
  const double vab = (da.array() * db.array()).mean();
  const double vaa = da.array().square().mean();
  const double vbb = db.array().square().mean();
  if (vaa <= 0.0 || vbb <= 0.0) {
    warn("distance_correlation: constant input; returning 0");
    return 0.0;
  }
  return std::clamp(std::sqrt(std::max(vab, 0.0) / std::sqrt(vaa * vbb)), 0.0, 1.0);
}

void NoiseConfig::validate() const {
  if (!(variance >= 0.0) || !std::isfinite(variance)) throw ConfigError("noise variance must be >= 0");
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("noise fraction must lie in [0,1]");
  if (trials == 0) throw ConfigError("noise trials must be >= 1");
}

synth::MultiModalBatch inject_noise(const synth::MultiModalBatch& batch, double variance, double fraction,
                                    const CounterRng& rng) {
  NoiseConfig{variance, fraction, 1}.validate();
  synth::MultiModalBatch out = batch;
  if (variance == 0.0 || fraction == 0.0) return out;
  const double sd = std::sqrt(variance);
  for (Index i = 0; i < out.rows(); ++i) {
    CounterRng r = rng.substream(static_cast<std::uint64_t>(i));
    for (auto& m : out.modalities) {
      if (!r.bernoulli(fraction)) continue;
      for (Index j = 0; j < m.cols(); ++j) m(i, j) += sd * r.normal();
    }
  }
  return out;
}

double accuracy(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("accuracy: length mismatch");
  if (scores.empty()) throw ContractError("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) hits += risk::predicted_class(scores[i]) == labels[i];
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

AccuracyReport accuracy_avg_worst(const Predictor& predict, const synth::MultiModalBatch& batch,
                                  const NoiseConfig& noise, const CounterRng& rng) {
  noise.validate();
  batch.validate();
  AccuracyReport r;
  r.clean = accuracy(predict(batch.fused()), batch.labels);
  for (std::size_t k = 0; k < noise.trials; ++k) {
    const auto noisy = inject_noise(batch, noise.variance, noise.fraction, rng.substream(k));
    r.trials.push_back(accuracy(predict(noisy.fused()), batch.labels));
  }
  r.avg = std::accumulate(r.trials.begin(), r.trials.end(), 0.0) / static_cast<double>(r.trials.size());
  r.worst = *std::min_element(r.trials.begin(), r.trials.end());
  return r;
}

AccuracyReport accuracy_avg_worst(const train::C3RModel& model, const synth::MultiModalBatch& batch,
                                  const NoiseConfig& noise, const CounterRng& rng) {
  return accuracy_avg_worst([&](const Matrix& x) { return train::predict_scores(model, x); }, batch, noise, rng);
}

double test_risk_bound(const risk::RiskReport& train_report, double ld, double residual) {
  if (!(ld >= 1.0)) throw ContractError("test_risk_bound: ld must be >= 1");
  return ld * risk::c3_bound(train_report.suf.hard, train_report.mon.hard) + residual;
}

double log_confidence_term(std::size_t n, double epsilon) {
  if (n == 0) throw ContractError("log_confidence_term: n must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ContractError("log_confidence_term: epsilon must lie in (0,1)");
  const auto nd = static_cast<double>(n);
  return std::log(nd / epsilon) / nd;
}

BoundReport risk_gap_bound(double kl_theta, double kl_phi, std::size_t n, double epsilon) {
  BoundReport r;
  r.kl_theta = kl_theta;
  r.kl_phi = kl_phi;
  r.n = n;
  r.epsilon = epsilon;
  r.log_term = log_confidence_term(n, epsilon);
  r.suf_gap = kl_theta + r.log_term;
  r.mon_gap = kl_theta + kl_phi + r.log_term;
  return r;
}

double estimate_ld(std::span<const synth::FactorRecord> train, std::span<const synth::FactorRecord> eval) {
  if (train.empty() || eval.empty()) throw ContractError("estimate_ld: empty split");
  constexpr std::size_t kBins = 1u << 8;
  auto bin = [](const synth::FactorRecord& f) {
    std::size_t b = f.snc[0];
    for (std::size_t k = 0; k < synth::kModalities; ++k) b = (b << 1) | f.sc[k];
    for (std::size_t k = 0; k < synth::kModalities; ++k) b = (b << 1) | f.nc[k];
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& block : f.sp) {
      sum += std::accumulate(block.begin(), block.end(), 0.0);
      count += block.size();
    }
    return (b << 1) | (count > 0 && sum > 0.0 ? 1u : 0u);
  };
  std::array<double, kBins> tr{};
  std::array<double, kBins> te{};
  for (const auto& f : train) tr[bin(f)] += 1.0;
  for (const auto& f : eval) te[bin(f)] += 1.0;
  const double ntr = static_cast<double>(train.size()) + kBins;
  const double nte = static_cast<double>(eval.size()) + kBins;
  double ld = 1.0;
  for (std::size_t b = 0; b < kBins; ++b)
    if (te[b] > 0.0) ld = std::max(ld, ((tr[b] + 1.0) / ntr) / ((te[b] + 1.0) / nte));
  return ld;
}

CorrelationReport causal_property_report(const Matrix& representation, const synth::FactorMatrices& f) {
  const Index n = representation.rows();
  if (f.snc.rows() != n || f.sc.rows() != n || f.nc.rows() != n || f.sp.rows() != n)
    throw ContractError("causal_property_report: factor matrices missing or misaligned");
  return {distance_correlation(representation, f.snc), distance_correlation(representation, f.sc),
          distance_correlation(representation, f.nc), distance_correlation(representation, f.sp)};
}

CorrelationReport causal_property_report(const train::C3RModel& model, const synth::Dataset& ds) {
  if (ds.eval_factors.size() != static_cast<std::size_t>(ds.eval.rows()))
    throw ContractError("causal_property_report: dataset has no ground-truth factors");
  const EncoderOutput enc = encode_forward(model.theta, ds.eval.fused());
  return causal_property_report(enc.mean, synth::factor_matrices(ds.eval_factors));
}

EvalReport evaluate(const train::C3RModel& model, const synth::Dataset& ds, const NoiseConfig& noise,
                    std::uint64_t seed, double epsilon) {
  const Index input = ds.eval.fused().cols();
  if (input != model.shape().input)
    throw DimensionError("checkpoint expects " + std::to_string(model.shape().input) + " input features, dataset has " +
                         std::to_string(input));
  EvalReport r;
  r.noise = noise;
  r.correlation = causal_property_report(model, ds);
  r.accuracy = accuracy_avg_worst(model, ds.eval, noise, CounterRng(seed).substream("eval.noise"));
  r.train_risk = train::evaluate_risks(model, ds.train);
  r.eval_risk = train::evaluate_risks(model, ds.eval);

  const Matrix x = ds.train.fused();
  const EncoderOutput et = encode_forward(model.theta, x);
  const EncoderOutput ep = encode_forward(model.phi, x);
  const double kl_t = reg::kl_term({et.mean, et.logvar}).value;
  const double kl_p = reg::kl_term({ep.mean, ep.logvar}).value;
  r.bounds = risk_gap_bound(kl_t, kl_p, static_cast<std::size_t>(x.rows()), epsilon);
  r.bounds.ld_estimate = estimate_ld(ds.train_factors, ds.eval_factors);
  // Both splits come from one distribution, so the bound is evaluated at ld = 1.
  r.bounds.test_bound = test_risk_bound(r.train_risk, 1.0);
  return r;
}

std::vector<SweepRow> hyperparameter_sweep(const synth::Dataset& ds, const train::TrainConfig& base,
                                           const std::string& param, std::span<const double> values,
                                           const NoiseConfig& noise) {
  double train::TrainConfig::*field = nullptr;
  if (param == "lambda1") field = &train::TrainConfig::lambda1;
  else if (param == "lambda2") field = &train::TrainConfig::lambda2;
  else if (param == "lambda3") field = &train::TrainConfig::lambda3;
  else if (param == "mon_weight") field = &train::TrainConfig::mon_weight;
  else throw ConfigError("sweep parameter must be lambda1, lambda2, lambda3 or mon_weight, got '" + param + "'");
  std::vector<SweepRow> rows;
  for (double v : values) {
    train::TrainConfig cfg = base;
    cfg.*field = v;
    const auto fit = train::train(ds, cfg);
    rows.push_back({param, v, evaluate(fit.model, ds, noise, cfg.seed)});
  }
  return rows;
}

Json to_json(const CorrelationReport& r) {
  return {{"dcorr_snc", r.snc}, {"dcorr_sc", r.sc}, {"dcorr_nc", r.nc}, {"dcorr_sp", r.sp}};
}

Json to_json(const AccuracyReport& r) {
  return {{"clean", r.clean}, {"avg", r.avg}, {"worst", r.worst}, {"worst_drop", r.worst_drop()}, {"trials", r.trials}};
}

Json to_json(const BoundReport& r) {
  Json j;
  j["ld_histogram"] = r.ld_estimate;
  j["test_bound_ld1"] = r.test_bound;
  j["kl_theta"] = r.kl_theta;
  j["kl_phi"] = r.kl_phi;
  j["log_term"] = r.log_term;
  j["suf_gap_minus_constant"] = r.suf_gap;
  j["mon_gap_minus_constant"] = r.mon_gap;
  j["epsilon"] = r.epsilon;
  j["n"] = r.n;
  j["note"] = "gap bounds exclude an unidentified O(1) constant";
  return j;
}

Json to_json(const EvalReport& r) {
  Json j;
  j["correlation"] = to_json(r.correlation);
  j["accuracy"] = to_json(r.accuracy);
  j["noise"] = {{"variance", r.noise.variance}, {"fraction", r.noise.fraction}, {"trials", r.noise.trials}};
  j["bounds"] = to_json(r.bounds);
  j["train_risk"] = train::to_json(r.train_risk);
  j["eval_risk"] = train::to_json(r.eval_risk);
  j["eval_suf_plus_nec"] = r.eval_risk.suf.hard + r.eval_risk.nec.hard;
  return j;
}

std::string accuracy_csv(const AccuracyReport& r) {
  const auto f = io::format_double;
  std::string out = "trial,accuracy,avg,worst,clean\n";
  for (std::size_t k = 0; k < r.trials.size(); ++k) out += std::to_string(k) + ',' + f(r.trials[k]) + ",,,\n";
  out += "summary,," + f(r.avg) + ',' + f(r.worst) + ',' + f(r.clean) + '\n';
  return out;
}

std::string correlation_csv(const CorrelationReport& r) {
  const auto f = io::format_double;
  return "factor,dcorr\nsnc," + f(r.snc) + "\nsc," + f(r.sc) + "\nnc," + f(r.nc) + "\nsp," + f(r.sp) + '\n';
}

}  // namespace c3::eval
