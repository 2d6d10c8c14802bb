#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "c3/json.hpp"
#include "c3/numkern.hpp"
#include "c3/risks.hpp"
#include "c3/rng.hpp"
#include "c3/synthdata.hpp"
#include "c3/trainer.hpp"

namespace c3::eval {

struct CorrelationReport {
  double snc = 0.0;
  double sc = 0.0;
  double nc = 0.0;
  double sp = 0.0;
};

/// Sample distance correlation between the rows of `a` and `b`, in [0, 1].
/// Returns 0 with a warning when either side has zero distance variance.
double distance_correlation(const Matrix& a, const Matrix& b);

struct NoiseConfig {
  double variance = 10.0;
  double fraction = 0.5;  // probability that a given (sample, modality) is corrupted
  std::size_t trials = 5;

  void validate() const;
};

/// Adds N(0, variance) to every feature of each independently selected
/// (sample, modality) block.
synth::MultiModalBatch inject_noise(const synth::MultiModalBatch& batch, double variance, double fraction,
                                    const CounterRng& rng);

struct AccuracyReport {
  double clean = 0.0;
  double avg = 0.0;
  double worst = 0.0;
  std::vector<double> trials;

  double worst_drop() const { return clean - worst; }
};

/// Maps a fused input matrix to one score per row; class 1 when score >= 0.5.
using Predictor = std::function<std::vector<double>(const Matrix&)>;

double accuracy(std::span<const double> scores, std::span<const int> labels);

/// Trial k uses rng.substream(k).
AccuracyReport accuracy_avg_worst(const Predictor& predict, const synth::MultiModalBatch& batch,
                                  const NoiseConfig& noise, const CounterRng& rng);
AccuracyReport accuracy_avg_worst(const train::C3RModel& model, const synth::MultiModalBatch& batch,
                                  const NoiseConfig& noise, const CounterRng& rng);

/// ld * (2 * suf + mon) + residual over hard risks: the large-t limit of the
/// test-risk bound.
double test_risk_bound(const risk::RiskReport& train_report, double ld, double residual = 0.0);

/// ln(n / epsilon) / n.
double log_confidence_term(std::size_t n, double epsilon);

struct BoundReport {
  double ld_estimate = 1.0;
  double test_bound = 0.0;
  double kl_theta = 0.0;
  double kl_phi = 0.0;
  double log_term = 0.0;
  double suf_gap = 0.0;  // kl_theta + log_term
  double mon_gap = 0.0;  // kl_theta + kl_phi + log_term
  double epsilon = 0.05;
  std::size_t n = 0;
};

/// Generalization-gap bounds for the sufficiency and monotonicity risks. Both
/// exclude an additive constant that has no known value, so they are not
/// certificates.
BoundReport risk_gap_bound(double kl_theta, double kl_phi, std::size_t n, double epsilon);

/// Histogram density-ratio estimate over 8 discrete factor features (SNC,
/// three SC, three NC, sign of the mean SP). Returns the largest smoothed
/// ratio P_train(bin) / P_eval(bin) over bins seen in the eval split.
double estimate_ld(std::span<const synth::FactorRecord> train, std::span<const synth::FactorRecord> eval);

CorrelationReport causal_property_report(const Matrix& representation, const synth::FactorMatrices& factors);
/// Uses posterior means of theta on the eval split.
CorrelationReport causal_property_report(const train::C3RModel& model, const synth::Dataset& ds);

/// Everything `c3r eval` writes.
struct EvalReport {
  CorrelationReport correlation;
  AccuracyReport accuracy;
  NoiseConfig noise;
  BoundReport bounds;
  risk::RiskReport train_risk;
  risk::RiskReport eval_risk;
};

EvalReport evaluate(const train::C3RModel& model, const synth::Dataset& ds, const NoiseConfig& noise,
                    std::uint64_t seed, double epsilon = 0.05);

struct SweepRow {
  std::string param;
  double value = 0.0;
  EvalReport report;
};

/// Retrains with one of lambda1, lambda2, lambda3 or mon_weight set to each
/// value in turn and evaluates every run with the same noise stream.
std::vector<SweepRow> hyperparameter_sweep(const synth::Dataset& ds, const train::TrainConfig& base,
                                           const std::string& param, std::span<const double> values,
                                           const NoiseConfig& noise);

Json to_json(const CorrelationReport& r);
Json to_json(const AccuracyReport& r);
Json to_json(const BoundReport& r);
Json to_json(const EvalReport& r);

/// One row per trial, then a single summary row carrying avg, worst and clean.
std::string accuracy_csv(const AccuracyReport& r);
std::string correlation_csv(const CorrelationReport& r);

}  // namespace c3::eval
