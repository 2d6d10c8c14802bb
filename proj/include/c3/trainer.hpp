#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "c3/errors.hpp"
#include "c3/json.hpp"
#include "c3/numkern.hpp"
#include "c3/risks.hpp"
#include "c3/synthdata.hpp"

namespace c3::train {

struct TrainConfig {
  double lambda1 = 0.01;  // KL of both posteriors
  double lambda2 = 0.55;  // cross-group distance penalty
  double lambda3 = 0.4;   // per-group gradient penalty
  double mon_weight = 1.0;
  double lr = 0.1;
  double momentum = 0.8;
  double weight_decay = 1e-4;
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  std::size_t adversary_steps = 1;  // ascent steps per descent step
  double clip_norm = 10.0;          // global-norm clipping; <= 0 disables
  std::uint64_t seed = 0;
  std::array<Index, 3> hidden{64, 32, 128};
  Index latent = 64;

  void validate() const;
  AdamConfig adam() const;
  EncoderShape shape(Index input_dim) const { return {input_dim, hidden, latent}; }
};

/// ERM comparator: no regularizers, no monotonicity term, no adversary.
TrainConfig baseline_config(TrainConfig cfg);

/// theta and phi share an architecture but never storage.
struct C3RModel {
  EncoderParams theta;
  EncoderParams phi;
  Classifier classifier;

  static C3RModel init(const EncoderShape& shape, std::uint64_t seed);
  const EncoderShape& shape() const { return theta.shape; }
};

struct Minibatch {
  Matrix x;
  std::vector<int> labels;
  std::vector<int> env_tags;

  static Minibatch from(const synth::MultiModalBatch& b);
};

/// Standard-normal draws for the two reparameterized samples.
struct Noise {
  Matrix theta;
  Matrix phi;

  static Noise draw(Index rows, Index latent, CounterRng& rng);
};

struct ObjectiveTerms {
  double suf = 0.0;  // mean logistic loss of c-predictions
  double mon = 0.0;  // mean p * q + (1 - p) * (1 - q)
  double kl_theta = 0.0;
  double kl_phi = 0.0;
  double indep = 0.0;
  double cond = 0.0;
  double loss = 0.0;
};

struct ObjectiveGrads {
  EncoderGrads theta;
  Vector classifier_weight;
  double classifier_bias = 0.0;
  std::optional<EncoderGrads> phi;
};

struct ObjectiveResult {
  ObjectiveTerms terms;
  std::optional<ObjectiveGrads> grads;
};

enum class GradMode { None, Main, All };

/// loss = suf + mon_weight * mon + lambda1 * (kl_theta + kl_phi)
///      + lambda2 * indep + lambda3 * cond,
/// with c and c-bar reparameterized from `noise`. GradMode::Main returns
/// gradients for theta and the classifier, GradMode::All also for phi.
ObjectiveResult c3r_objective(const C3RModel& model, const Minibatch& batch, const Noise& noise,
                              const TrainConfig& cfg, GradMode mode = GradMode::Main);

/// The adversary maximizes mon_weight * mon - lambda1 * kl_phi over phi.
struct AdversaryResult {
  double value = 0.0;
  std::optional<EncoderGrads> grad;  // d value / d phi
};
AdversaryResult adversary_objective(const C3RModel& model, const Minibatch& batch, const Noise& noise,
                                    const TrainConfig& cfg, bool with_grad = true);

struct OptimizerState {
  AdamState main;
  AdamState adversary;
};

/// One ascent step on phi. theta and the classifier are untouched.
void adversary_step(C3RModel& model, OptimizerState& opt, const Minibatch& batch, const Noise& noise,
                    const TrainConfig& cfg);

/// One descent step on (theta, classifier). phi is untouched.
ObjectiveTerms main_step(C3RModel& model, OptimizerState& opt, const Minibatch& batch, const Noise& noise,
                         const TrainConfig& cfg);

/// Hard and surrogate risks using posterior means for c and c-bar.
risk::RiskReport evaluate_risks(const C3RModel& model, const synth::MultiModalBatch& batch);

/// Logistic scores sigma(W . mean_theta(x) + b) per row.
std::vector<double> predict_scores(const C3RModel& model, const Matrix& x);

struct EpochRecord {
  std::size_t epoch = 0;
  ObjectiveTerms terms;  // averaged over the epoch's minibatches
  risk::RiskReport train_risk;
  risk::RiskReport eval_risk;
};

struct TrainResult {
  C3RModel model;
  std::vector<EpochRecord> log;
};

/// Loss became non-finite. Carries the model as of the last completed epoch.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, C3RModel last_good, std::vector<EpochRecord> log)
      : Error(what), last_good(std::move(last_good)), log(std::move(log)) {}
  C3RModel last_good;
  std::vector<EpochRecord> log;
};

TrainResult train(const synth::Dataset& ds, const TrainConfig& cfg);
TrainResult fit_baseline(const synth::Dataset& ds, const TrainConfig& cfg);

Json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const Json& j, TrainConfig base = {});
Json to_json(const risk::RiskReport& r);
Json to_json(const EpochRecord& r);

std::string risk_log_csv(const std::vector<EpochRecord>& log, const TrainConfig& cfg);

/// Directory of C3MM tensors plus manifest.json. `created` is the only
/// field that may differ between otherwise identical runs.
void save_checkpoint(const std::filesystem::path& dir, const C3RModel& model, const TrainConfig& cfg,
                     const std::vector<EpochRecord>& log, const std::string& created = "");
struct Checkpoint {
  C3RModel model;
  TrainConfig config;
  std::size_t epoch = 0;
};
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace c3::train
