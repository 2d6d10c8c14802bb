#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>
#include <utility>

#include "c3/trainer.hpp"

using namespace c3;
using namespace c3::train;

namespace {

TrainConfig small_config(std::uint64_t seed = 0) {
  TrainConfig cfg;
  cfg.hidden = {6, 5, 7};
  cfg.latent = 4;
  cfg.lr = 1e-3;
  cfg.batch_size = 16;
  cfg.epochs = 3;
  cfg.seed = seed;
  return cfg;
}

synth::Dataset small_dataset(std::uint64_t seed = 0) {
  synth::SynthConfig sc;
  sc.n_train = 48;
  sc.n_eval = 20;
  sc.seed = seed;
  return synth::generate_dataset(sc);
}

Minibatch random_batch(CounterRng& rng, Index rows, Index cols) {
  Minibatch b;
  b.x = Matrix(rows, cols);
  for (Index i = 0; i < b.x.size(); ++i) b.x.data()[i] = rng.normal();
  for (Index i = 0; i < rows; ++i) {
    b.labels.push_back(rng.bernoulli(0.5));
    b.env_tags.push_back(static_cast<int>(i % 3));
  }
  return b;
}

std::vector<double> all_params(const C3RModel& m) {
  auto out = flatten(std::as_const(m.theta).tensors());
  for (double v : flatten(std::as_const(m.phi).tensors())) out.push_back(v);
  for (double v : flatten(std::as_const(m.classifier).tensors())) out.push_back(v);
  return out;
}

struct Fixture {
  TrainConfig cfg;
  C3RModel model;
  Minibatch batch;
  Noise noise;
};

Fixture make_fixture(std::uint64_t seed, Index rows = 10, Index input = 8) {
  Fixture f;
  f.cfg = small_config(seed);
  f.model = C3RModel::init(f.cfg.shape(input), seed);
  CounterRng rng(seed + 100);
  f.batch = random_batch(rng, rows, input);
  CounterRng nr = rng.substream("noise");
  f.noise = Noise::draw(rows, f.cfg.latent, nr);
  return f;
}

double loss_of(const Fixture& f, const TrainConfig& cfg) {
  return c3r_objective(f.model, f.batch, f.noise, cfg, GradMode::None).terms.loss;
}

}  // namespace

TEST(Objective, ZeroLambdasLeaveSufPlusMon) {
  Fixture f = make_fixture(1);
  f.cfg.lambda1 = f.cfg.lambda2 = f.cfg.lambda3 = 0.0;
  const ObjectiveTerms t = c3r_objective(f.model, f.batch, f.noise, f.cfg, GradMode::None).terms;
  EXPECT_EQ(t.loss, t.suf + t.mon);
}

TEST(Objective, AffineInEachLambda) {
  Fixture f = make_fixture(2);
  const ObjectiveTerms t = c3r_objective(f.model, f.batch, f.noise, f.cfg, GradMode::None).terms;
  const double delta = 0.37;
  const double base = t.loss;
  TrainConfig c = f.cfg;
  c.lambda1 += delta;
  EXPECT_NEAR((loss_of(f, c) - base) / delta, t.kl_theta + t.kl_phi, 1e-10);
  c = f.cfg;
  c.lambda2 += delta;
  EXPECT_NEAR((loss_of(f, c) - base) / delta, t.indep, 1e-10);
  c = f.cfg;
  c.lambda3 += delta;
  EXPECT_NEAR((loss_of(f, c) - base) / delta, t.cond, 1e-10);
}

TEST(Objective, DuplicatedAndPermutedRowsGiveSameLoss) {
  Fixture f = make_fixture(3);
  const double base = loss_of(f, f.cfg);

  Fixture dup = f;
  const Index n = f.batch.x.rows();
  dup.batch.x.resize(2 * n, f.batch.x.cols());
  dup.batch.x << f.batch.x, f.batch.x;
  dup.noise.theta.resize(2 * n, f.cfg.latent);
  dup.noise.theta << f.noise.theta, f.noise.theta;
  dup.noise.phi.resize(2 * n, f.cfg.latent);
  dup.noise.phi << f.noise.phi, f.noise.phi;
  for (Index i = 0; i < n; ++i) {
    dup.batch.labels.push_back(f.batch.labels[i]);
    dup.batch.env_tags.push_back(f.batch.env_tags[i]);
  }
  EXPECT_NEAR(loss_of(dup, f.cfg), base, 1e-12 * std::abs(base));

  Fixture rev = f;
  for (Index i = 0; i < n; ++i) {
    const Index j = n - 1 - i;
    rev.batch.x.row(i) = f.batch.x.row(j);
    rev.noise.theta.row(i) = f.noise.theta.row(j);
    rev.noise.phi.row(i) = f.noise.phi.row(j);
    rev.batch.labels[i] = f.batch.labels[j];
    rev.batch.env_tags[i] = f.batch.env_tags[j];
  }
  EXPECT_NEAR(loss_of(rev, f.cfg), base, 1e-12 * std::abs(base));
}

TEST(Objective, MissingEnvTagsIsConfigError) {
  Fixture f = make_fixture(4);
  f.batch.env_tags.clear();
  EXPECT_THROW(c3r_objective(f.model, f.batch, f.noise, f.cfg), ConfigError);
}

TEST(Objective, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Fixture f = make_fixture(seed);
    const ObjectiveResult res = c3r_objective(f.model, f.batch, f.noise, f.cfg, GradMode::All);
    ASSERT_TRUE(res.grads && res.grads->phi);
    const ObjectiveGrads& g = *res.grads;
    auto loss = [&] { return loss_of(f, f.cfg); };
    auto check = [&](std::vector<NamedTensor> params, std::vector<NamedConstTensor> grads) {
      for (std::size_t t = 0; t < params.size(); ++t) {
        const GradCheckResult r = check_gradients(loss, params[t].data, grads[t].data);
        EXPECT_LT(r.max_rel_error, 1e-4) << "seed " << seed << " " << params[t].name;
      }
    };
    check(f.model.theta.tensors(), std::as_const(g.theta).tensors());
    check(f.model.phi.tensors(), std::as_const(*g.phi).tensors());
    const std::vector<NamedConstTensor> clf{{"weight", {g.classifier_weight.data(), std::size_t(f.cfg.latent)}},
                                            {"bias", {&g.classifier_bias, 1}}};
    check(f.model.classifier.tensors(), clf);
  }
}

TEST(Adversary, ZeroGradientLeavesPhiUnchanged) {
  Fixture f = make_fixture(5);
  f.model.classifier.weight.setZero();
  f.cfg.lambda1 = 0.0;
  f.cfg.weight_decay = 0.0;
  const auto before = flatten(std::as_const(f.model.phi).tensors());
  OptimizerState opt;
  adversary_step(f.model, opt, f.batch, f.noise, f.cfg);
  EXPECT_EQ(flatten(std::as_const(f.model.phi).tensors()), before);
}

TEST(Adversary, StepsTouchOnlyPhi) {
  Fixture f = make_fixture(6);
  const auto theta = flatten(std::as_const(f.model.theta).tensors());
  const auto clf = flatten(std::as_const(f.model.classifier).tensors());
  const auto phi = flatten(std::as_const(f.model.phi).tensors());
  OptimizerState opt;
  adversary_step(f.model, opt, f.batch, f.noise, f.cfg);
  EXPECT_EQ(flatten(std::as_const(f.model.theta).tensors()), theta);
  EXPECT_EQ(flatten(std::as_const(f.model.classifier).tensors()), clf);
  EXPECT_NE(flatten(std::as_const(f.model.phi).tensors()), phi);

  const auto phi_after = flatten(std::as_const(f.model.phi).tensors());
  main_step(f.model, opt, f.batch, f.noise, f.cfg);
  EXPECT_EQ(flatten(std::as_const(f.model.phi).tensors()), phi_after);
  EXPECT_NE(flatten(std::as_const(f.model.theta).tensors()), theta);
}

TEST(Adversary, FiveAscentStepsRaiseMonotonicityRisk) {
  int failures = 0;
  const int seeds = 20;
  for (int seed = 0; seed < seeds; ++seed) {
    Fixture f = make_fixture(static_cast<std::uint64_t>(seed), 32);
    const double start = c3r_objective(f.model, f.batch, f.noise, f.cfg, GradMode::None).terms.mon;
    OptimizerState opt;
    for (int k = 0; k < 5; ++k) adversary_step(f.model, opt, f.batch, f.noise, f.cfg);
    const double end = c3r_objective(f.model, f.batch, f.noise, f.cfg, GradMode::None).terms.mon;
    if (end < start) ++failures;
  }
  EXPECT_LT(failures, seeds / 10);
}

TEST(MainStep, NonFiniteLossIsNumericError) {
  Fixture f = make_fixture(7);
  f.batch.x(0, 0) = std::numeric_limits<double>::infinity();
  OptimizerState opt;
  EXPECT_THROW(main_step(f.model, opt, f.batch, f.noise, f.cfg), Error);
}

TEST(Train, ZeroEpochsReturnsInitializedModel) {
  const synth::Dataset ds = small_dataset();
  TrainConfig cfg = small_config(9);
  cfg.epochs = 0;
  const TrainResult r = train::train(ds, cfg);
  EXPECT_TRUE(r.log.empty());
  EXPECT_EQ(all_params(r.model), all_params(C3RModel::init(cfg.shape(60), 9)));
}

TEST(Train, SameSeedIsBitwiseIdentical) {
  const synth::Dataset ds = small_dataset();
  const TrainConfig cfg = small_config(10);
  const TrainResult a = train::train(ds, cfg);
  const TrainResult b = train::train(ds, cfg);
  EXPECT_EQ(all_params(a.model), all_params(b.model));
  EXPECT_EQ(risk_log_csv(a.log, cfg), risk_log_csv(b.log, cfg));
  ASSERT_EQ(a.log.size(), 3u);
  EXPECT_EQ(a.log.back().epoch, 3u);

  TrainConfig other = cfg;
  other.seed = 11;
  EXPECT_NE(all_params(train::train(ds, other).model), all_params(a.model));
}

TEST(Train, DivergenceKeepsLastGoodModel) {
  const synth::Dataset ds = small_dataset();
  TrainConfig cfg = small_config(12);
  cfg.lr = 1e200;
  cfg.clip_norm = 0.0;
  try {
    train::train(ds, cfg);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    for (double v : all_params(e.last_good)) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(Baseline, MatchesTrainWithTermsDisabled) {
  const synth::Dataset ds = small_dataset(1);
  const TrainConfig cfg = small_config(13);
  const TrainResult base = fit_baseline(ds, cfg);
  TrainConfig zeroed = cfg;
  zeroed.lambda1 = zeroed.lambda2 = zeroed.lambda3 = 0.0;
  zeroed.mon_weight = 0.0;
  zeroed.adversary_steps = 0;
  const TrainResult manual = train::train(ds, zeroed);
  const auto a = all_params(base.model), b = all_params(manual.model);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i], b[i], 1e-12);
  const auto again = all_params(fit_baseline(ds, cfg).model);
  EXPECT_EQ(again, a);
}

TEST(Baseline, LambdaColumnsAreZero) {
  const TrainConfig cfg = baseline_config(small_config());
  EXPECT_EQ(cfg.lambda1, 0.0);
  EXPECT_EQ(cfg.lambda2, 0.0);
  EXPECT_EQ(cfg.lambda3, 0.0);
  EXPECT_EQ(cfg.adversary_steps, 0u);
  const TrainResult r = fit_baseline(small_dataset(), small_config());
  const std::string csv = risk_log_csv(r.log, cfg);
  const auto row = csv.substr(csv.find('\n') + 1);
  std::vector<std::string> cells;
  std::stringstream ss(row.substr(0, row.find('\n')));
  for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
  ASSERT_GE(cells.size(), 11u);
  EXPECT_EQ(cells[8], "0");
  EXPECT_EQ(cells[9], "0");
  EXPECT_EQ(cells[10], "0");
}

TEST(Checkpoint, RoundTrip) {
  const synth::Dataset ds = small_dataset();
  const TrainConfig cfg = small_config(14);
  const TrainResult r = train::train(ds, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "c3r_test_checkpoint";
  std::filesystem::remove_all(dir);
  save_checkpoint(dir, r.model, cfg, r.log, "2026-01-01T00:00:00Z");
  const Checkpoint ck = load_checkpoint(dir);
  EXPECT_EQ(all_params(ck.model), all_params(r.model));
  EXPECT_EQ(ck.epoch, 3u);
  EXPECT_EQ(to_json(ck.config), to_json(cfg));
  EXPECT_TRUE(ck.model.shape() == r.model.shape());
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, MissingDirectoryIsIoError) {
  EXPECT_THROW(load_checkpoint("/nonexistent/c3r/checkpoint"), Error);
}

TEST(Config, JsonRoundTripAndStrictKeys) {
  TrainConfig cfg = small_config(15);
  cfg.lambda2 = 0.25;
  const TrainConfig back = train_config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(back), to_json(cfg));
  Json bad = to_json(cfg);
  bad["lamda1"] = 0.1;
  EXPECT_THROW(train_config_from_json(bad), ConfigError);
  TrainConfig neg;
  neg.lambda3 = -0.1;
  EXPECT_THROW(neg.validate(), ConfigError);
}

TEST(Config, Defaults) {
  const TrainConfig cfg;
  EXPECT_EQ(cfg.lambda1, 0.01);
  EXPECT_EQ(cfg.lambda2, 0.55);
  EXPECT_EQ(cfg.lambda3, 0.4);
  EXPECT_EQ(cfg.lr, 0.1);
  EXPECT_EQ(cfg.adversary_steps, 1u);
  EXPECT_EQ(cfg.clip_norm, 10.0);
}

// Measured baseline on the default synthetic data, 50 epochs at lr 1e-4.
TEST(Train, EvalSufficiencyRiskAfterFiftyEpochs) {
  const synth::Dataset ds = synth::generate_dataset(synth::SynthConfig{});
  TrainConfig cfg;
  cfg.lr = 1e-4;
  cfg.epochs = 50;
  const TrainResult r = train::train(ds, cfg);
  EXPECT_LT(r.log.back().eval_risk.suf.hard, 0.2);
}
