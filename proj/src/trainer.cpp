#include "c3/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "c3/io.hpp"
#include "c3/regularizers.hpp"

namespace c3::train {
namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Mean logistic loss of logits `z` against labels.
double logistic_loss(const Vector& z, std::span<const int> labels) {
  double s = 0.0;
  for (Index i = 0; i < z.size(); ++i) s += softplus(z(i)) - labels[static_cast<std::size_t>(i)] * z(i);
  return s / static_cast<double>(z.size());
}

Vector sigmoid(const Vector& z) { return z.unaryExpr([](double v) { return logistic(v); }); }

struct Side {
  EncoderOutput enc;
  Matrix sample;  // reparameterized representation
  Vector linear;  // sample . W
  Vector score;   // sigmoid(linear + b)
};

Side forward_side(const EncoderParams& params, const Classifier& clf, const Matrix& x, const Matrix& noise) {
  Side s;
  s.enc = encode_forward(params, x);
  s.sample = reparameterize(s.enc.mean, s.enc.logvar, noise);
  s.linear = s.sample * clf.weight;
  s.score = sigmoid((s.linear.array() + clf.bias).matrix());
  return s;
}

// Chain d/d(sample) plus direct KL gradients back through the reparameterization
// and the encoder.
EncoderGrads backward_side(const EncoderParams& params, const Side& s, const Matrix& noise, const Matrix& grad_sample,
                           const reg::KlResult& kl, double kl_weight) {
  Matrix grad_mean = grad_sample + kl_weight * kl.grad_mean;
  const Matrix std_dev = (0.5 * s.enc.logvar.array()).exp().matrix();
  Matrix grad_logvar =
      (grad_sample.array() * noise.array() * std_dev.array() * 0.5).matrix() + kl_weight * kl.grad_logvar;
  return encode_backward(params, s.enc.cache, grad_mean, grad_logvar);
}

void check_batch(const C3RModel& model, const Minibatch& batch, const Noise& noise) {
  const Index n = batch.x.rows();
  if (n == 0) throw ContractError("c3r_objective: empty batch");
  if (static_cast<std::size_t>(n) != batch.labels.size()) throw DimensionError("c3r_objective: label count");
  if (batch.env_tags.size() != batch.labels.size())
    throw ConfigError("c3r_objective: batch is missing env_tags");
  const Index latent = model.shape().latent;
  if (noise.theta.rows() != n || noise.phi.rows() != n || noise.theta.cols() != latent || noise.phi.cols() != latent)
    throw DimensionError("c3r_objective: noise shape does not match batch");
}

std::vector<NamedTensor> main_tensors(C3RModel& m) {
  auto t = m.theta.tensors();
  for (auto& c : m.classifier.tensors()) t.push_back({"classifier." + c.name, c.data});
  return t;
}

void clip_global_norm(std::span<const NamedTensor> grads, double max_norm) {
  if (max_norm <= 0.0) return;
  std::vector<NamedConstTensor> view;
  for (const auto& g : grads) view.push_back({g.name, g.data});
  const double norm = std::sqrt(squared_norm(view));
  if (norm > max_norm && std::isfinite(norm)) scale(grads, max_norm / norm);
}

std::string join_hidden(const std::array<Index, 3>& h) {
  return std::to_string(h[0]) + "," + std::to_string(h[1]) + "," + std::to_string(h[2]);
}

}  // namespace

void TrainConfig::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0 || lambda3 < 0.0) throw ConfigError("lambdas must be >= 0");
  if (mon_weight < 0.0) throw ConfigError("mon_weight must be >= 0");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0,1)");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (latent < 1 || std::any_of(hidden.begin(), hidden.end(), [](Index h) { return h < 1; }))
    throw ConfigError("layer widths must be >= 1");
}

AdamConfig TrainConfig::adam() const {
  AdamConfig a;
  a.lr = lr;
  a.beta1 = momentum;
  a.weight_decay = weight_decay;
  return a;
}

TrainConfig baseline_config(TrainConfig cfg) {
  cfg.lambda1 = cfg.lambda2 = cfg.lambda3 = 0.0;
  cfg.mon_weight = 0.0;
  cfg.adversary_steps = 0;
  return cfg;
}

C3RModel C3RModel::init(const EncoderShape& shape, std::uint64_t seed) {
  const CounterRng root(seed);
  CounterRng theta_rng = root.substream("init.theta");
  CounterRng phi_rng = root.substream("init.phi");
  CounterRng clf_rng = root.substream("init.classifier");
  C3RModel m;
  m.theta = EncoderParams::glorot(shape, theta_rng);
  m.phi = EncoderParams::glorot(shape, phi_rng);
  m.classifier.weight = Vector(shape.latent);
  const double limit = std::sqrt(6.0 / static_cast<double>(shape.latent + 1));
  for (Index i = 0; i < shape.latent; ++i) m.classifier.weight(i) = (2.0 * clf_rng.uniform() - 1.0) * limit;
  m.classifier.bias = 0.0;
  return m;
}

Minibatch Minibatch::from(const synth::MultiModalBatch& b) {
  b.validate();
  return {b.fused(), b.labels, b.env_tags};
}

Noise Noise::draw(Index rows, Index latent, CounterRng& rng) {
  Noise n{Matrix(rows, latent), Matrix(rows, latent)};
  for (Index i = 0; i < n.theta.size(); ++i) n.theta.data()[i] = rng.normal();
  for (Index i = 0; i < n.phi.size(); ++i) n.phi.data()[i] = rng.normal();
  return n;
}

ObjectiveResult c3r_objective(const C3RModel& model, const Minibatch& batch, const Noise& noise,
                              const TrainConfig& cfg, GradMode mode) {
  check_batch(model, batch, noise);
  const auto n = static_cast<double>(batch.x.rows());
  const Classifier& clf = model.classifier;

  const Side c = forward_side(model.theta, clf, batch.x, noise.theta);
  const Side cbar = forward_side(model.phi, clf, batch.x, noise.phi);
  const reg::KlResult kl_theta = reg::kl_term({c.enc.mean, c.enc.logvar});
  const reg::KlResult kl_phi = reg::kl_term({cbar.enc.mean, cbar.enc.logvar});
  const reg::IndepResult indep = reg::indep_penalty(c.sample, batch.env_tags);
  const std::span<const double> linear(c.linear.data(), static_cast<std::size_t>(c.linear.size()));
  const reg::CondIndepResult cond = reg::cond_indep_penalty(linear, clf.bias, batch.labels, batch.env_tags);

  ObjectiveResult res;
  ObjectiveTerms& t = res.terms;
  t.suf = logistic_loss((c.linear.array() + clf.bias).matrix(), batch.labels);
  t.mon = (c.score.array() * cbar.score.array() + (1.0 - c.score.array()) * (1.0 - cbar.score.array())).mean();
  t.kl_theta = kl_theta.value;
  t.kl_phi = kl_phi.value;
  t.indep = indep.value;
  t.cond = cond.value;
  t.loss = t.suf + cfg.mon_weight * t.mon + cfg.lambda1 * (t.kl_theta + t.kl_phi) + cfg.lambda2 * t.indep +
           cfg.lambda3 * t.cond;
  if (mode == GradMode::None) return res;

  // Logit-space gradients of the classification terms.
  const Vector dscore_c = ((2.0 * cbar.score.array() - 1.0) / n).matrix();
  const Vector dscore_cbar = ((2.0 * c.score.array() - 1.0) / n).matrix();
  Vector dz(c.score.size());
  Vector dzbar(c.score.size());
  for (Index i = 0; i < dz.size(); ++i) {
    const double p = c.score(i);
    const double q = cbar.score(i);
    dz(i) = (p - batch.labels[static_cast<std::size_t>(i)]) / n + cfg.mon_weight * dscore_c(i) * p * (1.0 - p);
    dzbar(i) = cfg.mon_weight * dscore_cbar(i) * q * (1.0 - q);
  }
  Vector dlinear = dz;
  for (Index i = 0; i < dlinear.size(); ++i) dlinear(i) += cfg.lambda3 * cond.grad_linear[static_cast<std::size_t>(i)];

  ObjectiveGrads g;
  g.classifier_weight = c.sample.transpose() * dlinear + cbar.sample.transpose() * dzbar;
  g.classifier_bias = dz.sum() + dzbar.sum() + cfg.lambda3 * cond.grad_bias;

  const Matrix grad_c = dlinear * clf.weight.transpose() + cfg.lambda2 * indep.grad;
  g.theta = backward_side(model.theta, c, noise.theta, grad_c, kl_theta, cfg.lambda1);
  if (mode == GradMode::All) {
    const Matrix grad_cbar = dzbar * clf.weight.transpose();
    g.phi = backward_side(model.phi, cbar, noise.phi, grad_cbar, kl_phi, cfg.lambda1);
  }
  res.grads = std::move(g);
  return res;
}

AdversaryResult adversary_objective(const C3RModel& model, const Minibatch& batch, const Noise& noise,
                                    const TrainConfig& cfg, bool with_grad) {
  check_batch(model, batch, noise);
  const auto n = static_cast<double>(batch.x.rows());
  const Classifier& clf = model.classifier;
  // c is a constant for the adversary; only its scores are needed.
  const EncoderOutput enc_c = encode_forward(model.theta, batch.x);
  const Vector p = sigmoid(
      ((reparameterize(enc_c.mean, enc_c.logvar, noise.theta) * clf.weight).array() + clf.bias).matrix());
  const Side cbar = forward_side(model.phi, clf, batch.x, noise.phi);
  const reg::KlResult kl_phi = reg::kl_term({cbar.enc.mean, cbar.enc.logvar});

  AdversaryResult res;
  const double mon = (p.array() * cbar.score.array() + (1.0 - p.array()) * (1.0 - cbar.score.array())).mean();
  res.value = cfg.mon_weight * mon - cfg.lambda1 * kl_phi.value;
  if (!with_grad) return res;

  Vector dzbar(p.size());
  for (Index i = 0; i < dzbar.size(); ++i) {
    const double q = cbar.score(i);
    dzbar(i) = cfg.mon_weight * (2.0 * p(i) - 1.0) / n * q * (1.0 - q);
  }
  const Matrix grad_cbar = dzbar * clf.weight.transpose();
  res.grad = backward_side(model.phi, cbar, noise.phi, grad_cbar, kl_phi, -cfg.lambda1);
  return res;
}

void adversary_step(C3RModel& model, OptimizerState& opt, const Minibatch& batch, const Noise& noise,
                    const TrainConfig& cfg) {
  AdversaryResult r = adversary_objective(model, batch, noise, cfg, true);
  EncoderGrads& g = *r.grad;
  auto gt = g.tensors();
  scale(gt, -1.0);  // ascent
  clip_global_norm(gt, cfg.clip_norm);
  adam_step(opt.adversary, model.phi, g, cfg.adam(), "phi");
}

ObjectiveTerms main_step(C3RModel& model, OptimizerState& opt, const Minibatch& batch, const Noise& noise,
                         const TrainConfig& cfg) {
  ObjectiveResult r = c3r_objective(model, batch, noise, cfg, GradMode::Main);
  if (!std::isfinite(r.terms.loss)) throw NumericError("main_step: non-finite loss");
  ObjectiveGrads& g = *r.grads;
  auto grad_tensors = g.theta.tensors();
  grad_tensors.push_back({"classifier.weight", {g.classifier_weight.data(), static_cast<std::size_t>(g.classifier_weight.size())}});
  grad_tensors.push_back({"classifier.bias", {&g.classifier_bias, 1}});
  clip_global_norm(grad_tensors, cfg.clip_norm);

  std::vector<NamedConstTensor> grads_const;
  for (const auto& t : grad_tensors) grads_const.push_back({t.name, t.data});
  const auto params = main_tensors(model);
  adam_step(opt.main, params, grads_const, cfg.adam(), "theta");
  ++model.theta.version;
  return r.terms;
}

std::vector<double> predict_scores(const C3RModel& model, const Matrix& x) {
  const EncoderOutput enc = encode_forward(model.theta, x);
  const Vector s = sigmoid(((enc.mean * model.classifier.weight).array() + model.classifier.bias).matrix());
  return {s.data(), s.data() + s.size()};
}

risk::RiskReport evaluate_risks(const C3RModel& model, const synth::MultiModalBatch& batch) {
  const Matrix x = batch.fused();
  const std::vector<double> sc = predict_scores(model, x);
  const EncoderOutput enc_phi = encode_forward(model.phi, x);
  const Vector sb = sigmoid(((enc_phi.mean * model.classifier.weight).array() + model.classifier.bias).matrix());
  const std::vector<double> scbar(sb.data(), sb.data() + sb.size());
  return risk::make_report(sc, scbar, batch.labels);
}

TrainResult train(const synth::Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  ds.train.validate();
  const Minibatch full = Minibatch::from(ds.train);
  const EncoderShape shape = cfg.shape(full.x.cols());

  TrainResult result;
  result.model = C3RModel::init(shape, cfg.seed);
  OptimizerState opt;
  const CounterRng root(cfg.seed);
  const CounterRng shuffle_root = root.substream("shuffle");
  const CounterRng noise_root = root.substream("noise");
  const auto n = static_cast<std::size_t>(full.x.rows());
  if (n == 0) throw ContractError("train: empty training split");

  C3RModel last_good = result.model;
  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng shuffle = shuffle_root.substream(epoch);
    std::shuffle(order.begin(), order.end(), shuffle);

    EpochRecord rec;
    rec.epoch = epoch + 1;
    std::size_t batches = 0;
    try {
      for (std::size_t start = 0; start < n; start += cfg.batch_size, ++step) {
        const std::size_t stop = std::min(n, start + cfg.batch_size);
        Minibatch mb;
        mb.x.resize(static_cast<Index>(stop - start), full.x.cols());
        for (std::size_t i = start; i < stop; ++i) {
          mb.x.row(static_cast<Index>(i - start)) = full.x.row(static_cast<Index>(order[i]));
          mb.labels.push_back(full.labels[order[i]]);
          mb.env_tags.push_back(full.env_tags[order[i]]);
        }
        const CounterRng step_rng = noise_root.substream(step);
        for (std::size_t k = 0; k < cfg.adversary_steps; ++k) {
          CounterRng r = step_rng.substream("adversary").substream(k);
          adversary_step(result.model, opt, mb, Noise::draw(mb.x.rows(), shape.latent, r), cfg);
        }
        CounterRng r = step_rng.substream("main");
        const ObjectiveTerms t = main_step(result.model, opt, mb, Noise::draw(mb.x.rows(), shape.latent, r), cfg);
        rec.terms.suf += t.suf;
        rec.terms.mon += t.mon;
        rec.terms.kl_theta += t.kl_theta;
        rec.terms.kl_phi += t.kl_phi;
        rec.terms.indep += t.indep;
        rec.terms.cond += t.cond;
        rec.terms.loss += t.loss;
        ++batches;
      }
      rec.train_risk = evaluate_risks(result.model, ds.train);
      rec.eval_risk = evaluate_risks(result.model, ds.eval);
    } catch (const NumericError& e) {
      throw DivergenceError("training diverged in epoch " + std::to_string(epoch + 1) + ": " + e.what(), last_good,
                            result.log);
    }
    const auto b = static_cast<double>(batches);
    for (double* v : {&rec.terms.suf, &rec.terms.mon, &rec.terms.kl_theta, &rec.terms.kl_phi, &rec.terms.indep,
                      &rec.terms.cond, &rec.terms.loss})
      *v /= b;
    result.log.push_back(rec);
    last_good = result.model;
  }
  return result;
}

TrainResult fit_baseline(const synth::Dataset& ds, const TrainConfig& cfg) { return train(ds, baseline_config(cfg)); }

Json to_json(const TrainConfig& cfg) {
  Json j;
  j["lambda1"] = cfg.lambda1;
  j["lambda2"] = cfg.lambda2;
  j["lambda3"] = cfg.lambda3;
  j["mon_weight"] = cfg.mon_weight;
  j["lr"] = cfg.lr;
  j["momentum"] = cfg.momentum;
  j["weight_decay"] = cfg.weight_decay;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["adversary_steps"] = cfg.adversary_steps;
  j["clip_norm"] = cfg.clip_norm;
  j["seed"] = cfg.seed;
  j["hidden"] = cfg.hidden;
  j["latent"] = cfg.latent;
  return j;
}

TrainConfig train_config_from_json(const Json& j, TrainConfig cfg) {
  reject_unknown_keys(j,
                      {"lambda1", "lambda2", "lambda3", "mon_weight", "lr", "momentum", "weight_decay", "epochs",
                       "batch_size", "adversary_steps", "clip_norm", "seed", "hidden", "latent"},
                      "train config");
  for (auto [key, dst] : {std::pair{"lambda1", &cfg.lambda1}, {"lambda2", &cfg.lambda2}, {"lambda3", &cfg.lambda3},
                          {"mon_weight", &cfg.mon_weight}, {"lr", &cfg.lr}, {"momentum", &cfg.momentum},
                          {"weight_decay", &cfg.weight_decay}, {"clip_norm", &cfg.clip_norm}})
    if (j.contains(key)) *dst = json_number(j, key);
  for (auto [key, dst] : {std::pair{"epochs", &cfg.epochs}, {"batch_size", &cfg.batch_size},
                          {"adversary_steps", &cfg.adversary_steps}})
    if (j.contains(key)) *dst = json_uint(j, key);
  if (j.contains("seed")) cfg.seed = json_uint(j, "seed");
  if (j.contains("latent")) cfg.latent = static_cast<Index>(json_uint(j, "latent"));
  if (j.contains("hidden")) {
    const Json& h = j["hidden"];
    if (!h.is_array() || h.size() != 3) throw ConfigError("key 'hidden' must be an array of 3 widths");
    for (std::size_t i = 0; i < 3; ++i) {
      if (!h[i].is_number_integer() || h[i].get<std::int64_t>() < 1)
        throw ConfigError("key 'hidden' must hold positive integers");
      cfg.hidden[i] = h[i].get<Index>();
    }
  }
  cfg.validate();
  return cfg;
}

Json to_json(const risk::RiskReport& r) {
  Json j;
  for (auto [name, v] : {std::pair{"suf", &r.suf}, {"nec", &r.nec}, {"mon", &r.mon}, {"c3_bound", &r.c3_bound}})
    j[name] = {{"hard", v->hard}, {"surrogate", v->surrogate}};
  return j;
}

Json to_json(const EpochRecord& r) {
  Json j;
  j["epoch"] = r.epoch;
  j["terms"] = {{"loss", r.terms.loss},   {"suf", r.terms.suf},     {"mon", r.terms.mon},
                {"kl_theta", r.terms.kl_theta}, {"kl_phi", r.terms.kl_phi}, {"indep", r.terms.indep},
                {"cond", r.terms.cond}};
  j["train_risk"] = to_json(r.train_risk);
  j["eval_risk"] = to_json(r.eval_risk);
  return j;
}

std::string risk_log_csv(const std::vector<EpochRecord>& log, const TrainConfig& cfg) {
  std::string out =
      "epoch,loss,suf,mon,kl_theta,kl_phi,indep,cond,lambda1,lambda2,lambda3,"
      "train_suf,train_nec,train_mon,train_c3_bound,eval_suf,eval_nec,eval_mon,eval_c3_bound\n";
  const auto f = io::format_double;
  for (const auto& r : log) {
    out += std::to_string(r.epoch);
    for (double v : {r.terms.loss, r.terms.suf, r.terms.mon, r.terms.kl_theta, r.terms.kl_phi, r.terms.indep,
                     r.terms.cond, cfg.lambda1, cfg.lambda2, cfg.lambda3, r.train_risk.suf.hard,
                     r.train_risk.nec.hard, r.train_risk.mon.hard, r.train_risk.c3_bound.hard, r.eval_risk.suf.hard,
                     r.eval_risk.nec.hard, r.eval_risk.mon.hard, r.eval_risk.c3_bound.hard})
      out += ',' + f(v);
    out += '\n';
  }
  return out;
}

namespace {

void save_encoder(const std::filesystem::path& dir, const std::string& prefix, const EncoderParams& p,
                  std::vector<std::string>& names) {
  auto write_layer = [&](const std::string& name, const DenseLayer& l) {
    io::write_matrix(dir / (prefix + "." + name + ".weight.c3mm"), l.weight);
    io::write_matrix(dir / (prefix + "." + name + ".bias.c3mm"), Matrix(l.bias));
    names.push_back(prefix + "." + name + ".weight");
    names.push_back(prefix + "." + name + ".bias");
  };
  for (std::size_t i = 0; i < 3; ++i) write_layer("hidden" + std::to_string(i), p.hidden[i]);
  write_layer("mean_head", p.mean_head);
  write_layer("logvar_head", p.logvar_head);
}

void load_layer(const std::filesystem::path& dir, const std::string& stem, DenseLayer& l) {
  const Matrix w = io::read_matrix(dir / (stem + ".weight.c3mm"));
  const Matrix b = io::read_matrix(dir / (stem + ".bias.c3mm"));
  if (w.rows() != l.weight.rows() || w.cols() != l.weight.cols() || b.size() != l.bias.size())
    throw DimensionError("checkpoint tensor " + stem + " does not match the manifest shape");
  l.weight = w;
  l.bias = Eigen::Map<const Vector>(b.data(), b.size());
}

void load_encoder(const std::filesystem::path& dir, const std::string& prefix, EncoderParams& p) {
  for (std::size_t i = 0; i < 3; ++i) load_layer(dir, prefix + ".hidden" + std::to_string(i), p.hidden[i]);
  load_layer(dir, prefix + ".mean_head", p.mean_head);
  load_layer(dir, prefix + ".logvar_head", p.logvar_head);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const C3RModel& model, const TrainConfig& cfg,
                     const std::vector<EpochRecord>& log, const std::string& created) {
  io::ensure_directory(dir);
  std::vector<std::string> names;
  save_encoder(dir, "theta", model.theta, names);
  save_encoder(dir, "phi", model.phi, names);
  io::write_matrix(dir / "classifier.weight.c3mm", Matrix(model.classifier.weight));
  Matrix bias(1, 1);
  bias(0, 0) = model.classifier.bias;
  io::write_matrix(dir / "classifier.bias.c3mm", bias);
  names.push_back("classifier.weight");
  names.push_back("classifier.bias");

  Json m;
  m["format"] = "c3r-checkpoint";
  m["version"] = 1;
  m["created"] = created;
  const EncoderShape& s = model.shape();
  m["shape"] = {{"input", s.input}, {"hidden", join_hidden(s.hidden)}, {"latent", s.latent}};
  m["config"] = to_json(cfg);
  m["epoch"] = log.size();
  m["tensors"] = names;
  Json risk_log = Json::array();
  for (const auto& r : log) risk_log.push_back(to_json(r));
  m["risk_log"] = risk_log;
  io::write_text(dir / "manifest.json", m.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  Json m;
  try {
    m = Json::parse(io::read_text(dir / "manifest.json"));
  } catch (const Json::parse_error& e) {
    throw IoError((dir / "manifest.json").string() + ": " + e.what());
  }
  if (!m.contains("format") || m["format"] != "c3r-checkpoint") throw IoError("not a c3r checkpoint: " + dir.string());
  Checkpoint ck;
  ck.config = train_config_from_json(m.at("config"));
  ck.epoch = json_uint(m, "epoch");
  const Json& shape = m.at("shape");
  const EncoderShape s{static_cast<Index>(json_uint(shape, "input")), ck.config.hidden, ck.config.latent};
  if (shape.at("hidden") != join_hidden(s.hidden) || static_cast<Index>(json_uint(shape, "latent")) != s.latent)
    throw IoError("checkpoint shape disagrees with its config");
  ck.model.theta = EncoderParams::zeros(s);
  ck.model.phi = EncoderParams::zeros(s);
  load_encoder(dir, "theta", ck.model.theta);
  load_encoder(dir, "phi", ck.model.phi);
  const Matrix w = io::read_matrix(dir / "classifier.weight.c3mm");
  const Matrix b = io::read_matrix(dir / "classifier.bias.c3mm");
  if (w.size() != s.latent || b.size() != 1) throw DimensionError("checkpoint classifier shape mismatch");
  ck.model.classifier.weight = Eigen::Map<const Vector>(w.data(), w.size());
  ck.model.classifier.bias = b(0, 0);
  return ck;
}

}  // namespace c3::train
