#include "c3/numkern.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "c3/errors.hpp"

namespace c3 {
namespace {

DenseLayer zero_layer(Index in, Index out) {
  return DenseLayer{Matrix::Zero(out, in), Vector::Zero(out)};
}

DenseLayer glorot_layer(Index in, Index out, CounterRng& rng) {
  DenseLayer layer = zero_layer(in, out);
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  for (Index r = 0; r < out; ++r)
    for (Index c = 0; c < in; ++c) layer.weight(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
  return layer;
}

Matrix affine(const Matrix& x, const DenseLayer& layer) {
  Matrix out = x * layer.weight.transpose();
  out.rowwise() += layer.bias.transpose();
  return out;
}

void accumulate_layer_grad(DenseLayer& grad, const Matrix& input, const Matrix& upstream) {
  grad.weight.noalias() += upstream.transpose() * input;
  grad.bias.noalias() += upstream.colwise().sum().transpose();
}

template <typename Tensor, typename Layer>
void push_layer(std::vector<Tensor>& out, const std::string& name, Layer& layer) {
  out.push_back({name + ".weight", {layer.weight.data(), static_cast<std::size_t>(layer.weight.size())}});
  out.push_back({name + ".bias", {layer.bias.data(), static_cast<std::size_t>(layer.bias.size())}});
}

template <typename Tensor, typename Params>
std::vector<Tensor> encoder_tensors(Params& p) {
  std::vector<Tensor> out;
  out.reserve(10);
  for (std::size_t i = 0; i < p.hidden.size(); ++i) push_layer(out, "hidden" + std::to_string(i), p.hidden[i]);
  push_layer(out, "mean_head", p.mean_head);
  push_layer(out, "logvar_head", p.logvar_head);
  return out;
}

}  // namespace

void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw NumericError(what + ": non-finite value");
}

EncoderParams EncoderParams::zeros(const EncoderShape& shape) {
  EncoderParams p;
  p.shape = shape;
  Index in = shape.input;
  for (std::size_t i = 0; i < 3; ++i) {
    p.hidden[i] = zero_layer(in, shape.hidden[i]);
    in = shape.hidden[i];
  }
  p.mean_head = zero_layer(in, shape.latent);
  p.logvar_head = zero_layer(in, shape.latent);
  return p;
}

EncoderParams EncoderParams::glorot(const EncoderShape& shape, CounterRng& rng) {
  EncoderParams p;
  p.shape = shape;
  Index in = shape.input;
  for (std::size_t i = 0; i < 3; ++i) {
    p.hidden[i] = glorot_layer(in, shape.hidden[i], rng);
    in = shape.hidden[i];
  }
  p.mean_head = glorot_layer(in, shape.latent, rng);
  p.logvar_head = glorot_layer(in, shape.latent, rng);
  return p;
}

std::size_t EncoderParams::num_params() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += t.data.size();
  return n;
}

std::vector<NamedTensor> EncoderParams::tensors() { return encoder_tensors<NamedTensor>(*this); }

std::vector<NamedConstTensor> EncoderParams::tensors() const {
  return encoder_tensors<NamedConstTensor>(*this);
}

EncoderOutput encode_forward(const EncoderParams& params, const Matrix& x) {
  if (x.cols() != params.shape.input) {
    std::ostringstream os;
    os << "encode_forward: input has " << x.cols() << " columns, encoder expects " << params.shape.input;
    throw DimensionError(os.str());
  }
  EncoderOutput out;
  ActivationCache& cache = out.cache;
  cache.owner = &params;
  cache.version = params.version;
  cache.input = x;

  const Matrix* h = &cache.input;
  for (std::size_t i = 0; i < 3; ++i) {
    cache.pre[i] = affine(*h, params.hidden[i]);
    cache.act[i] = cache.pre[i].unaryExpr([](double v) { return elu(v); });
    h = &cache.act[i];
  }
  out.mean = affine(*h, params.mean_head);
  cache.logvar_raw = affine(*h, params.logvar_head);
  out.logvar = cache.logvar_raw.cwiseMax(kLogvarMin).cwiseMin(kLogvarMax);

  require_finite(out.mean, "encode_forward: mean");
  require_finite(cache.logvar_raw, "encode_forward: logvar");
  return out;
}

EncoderGrads encode_backward(const EncoderParams& params, const ActivationCache& cache,
                             const Matrix& grad_mean, const Matrix& grad_logvar) {
  if (cache.owner != &params || cache.version != params.version)
    throw ContractError("encode_backward: activation cache does not belong to these parameters");
  const Index n = cache.input.rows();
  if (grad_mean.rows() != n || grad_logvar.rows() != n || grad_mean.cols() != params.shape.latent ||
      grad_logvar.cols() != params.shape.latent)
    throw DimensionError("encode_backward: upstream gradient shape mismatch");

  EncoderGrads g = EncoderParams::zeros(params.shape);

  // The clamp passes gradient only where the raw head output is inside the range.
  Matrix grad_lv_raw = grad_logvar;
  for (Index i = 0; i < grad_lv_raw.size(); ++i) {
    const double raw = cache.logvar_raw.data()[i];
    if (raw < kLogvarMin || raw > kLogvarMax) grad_lv_raw.data()[i] = 0.0;
  }

  const Matrix& top = cache.act[2];
  accumulate_layer_grad(g.mean_head, top, grad_mean);
  accumulate_layer_grad(g.logvar_head, top, grad_lv_raw);
  Matrix grad_h = grad_mean * params.mean_head.weight + grad_lv_raw * params.logvar_head.weight;

  for (int i = 2; i >= 0; --i) {
    const Matrix& pre = cache.pre[static_cast<std::size_t>(i)];
    Matrix grad_pre = grad_h.cwiseProduct(pre.unaryExpr([](double v) { return elu_grad(v); }));
    const Matrix& input = i == 0 ? cache.input : cache.act[static_cast<std::size_t>(i - 1)];
    accumulate_layer_grad(g.hidden[static_cast<std::size_t>(i)], input, grad_pre);
    if (i > 0) grad_h = grad_pre * params.hidden[static_cast<std::size_t>(i)].weight;
  }
  return g;
}

Matrix reparameterize(const Matrix& mean, const Matrix& logvar, const Matrix& noise) {
  if (mean.rows() != noise.rows() || mean.cols() != noise.cols() || logvar.rows() != mean.rows() ||
      logvar.cols() != mean.cols())
    throw DimensionError("reparameterize: shape mismatch");
  return mean + (0.5 * logvar.array()).exp().matrix().cwiseProduct(noise);
}

std::vector<NamedTensor> Classifier::tensors() {
  return {{"weight", {weight.data(), static_cast<std::size_t>(weight.size())}}, {"bias", {&bias, 1}}};
}

std::vector<NamedConstTensor> Classifier::tensors() const {
  return {{"weight", {weight.data(), static_cast<std::size_t>(weight.size())}}, {"bias", {&bias, 1}}};
}

void adam_step(AdamState& state, std::span<const NamedTensor> params,
               std::span<const NamedConstTensor> grads, const AdamConfig& cfg, const std::string& prefix) {
  if (!(cfg.lr > 0.0)) throw ConfigError("adam_step: learning rate must be positive");
  if (params.size() != grads.size()) throw DimensionError("adam_step: parameter/gradient count mismatch");
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].data.size() != grads[t].data.size())
      throw DimensionError("adam_step: shape mismatch for " + params[t].name);
    for (std::size_t i = 0; i < grads[t].data.size(); ++i) {
      if (!std::isfinite(grads[t].data[i])) {
        std::ostringstream os;
        os << "adam_step: non-finite gradient at " << (prefix.empty() ? "" : prefix + ".") << params[t].name
           << '[' << i << ']';
        throw NumericError(os.str());
      }
    }
  }
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.data.size(), 0.0);
      state.v.emplace_back(p.data.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw DimensionError("adam_step: optimizer state layout mismatch");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& m = state.m[k];
    auto& v = state.v[k];
    const auto p = params[k].data;
    const auto g = grads[k].data;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= cfg.lr * (mhat / (std::sqrt(vhat) + cfg.eps) + cfg.weight_decay * p[i]);
    }
  }
}

void adam_step(AdamState& state, EncoderParams& params, const EncoderGrads& grads, const AdamConfig& cfg,
               const std::string& prefix) {
  if (!(params.shape == grads.shape)) throw DimensionError("adam_step: encoder shape mismatch");
  auto p = params.tensors();
  auto g = grads.tensors();
  adam_step(state, p, g, cfg, prefix);
  ++params.version;
}

double squared_norm(std::span<const NamedConstTensor> tensors) {
  double s = 0.0;
  for (const auto& t : tensors)
    for (double v : t.data) s += v * v;
  return s;
}

void scale(std::span<const NamedTensor> tensors, double factor) {
  for (const auto& t : tensors)
    for (double& v : t.data) v *= factor;
}

GradCheckResult check_gradients(const std::function<double()>& loss, std::span<double> params,
                                std::span<const double> analytic, double h, double floor) {
  if (params.size() != analytic.size()) throw DimensionError("check_gradients: size mismatch");
  GradCheckResult res;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = loss();
    params[i] = saved - h;
    const double down = loss();
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > res.max_rel_error || res.checked == 0) {
      res.max_rel_error = std::max(rel, res.max_rel_error);
      res.worst_index = i;
      res.worst_analytic = analytic[i];
      res.worst_numeric = numeric;
    }
    ++res.checked;
  }
  return res;
}

std::vector<double> flatten(std::span<const NamedConstTensor> tensors) {
  std::vector<double> out;
  for (const auto& t : tensors) out.insert(out.end(), t.data.begin(), t.data.end());
  return out;
}

void unflatten(std::span<const double> flat, std::span<const NamedTensor> tensors) {
  std::size_t off = 0;
  for (const auto& t : tensors) {
    if (off + t.data.size() > flat.size()) throw DimensionError("unflatten: flat vector too short");
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), t.data.size(), t.data.begin());
    off += t.data.size();
  }
  if (off != flat.size()) throw DimensionError("unflatten: flat vector too long");
}

}  // namespace c3
