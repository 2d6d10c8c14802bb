#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "c3/rng.hpp"

namespace c3 {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kLogvarMin = -8.0;
inline constexpr double kLogvarMax = 8.0;

// Exponential linear unit with slope parameter 1.
inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void require_finite(const Matrix& m, const std::string& what);

struct EncoderShape {
  Index input = 60;
  std::array<Index, 3> hidden{64, 32, 128};
  Index latent = 64;

  bool operator==(const EncoderShape&) const = default;
};

/// y = x * weight^T + bias, weight stored (out x in).
struct DenseLayer {
  Matrix weight;
  Vector bias;
};

/// A contiguous parameter tensor with a dotted path such as "hidden1.weight".
struct NamedTensor {
  std::string name;
  std::span<double> data;
};

struct NamedConstTensor {
  std::string name;
  std::span<const double> data;
};

/// Three ELU hidden layers followed by linear mean / log-variance heads.
/// `version` is bumped by every optimizer update; activation caches record it
/// so that backward can reject a cache produced before the parameters moved.
struct EncoderParams {
  EncoderShape shape;
  std::array<DenseLayer, 3> hidden;
  DenseLayer mean_head;
  DenseLayer logvar_head;
  std::uint64_t version = 0;

  static EncoderParams zeros(const EncoderShape& shape);
  /// Uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static EncoderParams glorot(const EncoderShape& shape, CounterRng& rng);

  std::size_t num_params() const;
  std::vector<NamedTensor> tensors();
  std::vector<NamedConstTensor> tensors() const;
};

/// Gradients share the parameter layout.
using EncoderGrads = EncoderParams;

struct ActivationCache {
  const EncoderParams* owner = nullptr;
  std::uint64_t version = 0;
  Matrix input;
  std::array<Matrix, 3> pre;  // pre-activation of each hidden layer
  std::array<Matrix, 3> act;  // ELU output of each hidden layer
  Matrix logvar_raw;          // head output before the clamp
};

struct EncoderOutput {
  Matrix mean;
  Matrix logvar;
  ActivationCache cache;
};

EncoderOutput encode_forward(const EncoderParams& params, const Matrix& x);

EncoderGrads encode_backward(const EncoderParams& params, const ActivationCache& cache,
                             const Matrix& grad_mean, const Matrix& grad_logvar);

/// c = mean + exp(logvar / 2) * noise.
Matrix reparameterize(const Matrix& mean, const Matrix& logvar, const Matrix& noise);

/// Linear classifier on the representation: z = c . weight + bias.
struct Classifier {
  Vector weight;
  double bias = 0.0;

  std::vector<NamedTensor> tensors();
  std::vector<NamedConstTensor> tensors() const;
};

struct AdamConfig {
  double lr = 0.1;
  double beta1 = 0.8;  // the "momentum" setting
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;  // decoupled
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t step = 0;
};

/// One decoupled-weight-decay Adam update over aligned tensor lists. All
/// gradients are validated before any parameter moves; a non-finite entry
/// raises NumericError naming `prefix.<tensor>[i]`.
void adam_step(AdamState& state, std::span<const NamedTensor> params,
               std::span<const NamedConstTensor> grads, const AdamConfig& cfg,
               const std::string& prefix = "");

void adam_step(AdamState& state, EncoderParams& params, const EncoderGrads& grads,
               const AdamConfig& cfg, const std::string& prefix = "encoder");

double squared_norm(std::span<const NamedConstTensor> tensors);
void scale(std::span<const NamedTensor> tensors, double factor);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

/// Central-difference check of `analytic` against `loss` over every entry of
/// `params`. Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckResult check_gradients(const std::function<double()>& loss, std::span<double> params,
                                std::span<const double> analytic, double h = 1e-5,
                                double floor = 1e-7);

/// Flattens tensors into one vector (and back) so a whole model can be
/// perturbed through check_gradients.
std::vector<double> flatten(std::span<const NamedConstTensor> tensors);
void unflatten(std::span<const double> flat, std::span<const NamedTensor> tensors);

}  // namespace c3
