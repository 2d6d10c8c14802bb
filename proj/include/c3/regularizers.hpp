#pragma once

#include <map>
#include <span>
#include <vector>

#include "c3/numkern.hpp"

namespace c3::reg {

/// Diagonal-Gaussian posterior, one row per sample.
struct PosteriorGaussian {
  Matrix mean;
  Matrix logvar;
};

struct KlResult {
  double value = 0.0;
  Matrix grad_mean;
  Matrix grad_logvar;
};

/// Mean over rows of KL(N(mean, exp(logvar)) || N(0, I)).
KlResult kl_term(const PosteriorGaussian& post);

struct IndepResult {
  double value = 0.0;
  Matrix grad;  // d value / d reprs
};

/// Sum over ordered pairs of distinct groups (s, t) of the mean Euclidean
/// distance between rows of group s and rows of group t. Coincident rows
/// contribute a zero subgradient. A single group yields 0 with a warning.
IndepResult indep_penalty(const Matrix& reprs, std::span<const int> env_tags);

struct CondIndepResult {
  double value = 0.0;
  std::map<int, double> group_grad;  // g_s per env tag
  std::vector<double> grad_linear;   // d value / d (W . c_i)
  double grad_bias = 0.0;
};

/// IRM-style penalty. With z_i = m * u_i + b and logistic loss, g_s is the
/// derivative at m = 1 of the group's mean loss:
///   g_s = mean_{i in s} u_i * (sigmoid(z_i) - y_i),   value = sum_s g_s^2.
/// `linear` holds u_i = W . c_i; the bias is not scaled by m.
CondIndepResult cond_indep_penalty(std::span<const double> linear, double bias, std::span<const int> labels,
                                   std::span<const int> env_tags);

/// Row indices for each env tag, in ascending tag order.
std::map<int, std::vector<Index>> group_rows(std::span<const int> env_tags);

}  // namespace c3::reg
