#include "c3/regularizers.hpp"

#include <cmath>

#include "c3/errors.hpp"

namespace c3::reg {

std::map<int, std::vector<Index>> group_rows(std::span<const int> env_tags) {
  std::map<int, std::vector<Index>> groups;
  for (std::size_t i = 0; i < env_tags.size(); ++i) groups[env_tags[i]].push_back(static_cast<Index>(i));
  return groups;
}

KlResult kl_term(const PosteriorGaussian& post) {
  if (post.mean.rows() != post.logvar.rows() || post.mean.cols() != post.logvar.cols())
    throw DimensionError("kl_term: mean/logvar shape mismatch");
  if (post.mean.rows() == 0) throw ContractError("kl_term: empty posterior");
  require_finite(post.mean, "kl_term: mean");
  require_finite(post.logvar, "kl_term: logvar");
  const double n = static_cast<double>(post.mean.rows());
  const auto var = post.logvar.array().exp();
  KlResult r;
  r.value = 0.5 * (post.mean.array().square() + var - 1.0 - post.logvar.array()).sum() / n;
  r.grad_mean = post.mean / n;
  r.grad_logvar = (0.5 * (var - 1.0) / n).matrix();
  if (!std::isfinite(r.value)) throw NumericError("kl_term: non-finite value");
  return r;
}

IndepResult indep_penalty(const Matrix& reprs, std::span<const int> env_tags) {
  if (static_cast<std::size_t>(reprs.rows()) != env_tags.size())
    throw DimensionError("indep_penalty: env_tags length != row count");
  IndepResult r;
  r.grad = Matrix::Zero(reprs.rows(), reprs.cols());
  const auto groups = group_rows(env_tags);
  if (groups.size() < 2) {
    warn("indep_penalty: fewer than two env groups in batch; penalty is 0");
    return r;
  }
  // Each unordered pair of groups appears twice in the ordered sum.
  for (auto a = groups.begin(); a != groups.end(); ++a) {
    for (auto b = std::next(a); b != groups.end(); ++b) {
      const auto& rows_a = a->second;
      const auto& rows_b = b->second;
      const double w = 2.0 / (static_cast<double>(rows_a.size()) * static_cast<double>(rows_b.size()));
      for (Index i : rows_a) {
        for (Index j : rows_b) {
          const auto diff = (reprs.row(i) - reprs.row(j)).eval();
          const double dist = diff.norm();
          r.value += w * dist;
          if (dist > 0.0) {
            r.grad.row(i) += (w / dist) * diff;
            r.grad.row(j) -= (w / dist) * diff;
          }
        }
      }
    }
  }
  return r;
}

CondIndepResult cond_indep_penalty(std::span<const double> linear, double bias, std::span<const int> labels,
                                   std::span<const int> env_tags) {
  if (linear.size() != labels.size() || linear.size() != env_tags.size())
    throw DimensionError("cond_indep_penalty: input lengths differ");
  CondIndepResult r;
  r.grad_linear.assign(linear.size(), 0.0);
  for (const auto& [tag, rows] : group_rows(env_tags)) {
    const double n = static_cast<double>(rows.size());
    double g = 0.0;
    for (Index i : rows) {
      const auto k = static_cast<std::size_t>(i);
      g += linear[k] * (logistic(linear[k] + bias) - labels[k]);
    }
    g /= n;
    r.group_grad[tag] = g;
    r.value += g * g;
    for (Index i : rows) {
      const auto k = static_cast<std::size_t>(i);
      const double p = logistic(linear[k] + bias);
      const double dp = p * (1.0 - p);
      r.grad_linear[k] += 2.0 * g * ((p - labels[k]) + linear[k] * dp) / n;
      r.grad_bias += 2.0 * g * linear[k] * dp / n;
    }
  }
  return r;
}

}  // namespace c3::reg
