#pragma once

#include <span>
#include <vector>

namespace c3::risk {

/// Hard (indicator) value alongside its differentiable surrogate.
struct RiskValue {
  double hard = 0.0;
  double surrogate = 0.0;
};

struct RiskReport {
  RiskValue suf;
  RiskValue nec;
  RiskValue mon;
  RiskValue c3_bound;  // 2 * suf + mon, per variant
};

/// Predicted class at threshold 0.5; a score of exactly 0.5 counts as class 1.
inline int predicted_class(double score) { return score >= 0.5 ? 1 : 0; }

/// Scores on c-samples. hard: misclassification rate; surrogate: mean BCE.
RiskValue suf_risk(std::span<const double> scores, std::span<const int> labels);
/// Scores on adversarial c-bar samples. hard: agreement rate with the label;
/// surrogate: mean BCE against the flipped label.
RiskValue nec_risk(std::span<const double> scores_cbar, std::span<const int> labels);
/// hard: rate of equal predicted classes; surrogate: mean p*q + (1-p)*(1-q).
RiskValue mon_risk(std::span<const double> scores_c, std::span<const double> scores_cbar);

/// 2 * suf + mon.
double c3_bound(double suf, double mon);

RiskReport make_report(std::span<const double> scores_c, std::span<const double> scores_cbar,
                       std::span<const int> labels);

/// Expected monotonicity risk when predictions on c and c-bar are
/// conditionally independent: suf + nec - 2 * suf * nec. Test oracle only.
double decomposition_check(double suf, double nec);

/// Per-row gradients of the monotonicity surrogate with respect to both scores.
void mon_surrogate_grad(std::span<const double> scores_c, std::span<const double> scores_cbar,
                        std::vector<double>& grad_c, std::vector<double>& grad_cbar);

}  // namespace c3::risk
