#include "c3/risks.hpp"

#include <algorithm>
#include <cmath>

#include "c3/errors.hpp"

namespace c3::risk {
namespace {

// Scores are clamped away from {0,1} before taking logs.
constexpr double kScoreFloor = 1e-12;

void check_inputs(std::span<const double> scores, std::span<const int> labels, const char* who) {
  if (scores.empty()) throw ContractError(std::string(who) + ": empty batch");
  if (scores.size() != labels.size()) throw DimensionError(std::string(who) + ": scores/labels length mismatch");
  for (double s : scores)
    if (!(s >= 0.0 && s <= 1.0)) throw ContractError(std::string(who) + ": scores must lie in [0,1]");
  for (int y : labels)
    if (y != 0 && y != 1) throw ContractError(std::string(who) + ": labels must be 0 or 1");
}

double bce(double p, int y) {
  const double q = std::clamp(p, kScoreFloor, 1.0 - kScoreFloor);
  return y == 1 ? -std::log(q) : -std::log1p(-q);
}

}  // namespace

RiskValue suf_risk(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "suf_risk");
  RiskValue r;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    r.hard += predicted_class(scores[i]) != labels[i] ? 1.0 : 0.0;
    r.surrogate += bce(scores[i], labels[i]);
  }
  const auto n = static_cast<double>(scores.size());
  r.hard /= n;
  r.surrogate /= n;
  return r;
}

RiskValue nec_risk(std::span<const double> scores_cbar, std::span<const int> labels) {
  check_inputs(scores_cbar, labels, "nec_risk");
  RiskValue r;
  for (std::size_t i = 0; i < scores_cbar.size(); ++i) {
    r.hard += predicted_class(scores_cbar[i]) == labels[i] ? 1.0 : 0.0;
    r.surrogate += bce(scores_cbar[i], 1 - labels[i]);
  }
  const auto n = static_cast<double>(scores_cbar.size());
  r.hard /= n;
  r.surrogate /= n;
  return r;
}

RiskValue mon_risk(std::span<const double> scores_c, std::span<const double> scores_cbar) {
  if (scores_c.empty()) throw ContractError("mon_risk: empty batch");
  if (scores_c.size() != scores_cbar.size()) throw ContractError("mon_risk: row count mismatch");
  RiskValue r;
  for (std::size_t i = 0; i < scores_c.size(); ++i) {
    const double p = scores_c[i];
    const double q = scores_cbar[i];
    r.hard += predicted_class(p) == predicted_class(q) ? 1.0 : 0.0;
    r.surrogate += p * q + (1.0 - p) * (1.0 - q);
  }
  const auto n = static_cast<double>(scores_c.size());
  r.hard /= n;
  r.surrogate /= n;
  return r;
}

double c3_bound(double suf, double mon) { return 2.0 * suf + mon; }

RiskReport make_report(std::span<const double> scores_c, std::span<const double> scores_cbar,
                       std::span<const int> labels) {
  RiskReport rep;
  rep.suf = suf_risk(scores_c, labels);
  rep.nec = nec_risk(scores_cbar, labels);
  rep.mon = mon_risk(scores_c, scores_cbar);
  rep.c3_bound = {c3_bound(rep.suf.hard, rep.mon.hard), c3_bound(rep.suf.surrogate, rep.mon.surrogate)};
  return rep;
}

double decomposition_check(double suf, double nec) { return suf + nec - 2.0 * suf * nec; }

void mon_surrogate_grad(std::span<const double> scores_c, std::span<const double> scores_cbar,
                        std::vector<double>& grad_c, std::vector<double>& grad_cbar) {
  if (scores_c.size() != scores_cbar.size() || scores_c.empty())
    throw ContractError("mon_surrogate_grad: row count mismatch");
  const auto n = static_cast<double>(scores_c.size());
  grad_c.resize(scores_c.size());
  grad_cbar.resize(scores_c.size());
  for (std::size_t i = 0; i < scores_c.size(); ++i) {
    grad_c[i] = (2.0 * scores_cbar[i] - 1.0) / n;
    grad_cbar[i] = (2.0 * scores_c[i] - 1.0) / n;
  }
}

}  // namespace c3::risk
