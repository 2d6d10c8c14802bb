#pragma once

#include <array>
#include <optional>
#include <string>

#include "c3/errors.hpp"
#include "c3/json.hpp"

namespace c3::score {

/// A conditional is undefined, or a formula's denominator vanishes.
class DegenerateTableError : public Error {
 public:
  using Error::Error;
};

/// Exogeneity or monotonicity does not hold, so the PNS is not identified.
class IdentifiabilityError : public Error {
 public:
  using Error::Error;
};

/// Counterfactual and observable tables disagree, or a probability formula
/// leaves [0, 1] by more than rounding slack.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kTableTolerance = 1e-12;
inline constexpr double kClipSlack = 1e-9;

/// Binary cause F_c and outcome Y.
struct CausalTable {
  /// joint[f][y] = P(F_c = f, Y = y)
  std::array<std::array<double, 2>, 2> joint{};
  /// interventional[v][y] = P(Y = y | do(F_c = v))
  std::array<std::array<double, 2>, 2> interventional{};

  void validate() const;
  double p_cause(int f) const { return joint[f][0] + joint[f][1]; }
  double p_outcome(int y) const { return joint[0][y] + joint[1][y]; }
  /// P(Y = y | F_c = f); throws DegenerateTableError when P(F_c = f) = 0.
  double conditional(int y, int f) const;
};

/// Response-function types, named by (Y under do(F_c=0), Y under do(F_c=1)).
enum ResponseType : int { kNever = 0, kComplier = 1, kDefier = 2, kAlways = 3 };

inline int outcome_under(ResponseType t, int v) {
  switch (t) {
    case kNever: return 0;
    case kAlways: return 1;
    case kComplier: return v;
    case kDefier: return 1 - v;
  }
  return 0;
}

/// Full counterfactual specification: mass[f][type] = P(F_c = f, type).
struct CounterfactualTable {
  std::array<std::array<double, 4>, 2> mass{};

  void validate() const;
  /// Observable joint and interventional tables implied by consistency
  /// (Y = Y_{do(F_c = f)} when F_c = f).
  CausalTable observable() const;
};

bool check_exogeneity(const CausalTable& t, double tol);

enum class MonotoneDirection { None, Increasing, Decreasing, Both };

struct MonotonicityResult {
  bool monotone = false;
  MonotoneDirection direction = MonotoneDirection::None;
  /// True when decided from a counterfactual table; false when only the
  /// necessary condition on interventional probabilities was tested.
  bool exact = false;
};

/// Necessary condition only: P(Y=1|do(1)) >= P(Y=1|do(0)) (Increasing) or the
/// reverse (Decreasing).
MonotonicityResult check_monotonicity(const CausalTable& t, double tol);
/// Increasing: no defiers. Decreasing: no compliers.
MonotonicityResult check_monotonicity(const CounterfactualTable& t, double tol);

std::string to_string(MonotoneDirection d);

/// P(Y=1 | F_c=1) - P(Y=1 | F_c=0), after checking exogeneity and monotonicity
/// at `tol`. Throws IdentifiabilityError naming the failed assumption.
double pns_identifiable(const CausalTable& t, double tol = 1e-9);

/// (P(Y=1|do(1)) - P(Y=1)) / P(Y=0, F_c=0)
double prob_sufficiency(const CausalTable& t);
/// (P(Y=1) - P(Y=1|do(0))) / P(Y=1, F_c=1)
double prob_necessity(const CausalTable& t);

/// Exact complete-cause probability from counterfactuals:
///   P(Y_{do(c)}=y | F_c=c', Y!=y) P(F_c=c', Y!=y)
/// + P(Y_{do(c')}!=y | F_c=c, Y=y) P(F_c=c, Y=y),   c' = 1 - c.
double complete_cause_probability(const CounterfactualTable& t, int cause = 1, int outcome = 1);
/// Same, after checking that `cf` reproduces `observed` (ConsistencyError otherwise).
double complete_cause_probability(const CausalTable& observed, const CounterfactualTable& cf, int cause = 1,
                                  int outcome = 1);

/// Exogenous table from P(F_c=1) and response-type probabilities.
CounterfactualTable exogenous_table(double p_cause1, const std::array<double, 4>& types);

CausalTable table_from_json(const Json& j);
std::optional<CounterfactualTable> counterfactual_from_json(const Json& j);
Json to_json(const CausalTable& t);
Json to_json(const CounterfactualTable& t);

/// Everything the `score` command reports for one table. Quantities that
/// cannot be computed are null with a reason under "errors".
Json score_report(const CausalTable& t, const std::optional<CounterfactualTable>& cf, double tol = 1e-9);

}  // namespace c3::score
