#include "c3/c3score.hpp"

#include <algorithm>
#include <cmath>

namespace c3::score {
namespace {

constexpr const char* kTypeNames[4] = {"never", "complier", "defier", "always"};

void check_probability(double p, const char* what) {
  if (!std::isfinite(p) || p < 0.0) throw ConsistencyError(std::string(what) + ": entries must be finite and >= 0");
}

double clip_unit(double v, const char* what) {
  if (v < -kClipSlack || v > 1.0 + kClipSlack)
    throw ConsistencyError(std::string(what) + " = " + std::to_string(v) +
                           " lies outside [0,1]; the table is not monotone or not consistent");
  return std::clamp(v, 0.0, 1.0);
}

double p_do(const CausalTable& t, int v) { return t.interventional[v][1]; }

}  // namespace

void CausalTable::validate() const {
  double total = 0.0;
  for (const auto& row : joint)
    for (double p : row) {
      check_probability(p, "joint");
      total += p;
    }
  if (std::abs(total - 1.0) > kTableTolerance) throw ConsistencyError("joint distribution does not sum to 1");
  for (const auto& row : interventional) {
    for (double p : row) check_probability(p, "interventional");
    if (std::abs(row[0] + row[1] - 1.0) > kTableTolerance)
      throw ConsistencyError("interventional row does not sum to 1");
  }
}

double CausalTable::conditional(int y, int f) const {
  const double pf = p_cause(f);
  if (!(pf > 0.0)) throw DegenerateTableError("P(F_c=" + std::to_string(f) + ") = 0; conditional undefined");
  return joint[f][y] / pf;
}

void CounterfactualTable::validate() const {
  double total = 0.0;
  for (const auto& row : mass)
    for (double p : row) {
      check_probability(p, "counterfactual");
      total += p;
    }
  if (std::abs(total - 1.0) > kTableTolerance) throw ConsistencyError("counterfactual table does not sum to 1");
}

CausalTable CounterfactualTable::observable() const {
  CausalTable t;
  for (int f = 0; f < 2; ++f)
    for (int k = 0; k < 4; ++k) {
      const double m = mass[f][k];
      const auto type = static_cast<ResponseType>(k);
      t.joint[f][outcome_under(type, f)] += m;
      for (int v = 0; v < 2; ++v) t.interventional[v][outcome_under(type, v)] += m;
    }
  return t;
}

bool check_exogeneity(const CausalTable& t, double tol) {
  t.validate();
  for (int f = 0; f < 2; ++f)
    for (int y = 0; y < 2; ++y)
      if (std::abs(t.interventional[f][y] - t.conditional(y, f)) > tol) return false;
  return true;
}

MonotonicityResult check_monotonicity(const CausalTable& t, double tol) {
  t.validate();
  const double diff = p_do(t, 1) - p_do(t, 0);
  const bool inc = diff >= -tol;
  const bool dec = diff <= tol;
  MonotonicityResult r;
  r.monotone = inc || dec;  // one direction is always consistent with two numbers
  r.direction = inc && dec ? MonotoneDirection::Both : inc ? MonotoneDirection::Increasing : MonotoneDirection::Decreasing;
  r.exact = false;
  return r;
}

MonotonicityResult check_monotonicity(const CounterfactualTable& t, double tol) {
  t.validate();
  const double defiers = t.mass[0][kDefier] + t.mass[1][kDefier];
  const double compliers = t.mass[0][kComplier] + t.mass[1][kComplier];
  const bool inc = defiers <= tol;
  const bool dec = compliers <= tol;
  MonotonicityResult r;
  r.monotone = inc || dec;
  r.direction = inc && dec  ? MonotoneDirection::Both
                : inc       ? MonotoneDirection::Increasing
                : dec       ? MonotoneDirection::Decreasing
                            : MonotoneDirection::None;
  r.exact = true;
  return r;
}

std::string to_string(MonotoneDirection d) {
  switch (d) {
    case MonotoneDirection::None: return "none";
    case MonotoneDirection::Increasing: return "increasing";
    case MonotoneDirection::Decreasing: return "decreasing";
    case MonotoneDirection::Both: return "both";
  }
  return "none";
}

double pns_identifiable(const CausalTable& t, double tol) {
  t.validate();
  if (!check_exogeneity(t, tol))
    throw IdentifiabilityError("exogeneity violated: P(Y|do(F_c)) differs from P(Y|F_c)");
  if (!check_monotonicity(t, tol).monotone) throw IdentifiabilityError("monotonicity violated");
  return t.conditional(1, 1) - t.conditional(1, 0);
}

double prob_sufficiency(const CausalTable& t) {
  t.validate();
  const double denom = t.joint[0][0];
  if (!(denom > 0.0)) throw DegenerateTableError("P(Y=0, F_c=0) = 0; probability of sufficiency undefined");
  return clip_unit((p_do(t, 1) - t.p_outcome(1)) / denom, "probability of sufficiency");
}

double prob_necessity(const CausalTable& t) {
  t.validate();
  const double denom = t.joint[1][1];
  if (!(denom > 0.0)) throw DegenerateTableError("P(Y=1, F_c=1) = 0; probability of necessity undefined");
  return clip_unit((t.p_outcome(1) - p_do(t, 0)) / denom, "probability of necessity");
}

double complete_cause_probability(const CounterfactualTable& t, int cause, int outcome) {
  t.validate();
  const int alt = 1 - cause;
  double sufficiency_term = 0.0;  // F_c = alt, Y != y, yet Y_{do(cause)} = y
  double necessity_term = 0.0;    // F_c = cause, Y = y, yet Y_{do(alt)} != y
  for (int k = 0; k < 4; ++k) {
    const auto type = static_cast<ResponseType>(k);
    const bool flips = outcome_under(type, cause) == outcome && outcome_under(type, alt) != outcome;
    if (!flips) continue;
    sufficiency_term += t.mass[alt][k];
    necessity_term += t.mass[cause][k];
  }
  return sufficiency_term + necessity_term;
}

double complete_cause_probability(const CausalTable& observed, const CounterfactualTable& cf, int cause,
                                  int outcome) {
  observed.validate();
  const CausalTable implied = cf.observable();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      if (std::abs(implied.joint[a][b] - observed.joint[a][b]) > kClipSlack)
        throw ConsistencyError("counterfactual table does not reproduce the observed joint distribution");
      if (std::abs(implied.interventional[a][b] - observed.interventional[a][b]) > kClipSlack)
        throw ConsistencyError("counterfactual table does not reproduce the interventional distribution");
    }
  return complete_cause_probability(cf, cause, outcome);
}

CounterfactualTable exogenous_table(double p_cause1, const std::array<double, 4>& types) {
  CounterfactualTable t;
  for (int k = 0; k < 4; ++k) {
    t.mass[0][k] = (1.0 - p_cause1) * types[k];
    t.mass[1][k] = p_cause1 * types[k];
  }
  return t;
}

CausalTable table_from_json(const Json& j) {
  reject_unknown_keys(j, {"joint", "interventional", "counterfactual"}, "table");
  if (!j.contains("joint")) throw ConfigError("missing key 'joint'");
  if (!j.contains("interventional")) throw ConfigError("missing key 'interventional'");
  const Json& joint = j["joint"];
  const Json& inter = j["interventional"];
  reject_unknown_keys(joint, {"F0_Y0", "F0_Y1", "F1_Y0", "F1_Y1"}, "joint");
  reject_unknown_keys(inter, {"do_F0_Y0", "do_F0_Y1", "do_F1_Y0", "do_F1_Y1"}, "interventional");
  CausalTable t;
  for (int f = 0; f < 2; ++f)
    for (int y = 0; y < 2; ++y) {
      const std::string suffix = "F" + std::to_string(f) + "_Y" + std::to_string(y);
      t.joint[f][y] = json_number(joint, suffix);
      t.interventional[f][y] = json_number(inter, "do_" + suffix);
    }
  t.validate();
  return t;
}

std::optional<CounterfactualTable> counterfactual_from_json(const Json& j) {
  if (!j.contains("counterfactual")) return std::nullopt;
  const Json& cf = j["counterfactual"];
  reject_unknown_keys(cf, {"F0", "F1"}, "counterfactual");
  CounterfactualTable t;
  for (int f = 0; f < 2; ++f) {
    const std::string key = "F" + std::to_string(f);
    if (!cf.contains(key)) throw ConfigError("missing key 'counterfactual." + key + "'");
    const Json& row = cf[key];
    reject_unknown_keys(row, {"never", "complier", "defier", "always"}, "counterfactual." + key);
    for (int k = 0; k < 4; ++k) t.mass[f][k] = json_number(row, kTypeNames[k]);
  }
  t.validate();
  return t;
}

Json to_json(const CausalTable& t) {
  Json j;
  for (int f = 0; f < 2; ++f)
    for (int y = 0; y < 2; ++y) {
      const std::string suffix = "F" + std::to_string(f) + "_Y" + std::to_string(y);
      j["joint"][suffix] = t.joint[f][y];
      j["interventional"]["do_" + suffix] = t.interventional[f][y];
    }
  return j;
}

Json to_json(const CounterfactualTable& t) {
  Json j;
  for (int f = 0; f < 2; ++f)
    for (int k = 0; k < 4; ++k) j["F" + std::to_string(f)][kTypeNames[k]] = t.mass[f][k];
  return j;
}

Json score_report(const CausalTable& t, const std::optional<CounterfactualTable>& cf, double tol) {
  Json out;
  Json errors = Json::object();
  auto attempt = [&](const char* key, auto&& fn) {
    try {
      out[key] = fn();
    } catch (const Error& e) {
      out[key] = nullptr;
      errors[key] = e.what();
    }
  };
  attempt("ps", [&] { return prob_sufficiency(t); });
  attempt("pn", [&] { return prob_necessity(t); });
  attempt("pns", [&] { return pns_identifiable(t, tol); });
  attempt("exogenous", [&] { return check_exogeneity(t, tol); });
  const MonotonicityResult mono = cf ? check_monotonicity(*cf, tol) : check_monotonicity(t, tol);
  out["monotone"] = mono.monotone;
  out["monotonicity_direction"] = to_string(mono.direction);
  out["monotonicity_exact"] = mono.exact;
  if (cf) attempt("complete_cause", [&] { return complete_cause_probability(t, *cf); });
  out["errors"] = errors;
  return out;
}

}  // namespace c3::score
