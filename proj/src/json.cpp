#include "c3/json.hpp"

#include <algorithm>
#include <cmath>

#include "c3/errors.hpp"

namespace c3 {
namespace {

const Json& field(const Json& obj, const std::string& key) {
  if (!obj.is_object()) throw ConfigError("expected a JSON object around key '" + key + "'");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError("missing key '" + key + "'");
  return *it;
}

std::array<double, synth::kModalities> triple(const Json& obj, const std::string& key) {
  const Json& v = field(obj, key);
  if (!v.is_array() || v.size() != synth::kModalities)
    throw ConfigError("key '" + key + "' must be an array of " + std::to_string(synth::kModalities) + " numbers");
  std::array<double, synth::kModalities> out{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError("key '" + key + "' must hold numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

}  // namespace

double json_number(const Json& obj, const std::string& key) {
  const Json& v = field(obj, key);
  if (!v.is_number()) throw ConfigError("key '" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t json_uint(const Json& obj, const std::string& key) {
  const Json& v = field(obj, key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError("key '" + key + "' must be a non-negative integer");
}

bool json_bool(const Json& obj, const std::string& key) {
  const Json& v = field(obj, key);
  if (!v.is_boolean()) throw ConfigError("key '" + key + "' must be true or false");
  return v.get<bool>();
}

void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, _] : obj.items()) {
    const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return key == k; });
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

Json to_json(const synth::SynthConfig& cfg) {
  Json j;
  j["n_train"] = cfg.n_train;
  j["n_eval"] = cfg.n_eval;
  j["xi_a"] = cfg.xi_a;
  j["xi_label"] = cfg.xi_label;
  j["xi_b"] = cfg.xi_b;
  j["omega"] = cfg.omega;
  j["block_dim"] = cfg.block_dim;
  j["noise_var"] = cfg.noise_var;
  j["seed"] = cfg.seed;
  j["mixing"] = cfg.mixing == synth::Mixing::Shift ? "shift" : "product";
  return j;
}

synth::SynthConfig synth_config_from_json(const Json& j, synth::SynthConfig cfg) {
  reject_unknown_keys(j,
                      {"n_train", "n_eval", "xi_a", "xi_label", "xi_b", "omega", "block_dim", "noise_var", "seed",
                       "mixing"},
                      "synth config");
  if (j.contains("n_train")) cfg.n_train = json_uint(j, "n_train");
  if (j.contains("n_eval")) cfg.n_eval = json_uint(j, "n_eval");
  if (j.contains("xi_a")) cfg.xi_a = triple(j, "xi_a");
  if (j.contains("xi_label")) cfg.xi_label = json_number(j, "xi_label");
  if (j.contains("xi_b")) cfg.xi_b = triple(j, "xi_b");
  if (j.contains("omega")) cfg.omega = json_number(j, "omega");
  if (j.contains("block_dim")) cfg.block_dim = json_uint(j, "block_dim");
  if (j.contains("noise_var")) cfg.noise_var = json_number(j, "noise_var");
  if (j.contains("seed")) cfg.seed = json_uint(j, "seed");
  if (j.contains("mixing")) {
    const Json& m = j["mixing"];
    if (m == "shift")
      cfg.mixing = synth::Mixing::Shift;
    else if (m == "product")
      cfg.mixing = synth::Mixing::Product;
    else
      throw ConfigError("key 'mixing' must be \"shift\" or \"product\"");
  }
  cfg.validate();
  return cfg;
}

}  // namespace c3
