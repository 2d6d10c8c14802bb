#pragma once

// JSON conversions for configuration and report records. Readers are strict:
// unknown keys and wrong value types raise ConfigError naming the key.

#include <json.hpp>

#include "c3/synthdata.hpp"

namespace c3 {

using Json = nlohmann::ordered_json;

Json to_json(const synth::SynthConfig& cfg);
/// Overlays the keys present in `j` onto `base`.
synth::SynthConfig synth_config_from_json(const Json& j, synth::SynthConfig base = {});

/// Typed field access that reports the offending key on failure.
double json_number(const Json& obj, const std::string& key);
std::uint64_t json_uint(const Json& obj, const std::string& key);
bool json_bool(const Json& obj, const std::string& key);
void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> known, const std::string& where);

}  // namespace c3
