#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace c3 {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value became NaN or infinite.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a precondition (empty batch, stale cache, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Non-fatal diagnostics. The default sink writes to stderr.
using WarningSink = std::function<void(std::string_view)>;
void warn(std::string_view message);
WarningSink set_warning_sink(WarningSink sink);

}  // namespace c3
