#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace ris {

enum class ErrorCode {
  kOutOfRange,
  kInvalidArgument,
  kDimensionMismatch,
  kDegenerateGeometry,
  kBudgetExceeded,
  kMeasurementFailed,
  kProbeFailed,
  kBusy,
  kModeViolation,
  kAddressConflict,
  kParse,
  kIo,
  kScenarioViolation,
};

std::string_view to_string(ErrorCode code);

// Every library failure carries a stable machine-readable code plus a JSON
// context object; the CLI and the service serialize these as-is.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json context = nlohmann::json::object())
      : std::runtime_error(message), code_(code), context_(std::move(context)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& context() const noexcept { return context_; }

  nlohmann::json to_json() const;

 private:
  ErrorCode code_;
  nlohmann::json context_;
};

}  // namespace ris
