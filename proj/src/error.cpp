#include "ris/error.hpp"

namespace ris {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kDegenerateGeometry: return "DEGENERATE_GEOMETRY";
    case ErrorCode::kBudgetExceeded: return "BUDGET_EXCEEDED";
    case ErrorCode::kMeasurementFailed: return "MEASUREMENT_FAILED";
    case ErrorCode::kProbeFailed: return "PROBE_FAILED";
    case ErrorCode::kBusy: return "BUSY";
    case ErrorCode::kModeViolation: return "MODE_VIOLATION";
    case ErrorCode::kAddressConflict: return "ADDRESS_CONFLICT";
    case ErrorCode::kParse: return "PARSE_ERROR";
    case ErrorCode::kIo: return "IO_ERROR";
    case ErrorCode::kScenarioViolation: return "SCENARIO_VIOLATION";
  }
  return "UNKNOWN";
}

nlohmann::json Error::to_json() const {
  return {{"code", std::string(to_string(code_))}, {"message", what()}, {"context", context_}};
}

}  // namespace ris
