#include "slump/error.hpp"

namespace slump {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidShape: return "invalid-shape";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kInvalidAxis: return "invalid-axis";
    case ErrorCode::kInvalidLoss: return "invalid-loss";
    case ErrorCode::kNoGraph: return "no-graph";
    case ErrorCode::kNumericFailure: return "numeric-failure";
    case ErrorCode::kDegenerateBatch: return "degenerate-batch";
    case ErrorCode::kInvalidModel: return "invalid-model";
    case ErrorCode::kInvalidRoi: return "invalid-roi";
    case ErrorCode::kInvalidParams: return "invalid-params";
    case ErrorCode::kTooShort: return "too-short";
    case ErrorCode::kNoWindow: return "no-window";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace slump
