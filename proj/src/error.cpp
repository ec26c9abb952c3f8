// SPDX-License-Identifier: Apache-2.0
#include "error.hpp"

namespace kpiflow {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::NegativeDelta: return "NegativeDelta";
    case ErrorCode::ScriptError: return "ScriptError";
    case ErrorCode::SimViolation: return "SimViolation";
    case ErrorCode::UnknownSubflow: return "UnknownSubflow";
    case ErrorCode::RecordTooLarge: return "RecordTooLarge";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::FieldLengthMismatch: return "FieldLengthMismatch";
    case ErrorCode::MalformedMessage: return "MalformedMessage";
    case ErrorCode::TruncatedSet: return "TruncatedSet";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Socket: return "Socket";
  }
  return "Unknown";
}

}  // namespace kpiflow
