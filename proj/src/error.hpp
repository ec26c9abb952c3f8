// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace kpiflow {

enum class ErrorCode {
  IllegalTransition,
  KindMismatch,
  NegativeDelta,
  ScriptError,
  SimViolation,
  UnknownSubflow,
  RecordTooLarge,
  UnknownTemplate,
  FieldLengthMismatch,
  MalformedMessage,
  TruncatedSet,
  InvalidArgument,
  Io,
  Socket,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kpiflow
