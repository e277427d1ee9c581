#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eucgov {

// Error tokens are part of the wire format (CLI stderr, ApiError.code) and
// must stay stable.
enum class ErrorCode {
  NotAWorkbook,
  EncryptedWorkbook,
  MalformedPart,
  UnknownField,
  OutOfRange,
  MissingField,
  InvalidInput,
  UnknownId,
  UnknownRisk,
  UnknownDraft,
  InconsistentResult,
  RetiredRecord,
  ScaleViolation,
  ResidualExceedsInherent,
  AlreadyClosed,
  DateOrder,
  SchemaMismatch,
  MalformedRow,
  EmptyStore,
  UnsupportedFormat,
  StoreUnreadable,
  PortInUse,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {})
      : std::runtime_error(message), code_(code), field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  // Offending input field, when one can be named.
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace eucgov
