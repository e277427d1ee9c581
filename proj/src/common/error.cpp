#include "eucgov/error.hpp"

namespace eucgov {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotAWorkbook: return "NotAWorkbook";
    case ErrorCode::EncryptedWorkbook: return "EncryptedWorkbook";
    case ErrorCode::MalformedPart: return "MalformedPart";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::UnknownRisk: return "UnknownRisk";
    case ErrorCode::UnknownDraft: return "UnknownDraft";
    case ErrorCode::InconsistentResult: return "InconsistentResult";
    case ErrorCode::RetiredRecord: return "RetiredRecord";
    case ErrorCode::ScaleViolation: return "ScaleViolation";
    case ErrorCode::ResidualExceedsInherent: return "ResidualExceedsInherent";
    case ErrorCode::AlreadyClosed: return "AlreadyClosed";
    case ErrorCode::DateOrder: return "DateOrder";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::EmptyStore: return "EmptyStore";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::StoreUnreadable: return "StoreUnreadable";
    case ErrorCode::PortInUse: return "PortInUse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace eucgov
