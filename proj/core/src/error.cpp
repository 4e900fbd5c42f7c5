#include "tifu/error.hpp"

namespace tifu {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SoleElement: return "SoleElement";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownItem: return "UnknownItem";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::MissingBasket: return "MissingBasket";
    case ErrorCode::OutOfOrderBasket: return "OutOfOrderBasket";
    case ErrorCode::ItemNotInBasket: return "ItemNotInBasket";
    case ErrorCode::ConsistencyViolation: return "ConsistencyViolation";
    case ErrorCode::SnapshotCorrupt: return "SnapshotCorrupt";
    case ErrorCode::UnknownUser: return "UnknownUser";
    case ErrorCode::NeighborlessUser: return "NeighborlessUser";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace tifu
