#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tifu {

enum class ErrorCode {
  EmptySeries,
  DimensionMismatch,
  SoleElement,
  IndexOutOfRange,
  InvalidArgument,
  UnknownItem,
  EmptyHistory,
  MissingBasket,
  OutOfOrderBasket,
  ItemNotInBasket,
  ConsistencyViolation,
  SnapshotCorrupt,
  UnknownUser,
  NeighborlessUser,
  MalformedInput,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the engine in particular) can turn it into a report instead of
/// aborting.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class SnapshotCorrupt : public Error {
 public:
  SnapshotCorrupt(std::uint64_t offset, const std::string& what)
      : Error(ErrorCode::SnapshotCorrupt, what + " at byte offset " + std::to_string(offset)),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace tifu
