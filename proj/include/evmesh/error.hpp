#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evmesh {

enum class ErrorKind { kParameter, kShape, kData, kRange, kIo, kParse };

std::string_view to_string(ErrorKind kind);

/// Base for every error the toolkit raises. `stage()` names the operation
/// that failed so the CLI can report it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  ErrorKind kind_;
  std::string stage_;
};

#define EVMESH_DECLARE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                             \
   public:                                                                \
    Name(std::string stage, const std::string& message)                   \
        : Error(ErrorKind::Kind, std::move(stage), message) {}            \
  }

EVMESH_DECLARE_ERROR(ParameterError, kParameter);
EVMESH_DECLARE_ERROR(ShapeError, kShape);
EVMESH_DECLARE_ERROR(DataError, kData);
EVMESH_DECLARE_ERROR(RangeError, kRange);
EVMESH_DECLARE_ERROR(IoError, kIo);
EVMESH_DECLARE_ERROR(ParseError, kParse);

#undef EVMESH_DECLARE_ERROR

}  // namespace evmesh
