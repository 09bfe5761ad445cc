#include "evmesh/error.hpp"

namespace evmesh {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParameter: return "parameter error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kData: return "data error";
    case ErrorKind::kRange: return "range error";
    case ErrorKind::kIo: return "I/O error";
    case ErrorKind::kParse: return "parse error";
  }
  return "error";
}

Error::Error(ErrorKind kind, std::string stage, const std::string& message)
    : std::runtime_error(message), kind_(kind), stage_(std::move(stage)) {}

}  // namespace evmesh
