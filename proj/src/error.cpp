#include "autopower/error.hpp"

namespace autopower {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_sample: return "invalid-sample";
    case ErrorKind::empty_input: return "empty";
    case ErrorKind::shape: return "shape";
    case ErrorKind::format: return "format";
    case ErrorKind::schema: return "schema";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::degenerate_input: return "degenerate-input";
    case ErrorKind::excessive_outliers: return "excessive-outlier";
    case ErrorKind::table_range: return "table-range";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::too_large: return "too-large";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, std::string module, const std::string& detail)
    : std::runtime_error(module + ": " + std::string(to_string(kind)) + " error: " + detail),
      kind_(kind),
      module_(std::move(module)),
      detail_(detail) {}

void rethrow_with_context(const Error& e, const std::string& context) {
  throw Error(e.kind(), e.module(), context + ": " + e.detail());
}

}  // namespace autopower
