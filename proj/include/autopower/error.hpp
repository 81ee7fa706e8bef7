#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace autopower {

enum class ErrorKind {
  invalid_sample,
  empty_input,
  shape,
  format,
  schema,
  parameter,
  numeric,
  degenerate_input,
  excessive_outliers,
  table_range,
  not_found,
  conflict,
  too_large,
};

std::string_view to_string(ErrorKind kind);

// Every failure in the library surfaces as an Error carrying the module that
// raised it. what() reads "<module>: <kind> error: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string module_;
  std::string detail_;
};

// Re-raise `e` with extra context prepended to the detail, keeping kind and module.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context);

}  // namespace autopower
