#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace appstress {

/// Category of a fatal error. The CLI maps `Config` to exit status 2 and
/// everything else to 1.
enum class ErrorKind {
  Io,
  Schema,
  Config,
  InvalidArgument,
  DegenerateLabels,
  InsufficientData,
};

std::string_view to_string(ErrorKind kind);

/// Fatal error raised by a pipeline module. `what()` reads
/// "<module>: <message>".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string_view module, std::string_view message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

[[noreturn]] void raise(ErrorKind kind, std::string_view module, std::string_view message);

}  // namespace appstress
