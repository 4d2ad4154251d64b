#include "appstress/error.hpp"

namespace appstress {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Config: return "config";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::DegenerateLabels: return "degenerate-labels";
    case ErrorKind::InsufficientData: return "insufficient-data";
  }
  return "unknown";
}

namespace {
std::string compose(std::string_view module, std::string_view message) {
  std::string out;
  out.reserve(module.size() + message.size() + 2);
  out.append(module).append(": ").append(message);
  return out;
}
}  // namespace

Error::Error(ErrorKind kind, std::string_view module, std::string_view message)
    : std::runtime_error(compose(module, message)), kind_(kind), module_(module) {}

void raise(ErrorKind kind, std::string_view module, std::string_view message) {
  throw Error(kind, module, message);
}

}  // namespace appstress
