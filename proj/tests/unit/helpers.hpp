#pragma once

#include <optional>
#include <sstream>
#include <string>

#include "appstress/error.hpp"
#include "appstress/timeutil.hpp"

namespace appstress::testing {

/// Kind of the appstress::Error thrown by `body`, or nullopt if none.
template <typename Body>
std::optional<ErrorKind> error_kind(Body&& body) {
  try {
    body();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline Timestamp ts(const char* text) { return *parse_timestamp(text); }

}  // namespace appstress::testing
