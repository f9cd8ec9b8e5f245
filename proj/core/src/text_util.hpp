#pragma once

// Internal text helpers shared by the file-format readers/writers.

#include <charconv>
#include <string>
#include <system_error>

namespace extrude3d::detail {

/// Shortest round-trip decimal representation of a double. Deterministic,
/// locale-independent, parses back to the identical bit pattern.
inline std::string format_double(double value) {
  char buffer[32];
  const auto result =
      std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

inline bool parse_double(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc{} && result.ptr == end;
}

template <typename Int>
bool parse_int(const std::string& token, Int& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc{} && result.ptr == end;
}

}  // namespace extrude3d::detail
