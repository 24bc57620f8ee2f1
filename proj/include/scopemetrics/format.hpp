#pragma once

#include <array>
#include <charconv>
#include <string>

namespace scopemetrics {

// Shortest decimal form that round-trips the exact double. Used by every
// text artifact so identical inputs always produce identical bytes.
inline std::string format_double(double value) {
  std::array<char, 32> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

}  // namespace scopemetrics
