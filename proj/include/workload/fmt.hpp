#pragma once

#include <charconv>
#include <string>

namespace wl::fmt {

// Shortest round-trip decimal form of a double. Used for every file we emit
// so outputs are byte-stable and re-parse to the same value.
inline std::string shortest(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace wl::fmt
