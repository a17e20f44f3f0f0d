#pragma once

#include <charconv>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace loopsched {

using i64 = std::int64_t;
using u64 = std::uint64_t;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Shortest round-trip decimal representation (stable across runs, locale-free).
inline std::string num_str(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string num_str(i64 v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_num(std::string_view s, const std::string& context) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error(context + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline i64 parse_int(std::string_view s, const std::string& context) {
  i64 v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    // allow scientific notation for counts (e.g. 4e5)
    double d = parse_num(s, context);
    i64 r = static_cast<i64>(d);
    if (static_cast<double>(r) != d) {
      throw std::runtime_error(context + ": not an integer: '" + std::string(s) + "'");
    }
    return r;
  }
  return v;
}

inline u64 parse_u64(std::string_view s, const std::string& context) {
  u64 v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error(context + ": not an unsigned integer: '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string> split_char(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline i64 ceil_div(i64 a, i64 b) { return (a + b - 1) / b; }

inline u64 fnv1a64(std::string_view s) {
  u64 h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace loopsched
