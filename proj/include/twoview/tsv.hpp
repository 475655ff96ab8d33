#pragma once

// Tab-separated text helpers. Floating point is written with 17 significant
// digits so values round-trip exactly.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace twoview::tsv {

inline std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view field) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw std::runtime_error("malformed number: '" + std::string(field) + "'");
  }
  return value;
}

inline std::uint64_t parse_uint(std::string_view field) {
  std::uint64_t value = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw std::runtime_error("malformed integer: '" + std::string(field) + "'");
  }
  return value;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = '\t') {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

/// Appends fields separated by tabs; call end_row() to terminate the line.
class RowWriter {
 public:
  explicit RowWriter(std::string& out) : out_(out) {}

  RowWriter& operator<<(double v) { return field(format_double(v)); }
  RowWriter& operator<<(std::string_view s) { return field(s); }
  RowWriter& operator<<(const char* s) { return field(s); }
  RowWriter& operator<<(std::uint64_t v) { return field(std::to_string(v)); }
  RowWriter& operator<<(int v) { return field(std::to_string(v)); }
  RowWriter& operator<<(bool v) { return field(v ? "1" : "0"); }

  void end_row() {
    out_ += '\n';
    first_ = true;
  }

 private:
  RowWriter& field(std::string_view s) {
    if (!first_) out_ += '\t';
    out_ += s;
    first_ = false;
    return *this;
  }

  std::string& out_;
  bool first_ = true;
};

/// FNV-1a, used to print short digests of generated files.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace twoview::tsv
