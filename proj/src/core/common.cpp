#include "qwit/common.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace qwit {

std::string hex_digest(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) fail(ErrorKind::Numeric, "cannot format double");
  return std::string(buf, end);
}

double parse_double(const std::string& field) {
  std::size_t b = field.find_first_not_of(" \t\r\n");
  std::size_t e = field.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) fail(ErrorKind::Data, "empty numeric field");
  std::string_view text(field.data() + b, e - b + 1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text == "nan" || text == "NaN") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(ErrorKind::Data, "malformed number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace qwit
