#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qwit {

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

/// Failure categories. The numeric values double as CLI exit codes for the
/// three scriptable classes (config = 2, data = 3, numeric contract = 4).
enum class ErrorKind {
  Config = 2,
  Data = 3,
  Numeric = 4,
  InvalidArgument = 5,
  Capacity = 6,
  Domain = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Exit code a CLI run should report for an error of this kind.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::InvalidArgument:
    case ErrorKind::Capacity:
      return 2;
    case ErrorKind::Data:
      return 3;
    case ErrorKind::Numeric:
    case ErrorKind::Domain:
      return 4;
  }
  return 4;
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

/// FNV-1a, used for provenance digests of run inputs.
inline std::uint64_t fnv1a(const std::string& text, std::uint64_t seed = 1469598103934665603ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex_digest(const std::string& text);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

/// Parses a decimal floating-point field; throws Error(Data) on malformed input.
double parse_double(const std::string& field);

}  // namespace qwit
