#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace udlab {

// Symbols are small non-negative indices into an alphabet.
using Symbol = int;
using Sequence = std::vector<Symbol>;

// ---- error kinds -----------------------------------------------------------

struct PositivityViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConditioningOnNull : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LengthMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotMemoryless : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Degenerate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- numeric helpers -------------------------------------------------------

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453094172321214581766;

inline double log2_from_ln(double ln_value) { return ln_value / kLn2; }

inline double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Relative agreement on log-domain values; `scale` floors the denominator so
// values near zero compare absolutely.
inline bool log_close(double a, double b, double rel_tol, double scale = 1.0) {
  if (a == b) return true;  // covers the -inf == -inf case
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  const double mag = std::max({std::fabs(a), std::fabs(b), scale});
  return std::fabs(a - b) <= rel_tol * mag;
}

// ---- sequence enumeration --------------------------------------------------

// Sequences of length n over an alphabet of size q are enumerated by the
// integer code whose most significant digit is the first symbol, so integer
// order coincides with lexicographic order on sequences.
inline std::uint64_t sequence_count(int alphabet_size, int n) {
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) total *= static_cast<std::uint64_t>(alphabet_size);
  return total;
}

inline void decode_sequence(std::uint64_t code, int alphabet_size, int n, Sequence& out) {
  out.resize(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<Symbol>(code % static_cast<std::uint64_t>(alphabet_size));
    code /= static_cast<std::uint64_t>(alphabet_size);
  }
}

inline Sequence decode_sequence(std::uint64_t code, int alphabet_size, int n) {
  Sequence out;
  decode_sequence(code, alphabet_size, n, out);
  return out;
}

inline std::uint64_t encode_sequence(const Sequence& seq, int alphabet_size) {
  std::uint64_t code = 0;
  for (Symbol s : seq) code = code * static_cast<std::uint64_t>(alphabet_size) + static_cast<std::uint64_t>(s);
  return code;
}

inline std::string sequence_to_string(const Sequence& seq) {
  std::string out;
  out.reserve(seq.size());
  for (Symbol s : seq) {
    if (s >= 0 && s <= 9) {
      out.push_back(static_cast<char>('0' + s));
    } else {
      out += "(" + std::to_string(s) + ")";
    }
  }
  return out;
}

}  // namespace udlab
