#pragma once

// Exact integer/rational plumbing shared by every module, plus the error
// type used throughout the library.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cantor {

using Integer = mpz_class;
/// Always canonical (lowest terms, positive denominator) after construction
/// through make_rational or any arithmetic operator.
using Rational = mpq_class;
using Position = std::uint64_t;

enum class ErrorKind {
  InvalidArgument,
  OverflowByPolicy,
  NotInfiniteInLimit,
  IndexOutOfSQ,
  EmptyWindow,
  IndexOutOfWindow,
  NoAlternative,
  EmptySet,
  NonIncreasing,
  InfeasibleWitness,
  LadderNotAllOnes,
  OutOfRange,
  Config,
};

inline std::string_view error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::OverflowByPolicy: return "overflow-by-policy";
    case ErrorKind::NotInfiniteInLimit: return "family-not-infinite-in-limit";
    case ErrorKind::IndexOutOfSQ: return "index-out-of-S_Q";
    case ErrorKind::EmptyWindow: return "empty-window";
    case ErrorKind::IndexOutOfWindow: return "index-out-of-window";
    case ErrorKind::NoAlternative: return "no-alternative";
    case ErrorKind::EmptySet: return "empty-set";
    case ErrorKind::NonIncreasing: return "non-increasing";
    case ErrorKind::InfeasibleWitness: return "infeasible-witness";
    case ErrorKind::LadderNotAllOnes: return "ladder-not-all-ones";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Exact terms larger than this many decimal digits are never materialized.
inline constexpr double kMaxDecimalDigits = 1e6;

inline Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw Error(ErrorKind::InvalidArgument, "zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline Rational make_rational(long num, long den = 1) {
  return make_rational(Integer(num), Integer(den));
}

/// Parses "p/q" or "p".
inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(Integer(s));
    return make_rational(Integer(s.substr(0, slash)), Integer(s.substr(slash + 1)));
  } catch (const std::invalid_argument&) {
    throw Error(ErrorKind::InvalidArgument, "not a rational: '" + s + "'");
  }
}

inline Integer floor(const Rational& x) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

inline Integer ceil(const Rational& x) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

/// x − ⌊x⌋, in [0, 1).
inline Rational frac(const Rational& x) {
  Integer r;
  mpz_fdiv_r(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return make_rational(r, x.get_den());
}

/// Serialized as "num/den", including integers ("3/1") and zero ("0/1").
inline std::string to_string(const Rational& x) {
  return x.get_num().get_str() + "/" + x.get_den().get_str();
}

inline double to_double(const Rational& x) { return x.get_d(); }

/// Natural log of a positive integer of any size.
inline double ln(const Integer& x) {
  if (x <= 0) throw Error(ErrorKind::InvalidArgument, "ln of non-positive integer");
  long exp2 = 0;
  double mant = mpz_get_d_2exp(&exp2, x.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp2) * std::numbers::ln2;
}

inline double decimal_digits(const Integer& x) {
  return static_cast<double>(mpz_sizeinbase(x.get_mpz_t(), 10));
}

inline std::uint64_t to_u64(const Integer& x) {
  if (x < 0 || mpz_sizeinbase(x.get_mpz_t(), 2) > 64)
    throw Error(ErrorKind::OutOfRange, "integer does not fit in 64 bits: " + x.get_str());
  std::uint64_t out = 0;
  mpz_export(&out, nullptr, -1, sizeof(out), 0, 0, x.get_mpz_t());
  return out;
}

inline Integer from_u64(std::uint64_t v) {
  Integer r;
  mpz_import(r.get_mpz_t(), 1, -1, sizeof(v), 0, 0, &v);
  return r;
}

/// Correctly rounded (half to even) decimal rendering with `digits` places.
inline std::string to_decimal(const Rational& x, unsigned digits) {
  Integer scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
  Rational scaled = x * Rational(scale);
  Integer q = floor(scaled);
  Rational rem = scaled - Rational(q);
  int cmp = ::cmp(rem, Rational(1, 2));
  if (cmp > 0 || (cmp == 0 && mpz_odd_p(q.get_mpz_t()))) q += 1;

  bool negative = q < 0;
  if (negative) q = -q;
  std::string s = q.get_str();
  if (digits > 0) {
    if (s.size() <= digits) s.insert(0, digits + 1 - s.size(), '0');
    s.insert(s.size() - digits, ".");
  }
  return negative ? "-" + s : s;
}

/// Neumaier-compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Sum of fractions by pairwise (binary-splitting) combination, reduced once.
inline Rational sum_fractions(std::span<const Integer> nums, std::span<const Integer> dens) {
  struct Frac {
    Integer n, d;
  };
  auto rec = [&](auto&& self, std::size_t lo, std::size_t hi) -> Frac {
    if (hi - lo == 1) return {nums[lo], dens[lo]};
    std::size_t mid = lo + (hi - lo) / 2;
    Frac a = self(self, lo, mid);
    Frac b = self(self, mid, hi);
    return {a.n * b.d + b.n * a.d, a.d * b.d};
  };
  if (nums.empty()) return Rational(0);
  Frac f = rec(rec, 0, nums.size());
  return make_rational(f.n, f.d);
}

}  // namespace cantor
