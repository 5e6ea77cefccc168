#pragma once

// Non-negative reals too large for a double, stored as an iterated
// exponential: Magnitude{h, v} denotes exp^h(v). Only what the log-space
// estimators need is supported (sums, small shifts, ratios, ordering).
// Beyond double range the representation keeps the dominant term only.

#include <cmath>
#include <compare>
#include <limits>
#include <string>

#include "cantor/numeric.hpp"

namespace cantor {

class Magnitude {
 public:
  /// Values above this are lifted to the next height.
  static constexpr double kBig = 1e300;
  static inline const double kLogBig = std::log(kBig);

  constexpr Magnitude() = default;

  static Magnitude from_double(double v) {
    if (!(v >= 0.0) || std::isinf(v)) throw Error(ErrorKind::InvalidArgument, "magnitude must be finite and >= 0");
    return normalized(0, v);
  }

  /// exp^height(value); value must already be normalized for that height.
  static Magnitude tower(int height, double value) { return normalized(height, value); }

  int height() const { return height_; }
  double value() const { return value_; }
  bool finite() const { return height_ == 0; }

  /// The double value, or +inf beyond double range.
  double to_double() const {
    return height_ == 0 ? value_ : std::numeric_limits<double>::infinity();
  }

  Magnitude exp() const {
    if (height_ == 0) {
      if (value_ <= kLogBig) return Magnitude(0, std::exp(value_));
      return Magnitude(1, value_);
    }
    return Magnitude(height_ + 1, value_);
  }

  /// Natural log; requires *this >= 1.
  Magnitude log() const {
    if (height_ == 0) {
      if (value_ < 1.0) throw Error(ErrorKind::InvalidArgument, "log of magnitude below 1");
      return Magnitude(0, std::log(value_));
    }
    return Magnitude(height_ - 1, value_);
  }

  /// Adds a finite (possibly negative) shift; absorbed once beyond double range.
  Magnitude shifted(double delta) const {
    if (height_ > 0) return *this;
    double v = value_ + delta;
    return normalized(0, v < 0.0 ? 0.0 : v);
  }

  friend Magnitude operator+(const Magnitude& x, const Magnitude& y) {
    const Magnitude& a = x < y ? y : x;
    const Magnitude& b = x < y ? x : y;
    if (a.height_ == 0) return normalized(0, a.value_ + b.value_);
    if (a.height_ == 1) {
      // log(a + b) = log a + log1p(b / a), with log a = a.value_.
      double ratio = b.height_ == 0 ? b.value_ * std::exp(-a.value_) : std::exp(b.value_ - a.value_);
      return Magnitude(1, a.value_ + std::log1p(ratio));
    }
    return a;
  }

  Magnitude& operator+=(const Magnitude& o) { return *this = *this + o; }

  /// x − y for x >= y; differences of near-equal huge values collapse to 0.
  friend Magnitude operator-(const Magnitude& x, const Magnitude& y) {
    if (x < y) throw Error(ErrorKind::InvalidArgument, "magnitude subtraction would go negative");
    if (x.height_ == 0) return normalized(0, std::max(0.0, x.value_ - y.value_));
    if (x.height_ == 1) {
      double ratio = y.height_ == 0 ? y.value_ * std::exp(-x.value_) : std::exp(y.value_ - x.value_);
      if (ratio >= 1.0) return Magnitude();
      return normalized(1, x.value_ + std::log1p(-ratio));
    }
    if (x.height_ == y.height_ && x.value_ == y.value_) return Magnitude();
    return x;
  }

  friend bool operator==(const Magnitude&, const Magnitude&) = default;
  friend std::partial_ordering operator<=>(const Magnitude& a, const Magnitude& b) {
    if (a.height_ != b.height_) return a.height_ <=> b.height_;
    return a.value_ <=> b.value_;
  }

  std::string to_string() const {
    if (height_ == 0) return std::to_string(value_);
    std::string s = std::to_string(value_);
    for (int i = 0; i < height_; ++i) s = "exp(" + s + ")";
    return s;
  }

 private:
  constexpr Magnitude(int h, double v) : height_(h), value_(v) {}

  static Magnitude normalized(int h, double v) {
    if (h == 0 && v > kBig) return Magnitude(1, std::log(v));
    if (h > 0 && v <= kLogBig) {
      // Lower while representable.
      while (h > 0 && v <= kLogBig) {
        v = std::exp(v);
        --h;
      }
      return normalized(h, v);
    }
    return Magnitude(h, v);
  }

  int height_ = 0;
  double value_ = 0.0;
};

/// num/den for 0 <= num <= den, den > 0. Underflows to 0.0 where the
/// quotient is below double range.
inline double magnitude_ratio(const Magnitude& num, const Magnitude& den) {
  if (den.height() == 0) return num.to_double() / den.value();
  if (num.height() == 0 && num.value() == 0.0) return 0.0;
  if (den.height() == 1) {
    double log_num = num.height() == 0 ? std::log(num.value()) : num.value();
    return std::exp(log_num - den.value());
  }
  if (num.height() == den.height()) return num.value() == den.value() ? 1.0 : 0.0;
  return 0.0;
}

/// −ln(num/den) as a magnitude, for 0 < num <= den.
inline Magnitude magnitude_neg_log_ratio(const Magnitude& num, const Magnitude& den) {
  if (num.height() == 0 && num.value() == 0.0)
    throw Error(ErrorKind::InvalidArgument, "log ratio of zero numerator");
  if (den.height() == 0) return Magnitude::from_double(std::log(den.value() / num.value()));
  Magnitude ln_den = den.log();
  if (num.height() == 0 && num.value() < 1.0) return ln_den.shifted(-std::log(num.value()));
  Magnitude ln_num = num.log();
  return ln_den - ln_num;
}

}  // namespace cantor
