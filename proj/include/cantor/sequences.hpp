#pragma once

// Basic sequences as oracle bundles: exact terms, log terms, and a tail
// threshold oracle. Built-in families, the triangular numbers, nu_j, the
// partial sums Q_n^(k), and the Q_alpha family.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cantor/magnitude.hpp"
#include "cantor/numeric.hpp"

namespace cantor {

/// n-th triangular number n(n+1)/2.
constexpr std::uint64_t tau(std::uint64_t n) { return n * (n + 1) / 2; }

/// Largest k with tau(k) <= n.
inline std::uint64_t triangular_root(std::uint64_t n) {
  auto k = static_cast<std::uint64_t>((std::sqrt(8.0 * static_cast<double>(n) + 1.0) - 1.0) / 2.0);
  while (tau(k + 1) <= n) ++k;
  while (k > 0 && tau(k) > n) --k;
  return k;
}

class BasicSequence {
 public:
  using Metadata = std::vector<std::pair<std::string, std::string>>;

  virtual ~BasicSequence() = default;

  virtual std::string name() const = 0;
  /// q_n for n >= 1. Throws OverflowByPolicy past the materialization bound.
  virtual Integer term(Position n) const = 0;
  /// ln q_n, available for every n even when term(n) is not.
  virtual Magnitude log_magnitude(Position n) const = 0;
  /// Least N such that q_m >= bound for all m >= N.
  virtual Position threshold(const Integer& bound) const = 0;
  virtual bool infinite_in_limit() const = 0;
  virtual Metadata metadata() const { return {}; }

  /// ln q_n as a double (+inf if beyond double range).
  double log_term(Position n) const { return log_magnitude(n).to_double(); }

  bool materializable(Position n) const {
    Magnitude m = log_magnitude(n);
    return m.finite() && m.value() / std::numbers::ln10 <= kMaxDecimalDigits;
  }

 protected:
  void require_position(Position n) const {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, name() + ": positions start at 1");
  }
  void require_materializable(Position n) const {
    if (!materializable(n))
      throw Error(ErrorKind::OverflowByPolicy,
                  name() + ": q_" + std::to_string(n) + " exceeds the materialization bound");
  }
};

using SequencePtr = std::shared_ptr<const BasicSequence>;

/// nu_j = min{N : q_m >= 2 j^2 for all m >= N}.
inline Position nu(const BasicSequence& q, std::uint64_t j) {
  if (j == 0) throw Error(ErrorKind::InvalidArgument, "nu: j must be >= 1");
  Integer bound = from_u64(j);
  bound = 2 * bound * bound;
  return q.threshold(bound);
}

/// Q_n^(k) = sum_{j<=n} 1/(q_j ... q_{j+k-1}), exact.
inline Rational q_partial(const BasicSequence& q, Position n, std::uint64_t k) {
  if (n == 0 || k == 0) throw Error(ErrorKind::InvalidArgument, "q_partial: n and k must be >= 1");
  std::vector<Integer> terms;
  terms.reserve(n + k - 1);
  for (Position m = 1; m <= n + k - 1; ++m) terms.push_back(q.term(m));
  std::vector<Integer> nums(n, Integer(1));
  std::vector<Integer> dens(n);
  for (Position j = 0; j < n; ++j) {
    Integer d = 1;
    for (std::uint64_t t = 0; t < k; ++t) d *= terms[j + t];
    dens[j] = std::move(d);
  }
  return sum_fractions(nums, dens);
}

namespace detail {

/// Smallest n >= 1 with f(n) >= bound for an increasing integer sequence,
/// starting from a floating-point guess.
template <class TermFn>
Position increasing_threshold(const Integer& bound, Position guess, TermFn&& f) {
  Position n = std::max<Position>(guess, 1);
  while (n > 1 && f(n - 1) >= bound) --n;
  while (f(n) < bound) ++n;
  return n;
}

inline double ln_bound(const Integer& b) { return b > 0 ? ln(b) : 0.0; }

}  // namespace detail

/// q_n = lambda * n^t.
class PolynomialSequence final : public BasicSequence {
 public:
  PolynomialSequence(std::uint64_t lambda, std::uint64_t t, std::string name = {})
      : lambda_(lambda), t_(t), name_(std::move(name)) {
    if (lambda < 2 || t < 1)
      throw Error(ErrorKind::InvalidArgument, "poly: need lambda >= 2 and t >= 1 so that q_n >= 2 and q_n -> inf");
    if (name_.empty()) name_ = "poly:" + std::to_string(lambda) + "," + std::to_string(t);
  }

  std::string name() const override { return name_; }
  Integer term(Position n) const override {
    require_position(n);
    require_materializable(n);
    Integer r;
    mpz_ui_pow_ui(r.get_mpz_t(), n, t_);
    return r * from_u64(lambda_);
  }
  Magnitude log_magnitude(Position n) const override {
    require_position(n);
    return Magnitude::from_double(std::log(static_cast<double>(lambda_)) +
                                  static_cast<double>(t_) * std::log(static_cast<double>(n)));
  }
  Position threshold(const Integer& bound) const override {
    double lg = (detail::ln_bound(bound) - std::log(static_cast<double>(lambda_))) / static_cast<double>(t_);
    auto guess = static_cast<Position>(std::max(1.0, std::floor(std::exp(std::min(lg, 60.0)))));
    return detail::increasing_threshold(bound, guess, [this](Position m) { return term(m); });
  }
  bool infinite_in_limit() const override { return true; }
  Metadata metadata() const override {
    return {{"family", "poly"}, {"lambda", std::to_string(lambda_)}, {"t", std::to_string(t_)}};
  }

 private:
  std::uint64_t lambda_, t_;
  std::string name_;
};

/// q_n = 2 * ceil(n/s)^2.
class SlowSequence final : public BasicSequence {
 public:
  explicit SlowSequence(std::uint64_t s) : s_(s) {
    if (s < 1) throw Error(ErrorKind::InvalidArgument, "slow: s must be >= 1");
  }

  std::string name() const override { return "slow:" + std::to_string(s_); }
  Integer term(Position n) const override {
    require_position(n);
    Integer r = from_u64((n + s_ - 1) / s_);
    return 2 * r * r;
  }
  Magnitude log_magnitude(Position n) const override {
    require_position(n);
    return Magnitude::from_double(std::numbers::ln2 + 2.0 * std::log(static_cast<double>((n + s_ - 1) / s_)));
  }
  Position threshold(const Integer& bound) const override {
    // Smallest r >= 1 with 2 r^2 >= bound, then the first n with ceil(n/s) = r.
    Integer r = 1;
    if (bound > 2) {
      Integer half = (bound + 1) / 2;
      mpz_sqrt(r.get_mpz_t(), half.get_mpz_t());
      while (2 * r * r < bound) ++r;
    }
    return s_ * (to_u64(r) - 1) + 1;
  }
  bool infinite_in_limit() const override { return true; }
  Metadata metadata() const override { return {{"family", "slow"}, {"s", std::to_string(s_)}}; }

 private:
  std::uint64_t s_;
};

/// q_n = t^n.
class GeometricSequence final : public BasicSequence {
 public:
  explicit GeometricSequence(std::uint64_t t) : t_(t) {
    if (t < 2) throw Error(ErrorKind::InvalidArgument, "geom: t must be >= 2");
  }

  std::string name() const override { return "geom:" + std::to_string(t_); }
  Integer term(Position n) const override {
    require_position(n);
    require_materializable(n);
    Integer r;
    mpz_ui_pow_ui(r.get_mpz_t(), t_, n);
    return r;
  }
  Magnitude log_magnitude(Position n) const override {
    require_position(n);
    return Magnitude::from_double(static_cast<double>(n) * std::log(static_cast<double>(t_)));
  }
  Position threshold(const Integer& bound) const override {
    auto guess = static_cast<Position>(std::max(1.0, std::floor(detail::ln_bound(bound) / std::log(static_cast<double>(t_)))));
    return detail::increasing_threshold(bound, guess, [this](Position m) { return term(m); });
  }
  bool infinite_in_limit() const override { return true; }
  Metadata metadata() const override { return {{"family", "geom"}, {"t", std::to_string(t_)}}; }

 private:
  std::uint64_t t_;
};

/// q_1 = 2, q_{n+1} = 2^{q_n}. Only q_1..q_5 are materializable; log terms
/// beyond that are iterated-exponential magnitudes.
class TowerSequence final : public BasicSequence {
 public:
  TowerSequence() {
    Magnitude m = Magnitude::from_double(std::numbers::ln2);
    const double lnln2 = std::log(std::numbers::ln2);
    logs_.push_back(m);
    // ln q_{n+1} = q_n ln 2 = exp(ln q_n + ln ln 2); heights grow by one per step.
    for (int i = 0; i < 64; ++i) {
      m = m.shifted(lnln2).exp();
      logs_.push_back(m);
    }
  }

  std::string name() const override { return "tower"; }
  Integer term(Position n) const override {
    require_position(n);
    require_materializable(n);
    Integer r = 2;
    for (Position m = 1; m < n; ++m) {
      Integer next;
      mpz_ui_pow_ui(next.get_mpz_t(), 2, to_u64(r));
      r = std::move(next);
    }
    return r;
  }
  Magnitude log_magnitude(Position n) const override {
    require_position(n);
    if (n > logs_.size()) throw Error(ErrorKind::OverflowByPolicy, "tower: log term beyond representable height");
    return logs_[n - 1];
  }
  Position threshold(const Integer& bound) const override {
    for (Position n = 1; n <= 5; ++n)
      if (term(n) >= bound) return n;
    return 6;  // q_6 has 2^65536 bits; every materializable bound lies below it.
  }
  bool infinite_in_limit() const override { return true; }
  Metadata metadata() const override { return {{"family", "tower"}}; }

 private:
  std::vector<Magnitude> logs_;
};

/// q_n = c. Not infinite in limit: censuses and diagnostics only.
class ConstantSequence final : public BasicSequence {
 public:
  explicit ConstantSequence(std::uint64_t c) : c_(c) {
    if (c < 2) throw Error(ErrorKind::InvalidArgument, "const: c must be >= 2");
  }

  std::string name() const override { return "const:" + std::to_string(c_); }
  Integer term(Position n) const override {
    require_position(n);
    return from_u64(c_);
  }
  Magnitude log_magnitude(Position n) const override {
    require_position(n);
    return Magnitude::from_double(std::log(static_cast<double>(c_)));
  }
  Position threshold(const Integer& bound) const override {
    if (bound <= from_u64(c_)) return 1;
    throw Error(ErrorKind::NotInfiniteInLimit, name() + " never reaches " + bound.get_str());
  }
  bool infinite_in_limit() const override { return false; }
  Metadata metadata() const override { return {{"family", "const"}, {"c", std::to_string(c_)}}; }

 private:
  std::uint64_t c_;
};

/// A finite table, nondecreasing from index `monotone_after` on; the
/// unseen tail is taken to continue nondecreasingly.
class TableSequence final : public BasicSequence {
 public:
  TableSequence(std::vector<Integer> values, Position monotone_after, std::string name)
      : values_(std::move(values)), monotone_after_(monotone_after), name_(std::move(name)) {
    if (values_.empty()) throw Error(ErrorKind::InvalidArgument, "table: no terms");
    if (monotone_after_ < 1 || monotone_after_ > values_.size())
      throw Error(ErrorKind::InvalidArgument, "table: monotone-after must index into the table");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i] < 2)
        throw Error(ErrorKind::InvalidArgument, "table: q_" + std::to_string(i + 1) + " < 2");
      if (i + 1 > monotone_after_ && values_[i] < values_[i - 1])
        throw Error(ErrorKind::InvalidArgument,
                    "table: decreasing at " + std::to_string(i + 1) + " after monotone-after");
    }
  }

  std::string name() const override { return name_; }
  Integer term(Position n) const override {
    check(n);
    return values_[n - 1];
  }
  Magnitude log_magnitude(Position n) const override {
    check(n);
    return Magnitude::from_double(ln(values_[n - 1]));
  }
  Position threshold(const Integer& bound) const override {
    if (values_.back() < bound)
      throw Error(ErrorKind::OutOfRange, name_ + ": threshold for " + bound.get_str() + " lies beyond the table");
    Position m = values_.size();
    while (m >= 1 && values_[m - 1] >= bound) --m;
    return m + 1;
  }
  bool infinite_in_limit() const override { return true; }
  Position size() const { return values_.size(); }
  Metadata metadata() const override {
    return {{"family", "table"}, {"terms", std::to_string(values_.size())},
            {"monotone_after", std::to_string(monotone_after_)}};
  }

 private:
  void check(Position n) const {
    require_position(n);
    if (n > values_.size())
      throw Error(ErrorKind::OutOfRange, name_ + ": q_" + std::to_string(n) + " is beyond the table");
  }

  std::vector<Integer> values_;
  Position monotone_after_;
  std::string name_;
};

// ---------------------------------------------------------------------------
// Q_alpha

/// Lazily extended table of q_{alpha,n}. Terms are exact while they stay
/// under the materialization bound and log-only afterwards.
class QAlphaTable {
 public:
  explicit QAlphaTable(const Rational& alpha) : alpha_(alpha) {
    if (alpha <= 0 || alpha >= 1) throw Error(ErrorKind::InvalidArgument, "qalpha: alpha must lie in (0,1)");
    p_ = to_u64(alpha.get_num());
    q_ = to_u64(alpha.get_den());
    exponent_ = static_cast<double>(q_ - p_) / static_cast<double>(p_);
    prefix_log_.push_back(0.0);
  }

  const Rational& alpha() const { return alpha_; }
  /// (1 - alpha)/alpha as a double.
  double exponent() const { return exponent_; }

  static bool is_special(Position n) {
    std::uint64_t k = triangular_root(n);
    return tau(k) == n && k >= 2 && k % 2 == 0;
  }

  void extend_to(Position n) const {
    std::lock_guard lock(mu_);
    extend_locked(n);
  }

  std::optional<Integer> exact(Position n) const {
    std::lock_guard lock(mu_);
    extend_locked(n);
    return terms_[n - 1].exact;
  }

  double log_term(Position n) const {
    std::lock_guard lock(mu_);
    extend_locked(n);
    return terms_[n - 1].log;
  }

  /// sum_{m<=n} ln q_m.
  double prefix_log(Position n) const {
    std::lock_guard lock(mu_);
    extend_locked(n);
    return prefix_log_[n];
  }

  Position size() const {
    std::lock_guard lock(mu_);
    return terms_.size();
  }

 private:
  struct Entry {
    std::optional<Integer> exact;
    double log = 0.0;
  };

  void extend_locked(Position n) const {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "qalpha: positions start at 1");
    while (terms_.size() < n) push_next();
  }

  void push_next() const {
    const Position n = terms_.size() + 1;
    Integer floor_term = from_u64(n);
    floor_term = 2 * floor_term * floor_term;
    Entry e;
    if (!is_special(n)) {
      e.log = ln(floor_term);
      e.exact = std::move(floor_term);
    } else {
      // Exponent (q-p)/p: floor(P^{(q-p)/p}) = floor((P^{q-p})^{1/p}).
      double root_log = exponent_ * prefix_sum_.value();
      bool exact_ok = prefix_exact_valid_ && root_log / std::numbers::ln10 <= kMaxDecimalDigits &&
                      static_cast<double>(q_ - p_) * decimal_digits(prefix_exact_) <= 8 * kMaxDecimalDigits;
      if (exact_ok) {
        Integer power, root;
        mpz_pow_ui(power.get_mpz_t(), prefix_exact_.get_mpz_t(), q_ - p_);
        mpz_root(root.get_mpz_t(), power.get_mpz_t(), p_);
        Integer v = root > floor_term ? root : floor_term;
        e.log = ln(v);
        e.exact = std::move(v);
      } else {
        e.log = std::max(root_log, ln(floor_term));
      }
    }
    if (e.exact && prefix_exact_valid_) {
      prefix_exact_ *= *e.exact;
      if (decimal_digits(prefix_exact_) > kMaxDecimalDigits) prefix_exact_valid_ = false;
    } else {
      prefix_exact_valid_ = false;
    }
    prefix_sum_.add(e.log);
    prefix_log_.push_back(prefix_sum_.value());
    terms_.push_back(std::move(e));
  }

  Rational alpha_;
  std::uint64_t p_ = 1, q_ = 2;
  double exponent_ = 1.0;
  mutable std::mutex mu_;
  mutable std::vector<Entry> terms_;
  mutable std::vector<double> prefix_log_;
  mutable CompensatedSum prefix_sum_;
  mutable Integer prefix_exact_ = 1;
  mutable bool prefix_exact_valid_ = true;
};

class QAlphaSequence final : public BasicSequence {
 public:
  explicit QAlphaSequence(std::shared_ptr<const QAlphaTable> table) : table_(std::move(table)) {}

  std::string name() const override {
    return "qalpha:" + table_->alpha().get_num().get_str() + "/" + table_->alpha().get_den().get_str();
  }
  Integer term(Position n) const override {
    require_position(n);
    auto v = table_->exact(n);
    if (!v)
      throw Error(ErrorKind::OverflowByPolicy, name() + ": q_" + std::to_string(n) + " exceeds the materialization bound");
    return *v;
  }
  Magnitude log_magnitude(Position n) const override {
    require_position(n);
    return Magnitude::from_double(table_->log_term(n));
  }
  Position threshold(const Integer& bound) const override {
    // q_m >= 2m^2 for every m, so all m >= m* qualify; only a run of special
    // terms just below m* can extend the tail.
    Integer r = 1;
    if (bound > 2) {
      Integer half = (bound + 1) / 2;
      mpz_sqrt(r.get_mpz_t(), half.get_mpz_t());
      while (2 * r * r < bound) ++r;
    }
    Position m = to_u64(r);
    while (m > 1 && at_least(m - 1, bound)) --m;
    return m;
  }
  bool infinite_in_limit() const override { return true; }
  Metadata metadata() const override {
    return {{"family", "qalpha"}, {"alpha", to_string(table_->alpha())}};
  }
  const QAlphaTable& table() const { return *table_; }

 private:
  bool at_least(Position m, const Integer& bound) const {
    auto v = table_->exact(m);
    if (v) return *v >= bound;
    return table_->log_term(m) >= ln(bound);
  }

  std::shared_ptr<const QAlphaTable> table_;
};

/// The Q_alpha family with its first `count` terms materialized.
struct QAlphaFamily {
  Rational alpha;
  Position count = 0;
  std::shared_ptr<const QAlphaTable> table;

  std::optional<Integer> exact(Position n) const { return table->exact(n); }
  double log_term(Position n) const { return table->log_term(n); }
  /// V_k = q_{alpha, tau(k)}.
  double log_v(std::uint64_t k) const { return table->log_term(tau(k)); }
  /// ln P_k = sum_{n < tau(k)} ln q_n.
  double log_p(std::uint64_t k) const { return k <= 1 ? 0.0 : table->prefix_log(tau(k) - 1); }
  SequencePtr sequence() const { return std::make_shared<QAlphaSequence>(table); }
};

inline QAlphaFamily qalpha_build(const Rational& alpha, Position count) {
  auto table = std::make_shared<QAlphaTable>(alpha);
  if (count > 0) table->extend_to(count);
  return QAlphaFamily{alpha, count, std::move(table)};
}

struct BracketResult {
  std::uint64_t k = 0;
  double log_p_prev = 0;  // ln P_{k-1}
  double log_v = 0;       // ln V_k
  double lower = 0;
  double upper = 0;
  bool holds = false;
};

/// Evaluates (1-a)/a ln P_{k-1} < ln V_k < (1-a)/a ln P_{k-1} + (4-4a)/a k ln k.
inline BracketResult qident_check(const QAlphaFamily& fam, std::uint64_t k) {
  if (k < 2 || k % 2 != 0) throw Error(ErrorKind::InvalidArgument, "qident_check: k must be even and >= 2");
  const double e = fam.table->exponent();
  const double a = to_double(fam.alpha);
  BracketResult r;
  r.k = k;
  r.log_p_prev = fam.log_p(k - 1);
  r.log_v = fam.log_v(k);
  r.lower = e * r.log_p_prev;
  r.upper = r.lower + (4.0 - 4.0 * a) / a * static_cast<double>(k) * std::log(static_cast<double>(k));
  r.holds = r.lower < r.log_v && r.log_v < r.upper;
  return r;
}

// ---------------------------------------------------------------------------
// Family specs

namespace detail {

inline std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Config, "bad " + what + ": '" + s + "'");
  }
}

inline SequencePtr load_table(const std::string& arg) {
  std::string path = arg;
  std::optional<Position> monotone_after;
  if (auto pos = arg.rfind(",monotone-after="); pos != std::string::npos) {
    path = arg.substr(0, pos);
    monotone_after = parse_u64(arg.substr(pos + 16), "monotone-after");
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open table '" + path + "'");
  std::vector<Integer> values;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") + 1 - first);
    if (line.rfind("monotone-after=", 0) == 0) {
      monotone_after = parse_u64(line.substr(15), "monotone-after");
      continue;
    }
    try {
      values.emplace_back(line);
    } catch (const std::invalid_argument&) {
      throw Error(ErrorKind::Config, "table '" + path + "': not an integer: '" + line + "'");
    }
  }
  if (!monotone_after) throw Error(ErrorKind::Config, "table '" + path + "': monotone-after=<N> is required");
  try {
    return std::make_shared<TableSequence>(std::move(values), *monotone_after, "table:" + arg);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
}

}  // namespace detail

/// Parses ref2, poly:L,t, slow:s, geom:t, tower, qalpha:p/q, const:c,
/// table:<path>[,monotone-after=N].
inline SequencePtr parse_family(const std::string& spec) {
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto need_arg = [&] {
    if (arg.empty()) throw Error(ErrorKind::Config, "family '" + kind + "' needs an argument");
  };
  try {
    if (kind == "ref2" && arg.empty()) return std::make_shared<PolynomialSequence>(2, 2, "ref2");
    if (kind == "poly") {
      need_arg();
      auto comma = arg.find(',');
      if (comma == std::string::npos) throw Error(ErrorKind::Config, "poly needs lambda,t");
      return std::make_shared<PolynomialSequence>(detail::parse_u64(arg.substr(0, comma), "lambda"),
                                                  detail::parse_u64(arg.substr(comma + 1), "t"));
    }
    if (kind == "slow") {
      need_arg();
      return std::make_shared<SlowSequence>(detail::parse_u64(arg, "s"));
    }
    if (kind == "geom") {
      need_arg();
      return std::make_shared<GeometricSequence>(detail::parse_u64(arg, "t"));
    }
    if (kind == "tower" && arg.empty()) return std::make_shared<TowerSequence>();
    if (kind == "const") {
      need_arg();
      return std::make_shared<ConstantSequence>(detail::parse_u64(arg, "c"));
    }
    if (kind == "qalpha") {
      need_arg();
      return qalpha_build(parse_rational(arg), 0).sequence();
    }
    if (kind == "table") {
      need_arg();
      return detail::load_table(arg);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw Error(ErrorKind::Config, e.what());
  }
  throw Error(ErrorKind::Config, "unknown family '" + spec + "'");
}

}  // namespace cantor
