#pragma once

// Q-special digit streams: admissible digit windows, selection policies,
// exact convergents of x_F, prefix validation, perturbations, the metric d,
// nowhere-density gap witnesses, the tail map T_{Q,n}, and digit censuses.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cantor/ladder.hpp"

namespace cantor {

/// Admissible digits [lo, hi] at position n. For c = 1 the window is {0}.
struct DigitWindow {
  Position n = 0;
  BoxIndex box;
  Integer q;
  Integer lo;
  Integer hi;
  Integer omega;
  /// q >= 2a^2, the hypothesis under which omega >= 2 is guaranteed for c > 1.
  bool guaranteed = true;

  bool empty() const { return hi < lo; }
  bool contains(const Integer& d) const { return lo <= d && d <= hi; }
};

inline DigitWindow digit_window(const Ladder& lad, Position n) {
  DigitWindow w;
  w.n = n;
  w.box = lad.phi_inv(n);
  w.q = lad.sequence().term(n);
  const Integer a = from_u64(w.box.a);
  w.guaranteed = w.q >= 2 * a * a;
  if (w.box.c == 1) {
    w.lo = 0;
    w.hi = 0;
    w.omega = 1;
    return w;
  }
  // F/q in [(c-1)/a - 1/(2a^2), (c-1)/a + 1/(2a^2)] = [(2a(c-1) -+ 1)/(2a^2)].
  const Integer two_a2 = 2 * a * a;
  const Integer centre = 2 * a * from_u64(w.box.c - 1);
  mpz_cdiv_q(w.lo.get_mpz_t(), Integer(w.q * (centre - 1)).get_mpz_t(), two_a2.get_mpz_t());
  mpz_fdiv_q(w.hi.get_mpz_t(), Integer(w.q * (centre + 1)).get_mpz_t(), two_a2.get_mpz_t());
  w.omega = w.hi >= w.lo ? Integer(w.hi - w.lo + 1) : Integer(0);
  return w;
}

// ---------------------------------------------------------------------------
// Selection policies

struct SelectionPolicy {
  enum class Kind { Min, Max, Mid, Random, Index };

  Kind kind = Kind::Min;
  std::uint64_t param = 0;  // seed for Random, offset for Index

  static SelectionPolicy min() { return {Kind::Min, 0}; }
  static SelectionPolicy max() { return {Kind::Max, 0}; }
  static SelectionPolicy mid() { return {Kind::Mid, 0}; }
  static SelectionPolicy random(std::uint64_t seed) { return {Kind::Random, seed}; }
  static SelectionPolicy index(std::uint64_t k) { return {Kind::Index, k}; }

  /// "min", "max", "mid", "random[:seed]", "index:k".
  static SelectionPolicy parse(const std::string& s, std::uint64_t default_seed = 0) {
    auto colon = s.find(':');
    std::string kind = s.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
    auto number = [&](const std::string& what) -> std::uint64_t {
      try {
        std::size_t used = 0;
        auto v = std::stoull(arg, &used);
        if (used != arg.size()) throw std::invalid_argument(arg);
        return v;
      } catch (const std::exception&) {
        throw Error(ErrorKind::Config, "bad " + what + " in policy '" + s + "'");
      }
    };
    if (kind == "min" && arg.empty()) return min();
    if (kind == "max" && arg.empty()) return max();
    if (kind == "mid" && arg.empty()) return mid();
    if (kind == "random") return random(arg.empty() ? default_seed : number("seed"));
    if (kind == "index" && !arg.empty()) return index(number("index"));
    throw Error(ErrorKind::Config, "unknown policy '" + s + "'");
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Min: return "min";
      case Kind::Max: return "max";
      case Kind::Mid: return "mid";
      case Kind::Random: return "random:" + std::to_string(param);
      case Kind::Index: return "index:" + std::to_string(param);
    }
    return "?";
  }
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Uniform integer in [0, range) from a counter-based stream keyed by (seed, n).
inline Integer keyed_uniform(const Integer& range, std::uint64_t seed, Position n) {
  const std::uint64_t key = splitmix64(seed) ^ splitmix64(n * 0xd1b54a32d192ed03ULL + 1);
  const std::size_t bits = mpz_sizeinbase(Integer(range - 1).get_mpz_t(), 2);
  const std::size_t words = (bits + 63) / 64;
  std::uint64_t counter = 0;
  std::vector<std::uint64_t> buf(words);
  for (;;) {
    for (auto& w : buf) w = splitmix64(key + 0x9e3779b97f4a7c15ULL * ++counter);
    Integer x;
    mpz_import(x.get_mpz_t(), words, -1, sizeof(std::uint64_t), 0, 0, buf.data());
    mpz_fdiv_r_2exp(x.get_mpz_t(), x.get_mpz_t(), bits);
    if (x < range) return x;
  }
}

}  // namespace detail

inline Integer select_digit(const DigitWindow& w, const SelectionPolicy& p) {
  if (w.empty())
    throw Error(ErrorKind::EmptyWindow, "no admissible digit at position " + std::to_string(w.n));
  switch (p.kind) {
    case SelectionPolicy::Kind::Min: return w.lo;
    case SelectionPolicy::Kind::Max: return w.hi;
    case SelectionPolicy::Kind::Mid: {
      if (w.box.c == 1) return w.lo;
      // Nearest integer to q(c-1)/a, ties toward lo: ceil(t - 1/2).
      Rational t = make_rational(w.q * from_u64(w.box.c - 1), from_u64(w.box.a));
      Integer d = ceil(t - Rational(1, 2));
      if (d < w.lo) return w.lo;
      if (d > w.hi) return w.hi;
      return d;
    }
    case SelectionPolicy::Kind::Random: return w.lo + detail::keyed_uniform(w.omega, p.param, w.n);
    case SelectionPolicy::Kind::Index: {
      Integer d = w.lo + from_u64(p.param);
      if (d > w.hi)
        throw Error(ErrorKind::IndexOutOfWindow,
                    "index " + std::to_string(p.param) + " outside window at position " + std::to_string(w.n));
      return d;
    }
  }
  return w.lo;
}

// ---------------------------------------------------------------------------
// Streams

/// E_{F,1..N} for one Q-special sequence F: policy choices plus explicit
/// per-position overrides. Extension is single-writer.
class SpecialStream {
 public:
  SpecialStream(LadderPtr ladder, SelectionPolicy policy) : ladder_(std::move(ladder)), policy_(policy) {
    if (!ladder_) throw Error(ErrorKind::InvalidArgument, "stream: null ladder");
  }

  SpecialStream(const SpecialStream& o)
      : ladder_(o.ladder_), policy_(o.policy_), overrides_(o.overrides_), digits_(o.digits_), terms_(o.terms_) {}
  SpecialStream& operator=(const SpecialStream& o) {
    if (this != &o) {
      ladder_ = o.ladder_;
      policy_ = o.policy_;
      overrides_ = o.overrides_;
      digits_ = o.digits_;
      terms_ = o.terms_;
      std::lock_guard lock(cache_mu_);
      cache_ = {};
    }
    return *this;
  }

  const Ladder& ladder() const { return *ladder_; }
  const LadderPtr& ladder_ptr() const { return ladder_; }
  const SelectionPolicy& policy() const { return policy_; }
  Position size() const { return digits_.size(); }

  void extend_to(Position n) {
    digits_.reserve(n);
    terms_.reserve(n);
    while (digits_.size() < n) {
      DigitWindow w = digit_window(*ladder_, digits_.size() + 1);
      Integer d;
      if (auto it = overrides_.find(w.n); it != overrides_.end()) {
        if (!w.contains(it->second))
          throw Error(ErrorKind::IndexOutOfWindow, "override at " + std::to_string(w.n) + " is not admissible");
        d = it->second;
      } else {
        d = select_digit(w, policy_);
      }
      digits_.push_back(std::move(d));
      terms_.push_back(std::move(w.q));
    }
  }

  /// E_{F,n}, 1-based.
  const Integer& digit(Position n) const { return digits_.at(n - 1); }
  /// q_n as used for this stream, 1-based.
  const Integer& term(Position n) const { return terms_.at(n - 1); }
  std::span<const Integer> digits() const { return digits_; }

  /// y_F component E_{F,n}/q_n.
  Rational point(Position n) const { return make_rational(digit(n), term(n)); }

  std::vector<Rational> points(Position n) const {
    require(n);
    std::vector<Rational> out;
    out.reserve(n);
    for (Position m = 1; m <= n; ++m) out.push_back(point(m));
    return out;
  }

  /// Returns a copy whose digit at n is forced to `value`; positions already
  /// materialized are updated in place.
  SpecialStream with_override(Position n, const Integer& value) const {
    SpecialStream s(*this);
    s.overrides_[n] = value;
    if (n <= s.digits_.size()) {
      DigitWindow w = digit_window(*ladder_, n);
      if (!w.contains(value))
        throw Error(ErrorKind::IndexOutOfWindow, "override at " + std::to_string(n) + " is not admissible");
      s.digits_[n - 1] = value;
    }
    return s;
  }

  /// sum_{m<=n} E_m/(q_1...q_m), reduced.
  Rational convergent(Position n) const {
    require(n);
    std::lock_guard lock(cache_mu_);
    if (cache_.at > n) cache_ = {};
    // Horner accumulation: num/den with den = q_1...q_at.
    for (Position m = cache_.at + 1; m <= n; ++m) {
      cache_.num = cache_.num * terms_[m - 1] + digits_[m - 1];
      cache_.den *= terms_[m - 1];
    }
    cache_.at = n;
    return make_rational(cache_.num, cache_.den);
  }

 private:
  void require(Position n) const {
    if (n > digits_.size())
      throw Error(ErrorKind::OutOfRange, "stream materialized only to " + std::to_string(digits_.size()));
  }

  struct ConvergentCache {
    Position at = 0;
    Integer num = 0;
    Integer den = 1;
  };

  LadderPtr ladder_;
  SelectionPolicy policy_;
  std::map<Position, Integer> overrides_;
  std::vector<Integer> digits_;
  std::vector<Integer> terms_;
  mutable std::mutex cache_mu_;
  mutable ConvergentCache cache_;
};

inline SpecialStream digit_stream(LadderPtr lad, const SelectionPolicy& p, Position n) {
  SpecialStream s(std::move(lad), p);
  s.extend_to(n);
  return s;
}

inline Rational convergent(const SpecialStream& s, Position n) { return s.convergent(n); }

/// q_1 ... q_n (1 for n = 0).
inline Integer prefix_product(const BasicSequence& q, Position n) {
  Integer p = 1;
  for (Position m = 1; m <= n; ++m) p *= q.term(m);
  return p;
}

// ---------------------------------------------------------------------------
// Validation

struct PositionVerdict {
  Position n = 0;
  bool valid = true;
  std::string reason;
};

struct PrefixVerdict {
  bool valid = true;
  std::vector<PositionVerdict> positions;

  std::optional<Position> first_invalid() const {
    for (const auto& p : positions)
      if (!p.valid) return p.n;
    return std::nullopt;
  }
};

inline PrefixVerdict validate_prefix(const Ladder& lad, std::span<const Integer> digits) {
  PrefixVerdict v;
  v.positions.reserve(digits.size());
  for (Position n = 1; n <= digits.size(); ++n) {
    const Integer& d = digits[n - 1];
    DigitWindow w = digit_window(lad, n);
    PositionVerdict pv{n, true, {}};
    if (w.empty()) {
      pv = {n, false, "empty window (q_n < 2a^2)"};
    } else if (d < 0 || d >= w.q) {
      pv = {n, false, "digit " + d.get_str() + " outside [0, q_n - 1]"};
    } else if (!w.contains(d)) {
      pv = {n, false,
            w.box.c == 1 ? "c = 1 forces digit 0, got " + d.get_str()
                         : "digit " + d.get_str() + " outside [" + w.lo.get_str() + ", " + w.hi.get_str() + "]"};
    }
    if (!pv.valid) v.valid = false;
    v.positions.push_back(std::move(pv));
  }
  return v;
}

// ---------------------------------------------------------------------------
// Metric and perturbation

/// d(F1, F2) = 1/(q_1...q_{zeta-1}) with zeta the first disagreement, or
/// nullopt when the streams agree through `horizon`.
inline std::optional<Rational> metric_d(const SpecialStream& a, const SpecialStream& b, Position horizon) {
  if (horizon > a.size() || horizon > b.size())
    throw Error(ErrorKind::OutOfRange, "metric_d: streams not materialized to the horizon");
  Integer prod = 1;
  for (Position n = 1; n <= horizon; ++n) {
    if (a.digit(n) != b.digit(n)) return make_rational(Integer(1), prod);
    prod *= a.term(n);
  }
  return std::nullopt;
}

/// The site where perturb changes a digit for a request at n.
inline Position perturbation_site(const Ladder& lad, Position n) {
  BoxIndex box = lad.phi_inv(n);
  if (box.c != 1) return n;
  if (box.a > 1) return n + 1;
  return lad.phi({2, 1, 2});
}

/// A different Q-special stream agreeing with s everywhere except at one
/// site: n itself (c != 1), n + 1 (c = 1, a > 1), or phi(2,1,2) (a = c = 1).
inline SpecialStream perturb(const SpecialStream& s, Position n) {
  const Position site = perturbation_site(s.ladder(), n);
  SpecialStream base(s);
  base.extend_to(site);
  DigitWindow w = digit_window(s.ladder(), site);
  if (w.omega < 2)
    throw Error(ErrorKind::NoAlternative, "window at " + std::to_string(site) + " has a single digit");
  const Integer& cur = base.digit(site);
  Integer alt = cur == w.hi ? Integer(cur - 1) : Integer(cur + 1);
  return base.with_override(site, alt);
}

// ---------------------------------------------------------------------------
// Nowhere density witness

struct GapInterval {
  Rational lo;  // inclusive
  Rational hi;  // exclusive
  BoxIndex next_box;
};

/// The interval K inside the cylinder of `digits` that no x_F reaches.
inline GapInterval gap_witness(const Ladder& lad, std::span<const Integer> digits) {
  PrefixVerdict v = validate_prefix(lad, digits);
  if (!v.valid)
    throw Error(ErrorKind::InvalidArgument, "gap_witness: prefix invalid at " + std::to_string(*v.first_invalid()));
  const Position n = digits.size();
  Integer num = 0, den = 1;
  for (Position m = 1; m <= n; ++m) {
    Integer q = lad.sequence().term(m);
    num = num * q + digits[m - 1];
    den *= q;
  }
  const Rational prefix = make_rational(num, den);
  const Rational cell = make_rational(Integer(1), den);
  BoxIndex box = lad.phi_inv(n + 1);
  const Integer a = from_u64(box.a);
  // (a-1)/a + 1.5/(2a^2) = (4a^2 - 4a + 3)/(4a^2)
  const Rational offset = make_rational(4 * a * a - 4 * a + 3, 4 * a * a);
  return {prefix + offset * cell, prefix + cell, box};
}

// ---------------------------------------------------------------------------
// Tail map and censuses

/// T_{Q,n}(x) = q_1...q_n x mod 1.
inline Rational tail_map(const BasicSequence& q, const Rational& x, Position n) {
  return frac(x * Rational(prefix_product(q, n)));
}

/// Occurrences of `block` as consecutive digits starting at positions <= n.
inline std::uint64_t block_census(SpecialStream& s, std::span<const Integer> block, Position n) {
  if (block.empty()) throw Error(ErrorKind::InvalidArgument, "block_census: empty block");
  s.extend_to(n + block.size() - 1);
  std::uint64_t count = 0;
  for (Position start = 1; start <= n; ++start) {
    bool match = true;
    for (std::size_t j = 0; j < block.size() && match; ++j) match = s.digit(start + j) == block[j];
    if (match) ++count;
  }
  return count;
}

/// N_n^Q((d), x) / Q_n^(1).
inline Rational simple_normal_ratio(SpecialStream& s, const Integer& d, Position n) {
  const Integer block[] = {d};
  std::uint64_t count = block_census(s, block, n);
  return Rational(from_u64(count)) / q_partial(s.ladder().sequence(), n, 1);
}

}  // namespace cantor
