#pragma once

// Exact star discrepancy, almost-arithmetic-progression feasibility, the
// f_i / eps_bar_i bound machinery, and checkpointed envelope monitors.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cantor/construction.hpp"

namespace cantor {

namespace detail {

/// D* of an already sorted list, screening candidates in double precision
/// and deciding the maximum exactly among those within `slack` of the top.
inline Rational sorted_star_discrepancy(std::span<const Rational* const> sorted) {
  const std::size_t n = sorted.size();
  const double dn = static_cast<double>(n);
  std::vector<double> hi(n), lo(n);
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = sorted[i]->get_d();
    hi[i] = static_cast<double>(i + 1) / dn - x;
    lo[i] = x - static_cast<double>(i) / dn;
    best = std::max({best, hi[i], lo[i]});
  }
  constexpr double slack = 1e-12;
  const Integer N = from_u64(n);
  std::optional<Rational> exact;
  auto consider = [&](Rational v) {
    if (!exact || v > *exact) exact = std::move(v);
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (hi[i] >= best - slack) consider(make_rational(from_u64(i + 1), N) - *sorted[i]);
    if (lo[i] >= best - slack) consider(*sorted[i] - make_rational(from_u64(i), N));
  }
  return *exact;
}

inline void require_unit_interval(const Rational& x) {
  if (x < 0 || x >= 1) throw Error(ErrorKind::InvalidArgument, "point " + to_string(x) + " outside [0,1)");
}

}  // namespace detail

/// D*_N = max_i max(i/N - x_(i), x_(i) - (i-1)/N) over the sorted points.
inline Rational star_discrepancy(std::span<const Rational> points) {
  if (points.empty()) throw Error(ErrorKind::EmptySet, "star discrepancy of an empty set");
  std::vector<const Rational*> sorted;
  sorted.reserve(points.size());
  for (const auto& p : points) {
    detail::require_unit_interval(p);
    sorted.push_back(&p);
  }
  std::sort(sorted.begin(), sorted.end(), [](const Rational* a, const Rational* b) { return *a < *b; });
  return detail::sorted_star_discrepancy(sorted);
}

/// D* of every prefix points[0..n) for n in `checkpoints`, sorting once.
inline std::vector<Rational> prefix_star_discrepancies(std::span<const Rational> points,
                                                       std::span<const Position> checkpoints) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (const auto& p : points) detail::require_unit_interval(p);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });

  std::vector<Rational> out;
  out.reserve(checkpoints.size());
  std::vector<const Rational*> prefix;
  for (Position n : checkpoints) {
    if (n == 0) throw Error(ErrorKind::EmptySet, "star discrepancy of an empty prefix");
    if (n > points.size()) throw Error(ErrorKind::OutOfRange, "checkpoint beyond the point set");
    prefix.clear();
    prefix.reserve(n);
    for (std::size_t idx : order)
      if (idx < n) prefix.push_back(&points[idx]);
    out.push_back(detail::sorted_star_discrepancy(prefix));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Almost arithmetic progressions

struct AAPWitness {
  Rational delta;
  Rational epsilon;
  std::size_t size = 0;
  bool feasible = false;
  /// Closed feasible interval for eta; meaningful only when feasible.
  Rational eta_lo;
  Rational eta_hi;
  std::string reason;
};

/// Feasible eta with 0 < eta <= eps, x_1 <= eta(1+delta),
/// eta(1-delta) <= gap <= eta(1+delta), and 1 - eta(1+delta) <= x_N < 1.
inline AAPWitness aap_feasible(std::span<const Rational> xs, const Rational& delta, const Rational& epsilon) {
  if (xs.empty()) throw Error(ErrorKind::EmptySet, "aap_feasible: no points");
  if (delta < 0 || delta >= 1) throw Error(ErrorKind::InvalidArgument, "aap_feasible: delta must lie in [0,1)");
  if (epsilon <= 0) throw Error(ErrorKind::InvalidArgument, "aap_feasible: epsilon must be positive");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i - 1] < xs[i]))
      throw Error(ErrorKind::NonIncreasing, "aap_feasible: points not strictly increasing at index " + std::to_string(i));

  AAPWitness w{delta, epsilon, xs.size(), false, 0, 0, {}};
  if (xs.front() < 0) {
    w.reason = "x_1 < 0";
    return w;
  }
  if (xs.back() >= 1) {
    w.reason = "x_N >= 1";
    return w;
  }
  const Rational up = 1 + delta;
  const Rational down = 1 - delta;
  Rational lo = xs.front() / up;
  lo = std::max(lo, Rational((1 - xs.back()) / up));
  Rational hi = epsilon;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    Rational gap = xs[i] - xs[i - 1];
    lo = std::max(lo, Rational(gap / up));
    hi = std::min(hi, Rational(gap / down));
  }
  w.eta_lo = lo;
  w.eta_hi = hi;
  // lo > 0 always holds since x_N < 1.
  w.feasible = lo <= hi;
  if (!w.feasible) w.reason = "empty eta interval [" + to_string(lo) + ", " + to_string(hi) + "]";
  return w;
}

struct AAPBound {
  Rational bound;  // 1/N + delta
  double sharper = 0.0;
};

inline AAPBound aap_disc_bound(const AAPWitness& w, std::size_t n) {
  if (!w.feasible) throw Error(ErrorKind::InfeasibleWitness, "aap_disc_bound: " + w.reason);
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "aap_disc_bound: N must be positive");
  const Rational inv_n = make_rational(Integer(1), from_u64(n));
  AAPBound b{inv_n + w.delta, 0.0};
  const double d = to_double(w.delta);
  b.sharper = d > 0 ? to_double(inv_n) + d / (1.0 + std::sqrt(1.0 - d * d))
                    : std::min(to_double(w.eta_lo), to_double(inv_n));
  return b;
}

struct BoxReport {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::vector<Rational> points;
  std::optional<AAPWitness> aap;  // absent for a = 1
  Rational dstar;
  Rational bound;  // 2/a
  bool ok = false;
  std::string diagnostic;
};

/// y_{F,a,b} = (E_n/q_n) over the box, checked as an AAP-(1/a,1/a) with D* <= 2/a.
inline BoxReport box_check(const SpecialStream& s, std::uint64_t a, std::uint64_t b) {
  BoxReport r;
  r.a = a;
  r.b = b;
  const Position first = s.ladder().phi({a, b, 1});
  if (first + a - 1 > s.size()) throw Error(ErrorKind::OutOfRange, "box_check: box not materialized");
  for (std::uint64_t c = 0; c < a; ++c) r.points.push_back(s.point(first + c));
  r.dstar = star_discrepancy(r.points);
  r.bound = make_rational(Integer(2), from_u64(a));
  if (a == 1) {
    r.ok = r.dstar <= r.bound;
    return r;
  }
  const Rational inv_a = make_rational(Integer(1), from_u64(a));
  try {
    r.aap = aap_feasible(r.points, inv_a, inv_a);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonIncreasing) throw;
    r.diagnostic = e.what();
    return r;
  }
  if (!r.aap->feasible) r.diagnostic = r.aap->reason;
  r.ok = r.aap->feasible && r.dstar <= r.bound;
  if (r.aap->feasible && !(r.dstar <= r.bound)) r.diagnostic = "D* exceeds 2/a";
  return r;
}

// ---------------------------------------------------------------------------
// f_i and eps_bar_i

struct LadderSums {
  Integer two_l;  // sum_{j<=i} 2 l_j
  Integer j_l;    // sum_{j<=i} j l_j = L_i
};

inline LadderSums ladder_sums(const Ladder& lad, std::uint64_t i) {
  LadderSums s{0, from_u64(lad.L(i))};
  for (std::uint64_t j = 1; j <= i; ++j) s.two_l += 2 * from_u64(lad.l(j));
  return s;
}

/// f_i(w, z) = (sum 2 l_j + 2w + z) / (sum j l_j + (i+1) w + z).
inline Rational f_eval(const Ladder& lad, std::uint64_t i, const Rational& w, const Rational& z) {
  if (w < 0 || z < 0) throw Error(ErrorKind::InvalidArgument, "f_eval: w and z must be >= 0");
  LadderSums s = ladder_sums(lad, i);
  Rational num = Rational(s.two_l) + 2 * w + z;
  Rational den = Rational(s.j_l) + Rational(from_u64(i + 1)) * w + z;
  if (den == 0) throw Error(ErrorKind::InvalidArgument, "f_eval: zero denominator");
  return num / den;
}

/// eps_bar_i = f_i(0, i+1).
inline Rational eps_bar(const Ladder& lad, std::uint64_t i) {
  return f_eval(lad, i, Rational(0), Rational(from_u64(i + 1)));
}

/// i > 2 and sum j l_j > sum 2 l_j.
inline bool f_hypotheses(const Ladder& lad, std::uint64_t i) {
  if (i <= 2) return false;
  LadderSums s = ladder_sums(lad, i);
  return s.j_l > s.two_l;
}

struct MonotonicityReport {
  std::uint64_t i = 0;
  bool hypotheses_met = false;
  bool holds = false;
  std::uint64_t comparisons = 0;
  std::string failure;
};

/// Exhaustive exact check on {0..l_{i+1}} x {0..i}: f decreasing in w,
/// increasing in z, and below eps_bar_i.
inline MonotonicityReport f_monotonicity_check(const Ladder& lad, std::uint64_t i) {
  MonotonicityReport r;
  r.i = i;
  r.hypotheses_met = f_hypotheses(lad, i);
  if (!r.hypotheses_met) return r;
  const std::uint64_t wmax = lad.l(i + 1);
  const Rational top = eps_bar(lad, i);
  std::vector<std::vector<Rational>> f(wmax + 1, std::vector<Rational>(i + 1));
  for (std::uint64_t w = 0; w <= wmax; ++w)
    for (std::uint64_t z = 0; z <= i; ++z) f[w][z] = f_eval(lad, i, Rational(from_u64(w)), Rational(from_u64(z)));
  auto fail = [&](std::string what) {
    if (r.failure.empty()) r.failure = std::move(what);
  };
  for (std::uint64_t w = 0; w <= wmax; ++w) {
    for (std::uint64_t z = 0; z <= i; ++z) {
      auto at = "(" + std::to_string(w) + "," + std::to_string(z) + ")";
      if (w < wmax && !(f[w + 1][z] < f[w][z])) fail("not decreasing in w at " + at);
      if (z < i && !(f[w][z + 1] > f[w][z])) fail("not increasing in z at " + at);
      if (!(f[w][z] < top)) fail("not below eps_bar at " + at);
      r.comparisons += (w < wmax) + (z < i) + 1;
    }
  }
  r.holds = r.failure.empty();
  return r;
}

// ---------------------------------------------------------------------------
// Envelopes

/// Distinct floor(r^k) <= max_n for k >= 0, always ending at max_n.
inline std::vector<Position> checkpoint_schedule(Position max_n, double ratio, Position min_n = 1) {
  if (!(ratio > 1.0)) throw Error(ErrorKind::InvalidArgument, "checkpoint ratio must exceed 1");
  if (max_n == 0) throw Error(ErrorKind::InvalidArgument, "checkpoint horizon must be positive");
  std::vector<Position> out;
  for (double x = 1.0; x <= static_cast<double>(max_n); x *= ratio) {
    auto n = static_cast<Position>(std::floor(x));
    if (n >= min_n && (out.empty() || out.back() != n)) out.push_back(n);
  }
  if (out.empty() || out.back() != max_n) out.push_back(max_n);
  return out;
}

/// sqrt(2 ceil(M+1)) (2 ceil(M+1) + 1).
inline double envelope_constant(double m) {
  const double c = 2.0 * std::ceil(m + 1.0);
  return std::sqrt(c) * (c + 1.0);
}

struct EnvelopeRow {
  Position n = 0;
  std::uint64_t i = 0;
  Rational dstar;
  Rational eps_bar;
  double env_bdiscr3 = 0.0;  // psi * C(M) / sqrt(n)
  double env_sqrt8 = 0.0;    // psi * sqrt(8) / sqrt(n)
  bool hypotheses_hold = false;
};

struct EnvelopeOptions {
  double psi = 1.1;
  double m = 1.0;
};

inline std::vector<EnvelopeRow> envelope_report(SpecialStream& s, std::span<const Position> checkpoints,
                                                const EnvelopeOptions& opt = {}) {
  if (checkpoints.empty()) return {};
  const Position top = *std::max_element(checkpoints.begin(), checkpoints.end());
  s.extend_to(top);
  std::vector<Rational> points = s.points(top);
  std::vector<Rational> ds = prefix_star_discrepancies(points, checkpoints);
  const double cm = envelope_constant(opt.m);
  std::vector<EnvelopeRow> rows;
  rows.reserve(checkpoints.size());
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    EnvelopeRow r;
    r.n = checkpoints[k];
    r.i = s.ladder().split(r.n).i;
    r.dstar = ds[k];
    r.eps_bar = eps_bar(s.ladder(), r.i);
    const double root = std::sqrt(static_cast<double>(r.n));
    r.env_bdiscr3 = opt.psi * cm / root;
    r.env_sqrt8 = opt.psi * std::sqrt(8.0) / root;
    r.hypotheses_hold = f_hypotheses(s.ladder(), r.i);
    rows.push_back(std::move(r));
  }
  return rows;
}

/// First checkpoint from which `holds` is true at every later checkpoint.
template <class Pred>
std::optional<Position> empirical_crossover(std::span<const EnvelopeRow> rows, Pred&& holds) {
  std::optional<Position> n0;
  for (const auto& r : rows) {
    if (!holds(r))
      n0.reset();
    else if (!n0)
      n0 = r.n;
  }
  return n0;
}

struct ConcatReport {
  Rational dstar;
  Rational bound;
  bool holds = false;
};

/// D*(z_1 ... z_m) <= sum |z_j| D*(z_j) / sum |z_j|.
inline ConcatReport concat_bound_check(std::span<const std::vector<Rational>> segments) {
  if (segments.empty()) throw Error(ErrorKind::EmptySet, "concat_bound_check: no segments");
  std::vector<Rational> all;
  Rational weighted = 0;
  Integer total = 0;
  for (const auto& seg : segments) {
    weighted += Rational(from_u64(seg.size())) * star_discrepancy(seg);
    total += from_u64(seg.size());
    all.insert(all.end(), seg.begin(), seg.end());
  }
  ConcatReport r{star_discrepancy(all), weighted / Rational(total), false};
  r.holds = r.dstar <= r.bound;
  return r;
}

}  // namespace cantor
