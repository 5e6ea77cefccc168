#pragma once

// Log-space level tables of omega_n and q_n, the level-scale box ratio,
// the two Hausdorff lower-bound functionals, Q_alpha target checks, and
// growth-class diagnostic ratios.

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "cantor/construction.hpp"

namespace cantor {

/// Sum of logs that may leave double range: finite terms are compensated,
/// oversized terms are folded into a Magnitude.
class LogSum {
 public:
  void add(const Magnitude& m) {
    if (m.finite() && m.value() < 1e290)
      small_.add(m.value());
    else
      big_ += m;
  }
  void add(double v) { small_.add(v); }

  Magnitude value() const { return big_ + Magnitude::from_double(std::max(0.0, small_.value())); }

 private:
  CompensatedSum small_;
  Magnitude big_;
};

struct OmegaEntry {
  Magnitude log_omega;
  Magnitude log_q;
  bool exact = true;    // omega from an exact window
  bool flagged = false; // empty window or q_n < 2a^2
};

/// ln omega_n: exact window where q_n is materializable, otherwise
/// ln q_n - 2 ln a (omega lies in [q/a^2, q/a^2 + 1]).
inline OmegaEntry omega_entry(const Ladder& lad, Position n) {
  const BasicSequence& q = lad.sequence();
  OmegaEntry e;
  e.log_q = q.log_magnitude(n);
  if (q.materializable(n)) {
    DigitWindow w = digit_window(lad, n);
    e.flagged = w.empty() || !w.guaranteed;
    e.log_omega = w.omega > 1 ? Magnitude::from_double(ln(w.omega)) : Magnitude();
    return e;
  }
  e.exact = false;
  BoxIndex box = lad.phi_inv(n);
  if (box.c == 1) return e;
  e.log_omega = e.log_q.shifted(-2.0 * std::log(static_cast<double>(box.a)));
  return e;
}

/// Per-position ln omega_n and ln q_n with prefix sums, extended lazily.
class LevelTable {
 public:
  explicit LevelTable(LadderPtr lad) : lad_(std::move(lad)) {
    if (!lad_) throw Error(ErrorKind::InvalidArgument, "level table: null ladder");
    prefix_omega_.emplace_back();
    prefix_q_.emplace_back();
    flagged_prefix_.push_back(0);
  }

  const Ladder& ladder() const { return *lad_; }

  void extend_to(Position n) {
    while (entries_.size() < n) {
      OmegaEntry e = omega_entry(*lad_, entries_.size() + 1);
      omega_sum_.add(e.log_omega);
      q_sum_.add(e.log_q);
      prefix_omega_.push_back(omega_sum_.value());
      prefix_q_.push_back(q_sum_.value());
      flagged_prefix_.push_back(flagged_prefix_.back() + (e.flagged ? 1 : 0));
      entries_.push_back(e);
    }
  }

  const OmegaEntry& entry(Position n) {
    extend_to(n);
    return entries_[n - 1];
  }
  /// sum_{m<=n} ln omega_m.
  Magnitude omega_prefix(Position n) {
    extend_to(n);
    return prefix_omega_[n];
  }
  /// sum_{m<=n} ln q_m.
  Magnitude q_prefix(Position n) {
    extend_to(n);
    return prefix_q_[n];
  }
  /// sum_{lo<=m<=hi} ln omega_m, summed directly.
  Magnitude omega_range(Position lo, Position hi) {
    extend_to(hi);
    LogSum s;
    for (Position m = lo; m <= hi; ++m) s.add(entries_[m - 1].log_omega);
    return s.value();
  }
  /// Flagged positions among 1..n.
  std::uint64_t flagged_through(Position n) {
    extend_to(n);
    return flagged_prefix_[n];
  }

 private:
  LadderPtr lad_;
  std::vector<OmegaEntry> entries_;
  LogSum omega_sum_, q_sum_;
  std::vector<Magnitude> prefix_omega_, prefix_q_;
  std::vector<std::uint64_t> flagged_prefix_;
};

/// sum_{n<=N} ln omega_n.
inline double omega_log_sum(const LadderPtr& lad, Position n) {
  LevelTable t(lad);
  return t.omega_prefix(n).to_double();
}

/// ln(omega_1 ... omega_{gamma(k)-1}) / ln(q_1 ... q_{gamma(k)}).
inline double box_ratio(LevelTable& t, std::uint64_t k) {
  const Position g = t.ladder().level_gamma(k);
  return magnitude_ratio(t.omega_prefix(g - 1), t.q_prefix(g));
}

/// ln(omega_1 ... omega_{gamma(k-1)-1}) /
/// ln(q_1 ... q_{gamma(k)} / (omega_{gamma(k-1)} ... omega_{gamma(k)-1})).
inline double hausdorff_lower_general(LevelTable& t, std::uint64_t k) {
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "hausdorff_lower_general: k must be >= 2");
  const Position g0 = t.ladder().level_gamma(k - 1);
  const Position g1 = t.ladder().level_gamma(k);
  Magnitude num = t.omega_prefix(g0 - 1);
  Magnitude den = t.q_prefix(g1) - t.omega_range(g0, g1 - 1);
  if (den == Magnitude()) return std::nan("");
  return magnitude_ratio(num, den);
}

/// Closed-form lower estimate for all-ones ladders: products of q over the
/// triangular blocks, ln-Gamma for the factorials.
inline double hausdorff_lower_estofhd(const Ladder& lad, std::uint64_t k) {
  if (k < 3) throw Error(ErrorKind::InvalidArgument, "hausdorff_lower_estofhd: k must be >= 3");
  if (!lad.all_ones_through(k)) throw Error(ErrorKind::LadderNotAllOnes, lad.sequence().name() + ": some l_i != 1");
  const BasicSequence& q = lad.sequence();
  const double ln3 = std::log(3.0);
  const Position t1 = tau(k - 1), t0 = tau(k - 2), t2 = tau(k);

  CompensatedSum base;  // ln prod_{n <= tau(k-1)-1} q_n
  for (Position n = 1; n < t1; ++n) base.add(q.log_term(n));
  CompensatedSum starts;  // sum_{m=0}^{k-2} ln q_{tau(m)+1}
  for (std::uint64_t m = 0; m + 2 <= k; ++m) starts.add(q.log_term(tau(m) + 1));

  const double num = base.value() - static_cast<double>(t0 - 1) * ln3 - std::lgamma(static_cast<double>(t1)) -
                     starts.value();
  const double den = base.value() + q.log_term(t1 + 1) + q.log_term(t2) + static_cast<double>(k - 1) * ln3 +
                     std::lgamma(static_cast<double>(t2)) - std::lgamma(static_cast<double>(t1)) -
                     std::log(static_cast<double>(t1 + 1));
  return num / den;
}

struct LevelRow {
  std::uint64_t k = 0;
  std::uint64_t A = 0;
  Position gamma = 0;
  Magnitude log_omega;  // sum_{n<gamma(k)} ln omega_n
  Magnitude log_q;      // sum_{n<=gamma(k)} ln q_n
  double box = 0.0;
  std::optional<double> hausdorff;
  double separation = 0.0;  // 1 + 2/A(k)^2
  bool flagged = false;
};

inline LevelRow level_row(LevelTable& t, std::uint64_t k) {
  LevelRow r;
  r.k = k;
  r.A = t.ladder().level_A(k);
  r.gamma = t.ladder().level_gamma(k);
  r.log_omega = t.omega_prefix(r.gamma - 1);
  r.log_q = t.q_prefix(r.gamma);
  r.box = magnitude_ratio(r.log_omega, r.log_q);
  if (k >= 2) r.hausdorff = hausdorff_lower_general(t, k);
  r.separation = 1.0 + 2.0 / (static_cast<double>(r.A) * static_cast<double>(r.A));
  r.flagged = t.flagged_through(r.gamma) > 0;
  return r;
}

// ---------------------------------------------------------------------------
// Q_alpha

struct QAlphaRow {
  std::uint64_t k = 0;
  bool even = false;
  double box = 0.0;
  double target = 0.0;  // alpha on even k, 1 on odd k
  std::optional<double> hausdorff;
  /// ln P_k / (ln P_k + ln V_k): the product-only view of the even-k ratio.
  double product_ratio = 0.0;
};

inline std::vector<QAlphaRow> qalpha_dim_check(const QAlphaFamily& fam, std::uint64_t kmax) {
  auto lad = make_ladder(fam.sequence());
  LevelTable t(lad);
  const double alpha = to_double(fam.alpha);
  std::vector<QAlphaRow> rows;
  for (std::uint64_t k = 1; k <= kmax; ++k) {
    QAlphaRow r;
    r.k = k;
    r.even = k % 2 == 0;
    r.box = box_ratio(t, k);
    r.target = r.even ? alpha : 1.0;
    if (k >= 2) r.hausdorff = hausdorff_lower_general(t, k);
    const double lp = fam.log_p(k);
    r.product_ratio = lp / (lp + fam.log_v(k));
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Growth diagnostics

struct GrowthRow {
  std::uint64_t k = 0;
  double nicely_edges = 0.0;   // (ln q_{tau(k-1)+1} + ln q_{tau(k)}) / ln P_{k-1}
  double nicely_starts = 0.0;  // sum_{n<=k-2} ln q_{tau(n)+1} / ln P_{k-1}
  double quickly = 0.0;        // ln P_k / ln q_{tau(k)}
  Magnitude max_log_omega;     // over positions n <= tau(k)
};

/// Rows for 3 <= k <= K, with P_k = q_1 ... q_{tau(k)-1}.
inline std::vector<GrowthRow> growth_diagnostics(const SequencePtr& q, std::uint64_t kmax) {
  std::optional<LadderPtr> lad;
  if (q->infinite_in_limit()) lad = make_ladder(q);
  auto log_p = [&](std::uint64_t k) {
    LogSum s;
    for (Position n = 1; n < tau(k); ++n) s.add(q->log_magnitude(n));
    return s.value();
  };
  std::vector<GrowthRow> rows;
  Magnitude max_omega;
  Position scanned = 0;
  for (std::uint64_t k = 3; k <= kmax; ++k) {
    GrowthRow r;
    r.k = k;
    const Magnitude p_prev = log_p(k - 1);
    const Magnitude p_k = log_p(k);
    r.nicely_edges = magnitude_ratio(q->log_magnitude(tau(k - 1) + 1) + q->log_magnitude(tau(k)), p_prev);
    LogSum starts;
    for (std::uint64_t m = 0; m + 2 <= k; ++m) starts.add(q->log_magnitude(tau(m) + 1));
    r.nicely_starts = magnitude_ratio(starts.value(), p_prev);
    r.quickly = magnitude_ratio(p_k, q->log_magnitude(tau(k)));
    if (lad) {
      for (; scanned < tau(k); ++scanned) {
        Magnitude m = omega_entry(**lad, scanned + 1).log_omega;
        if (max_omega < m) max_omega = m;
      }
    }
    r.max_log_omega = max_omega;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace cantor
