#pragma once

// The box schedule: l_i boxes of length i, placed consecutively. Positions
// n map bijectively to (a, b, c) = (box length, box repetition, component).

#include <algorithm>
#include <memory>
#include <mutex>
#include <vector>

#include "cantor/sequences.hpp"

namespace cantor {

struct BoxIndex {
  std::uint64_t a = 1;  // box length
  std::uint64_t b = 1;  // which box of that length, b <= l_a
  std::uint64_t c = 1;  // component within the box, c <= a

  friend bool operator==(const BoxIndex&, const BoxIndex&) = default;
};

/// L_i < n <= L_{i+1}, m = n - L_i = alpha (i+1) + beta.
struct PositionSplit {
  std::uint64_t i = 0;
  std::uint64_t m = 0;
  std::uint64_t alpha = 0;
  std::uint64_t beta = 0;

  friend bool operator==(const PositionSplit&, const PositionSplit&) = default;
};

class Ladder {
 public:
  explicit Ladder(SequencePtr q) : q_(std::move(q)) {
    if (!q_) throw Error(ErrorKind::InvalidArgument, "ladder: null sequence");
    if (!q_->infinite_in_limit())
      throw Error(ErrorKind::NotInfiniteInLimit, q_->name() + " is not infinite in limit");
    L_.push_back(0);
    S_.push_back(0);
    l_.push_back(0);  // unused slot so l_[i] is l_i
  }

  const BasicSequence& sequence() const { return *q_; }
  const SequencePtr& sequence_ptr() const { return q_; }

  Position nu(std::uint64_t j) const {
    std::lock_guard lock(mu_);
    return nu_locked(j);
  }

  std::uint64_t l(std::uint64_t i) const {
    if (i == 0) throw Error(ErrorKind::InvalidArgument, "ladder: l_i needs i >= 1");
    std::lock_guard lock(mu_);
    extend_to_index(i);
    return l_[i];
  }

  /// L_i = sum_{j<=i} j l_j, with L_0 = 0.
  std::uint64_t L(std::uint64_t i) const {
    std::lock_guard lock(mu_);
    extend_to_index(i);
    return L_[i];
  }

  Position phi(const BoxIndex& idx) const {
    if (idx.a == 0 || idx.b == 0 || idx.c == 0 || idx.c > idx.a)
      throw Error(ErrorKind::IndexOutOfSQ, "(a,b,c) outside S_Q");
    std::lock_guard lock(mu_);
    extend_to_index(idx.a);
    if (idx.b > l_[idx.a]) throw Error(ErrorKind::IndexOutOfSQ, "b exceeds l_a");
    return L_[idx.a - 1] + (idx.b - 1) * idx.a + idx.c;
  }

  BoxIndex phi_inv(Position n) const {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "positions start at 1");
    std::lock_guard lock(mu_);
    std::uint64_t a = locate(n);
    std::uint64_t m = n - L_[a - 1];
    std::uint64_t b = (m + a - 1) / a;
    return {a, b, m - (b - 1) * a};
  }

  PositionSplit split(Position n) const {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "positions start at 1");
    std::lock_guard lock(mu_);
    std::uint64_t i = locate(n) - 1;
    std::uint64_t m = n - L_[i];
    return {i, m, m / (i + 1), m % (i + 1)};
  }

  /// A(k) = p for l_1 + ... + l_{p-1} < k <= l_1 + ... + l_p.
  std::uint64_t level_A(std::uint64_t k) const {
    if (k == 0) throw Error(ErrorKind::InvalidArgument, "levels start at 1");
    std::lock_guard lock(mu_);
    return locate_level(k);
  }

  /// gamma(k) = A(1) + ... + A(k): the last position of the k-th box.
  Position level_gamma(std::uint64_t k) const {
    if (k == 0) throw Error(ErrorKind::InvalidArgument, "levels start at 1");
    std::lock_guard lock(mu_);
    std::uint64_t p = locate_level(k);
    return L_[p - 1] + (k - S_[p - 1]) * p;
  }

  /// True when l_1 = ... = l_i = 1.
  bool all_ones_through(std::uint64_t i) const {
    std::lock_guard lock(mu_);
    extend_to_index(i);
    return std::all_of(l_.begin() + 1, l_.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                       [](std::uint64_t v) { return v == 1; });
  }

 private:
  Position nu_locked(std::uint64_t j) const {
    if (j == 0) throw Error(ErrorKind::InvalidArgument, "nu: j must be >= 1");
    while (nu_.size() < j) nu_.push_back(cantor::nu(*q_, nu_.size() + 1));
    return nu_[j - 1];
  }

  void extend_to_index(std::uint64_t i) const {
    while (l_.size() <= i) {
      const std::uint64_t idx = l_.size();
      const std::uint64_t target = nu_locked(idx + 1) - 1;  // need L_idx >= nu_{idx+1} - 1
      const std::uint64_t prev = L_[idx - 1];
      std::uint64_t k = target > prev ? (target - prev + idx - 1) / idx : 0;
      k = std::max<std::uint64_t>(k, 1);
      l_.push_back(k);
      L_.push_back(prev + idx * k);
      S_.push_back(S_[idx - 1] + k);
    }
  }

  /// Box length a with L_{a-1} < n <= L_a.
  std::uint64_t locate(Position n) const {
    while (L_.back() < n) extend_to_index(l_.size());
    auto it = std::lower_bound(L_.begin(), L_.end(), n);
    return static_cast<std::uint64_t>(it - L_.begin());
  }

  std::uint64_t locate_level(std::uint64_t k) const {
    while (S_.back() < k) extend_to_index(l_.size());
    auto it = std::lower_bound(S_.begin(), S_.end(), k);
    return static_cast<std::uint64_t>(it - S_.begin());
  }

  SequencePtr q_;
  mutable std::mutex mu_;
  mutable std::vector<Position> nu_;
  mutable std::vector<std::uint64_t> l_;
  mutable std::vector<std::uint64_t> L_;
  mutable std::vector<std::uint64_t> S_;  // S_p = l_1 + ... + l_p
};

using LadderPtr = std::shared_ptr<const Ladder>;

inline LadderPtr make_ladder(SequencePtr q) { return std::make_shared<Ladder>(std::move(q)); }

inline std::uint64_t ladder_l(const Ladder& lad, std::uint64_t i) { return lad.l(i); }
inline Position phi(const Ladder& lad, const BoxIndex& idx) { return lad.phi(idx); }
inline BoxIndex phi_inv(const Ladder& lad, Position n) { return lad.phi_inv(n); }
inline PositionSplit position_split(const Ladder& lad, Position n) { return lad.split(n); }
inline std::uint64_t level_A(const Ladder& lad, std::uint64_t k) { return lad.level_A(k); }
inline Position level_gamma(const Ladder& lad, std::uint64_t k) { return lad.level_gamma(k); }

}  // namespace cantor
