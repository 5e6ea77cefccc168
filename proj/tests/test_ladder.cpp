#include <catch2/catch_amalgamated.hpp>

#include "cantor.hpp"
#include "oracles.hpp"

using namespace cantor;

namespace {

oracle::Terms terms_of(const SequencePtr& q) {
  return [q](std::uint64_t n) { return q->term(n); };
}

}  // namespace

TEST_CASE("ladder l_i on reference families", "[ladder]") {
  auto ref2 = make_ladder(parse_family("ref2"));
  for (std::uint64_t i = 1; i <= 5; ++i) CHECK(ref2->l(i) == 1);
  auto slow3 = make_ladder(parse_family("slow:3"));
  CHECK(slow3->l(1) == 3);
  CHECK(slow3->l(2) == 2);
  CHECK(slow3->l(3) == 1);
  CHECK(slow3->l(4) == 1);
  auto geom8 = make_ladder(parse_family("geom:8"));
  for (std::uint64_t i = 1; i <= 20; ++i) {
    CHECK(geom8->l(i) == 1);
    CHECK(geom8->L(i) == tau(i));
  }
}

TEST_CASE("ladder matches the literal recursion", "[ladder][property]") {
  for (const char* spec : {"ref2", "slow:3", "slow:7", "geom:8", "poly:2,1", "qalpha:1/2"}) {
    INFO(spec);
    auto q = parse_family(spec);
    auto lad = make_ladder(q);
    auto ref = oracle::ladder_l(terms_of(q), 60);
    for (std::uint64_t i = 1; i <= 60; ++i) CHECK(lad->l(i) == ref[i]);
  }
}

TEST_CASE("ladder defining and minimality properties", "[ladder][property]") {
  for (const char* spec : {"ref2", "slow:3", "slow:5", "geom:8", "poly:2,1", "poly:3,3"}) {
    INFO(spec);
    auto lad = make_ladder(parse_family(spec));
    for (std::uint64_t i = 1; i <= 300; ++i) {
      CHECK(lad->L(i) + 1 >= lad->nu(i + 1));
      CHECK(lad->L(i) - lad->L(i - 1) == i * lad->l(i));
      if (lad->l(i) >= 2 && i >= 2) CHECK(lad->L(i - 1) + i * (lad->l(i) - 1) + 1 < lad->nu(i + 1));
    }
  }
}

TEST_CASE("l_i is bounded by ceil(M+1) once nu gaps are at most M i", "[ladder][property]") {
  for (const char* spec : {"ref2", "slow:2", "slow:3", "poly:2,1"}) {
    INFO(spec);
    auto lad = make_ladder(parse_family(spec));
    // smallest integer M with nu_{i+1} - nu_i <= M i for 2 <= i <= 400
    std::uint64_t M = 0;
    for (std::uint64_t i = 2; i <= 400; ++i) {
      auto gap = lad->nu(i + 1) - lad->nu(i);
      M = std::max<std::uint64_t>(M, (gap + i - 1) / i);
    }
    for (std::uint64_t i = 3; i <= 400; ++i) CHECK(lad->l(i) <= M + 1);
  }
}

TEST_CASE("phi and its inverse", "[ladder]") {
  auto ref2 = make_ladder(parse_family("ref2"));
  CHECK(ref2->phi({1, 1, 1}) == 1);
  CHECK(ref2->phi({3, 1, 2}) == 5);
  CHECK(ref2->phi_inv(5) == BoxIndex{3, 1, 2});
  CHECK(ref2->phi_inv(1) == BoxIndex{1, 1, 1});
  auto slow3 = make_ladder(parse_family("slow:3"));
  CHECK(slow3->phi({1, 2, 1}) == 2);
  CHECK(slow3->phi_inv(2) == BoxIndex{1, 2, 1});
  CHECK_THROWS_AS(ref2->phi({2, 2, 1}), Error);
  CHECK_THROWS_AS(ref2->phi({2, 1, 3}), Error);
  try {
    ref2->phi({2, 1, 3});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IndexOutOfSQ);
  }
}

TEST_CASE("phi enumerates positions in box order", "[ladder][property]") {
  for (const char* spec : {"ref2", "slow:3", "geom:8"}) {
    INFO(spec);
    auto q = parse_family(spec);
    auto lad = make_ladder(q);
    auto boxes = oracle::box_order(oracle::ladder_l(terms_of(q), 200), 20000);
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      BoxIndex idx{boxes[k].a, boxes[k].b, boxes[k].c};
      CHECK(lad->phi(idx) == k + 1);
      CHECK(lad->phi_inv(k + 1) == idx);
    }
  }
}

TEST_CASE("position split", "[ladder]") {
  auto ref2 = make_ladder(parse_family("ref2"));
  CHECK(ref2->split(5) == PositionSplit{2, 2, 0, 2});
  CHECK(ref2->split(6) == PositionSplit{2, 3, 1, 0});
  CHECK(ref2->split(1) == PositionSplit{0, 1, 1, 0});
  for (const char* spec : {"ref2", "slow:3"}) {
    auto lad = make_ladder(parse_family(spec));
    for (Position n = 1; n <= 5000; ++n) {
      auto s = lad->split(n);
      CHECK(lad->L(s.i) < n);
      CHECK(n <= lad->L(s.i + 1));
      CHECK(s.beta < s.i + 1);
      CHECK(s.alpha <= lad->l(s.i + 1));
      CHECK(lad->L(s.i) + s.alpha * (s.i + 1) + s.beta == n);
    }
  }
}

TEST_CASE("levels A(k) and gamma(k)", "[ladder]") {
  auto ref2 = make_ladder(parse_family("ref2"));
  for (std::uint64_t k = 1; k <= 100; ++k) {
    CHECK(ref2->level_A(k) == k);
    CHECK(ref2->level_gamma(k) == tau(k));
  }
  CHECK(ref2->level_gamma(4) == 10);
  auto slow3 = make_ladder(parse_family("slow:3"));
  CHECK(slow3->level_A(1) == 1);
  CHECK(slow3->level_A(3) == 1);
  CHECK(slow3->level_A(4) == 2);
  CHECK(slow3->level_A(5) == 2);
  CHECK(slow3->level_gamma(5) == 7);
  // gamma(k) is the last position of a box
  for (std::uint64_t k = 1; k <= 200; ++k) {
    auto box = slow3->phi_inv(slow3->level_gamma(k));
    CHECK(box.c == box.a);
    CHECK(box.a == slow3->level_A(k));
  }
}

TEST_CASE("families that are not infinite in limit are rejected", "[ladder]") {
  try {
    make_ladder(parse_family("const:3"));
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotInfiniteInLimit);
  }
}
