#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "cantor.hpp"
#include "oracles.hpp"

using namespace cantor;
using Catch::Approx;

TEST_CASE("triangular numbers", "[sequences]") {
  CHECK(tau(0) == 0);
  CHECK(tau(4) == 10);
  CHECK(tau(130) == 8515);
  for (std::uint64_t n = 0; n < 5000; ++n) {
    auto k = triangular_root(n);
    CHECK(tau(k) <= n);
    CHECK(tau(k + 1) > n);
  }
}

TEST_CASE("nu on reference and geometric families", "[sequences]") {
  auto ref2 = parse_family("ref2");
  auto geom8 = parse_family("geom:8");
  CHECK(nu(*ref2, 4) == 4);
  CHECK(nu(*geom8, 2) == 1);
  CHECK(nu(*geom8, 3) == 2);
  // ceil(log_8(2 j^2)) for j >= 2
  for (std::uint64_t j = 2; j <= 200; ++j) {
    auto expect = static_cast<Position>(std::ceil(std::log(2.0 * j * j) / std::log(8.0) - 1e-12));
    CHECK(nu(*geom8, j) == expect);
  }
}

TEST_CASE("threshold oracle is correct on sampled tails", "[sequences][property]") {
  for (const char* spec : {"ref2", "slow:3", "geom:8", "poly:3,2", "qalpha:1/2", "qalpha:1/4"}) {
    auto q = parse_family(spec);
    INFO(spec);
    for (std::uint64_t j = 1; j <= 50; ++j) {
      Integer bound = 2 * from_u64(j) * from_u64(j);
      Position n = nu(*q, j);
      if (n > 1) CHECK(q->term(n - 1) < bound);
      for (Position m = n; m <= n + 200 && q->materializable(m); ++m) CHECK(q->term(m) >= bound);
    }
  }
}

TEST_CASE("log terms agree with exact terms", "[sequences][property]") {
  for (const char* spec : {"ref2", "slow:3", "geom:8", "tower", "qalpha:1/2", "poly:5,3"}) {
    auto q = parse_family(spec);
    INFO(spec);
    for (Position n = 1; n <= 40; ++n) {
      if (!q->materializable(n)) continue;
      double lt = q->log_term(n);
      CHECK(std::abs(lt - ln(q->term(n))) <= 1e-9 * std::max(1.0, lt));
      CHECK(q->term(n) >= 2);
    }
  }
}

TEST_CASE("tower family is log-only past q_5", "[sequences]") {
  auto q = parse_family("tower");
  CHECK(q->term(4) == 65536);
  CHECK(q->materializable(5));
  CHECK_FALSE(q->materializable(6));
  CHECK_THROWS_AS(q->term(6), Error);
  Magnitude m6 = q->log_magnitude(6);
  CHECK(m6.height() == 1);
  // ln q_6 = 2^65536 ln 2, so ln ln q_6 = 65536 ln 2 + ln ln 2.
  CHECK(m6.value() == Approx(65536 * std::numbers::ln2 + std::log(std::numbers::ln2)));
  CHECK(q->log_magnitude(7) > m6);
}

TEST_CASE("partial sums Q_n^(k)", "[sequences]") {
  auto ref2 = parse_family("ref2");
  CHECK(q_partial(*ref2, 1, 1) == Rational(1, 2));
  CHECK(q_partial(*ref2, 5, 1) == Rational(5269, 7200));
  auto c2 = parse_family("const:2");
  CHECK(q_partial(*c2, 6, 1) == 3);
  Rational prev = 0;
  for (Position n = 1; n <= 60; ++n) {
    Rational v = q_partial(*ref2, n, 2);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("Q_n^(1) on the reference family stays below pi^2/12", "[sequences][property]") {
  auto ref2 = parse_family("ref2");
  // pi^2/12 < 0.82246703342411321824 + 1e-20
  const Rational limit = parse_rational("82246703342411321825/100000000000000000000");
  for (Position n : {10u, 100u, 1000u, 5000u}) CHECK(q_partial(*ref2, n, 1) < limit + Rational(1, 1000000000));
}

TEST_CASE("Q_alpha terms", "[sequences]") {
  auto fam = qalpha_build(Rational(1, 2), 12);
  CHECK(*fam.exact(2) == 8);
  CHECK(*fam.exact(3) == 18);
  CHECK(*fam.exact(10) == Integer("67421129932800"));
  for (auto [p, q] : {std::pair{1ul, 2ul}, {1ul, 4ul}, {3ul, 4ul}, {2ul, 3ul}}) {
    auto f = qalpha_build(Rational(p, q), 36);
    auto ref = oracle::qalpha_terms(p, q, 36);
    for (Position n = 1; n <= 36; ++n) {
      INFO(p << "/" << q << " n=" << n);
      REQUIRE(f.exact(n));
      CHECK(*f.exact(n) == ref[n - 1]);
      CHECK(*f.exact(n) >= 2 * from_u64(n) * from_u64(n));
    }
  }
}

TEST_CASE("Q_alpha log-only tail keeps q >= 2n^2", "[sequences]") {
  auto fam = qalpha_build(Rational(1, 4), tau(40));
  for (Position n = 1; n <= tau(40); ++n) CHECK(fam.log_term(n) >= std::log(2.0 * n * n) - 1e-12);
  CHECK_FALSE(fam.exact(tau(40)).has_value());
}

TEST_CASE("V_k brackets", "[sequences]") {
  auto fam = qalpha_build(Rational(1, 2), tau(6));
  auto r2 = qident_check(fam, 2);
  CHECK(r2.holds);
  CHECK(r2.log_v == Approx(std::log(18.0)));
  CHECK(r2.upper == Approx(4 * 2 * std::log(2.0)));
  auto r4 = qident_check(fam, 4);
  CHECK(r4.holds);
  CHECK(r4.lower == Approx(13.04).margin(0.01));
  CHECK(r4.log_v == Approx(31.84).margin(0.01));
  CHECK(r4.upper == Approx(35.22).margin(0.01));
  CHECK_THROWS_AS(qident_check(fam, 3), Error);
}

TEST_CASE("family specs", "[sequences]") {
  CHECK(parse_family("ref2")->term(3) == 18);
  CHECK(parse_family("poly:3,2")->term(2) == 12);
  CHECK(parse_family("slow:3")->term(4) == 8);
  CHECK(parse_family("geom:8")->term(2) == 64);
  CHECK_FALSE(parse_family("const:5")->infinite_in_limit());
  for (const char* bad : {"nope", "poly:3", "slow:x", "qalpha:3/2", "geom:1", "table:/nonexistent"}) {
    INFO(bad);
    try {
      parse_family(bad);
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
    }
  }
}

TEST_CASE("table family", "[sequences]") {
  const char* path = "table_family_test.txt";
  {
    std::ofstream out(path);
    out << "# q values\n5\n3\n8\n18\n32\n50\n72\n";
  }
  auto q = parse_family(std::string("table:") + path + ",monotone-after=2");
  CHECK(q->term(1) == 5);
  CHECK(q->threshold(18) == 4);
  CHECK(q->threshold(4) == 3);
  CHECK_THROWS_AS(q->threshold(100), Error);
  CHECK_THROWS_AS(parse_family(std::string("table:") + path), Error);
  CHECK_THROWS_AS(parse_family(std::string("table:") + path + ",monotone-after=1"), Error);
  std::remove(path);
}

TEST_CASE("magnitude arithmetic", "[sequences]") {
  auto a = Magnitude::from_double(1e200);
  auto b = a + a;
  CHECK(b.to_double() == Approx(2e200));
  auto big = Magnitude::from_double(1e299) + Magnitude::from_double(1e299) + Magnitude::from_double(9e299);
  CHECK(big.height() == 1);
  CHECK(big.value() == Approx(std::log(1.1e300)));
  CHECK(magnitude_ratio(Magnitude::from_double(1.0), big) == Approx(1.0 / 1.1e300));
  auto t = Magnitude::tower(2, 1000.0);
  CHECK(t.log().height() == 1);
  CHECK(t > big);
  CHECK(magnitude_ratio(big, t) == 0.0);
}
