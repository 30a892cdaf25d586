#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aim/bigreal.hpp"
#include "aim/epoly.hpp"
#include "aim/error.hpp"
#include "aim/exponent.hpp"
#include "aim/roots.hpp"
#include "aim/symfunc.hpp"

#include <cmath>

using namespace aim;

namespace {

bool near(const BigReal& a, const BigReal& b, const BigReal& tol) { return abs(a - b) <= tol; }

bool same_poly(const EPoly& a, const EPoly& b, double tol = 1e-25) {
  const int deg = std::max(a.degree(), b.degree());
  for (int k = 0; k <= deg; ++k) {
    if (!near(a.coeff(k), b.coeff(k), BigReal(tol))) return false;
  }
  return true;
}

SymFunc two_r_minus_two_over_r() {
  SymFunc f = SymFunc::term(Exponent(1), BigReal(2));
  f.add_term(Exponent(-1), EPoly{-2});
  return f;
}

}  // namespace

TEST_CASE("precision context nests and restores") {
  PrecisionContext outer(30);
  CHECK(PrecisionContext::current() == 30);
  {
    PrecisionContext inner(80);
    CHECK(PrecisionContext::current() == 80);
    const BigReal third = BigReal(1) / 3;
    CHECK(to_string(third, 40).substr(0, 42) == "0.3333333333333333333333333333333333333333");
  }
  CHECK(PrecisionContext::current() == 30);
}

TEST_CASE("decimal parsing is not routed through double") {
  PrecisionContext ctx(50);
  const BigReal tenth = make_real("0.1");
  CHECK(abs(tenth * 10 - 1) < pow10_neg(48));
  CHECK(abs(make_real(0.1) * 10 - 1) > pow10_neg(20));
}

TEST_CASE("exponent arithmetic stays exact") {
  const Exponent half(1, 2);
  const Exponent third(1, 3);
  CHECK(half + third == Exponent(5, 6));
  CHECK(half - half == Exponent(0));
  CHECK(Exponent(4, -8) == Exponent(-1, 2));
  CHECK(Exponent(-3, 2) < Exponent(-1, 1));
  CHECK(Exponent(6, 3).is_integer());
  CHECK(Exponent::from_double(-1.5) == Exponent(-3, 2));
  CHECK_THROWS_AS(Exponent::from_double(std::sqrt(2.0), 100), DomainError);
  CHECK(Exponent(-3, 2).str() == "-3/2");
}

TEST_CASE("epoly basics") {
  PrecisionContext ctx(40);
  const EPoly a{3, -1};  // 3 - E
  CHECK(a.degree() == 1);
  CHECK((a - a).is_zero());
  CHECK((a - a).degree() == -1);
  CHECK(same_poly(a * a, EPoly{9, -6, 1}));
  CHECK(a(BigReal(3)) == 0);
  CHECK(a.derivative_at(BigReal(7)) == -1);

  EPoly acc;
  acc.add_product(a, a);
  acc.add_scaled_shifted(BigReal(2), EPoly{1});
  CHECK(same_poly(acc, EPoly{9, -4, 1}));
  CHECK(!acc.has_non_finite());
}

TEST_CASE("sf_add") {
  PrecisionContext ctx(40);
  SUBCASE("additive inverse cancels to the empty map") {
    SymFunc a = SymFunc::term(Exponent(1), BigReal(2));
    SymFunc b = SymFunc::term(Exponent(1), BigReal(-2));
    CHECK(sf_add(a, b).is_zero());
  }
  SUBCASE("disjoint exponents are kept apart") {
    const SymFunc s = sf_add(SymFunc::term(Exponent(2), BigReal(1)), SymFunc::term(Exponent(-1), BigReal(1)));
    CHECK(s.size() == 2);
    CHECK(same_poly(s.coeff(Exponent(2)), EPoly{1}));
    CHECK(same_poly(s.coeff(Exponent(-1)), EPoly{1}));
  }
  SUBCASE("doubling") {
    const SymFunc f = two_r_minus_two_over_r();
    const SymFunc s = sf_add(f, f);
    CHECK(same_poly(s.coeff(Exponent(1)), EPoly{4}));
    CHECK(same_poly(s.coeff(Exponent(-1)), EPoly{-4}));
  }
}

TEST_CASE("sf_mul") {
  PrecisionContext ctx(40);
  SUBCASE("r times 1/r") {
    const SymFunc p = sf_mul(SymFunc::term(Exponent(1), BigReal(1)), SymFunc::term(Exponent(-1), BigReal(1)));
    REQUIRE(p.size() == 1);
    CHECK(same_poly(p.coeff(Exponent(0)), EPoly{1}));
  }
  SUBCASE("square of 2r - 2/r") {
    const SymFunc f = two_r_minus_two_over_r();
    const SymFunc p = sf_mul(f, f);
    CHECK(p.size() == 3);
    CHECK(same_poly(p.coeff(Exponent(2)), EPoly{4}));
    CHECK(same_poly(p.coeff(Exponent(0)), EPoly{-8}));
    CHECK(same_poly(p.coeff(Exponent(-2)), EPoly{4}));
    // both sides at r = 2: (4 - 1)^2 = 16 - 8 + 1 = 9
    CHECK(same_poly(sf_eval(p, BigReal(2)), EPoly{9}));
  }
  SUBCASE("scalar polynomial square") {
    const SymFunc c = SymFunc::constant(EPoly{3, -1});
    CHECK(same_poly(sf_mul(c, c).coeff(Exponent(0)), EPoly{9, -6, 1}));
  }
  SUBCASE("rational exponents add") {
    const SymFunc p = sf_mul(SymFunc::term(Exponent(-3, 2), BigReal(1)), SymFunc::term(Exponent(1, 3), BigReal(2)));
    CHECK(same_poly(p.coeff(Exponent(-7, 6)), EPoly{2}));
  }
}

TEST_CASE("sf_diff") {
  PrecisionContext ctx(40);
  const SymFunc d = sf_diff(SymFunc::term(Exponent(5, 2), BigReal(1)));
  CHECK(same_poly(d.coeff(Exponent(3, 2)), EPoly{2.5}));

  const SymFunc g = sf_diff(two_r_minus_two_over_r());
  CHECK(same_poly(g.coeff(Exponent(0)), EPoly{2}));
  CHECK(same_poly(g.coeff(Exponent(-2)), EPoly{2}));

  CHECK(sf_diff(SymFunc::constant(EPoly{3, -1})).is_zero());
}

TEST_CASE("sf_eval") {
  PrecisionContext ctx(40);
  CHECK(sf_eval(two_r_minus_two_over_r(), BigReal(1)).is_zero());
  CHECK(same_poly(sf_eval(SymFunc::constant(EPoly{3, -1}), BigReal(5)), EPoly{3, -1}));

  SymFunc f = SymFunc::term(Exponent(2), BigReal(4));
  f.add_term(Exponent(-2), EPoly{6});
  f.add_term(Exponent(0), EPoly{-3, -1});
  CHECK(same_poly(sf_eval(f, BigReal(2)), EPoly{14.5, -1}));

  SymFunc frac = SymFunc::term(Exponent(-3, 2), BigReal(1));
  frac.add_term(Exponent(1, 3), EPoly{1});
  const BigReal r(3);
  const BigReal expect = pow(r, BigReal(-1.5)) + cbrt(r);
  CHECK(near(sf_eval(frac, r).coeff(0), expect, pow10_neg(37)));

  CHECK_THROWS_AS(sf_eval(f, BigReal(0)), DomainError);
  CHECK_THROWS_AS(sf_eval(f, BigReal(-1)), DomainError);
}

TEST_CASE("rational_pow against exp/log") {
  PrecisionContext ctx(60);
  const BigReal r = make_real("2.7");
  for (const Exponent p : {Exponent(7), Exponent(-5), Exponent(3, 4), Exponent(-7, 6)}) {
    const BigReal ref = exp(BigReal(p.num()) / p.den() * log(r));
    CHECK(near(rational_pow(r, p), ref, pow10_neg(55)));
  }
}

TEST_CASE("prune drops negligible terms") {
  PrecisionContext ctx(20);
  SymFunc f = SymFunc::term(Exponent(1), BigReal(1));
  f.add_term(Exponent(-3), EPoly::constant(pow10_neg(50)));
  f.prune(20);
  CHECK(f.size() == 1);
}

TEST_CASE("epoly_real_roots") {
  PrecisionContext ctx(40);
  const BigReal lo(0), hi(10);
  SUBCASE("linear") {
    const auto r = epoly_real_roots(EPoly{-3, 1}, lo, hi, 100);
    REQUIRE(r.size() == 1);
    CHECK(near(r[0], BigReal(3), pow10_neg(35)));
  }
  SUBCASE("exact oscillator pair") {
    const auto r = epoly_real_roots(EPoly{3, -1} * EPoly{7, -1}, lo, hi, 100);
    REQUIRE(r.size() == 2);
    CHECK(near(r[0], BigReal(3), pow10_neg(35)));
    CHECK(near(r[1], BigReal(7), pow10_neg(35)));
  }
  SUBCASE("spurious companion") {
    const auto r = epoly_real_roots(EPoly{45.5, -13.5, 1}, lo, hi, 400);
    REQUIRE(r.size() == 2);
    CHECK(near(r[0], BigReal(6.5), pow10_neg(35)));
    CHECK(near(r[1], BigReal(7), pow10_neg(35)));
  }
  SUBCASE("non-finite coefficients") {
    const EPoly bad(std::vector<BigReal>{BigReal(1), std::numeric_limits<BigReal>::quiet_NaN()});
    CHECK_THROWS_AS(epoly_real_roots(bad, lo, hi, 100), NumericError);
  }
  SUBCASE("nearest root in window") {
    const EPoly p = EPoly{45.5, -13.5, 1};
    const auto r = nearest_root(p, BigReal(7.2), BigReal(0.4));
    REQUIRE(r);
    CHECK(near(*r, BigReal(7), pow10_neg(35)));
    CHECK(!nearest_root(p, BigReal(2), BigReal(1)));
  }
}
