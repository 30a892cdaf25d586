#include "aim/symfunc.hpp"

#include <numeric>

#include "aim/error.hpp"

namespace aim {

SymFunc SymFunc::term(const Exponent& p, EPoly c) {
  SymFunc f;
  if (!c.is_zero()) f.terms_.emplace(p, std::move(c));
  return f;
}

SymFunc SymFunc::term(const Exponent& p, const BigReal& c) {
  return term(p, EPoly::constant(c));
}

EPoly SymFunc::coeff(const Exponent& p) const {
  auto it = terms_.find(p);
  return it == terms_.end() ? EPoly{} : it->second;
}

void SymFunc::add_term(const Exponent& p, const EPoly& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace(p, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

BigReal SymFunc::max_abs() const {
  BigReal m(0);
  for (const auto& [p, c] : terms_) {
    BigReal t = c.max_abs();
    if (t > m) m = t;
  }
  return m;
}

void SymFunc::prune(int digits) {
  const BigReal cutoff = max_abs() * pow10_neg(2 * digits);
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (it->second.max_abs() < cutoff) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
}

SymFunc& SymFunc::operator*=(const BigReal& s) {
  if (s == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [p, c] : terms_) c *= s;
  return *this;
}

SymFunc operator+(const SymFunc& a, const SymFunc& b) {
  SymFunc r = a;
  for (const auto& [p, c] : b.terms_) r.add_term(p, c);
  return r;
}

SymFunc operator*(const SymFunc& a, const SymFunc& b) {
  SymFunc r;
  for (const auto& [pa, ca] : a.terms_) {
    for (const auto& [pb, cb] : b.terms_) r.add_term(pa + pb, ca * cb);
  }
  return r;
}

SymFunc sf_add(const SymFunc& a, const SymFunc& b) { return a + b; }
SymFunc sf_mul(const SymFunc& a, const SymFunc& b) { return a * b; }

SymFunc sf_diff(const SymFunc& a) {
  SymFunc r;
  for (const auto& [p, c] : a.terms()) {
    if (p.is_zero()) continue;
    const BigReal factor = BigReal(p.num()) / p.den();
    r.add_term(p - Exponent(1), c * factor);
  }
  return r;
}

BigReal rational_pow(const BigReal& r0, const Exponent& p) {
  if (p.is_integer()) {
    const long n = static_cast<long>(p.num());
    BigReal out;
    mpfr_pow_si(out.backend().data(), r0.backend().data(), n, MPFR_RNDN);
    return out;
  }
  return exp(log(r0) * (BigReal(p.num()) / p.den()));
}

EPoly sf_eval(const SymFunc& a, const BigReal& r0) {
  if (!(r0 > 0)) throw DomainError("SymFunc evaluated at r <= 0");
  // every power as an integer power of r0^(1/D), D the common denominator
  std::int64_t d = 1;
  for (const auto& term : a.terms()) d = std::lcm(d, term.first.den());
  const BigReal root = d == 1 ? r0 : rational_pow(r0, Exponent(1, d));
  EPoly out;
  BigReal w;
  for (const auto& [p, c] : a.terms()) {
    const long k = static_cast<long>(p.num() * (d / p.den()));
    mpfr_pow_si(w.backend().data(), root.backend().data(), k, MPFR_RNDN);
    out.add_scaled(w, c);
  }
  return out;
}

}  // namespace aim
