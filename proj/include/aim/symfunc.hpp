#pragma once

#include "aim/epoly.hpp"
#include "aim/exponent.hpp"

#include <map>

namespace aim {

/// Finite sum  sum_p c_p(E) * r^p  with exact rational exponents p.
/// Terms are merged by exponent and no stored coefficient is identically zero.
class SymFunc {
 public:
  using TermMap = std::map<Exponent, EPoly>;

  SymFunc() = default;

  /// Single term c * r^p.
  static SymFunc term(const Exponent& p, EPoly c);
  static SymFunc term(const Exponent& p, const BigReal& c);
  static SymFunc constant(EPoly c) { return term(Exponent(0), std::move(c)); }

  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Coefficient of r^p (zero polynomial when absent).
  EPoly coeff(const Exponent& p) const;

  /// Adds c * r^p, merging with an existing term.
  void add_term(const Exponent& p, const EPoly& c);

  /// Drops terms whose every coefficient is below 10^(-2*digits) relative to
  /// the largest coefficient of the whole function.
  void prune(int digits);

  BigReal max_abs() const;

  SymFunc& operator*=(const BigReal& s);

  friend SymFunc operator+(const SymFunc& a, const SymFunc& b);
  friend SymFunc operator*(const SymFunc& a, const SymFunc& b);

 private:
  TermMap terms_;
};

SymFunc sf_add(const SymFunc& a, const SymFunc& b);
SymFunc sf_mul(const SymFunc& a, const SymFunc& b);

/// d/dr, termwise.
SymFunc sf_diff(const SymFunc& a);

/// sum_p c_p(E) * r0^p. Throws DomainError unless r0 > 0.
EPoly sf_eval(const SymFunc& a, const BigReal& r0);

/// r0^p at the current precision; integer p by repeated squaring, otherwise
/// exp(p ln r0).
BigReal rational_pow(const BigReal& r0, const Exponent& p);

}  // namespace aim
