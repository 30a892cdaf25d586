#pragma once

#include "aim/bigreal.hpp"

#include <initializer_list>
#include <vector>

namespace aim {

/// Dense polynomial in the energy E with arbitrary-precision coefficients.
/// coeff(k) multiplies E^k. Trailing zeros are always trimmed, so the zero
/// polynomial has no coefficients and degree() == -1.
class EPoly {
 public:
  EPoly() = default;
  explicit EPoly(std::vector<BigReal> coeffs);
  EPoly(std::initializer_list<double> coeffs);

  static EPoly constant(const BigReal& c);
  /// a + b*E
  static EPoly linear(const BigReal& a, const BigReal& b);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  std::size_t size() const { return coeffs_.size(); }

  /// Zero beyond the degree.
  BigReal coeff(int k) const;
  const std::vector<BigReal>& coeffs() const { return coeffs_; }

  BigReal operator()(const BigReal& e) const;
  BigReal derivative_at(const BigReal& e) const;

  /// Largest |coefficient|; zero for the zero polynomial.
  BigReal max_abs() const;

  EPoly& operator+=(const EPoly& o);
  EPoly& operator-=(const EPoly& o);
  EPoly& operator*=(const BigReal& s);

  /// this += s * x (no temporaries; used by the recursion hot loops).
  void add_scaled(const BigReal& s, const EPoly& x);
  /// this += s * E * x
  void add_scaled_shifted(const BigReal& s, const EPoly& x);
  /// this += a * b
  void add_product(const EPoly& a, const EPoly& b);

  friend EPoly operator+(EPoly a, const EPoly& b) { return a += b; }
  friend EPoly operator-(EPoly a, const EPoly& b) { return a -= b; }
  friend EPoly operator*(EPoly a, const BigReal& s) { return a *= s; }
  friend EPoly operator*(const BigReal& s, EPoly a) { return a *= s; }
  friend EPoly operator*(const EPoly& a, const EPoly& b);
  EPoly operator-() const;

  friend bool operator==(const EPoly& a, const EPoly& b) {
    return a.coeffs_ == b.coeffs_;
  }

  /// True when any coefficient is NaN or infinite.
  bool has_non_finite() const;

 private:
  void trim();

  std::vector<BigReal> coeffs_;
};

}  // namespace aim
