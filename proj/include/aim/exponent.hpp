#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace aim {

/// Exact rational power of r, kept in lowest terms with a positive
/// denominator.
class Exponent {
 public:
  constexpr Exponent() = default;
  Exponent(std::int64_t num, std::int64_t den = 1);

  /// Nearest rational with denominator <= max_den; throws DomainError when
  /// the value is not within 1e-12 of such a rational.
  static Exponent from_double(double v, std::int64_t max_den = 1000);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }

  friend Exponent operator+(const Exponent& a, const Exponent& b);
  friend Exponent operator-(const Exponent& a, const Exponent& b);
  friend Exponent operator-(const Exponent& a) { return Exponent(-a.num_, a.den_); }

  friend bool operator==(const Exponent&, const Exponent&) = default;
  friend std::strong_ordering operator<=>(const Exponent& a, const Exponent& b);

  std::string str() const;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace aim
