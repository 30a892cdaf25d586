#include "aim/exponent.hpp"

#include "aim/error.hpp"

#include <cmath>
#include <numeric>

namespace aim {

Exponent::Exponent(std::int64_t num, std::int64_t den) {
  if (den == 0) throw DomainError("exponent with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

Exponent Exponent::from_double(double v, std::int64_t max_den) {
  for (std::int64_t d = 1; d <= max_den; ++d) {
    const double n = std::round(v * static_cast<double>(d));
    if (std::abs(n / static_cast<double>(d) - v) < 1e-12) {
      return Exponent(static_cast<std::int64_t>(n), d);
    }
  }
  throw DomainError("exponent " + std::to_string(v) +
                    " is not a rational with denominator <= " + std::to_string(max_den));
}

Exponent operator+(const Exponent& a, const Exponent& b) {
  const std::int64_t l = std::lcm(a.den_, b.den_);
  return Exponent(a.num_ * (l / a.den_) + b.num_ * (l / b.den_), l);
}

Exponent operator-(const Exponent& a, const Exponent& b) { return a + (-b); }

std::strong_ordering operator<=>(const Exponent& a, const Exponent& b) {
  // denominators are positive, so cross-multiplication preserves order
  return a.num_ * b.den_ <=> b.num_ * a.den_;
}

std::string Exponent::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace aim
