#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <string>
#include <string_view>

namespace aim {

/// Arbitrary-precision real. Precision comes from the thread's current
/// PrecisionContext; values created inside a context carry its precision.
using BigReal = boost::multiprecision::mpfr_float;

inline constexpr int kMinDigits = 10;

/// Scoped working precision (decimal digits) for the current thread.
/// Restores the previous precision on destruction. Round-to-nearest is MPFR's
/// default rounding and the library never changes it.
class PrecisionContext {
 public:
  explicit PrecisionContext(int digits);
  ~PrecisionContext();
  PrecisionContext(const PrecisionContext&) = delete;
  PrecisionContext& operator=(const PrecisionContext&) = delete;

  int digits() const { return digits_; }

  /// Digits currently in effect on this thread.
  static int current();

 private:
  int digits_;
  unsigned saved_;
};

BigReal make_real(double v);
BigReal make_real(std::string_view text);

bool is_finite(const BigReal& v);

/// Decimal rendering with `digits` significant digits (scientific only when
/// fixed notation would be unreadable).
std::string to_string(const BigReal& v, int digits);

/// 10^(-k) at the current precision.
BigReal pow10_neg(int k);

}  // namespace aim
