#include "aim/bigreal.hpp"

#include "aim/error.hpp"

#include <iomanip>
#include <sstream>

namespace aim {

PrecisionContext::PrecisionContext(int digits)
    : digits_(digits), saved_(BigReal::default_precision()) {
  if (digits < kMinDigits) {
    throw ConfigurationError("working precision must be at least " +
                             std::to_string(kMinDigits) + " digits");
  }
  BigReal::default_precision(static_cast<unsigned>(digits));
}

PrecisionContext::~PrecisionContext() { BigReal::default_precision(saved_); }

int PrecisionContext::current() {
  return static_cast<int>(BigReal::default_precision());
}

BigReal make_real(double v) { return BigReal(v); }

BigReal make_real(std::string_view text) {
  try {
    return BigReal(std::string(text));
  } catch (const std::exception&) {
    throw DomainError("not a real number: '" + std::string(text) + "'");
  }
}

bool is_finite(const BigReal& v) {
  return mpfr_number_p(v.backend().data()) != 0;
}

std::string to_string(const BigReal& v, int digits) {
  std::ostringstream os;
  const BigReal a = abs(v);
  if (a != 0 && (a >= BigReal(1e15) || a < BigReal(1e-5))) {
    os << std::scientific << std::setprecision(digits - 1) << v;
  } else {
    // fixed notation: digits after the point = significant - integer digits
    int int_digits = 1;
    if (a != 0) {
      int_digits = static_cast<int>(floor(log10(a)).convert_to<long>()) + 1;
    }
    const int frac = std::max(0, digits - int_digits);
    os << std::fixed << std::setprecision(frac) << v;
  }
  return os.str();
}

BigReal pow10_neg(int k) { return pow(BigReal(10), -k); }

}  // namespace aim
