#include "aim/problem.hpp"

#include "aim/error.hpp"

#include <cmath>
#include <functional>

namespace aim {

namespace {

using boost::multiprecision::cpp_int;

// Sign-change bisection of g on [lo, hi] in double; returns lo when g(lo) > 0
// (minimum at the left edge) and hi when g(hi) < 0.
double bisect_increasing(const std::function<double(double)>& g, double lo, double hi) {
  if (g(lo) >= 0) return lo;
  if (g(hi) <= 0) return hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Exponent exponent_of(const Rational& q) {
  return Exponent(numerator(q).convert_to<std::int64_t>(),
                  denominator(q).convert_to<std::int64_t>());
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto bad = [&]() { return ConfigurationError("not a number: '" + s + "'"); };
  if (s.empty()) throw bad();
  if (auto slash = s.find('/'); slash != std::string::npos) {
    const Rational num = parse_rational(s.substr(0, slash));
    const Rational den = parse_rational(s.substr(slash + 1));
    if (den == 0) throw bad();
    return num / den;
  }
  std::size_t pos = 0;
  bool negative = false;
  if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
  cpp_int mantissa = 0;
  int scale = 0;
  bool any_digit = false;
  bool seen_point = false;
  for (; pos < s.size(); ++pos) {
    const char c = s[pos];
    if (c >= '0' && c <= '9') {
      mantissa = mantissa * 10 + (c - '0');
      if (seen_point) --scale;
      any_digit = true;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw bad();
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E') throw bad();
    ++pos;
    try {
      std::size_t used = 0;
      scale += std::stoi(s.substr(pos), &used);
      if (pos + used != s.size()) throw bad();
    } catch (const std::logic_error&) {
      throw bad();
    }
  }
  Rational q(mantissa);
  const cpp_int p10 = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(std::abs(scale)));
  if (scale >= 0) {
    q *= p10;
  } else {
    q /= p10;
  }
  return negative ? -q : q;
}

std::string rational_str(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  // exact decimals print as decimals, everything else as a fraction
  cpp_int den = denominator(q);
  int twos = 0;
  int fives = 0;
  while (den % 2 == 0) {
    den /= 2;
    ++twos;
  }
  while (den % 5 == 0) {
    den /= 5;
    ++fives;
  }
  if (den != 1) return numerator(q).str() + "/" + denominator(q).str();
  const int places = std::max(twos, fives);
  const cpp_int scaled = numerator(q) * boost::multiprecision::pow(cpp_int(10), places) / denominator(q);
  std::string digits = cpp_int(boost::multiprecision::abs(scaled)).str();
  if (static_cast<int>(digits.size()) <= places) {
    digits.insert(0, static_cast<std::size_t>(places) - digits.size() + 1, '0');
  }
  digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
  return (scaled < 0 ? "-" : "") + digits;
}

BigReal to_big(const Rational& q) {
  return BigReal(numerator(q).str()) / BigReal(denominator(q).str());
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::Soft:
      return "soft";
    case Regime::Critical:
      return "critical";
    case Regime::Supersingular:
      return "supersingular";
  }
  return "?";
}

void ProblemSpec::validate() const {
  if (alpha <= 0) throw ConfigurationError("alpha must be positive");
  if (lambda < 0) throw ConfigurationError("lambda must be non-negative");
  if (gamma < Rational(-1, 2)) throw ConfigurationError("gamma must be >= -1/2");
  if (state_index < 0) throw ConfigurationError("state index must be non-negative");
}

Regime ProblemSpec::regime() const {
  if (alpha < 2) return Regime::Soft;
  if (alpha == 2) return Regime::Critical;
  return Regime::Supersingular;
}

Rational gamma_from_angular(int l, int dim) {
  if (l < 0 || dim < 1) throw ConfigurationError("need l >= 0 and dimension >= 1");
  return Rational(l) + Rational(dim - 3, 2);
}

BigReal Ansatz::log_value(const BigReal& r) const {
  BigReal v = to_big(prefactor_exponent) * log(r) - to_big(gaussian) * r * r;
  if (spike != 0) v -= spike * rational_pow(r, -exponent_of(m));
  return v;
}

BigReal Ansatz::log_derivative(const BigReal& r) const {
  BigReal v = to_big(prefactor_exponent) / r - 2 * to_big(gaussian) * r;
  if (spike != 0) {
    v += spike * to_big(m) * rational_pow(r, -exponent_of(m) - Exponent(1));
  }
  return v;
}

Ansatz make_ansatz(const ProblemSpec& spec) {
  spec.validate();
  Ansatz a;
  if (spec.alpha > 2 && spec.lambda > 0) {
    a.regime = Regime::Supersingular;
    a.m = (spec.alpha - 2) / 2;
    a.prefactor_exponent = (a.m + 1) / 2;
    a.spike = sqrt(to_big(spec.lambda)) / to_big(a.m);
  } else {
    a.regime = Regime::Soft;
    a.prefactor_exponent = spec.gamma + 1;
  }
  return a;
}

AimSeed build_supersingular(const ProblemSpec& spec) {
  spec.validate();
  if (spec.alpha <= 2) throw ConfigurationError("supersingular branch needs alpha > 2");
  if (spec.lambda == 0) {
    throw ConfigurationError("supersingular branch needs lambda > 0; use the soft branch for lambda = 0");
  }
  const Rational m = (spec.alpha - 2) / 2;
  const Exponent me = exponent_of(m);
  const BigReal root_lambda = sqrt(to_big(spec.lambda));
  const BigReal mb = to_big(m);
  const BigReal g21 = 2 * to_big(spec.gamma) + 1;

  AimSeed seed;
  seed.lambda0.add_term(Exponent(1), EPoly::constant(BigReal(2)));
  seed.lambda0.add_term(-me - Exponent(1), EPoly::constant(-2 * root_lambda));
  seed.lambda0.add_term(Exponent(-1), EPoly::constant(-(1 + mb)));

  seed.s0.add_term(Exponent(0), EPoly::linear(2 + mb, BigReal(-1)));
  seed.s0.add_term(-me, EPoly::constant(2 * root_lambda));
  seed.s0.add_term(Exponent(-2), EPoly::constant((g21 - mb) * (g21 + mb) / 4));
  return seed;
}

AimSeed build_soft(const ProblemSpec& spec) {
  spec.validate();
  if (spec.alpha >= 2 && spec.lambda != 0) {
    throw ConfigurationError("soft branch needs alpha < 2 (or lambda = 0)");
  }
  const BigReal g = to_big(spec.gamma);
  AimSeed seed;
  seed.lambda0.add_term(Exponent(1), EPoly::constant(BigReal(2)));
  seed.lambda0.add_term(Exponent(-1), EPoly::constant(-2 * (g + 1)));
  seed.s0.add_term(Exponent(0), EPoly::linear(2 * g + 3, BigReal(-1)));
  if (spec.lambda != 0) {
    seed.s0.add_term(-exponent_of(spec.alpha), EPoly::constant(to_big(spec.lambda)));
  }
  return seed;
}

AimSeed build_seed(const ProblemSpec& spec) {
  spec.validate();
  if (spec.lambda == 0 || spec.alpha < 2) return build_soft(spec);
  if (spec.alpha == 2) {
    throw ConfigurationError("alpha = 2 is solved in closed form, not by iteration");
  }
  return build_supersingular(spec);
}

BigReal exact_alpha2(const ProblemSpec& spec) {
  spec.validate();
  if (spec.alpha != 2) throw ConfigurationError("closed form only applies to alpha = 2");
  const BigReal g = to_big(spec.gamma);
  const BigReal half = BigReal(1) / 2;
  const BigReal g_eff = -half + sqrt((g + half) * (g + half) + to_big(spec.lambda));
  return 4 * BigReal(spec.state_index) + 3 + 2 * g_eff;
}

BigReal effective_potential(const ProblemSpec& spec, const BigReal& r) {
  if (!(r > 0)) throw DomainError("potential evaluated at r <= 0");
  const BigReal g = to_big(spec.gamma);
  BigReal v = r * r + g * (g + 1) / (r * r);
  if (spec.lambda != 0) v += to_big(spec.lambda) * rational_pow(r, -exponent_of(spec.alpha));
  return v;
}

namespace {

struct R0Points {
  double potential_min;
  double psi_max;
};

R0Points r0_points(const ProblemSpec& spec) {
  spec.validate();
  const double alpha = to_double(spec.alpha);
  const double lambda = to_double(spec.lambda);
  const double gamma = to_double(spec.gamma);
  constexpr double kLo = 1e-6;
  constexpr double kHi = 20.0;

  // V'(r) = 2r - 2 g(g+1)/r^3 - alpha lambda / r^(alpha+1)
  auto dv = [&](double r) {
    return 2 * r - 2 * gamma * (gamma + 1) / (r * r * r) - alpha * lambda / std::pow(r, alpha + 1);
  };
  const double potential_min = bisect_increasing(dv, kLo, kHi);

  // -(log psi_a)' is increasing through the maximiser of psi_a
  const Ansatz a = make_ansatz(spec);
  const double pref = to_double(a.prefactor_exponent);
  const double m = to_double(a.m);
  const double spike = a.spike.convert_to<double>();
  auto neg_dlog = [&](double r) {
    double d = pref / r - r;
    if (spike != 0) d += spike * m * std::pow(r, -m - 1);
    return -d;
  };
  return {potential_min, bisect_increasing(neg_dlog, kLo, kHi)};
}

}  // namespace

BigReal r0_heuristic(const ProblemSpec& spec) {
  const R0Points p = r0_points(spec);
  return BigReal(std::max({p.potential_min, p.psi_max, kMinR0}));
}

std::vector<BigReal> r0_candidates(const ProblemSpec& spec) {
  const R0Points p = r0_points(spec);
  std::vector<BigReal> out{BigReal(std::max({p.potential_min, p.psi_max, kMinR0}))};
  const double other = std::max(std::min(p.potential_min, p.psi_max), kMinR0);
  if (BigReal(other) != out.front()) out.emplace_back(other);
  return out;
}

BigReal unperturbed_level(const ProblemSpec& spec) {
  return 4 * BigReal(spec.state_index) + 2 * to_big(spec.gamma) + 3;
}

}  // namespace aim
