#pragma once

#include "aim/bigreal.hpp"
#include "aim/symfunc.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aim {

/// Exact rational used for user-facing parameters so that decimal inputs such
/// as 0.1 are converted to the working precision without a binary detour.
using Rational = boost::multiprecision::cpp_rational;

/// Parses "0.1", "1e-6", "-0.5", "3/2" exactly.
Rational parse_rational(std::string_view text);
std::string rational_str(const Rational& q);
BigReal to_big(const Rational& q);
double to_double(const Rational& q);

enum class Regime { Soft, Critical, Supersingular };

std::string_view regime_name(Regime r);

/// Parameters of  -psi'' + (r^2 + gamma(gamma+1)/r^2 + lambda/r^alpha) psi = E psi.
struct ProblemSpec {
  Rational alpha{2};
  Rational lambda{0};
  Rational gamma{0};
  int state_index = 0;

  /// Throws ConfigurationError unless alpha > 0, lambda >= 0, gamma >= -1/2,
  /// state_index >= 0.
  void validate() const;
  Regime regime() const;
};

/// gamma = l + (N - 3)/2.
Rational gamma_from_angular(int l, int dim);

/// Near-origin / far-field factor psi_a divided out before iterating.
///   psi_a(r) = r^prefactor * exp(-gaussian * r^2 - spike * r^(-m))
/// Supersingular: prefactor = (m+1)/2, spike = sqrt(lambda)/m, m = (alpha-2)/2.
/// Soft: prefactor = gamma+1, no spike.
struct Ansatz {
  Regime regime = Regime::Soft;
  Rational m{0};
  Rational prefactor_exponent{1};
  Rational gaussian{1, 2};
  BigReal spike{0};

  /// log psi_a(r).
  BigReal log_value(const BigReal& r) const;
  /// d/dr log psi_a(r).
  BigReal log_derivative(const BigReal& r) const;
};

/// Chooses the ansatz: spike form for alpha > 2 with lambda > 0, the
/// r^(gamma+1) form otherwise (including lambda = 0 at any alpha).
Ansatz make_ansatz(const ProblemSpec& spec);

/// lambda_0 and s_0 of  f'' = lambda_0 f' + s_0 f.
struct AimSeed {
  SymFunc lambda0;
  SymFunc s0;
};

/// alpha > 2, lambda > 0.
AimSeed build_supersingular(const ProblemSpec& spec);
/// 0 < alpha < 2, or any alpha when lambda = 0.
AimSeed build_soft(const ProblemSpec& spec);
/// Dispatches to the builder matching make_ansatz. Throws for alpha = 2 with
/// lambda > 0, which is solved in closed form.
AimSeed build_seed(const ProblemSpec& spec);

/// Closed-form level for alpha = 2: lambda/r^2 is absorbed into an effective
/// gamma' = -1/2 + sqrt((gamma+1/2)^2 + lambda), E = 4n + 3 + 2 gamma'.
BigReal exact_alpha2(const ProblemSpec& spec);

/// r^2 + gamma(gamma+1)/r^2 + lambda/r^alpha.
BigReal effective_potential(const ProblemSpec& spec, const BigReal& r);

/// Evaluation point for the termination determinant: the larger of the
/// potential minimiser and the maximiser of psi_a, never below 3.
BigReal r0_heuristic(const ProblemSpec& spec);

inline constexpr double kMinR0 = 3.0;

/// r0_heuristic first, then the smaller of the two locations (same clamp)
/// when it differs. Strong soft spikes push the potential minimiser out to
/// where the determinant has no stable root; the second point covers them.
std::vector<BigReal> r0_candidates(const ProblemSpec& spec);

/// Unperturbed oscillator level 4n + 2 gamma + 3.
BigReal unperturbed_level(const ProblemSpec& spec);

}  // namespace aim
