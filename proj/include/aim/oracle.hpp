#pragma once

#include <vector>

#include "aim/bigreal.hpp"
#include "aim/problem.hpp"

namespace aim {

/// Discretisation of [r_min, r_max] with `points` interior nodes.
///
/// In the soft regime the wavefunction vanishes like r^(gamma+1), so the
/// finite-difference grid is anchored at the origin and r_min is only the
/// starting radius for outward shooting. In the supersingular regime the
/// spike factor makes psi negligible below r_min and both oracles start there.
struct GridSpec {
  double r_min = 1e-4;
  double r_max = 12.0;
  int points = 20000;

  void validate() const;
};

/// Defaults: soft r_min = 1e-4; supersingular r_min where the spike exponent
/// reaches -30; r_max = max(12, sqrt(energy_hint) + 8).
GridSpec default_grid(const ProblemSpec& spec, double energy_hint = 3.0);

/// Oracle result in extended precision with an explicit error bar.
struct OracleValue {
  long double value = 0;
  long double error_bar = 0;
};

/// which-th eigenvalue of the three-point discretisation, Richardson
/// extrapolated from grids h and h/2. The error bar is the change of the
/// extrapolant against the (2h, h) pair, floored at 1e-9 max(1, |E|) to
/// cover box truncation and round-off.
/// Throws AccuracyError when the unfloored bar exceeds `tolerance`.
OracleValue fd_eigenvalue(const ProblemSpec& spec, const GridSpec& grid, int which,
                          double tolerance = 1e-4);

/// Numerov shooting: outward from r_min with near-origin data, inward from
/// r_max with Gaussian decay, bisecting the normalised Wronskian at the outer
/// turning point down to 10^(-target_digits). The error bar is the final
/// bracket width, with the same floor. Throws BracketError when the
/// Wronskian has the same sign at both ends of the bracket.
OracleValue shoot_eigenvalue(const ProblemSpec& spec, const GridSpec& grid, double e_lo,
                             double e_hi, int target_digits = 10);

/// (2 gamma + 3) + lambda Gamma(gamma + (3 - alpha)/2) / Gamma(gamma + 3/2).
/// Throws ConfigurationError when alpha >= 2 gamma + 3 (divergent matrix
/// element).
BigReal perturbation_first_order(const ProblemSpec& spec);

/// Eigenvector of the fine finite-difference grid for `which`, sampled at the
/// interior nodes (radii, values). Used for node-count cross-checks.
struct FdEigenvector {
  std::vector<double> radii;
  std::vector<double> values;
};
FdEigenvector fd_eigenvector(const ProblemSpec& spec, const GridSpec& grid, int which);

}  // namespace aim
