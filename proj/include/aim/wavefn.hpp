#pragma once

#include <vector>

#include "aim/aim_engine.hpp"
#include "aim/bigreal.hpp"
#include "aim/problem.hpp"

namespace aim {

/// psi sampled on ascending radii. `values` are unnormalised; `normalization`
/// is the trapezoid L2 norm over the samples.
struct WavefnSamples {
  std::vector<double> radii;
  std::vector<double> values;
  double normalization = 0;

  /// values / normalization.
  std::vector<double> normalized() const;
};

/// s_n(r; E) / lambda_n(r; E). Throws PoleError when lambda_n vanishes at r
/// (relative to s_n at the working precision).
BigReal rho_at(const SymbolicState& state, const BigReal& r, const BigReal& energy);

/// The symbolic state at iteration n with E fixed at `energy`.
SymbolicState state_at_energy(const ProblemSpec& spec, const BigReal& energy, int n);

/// psi = psi_a * f with f = exp(-int rho), rho taken at the final iteration of
/// the report. Simple zeros of f show up as poles of rho with residue -1;
/// they are subtracted analytically and flip the sign of f. Poles with
/// residue ~0 (lambda_n and s_n vanishing together) are subtracted without a
/// sign flip. Any other pole on the path throws PoleError.
WavefnSamples reconstruct(const ProblemSpec& spec, const ConvergenceReport& report,
                          const std::vector<double>& radii);

/// `count` uniform radii from near the origin to sqrt(energy) + 5.
std::vector<double> default_radii(const ProblemSpec& spec, double energy, int count = 400);

/// Strict sign changes, skipping entries below 1e-9 of the largest |value|.
/// Throws DomainError for fewer than 10 samples.
int node_count(const std::vector<double>& values);
inline int node_count(const WavefnSamples& samples) { return node_count(samples.values); }

}  // namespace aim
