#pragma once

#include "aim/epoly.hpp"
#include "aim/problem.hpp"
#include "aim/symfunc.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace aim {

// ---------------------------------------------------------------------------
// Iteration states
//
//   lambda_n = lambda_{n-1}' + s_{n-1} + lambda_0 lambda_{n-1}
//   s_n      = s_{n-1}'      + s_0 lambda_{n-1}
//
// Iteration 0 is (lambda_0, s_0) itself (lambda_{-1} = 1, s_{-1} = 0).
// ---------------------------------------------------------------------------

/// Iterate held as functions of r.
struct SymbolicState {
  int n = 0;
  SymFunc lam;
  SymFunc s;

  static SymbolicState base(const AimSeed& seed);
};

/// Iterate held as Taylor coefficients at r0: lam[k] = D^k lambda_n(r0) / k!.
/// Each step consumes one order, so a base state built with horizon H
/// supports H steps.
struct JetState {
  int n = 0;
  BigReal r0;
  std::vector<EPoly> lam;
  std::vector<EPoly> s;

  static JetState base(const AimSeed& seed, const BigReal& r0, int horizon);

  /// Number of further steps the stored orders allow.
  int remaining() const { return static_cast<int>(lam.size()) - 1; }

  /// D^k lambda_n(r0), D^k s_n(r0).
  EPoly lam_derivative(int k) const;
  EPoly s_derivative(int k) const;
};

/// Taylor coefficients of a SymFunc at r0 up to order `order` inclusive.
std::vector<EPoly> taylor_coefficients(const SymFunc& f, const BigReal& r0, int order);

SymbolicState aim_step(const SymbolicState& state, const AimSeed& seed);

/// lambda_0 and s_0 prepared for the jet recursion at r0: their terms grouped
/// by exponent, with the Taylor series of r^p stored for non-integer p.
/// Integer powers are applied to a jet by O(order) recurrences
/// ((r0 + x) g for p > 0, solving (r0 + x) g = h for p < 0); fractional
/// powers by Cauchy convolution with the stored series.
struct SeedJets {
  struct Term {
    std::size_t power;  // index into `powers`
    EPoly coeff;
  };
  BigReal r0;
  std::vector<Exponent> powers;
  std::vector<std::vector<BigReal>> series;  // empty for integer powers
  std::vector<Term> lambda0;
  std::vector<Term> s0;

  static SeedJets make(const AimSeed& seed, const BigReal& r0, int order);
};

/// Taylor coefficients of r^p * f at r0, truncated to `len` orders.
std::vector<EPoly> times_power(const std::vector<EPoly>& f, std::size_t len, const Exponent& p,
                               const BigReal& r0, const std::vector<BigReal>& series);

/// Jet step. Throws InternalError when the state has no orders left.
JetState aim_step(const JetState& state, const SeedJets& seed_jets);

/// lambda_n(r0) s_{n-1}(r0) - lambda_{n-1}(r0) s_n(r0).
EPoly delta_n(const SymbolicState& state, const SymbolicState& prev, const BigReal& r0);
EPoly delta_n(const JetState& state, const JetState& prev);

/// Divides lambda_n and s_n by their largest coefficient magnitude. Roots of
/// every later determinant are unchanged. Throws DegenerateStateError when
/// the state is identically zero.
SymbolicState normalize(SymbolicState state);
JetState normalize(JetState state);

inline constexpr double kDefaultWindow = 0.5;
inline constexpr int kWindowWidening = 4;

/// Root of `delta` nearest `prev_estimate` within +-window, retrying once with
/// a 4x wider window. Throws RootLostError when both windows are empty.
BigReal track_root(const EPoly& delta, const BigReal& prev_estimate, const BigReal& window);

/// True when the successive differences of the last six estimates change sign
/// more than twice while still exceeding `tolerance`.
bool detect_oscillation(const std::vector<BigReal>& history, const BigReal& tolerance);

// ---------------------------------------------------------------------------
// Controller
// ---------------------------------------------------------------------------

struct PrecisionPolicy {
  int start_digits = 30;
  int max_digits = 120;
  int escalation_step = 10;
  int target_digits = 7;

  /// start_digits >= target_digits + 8, max_digits >= start_digits.
  void validate() const;
};

enum class Termination { Converged, MaxIter, OscillationUnresolved };
enum class Backend { Jet, Symbolic };

std::string_view termination_name(Termination t);
std::string_view backend_name(Backend b);

struct HistoryEntry {
  int n = 0;
  BigReal root;
  BigReal delta;  // |root_n - root_{n-1}|
};

/// One pass of the controller at a fixed (digits, r0).
struct Attempt {
  int digits = 0;
  BigReal r0;
  int iterations = 0;
  bool oscillation = false;
};

struct ConvergenceReport {
  BigReal energy;
  int iterations_used = 0;
  std::vector<HistoryEntry> history;
  BigReal r0_used;
  int digits_used = 0;
  Termination termination = Termination::MaxIter;
  Backend backend = Backend::Jet;
  std::vector<Attempt> attempts;
  /// True when the energy came from the alpha = 2 closed form.
  bool closed_form = false;
};

struct SolveOptions {
  Backend backend = Backend::Jet;
  bool normalize = true;
  double window = kDefaultWindow;
  /// Iteration at which the initial estimate is taken (capped by n_max).
  int acquire_at = 30;
  /// Escalation on oscillation; disable to observe raw behaviour.
  bool escalate = true;
  /// One r0 += 1 retry after digit escalation is exhausted.
  bool bump_r0 = true;
  /// Keep iterating to n_max even after convergence (trace mode).
  bool stop_on_convergence = true;
  /// Initial jet horizon; grows by 3/2 up to n_max.
  int initial_horizon = 128;
  /// Override of the automatic initial estimate.
  std::optional<BigReal> initial_estimate;
};

/// Runs the iteration for n = 1..n_max at r0 and tracks the eigenvalue of
/// spec.state_index. alpha = 2 returns the closed form immediately.
ConvergenceReport solve(const ProblemSpec& spec, const BigReal& r0, const PrecisionPolicy& policy,
                        int n_max, int k_confirm, const SolveOptions& options = {});

/// Search window [lo, hi] for the global scan of the initial estimate.
std::pair<double, double> initial_bracket(const ProblemSpec& spec);

}  // namespace aim
