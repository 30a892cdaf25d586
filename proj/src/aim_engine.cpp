#include "aim/aim_engine.hpp"

#include "aim/error.hpp"
#include "aim/roots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace aim {

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

SymbolicState SymbolicState::base(const AimSeed& seed) {
  return SymbolicState{0, seed.lambda0, seed.s0};
}

std::vector<EPoly> taylor_coefficients(const SymFunc& f, const BigReal& r0, int order) {
  if (!(r0 > 0)) throw DomainError("Taylor expansion point must be positive");
  std::vector<EPoly> out(static_cast<std::size_t>(order) + 1);
  for (const auto& [p, c] : f.terms()) {
    // c r^p = c sum_k binom(p, k) r0^(p-k) (r - r0)^k
    const BigReal pb = BigReal(p.num()) / p.den();
    BigReal binom(1);
    BigReal power = rational_pow(r0, p);
    for (int k = 0; k <= order; ++k) {
      if (binom == 0) break;  // non-negative integer p terminates
      out[static_cast<std::size_t>(k)].add_scaled(binom * power, c);
      binom *= (pb - k);
      binom /= (k + 1);
      power /= r0;
    }
  }
  return out;
}

SeedJets SeedJets::make(const AimSeed& seed, const BigReal& r0, int order) {
  SeedJets jets;
  jets.r0 = r0;
  auto index_of = [&](const Exponent& p) {
    auto it = std::find(jets.powers.begin(), jets.powers.end(), p);
    if (it != jets.powers.end()) return static_cast<std::size_t>(it - jets.powers.begin());
    jets.powers.push_back(p);
    std::vector<BigReal> series;
    if (!p.is_integer()) {
      for (const auto& c : taylor_coefficients(SymFunc::term(p, BigReal(1)), r0, order)) {
        series.push_back(c.coeff(0));
      }
    }
    jets.series.push_back(std::move(series));
    return jets.powers.size() - 1;
  };
  for (const auto& [p, c] : seed.lambda0.terms()) jets.lambda0.push_back({index_of(p), c});
  for (const auto& [p, c] : seed.s0.terms()) jets.s0.push_back({index_of(p), c});
  return jets;
}

std::vector<EPoly> times_power(const std::vector<EPoly>& f, std::size_t len, const Exponent& p,
                               const BigReal& r0, const std::vector<BigReal>& series) {
  if (f.size() < len) throw InternalError("jet shorter than requested product");
  std::vector<EPoly> g(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(len));
  if (!p.is_integer()) {
    if (series.size() < len) throw InternalError("power series shorter than the jet");
    std::vector<EPoly> out(len);
    for (std::size_t k = 0; k < len; ++k) {
      for (std::size_t j = 0; j <= k; ++j) out[k].add_scaled(series[j], g[k - j]);
    }
    return out;
  }
  const BigReal inv_r0 = 1 / r0;
  for (std::int64_t i = 0; i < p.num(); ++i) {
    // (r0 + x) g, highest order first so g[k-1] is still the old value
    for (std::size_t k = len; k-- > 0;) {
      g[k] *= r0;
      if (k > 0) g[k] += g[k - 1];
    }
  }
  for (std::int64_t i = 0; i < -p.num(); ++i) {
    // solve (r0 + x) q = g: q_k = (g_k - q_{k-1}) / r0
    for (std::size_t k = 0; k < len; ++k) {
      if (k > 0) g[k] -= g[k - 1];
      g[k] *= inv_r0;
    }
  }
  return g;
}

JetState JetState::base(const AimSeed& seed, const BigReal& r0, int horizon) {
  if (horizon < 1) throw InternalError("jet horizon must be at least 1");
  JetState st;
  st.n = 0;
  st.r0 = r0;
  st.lam = taylor_coefficients(seed.lambda0, r0, horizon);
  st.s = taylor_coefficients(seed.s0, r0, horizon);
  return st;
}

namespace {

BigReal factorial(int k) {
  BigReal f(1);
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

EPoly JetState::lam_derivative(int k) const {
  if (k < 0 || k >= static_cast<int>(lam.size())) throw InternalError("jet order out of range");
  return lam[static_cast<std::size_t>(k)] * factorial(k);
}

EPoly JetState::s_derivative(int k) const {
  if (k < 0 || k >= static_cast<int>(s.size())) throw InternalError("jet order out of range");
  return s[static_cast<std::size_t>(k)] * factorial(k);
}

SymbolicState aim_step(const SymbolicState& state, const AimSeed& seed) {
  SymbolicState next;
  next.n = state.n + 1;
  next.lam = sf_diff(state.lam) + state.s + seed.lambda0 * state.lam;
  next.s = sf_diff(state.s) + seed.s0 * state.lam;
  const int digits = PrecisionContext::current();
  next.lam.prune(digits);
  next.s.prune(digits);
  return next;
}

JetState aim_step(const JetState& state, const SeedJets& seed_jets) {
  if (state.remaining() < 1) {
    throw InternalError("jet exhausted at iteration " + std::to_string(state.n) +
                        ": horizon too small for the requested iteration count");
  }
  const std::size_t len = state.lam.size() - 1;
  JetState next;
  next.n = state.n + 1;
  next.r0 = state.r0;
  next.lam.resize(len);
  next.s.resize(len);
  for (std::size_t k = 0; k < len; ++k) {
    // derivative of a Taylor series: t'_k = (k+1) t_{k+1}
    const BigReal kp1(static_cast<long>(k + 1));
    next.lam[k] = state.lam[k + 1] * kp1;
    next.lam[k] += state.s[k];
    next.s[k] = state.s[k + 1] * kp1;
  }
  // r^p lambda_{n-1} once per distinct power, shared by lambda_0 and s_0
  for (std::size_t i = 0; i < seed_jets.powers.size(); ++i) {
    const std::vector<EPoly> shifted =
        times_power(state.lam, len, seed_jets.powers[i], state.r0, seed_jets.series[i]);
    for (const auto& t : seed_jets.lambda0) {
      if (t.power != i) continue;
      for (std::size_t k = 0; k < len; ++k) next.lam[k].add_product(t.coeff, shifted[k]);
    }
    for (const auto& t : seed_jets.s0) {
      if (t.power != i) continue;
      for (std::size_t k = 0; k < len; ++k) next.s[k].add_product(t.coeff, shifted[k]);
    }
  }
  return next;
}

EPoly delta_n(const SymbolicState& state, const SymbolicState& prev, const BigReal& r0) {
  if (state.n != prev.n + 1) throw InternalError("delta_n needs consecutive iterates");
  return sf_eval(state.lam, r0) * sf_eval(prev.s, r0) - sf_eval(prev.lam, r0) * sf_eval(state.s, r0);
}

EPoly delta_n(const JetState& state, const JetState& prev) {
  if (state.n != prev.n + 1) throw InternalError("delta_n needs consecutive iterates");
  return state.lam[0] * prev.s[0] - prev.lam[0] * state.s[0];
}

SymbolicState normalize(SymbolicState state) {
  const BigReal scale = max(state.lam.max_abs(), state.s.max_abs());
  if (scale == 0) throw DegenerateStateError("cannot normalize an all-zero state");
  const BigReal inv = 1 / scale;
  state.lam *= inv;
  state.s *= inv;
  return state;
}

JetState normalize(JetState state) {
  BigReal scale(0);
  for (const auto& c : state.lam) scale = max(scale, c.max_abs());
  for (const auto& c : state.s) scale = max(scale, c.max_abs());
  if (scale == 0) throw DegenerateStateError("cannot normalize an all-zero state");
  const BigReal inv = 1 / scale;
  for (auto& c : state.lam) c *= inv;
  for (auto& c : state.s) c *= inv;
  return state;
}

BigReal track_root(const EPoly& delta, const BigReal& prev_estimate, const BigReal& window) {
  if (!(window > 0)) throw DomainError("tracking window must be positive");
  if (auto r = nearest_root(delta, prev_estimate, window)) return *r;
  if (auto r = nearest_root(delta, prev_estimate, window * kWindowWidening)) return *r;
  throw RootLostError("no root of the determinant within " +
                      to_string(window * kWindowWidening, 6) + " of " +
                      to_string(prev_estimate, 12));
}

bool detect_oscillation(const std::vector<BigReal>& history, const BigReal& tolerance) {
  if (history.size() < 6) throw DomainError("oscillation check needs at least 6 estimates");
  const auto tail = history.end() - 6;
  std::vector<BigReal> diffs;
  for (auto it = tail + 1; it != history.end(); ++it) diffs.push_back(*it - *(it - 1));

  BigReal largest(0);
  for (const auto& d : diffs) largest = max(largest, abs(d));
  if (largest < tolerance) return false;

  int changes = 0;
  int last_sign = 0;
  for (const auto& d : diffs) {
    const int sg = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (sg == 0) continue;
    if (last_sign != 0 && sg != last_sign) ++changes;
    last_sign = sg;
  }
  return changes > 2;
}

// ---------------------------------------------------------------------------
// Controller
// ---------------------------------------------------------------------------

void PrecisionPolicy::validate() const {
  if (start_digits < kMinDigits) throw ConfigurationError("start digits below minimum");
  if (start_digits < target_digits + 8) {
    throw ConfigurationError("start digits must exceed target digits by at least 8 guard digits");
  }
  if (max_digits < start_digits) throw ConfigurationError("max digits below start digits");
  if (escalation_step < 1) throw ConfigurationError("escalation step must be positive");
  if (target_digits < 1) throw ConfigurationError("target digits must be positive");
}

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::Converged:
      return "CONVERGED";
    case Termination::MaxIter:
      return "MAX_ITER";
    case Termination::OscillationUnresolved:
      return "OSCILLATION_UNRESOLVED";
  }
  return "?";
}

std::string_view backend_name(Backend b) { return b == Backend::Jet ? "jet" : "symbolic"; }

std::pair<double, double> initial_bracket(const ProblemSpec& spec) {
  const double base = 2 * to_double(spec.gamma) + 3;
  const double alpha = to_double(spec.alpha);
  const double lambda = to_double(spec.lambda);
  const double width = std::max(50.0, 3 * std::pow(lambda, 2 / (alpha + 2)));
  return {base, base + width + 4.0 * spec.state_index};
}

namespace {

// Produces delta_1, delta_2, ... for one backend.
class Runner {
 public:
  virtual ~Runner() = default;
  /// Advances one iteration and returns the new determinant.
  virtual EPoly advance() = 0;
};

class SymbolicRunner final : public Runner {
 public:
  SymbolicRunner(AimSeed seed, BigReal r0, bool normalize)
      : seed_(std::move(seed)), r0_(std::move(r0)), normalize_(normalize),
        state_(SymbolicState::base(seed_)) {}

  EPoly advance() override {
    SymbolicState next = aim_step(state_, seed_);
    EPoly d = delta_n(next, state_, r0_);
    state_ = normalize_ ? normalize(std::move(next)) : std::move(next);
    return d;
  }

 private:
  AimSeed seed_;
  BigReal r0_;
  bool normalize_;
  SymbolicState state_;
};

// Grows the Taylor horizon on demand: when the stored orders run out the
// recursion is replayed from n = 0 with a longer horizon. Lower orders do
// not depend on the horizon, so replayed iterates are unchanged.
class JetRunner final : public Runner {
 public:
  JetRunner(AimSeed seed, BigReal r0, bool normalize, int horizon, int n_max)
      : seed_(std::move(seed)), r0_(std::move(r0)), normalize_(normalize),
        n_max_(n_max), horizon_(std::min(horizon, n_max)) {
    rebuild(0);
  }

  EPoly advance() override {
    if (state_.remaining() < 1) {
      if (horizon_ >= n_max_) throw InternalError("jet horizon exhausted at n_max");
      horizon_ = std::min(n_max_, std::max(horizon_ + 1, horizon_ * 3 / 2));
      rebuild(state_.n);
    }
    JetState next = aim_step(state_, jets_);
    EPoly d = delta_n(next, state_);
    state_ = normalize_ ? normalize(std::move(next)) : std::move(next);
    return d;
  }

 private:
  void rebuild(int n) {
    jets_ = SeedJets::make(seed_, r0_, horizon_);
    state_ = JetState::base(seed_, r0_, horizon_);
    if (normalize_) state_ = normalize(std::move(state_));
    while (state_.n < n) {
      JetState next = aim_step(state_, jets_);
      state_ = normalize_ ? normalize(std::move(next)) : std::move(next);
    }
  }

  AimSeed seed_;
  BigReal r0_;
  bool normalize_;
  int n_max_;
  int horizon_;
  SeedJets jets_;
  JetState state_;
};

BigReal at_current_precision(const BigReal& v) {
  BigReal out;
  mpfr_set(out.backend().data(), v.backend().data(), MPFR_RNDN);
  return out;
}

// Global scan with doubling resolution until at least one root shows up.
std::vector<BigReal> global_roots(const EPoly& delta, const BigReal& lo, const BigReal& hi) {
  std::vector<BigReal> roots;
  for (int pts = kDefaultScanPoints; pts <= kMaxScanPoints; pts *= 2) {
    roots = epoly_real_roots(delta, lo, hi, pts);
    if (!roots.empty()) break;
  }
  return roots;
}

std::optional<BigReal> nearest_of(const std::vector<BigReal>& roots, const BigReal& anchor) {
  if (roots.empty()) return std::nullopt;
  const BigReal* best = &roots.front();
  for (const auto& r : roots) {
    if (abs(r - anchor) < abs(*best - anchor)) best = &r;
  }
  return *best;
}

bool small_coupling(const ProblemSpec& spec) {
  return spec.lambda == 0 || spec.lambda <= Rational(1, 100);
}

struct AttemptOutcome {
  Termination termination = Termination::MaxIter;
  bool oscillation = false;
  int iterations = 0;
  std::optional<int> converged_at;
  BigReal energy;
  std::vector<HistoryEntry> history;
};

// Converged when the last k deltas are below tol and a geometric estimate of
// the remaining distance to the limit is below tol too.
bool converged(const std::vector<HistoryEntry>& h, int k_confirm, const BigReal& tol) {
  // the first entry is the acquisition, whose delta is not an iteration step
  if (static_cast<int>(h.size()) < k_confirm + 1) return false;
  BigReal largest(0);
  for (auto it = h.end() - k_confirm; it != h.end(); ++it) {
    if (!(it->delta < tol)) return false;
    largest = max(largest, it->delta);
  }
  if (largest < tol / 1000) return true;
  const BigReal& d_new = h.back().delta;
  const BigReal& d_old = (h.end() - 2)->delta;
  if (d_new == 0) return true;
  if (d_old == 0 || !(d_new < d_old)) return false;
  const BigReal q = d_new / d_old;
  return d_new * q / (1 - q) < tol;
}

AttemptOutcome run_attempt(const ProblemSpec& spec, const BigReal& r0_in, int digits,
                           int target_digits, int n_max, int k_confirm,
                           const SolveOptions& opt) {
  PrecisionContext ctx(digits);
  const BigReal r0 = at_current_precision(r0_in);
  AimSeed seed = build_seed(spec);
  std::unique_ptr<Runner> runner;
  if (opt.backend == Backend::Jet) {
    runner = std::make_unique<JetRunner>(std::move(seed), r0, opt.normalize, opt.initial_horizon, n_max);
  } else {
    runner = std::make_unique<SymbolicRunner>(std::move(seed), r0, opt.normalize);
  }

  AttemptOutcome out;
  const BigReal tol = pow10_neg(target_digits);
  const BigReal window(opt.window);
  const auto [lo_d, hi_d] = initial_bracket(spec);
  const BigReal lo = BigReal(lo_d) - BigReal(0.25);
  const BigReal hi(hi_d);

  const int n_acq = std::clamp(opt.acquire_at, 1, n_max);
  EPoly delta;
  for (int n = 1; n <= n_acq; ++n) delta = runner->advance();

  // initial estimate
  std::optional<BigReal> start;
  const std::vector<BigReal> roots = global_roots(delta, lo, hi);
  if (opt.initial_estimate) {
    start = nearest_of(roots, at_current_precision(*opt.initial_estimate));
  } else if (small_coupling(spec)) {
    start = nearest_of(roots, unperturbed_level(spec));
  } else if (static_cast<int>(roots.size()) > spec.state_index) {
    start = roots[static_cast<std::size_t>(spec.state_index)];
  }
  out.iterations = n_acq;
  if (!start) {
    // nothing to track; treated as instability
    out.oscillation = true;
    out.termination = Termination::OscillationUnresolved;
    out.energy = std::numeric_limits<BigReal>::quiet_NaN();
    return out;
  }
  out.history.push_back({n_acq, *start, BigReal(0)});
  BigReal prev = *start;
  std::vector<BigReal> recent{prev};

  for (int n = n_acq + 1; n <= n_max; ++n) {
    delta = runner->advance();
    out.iterations = n;
    BigReal root;
    try {
      root = track_root(delta, prev, window);
    } catch (const RootLostError&) {
      auto rescanned = nearest_of(global_roots(delta, lo, hi), prev);
      if (!rescanned) {
        out.oscillation = true;
        break;
      }
      root = *rescanned;
    }
    BigReal step = abs(root - prev);
    out.history.push_back({n, root, step});
    recent.push_back(root);
    prev = root;

    if (!out.converged_at && converged(out.history, k_confirm, tol)) {
      out.converged_at = n;
      if (opt.stop_on_convergence) break;
    }
    if (!out.converged_at && recent.size() >= 6 && detect_oscillation(recent, tol)) {
      out.oscillation = true;
      if (opt.stop_on_convergence) break;
    }
  }

  out.energy = prev;
  if (out.converged_at) {
    out.termination = Termination::Converged;
    if (opt.stop_on_convergence) out.iterations = *out.converged_at;
  } else if (out.oscillation) {
    out.termination = Termination::OscillationUnresolved;
  } else {
    out.termination = Termination::MaxIter;
  }
  return out;
}

// Estimates of two attempts agree far below the target on every common n.
bool same_trajectory(const AttemptOutcome& a, const AttemptOutcome& b, int target_digits) {
  PrecisionContext ctx(std::max(kMinDigits, target_digits + 8));
  const BigReal tol = pow10_neg(target_digits + 3);
  std::size_t common = 0;
  for (const auto& ea : a.history) {
    for (const auto& eb : b.history) {
      if (ea.n != eb.n) continue;
      if (!(abs(ea.root - eb.root) < tol)) return false;
      ++common;
    }
  }
  return common >= 6;
}

}  // namespace

ConvergenceReport solve(const ProblemSpec& spec, const BigReal& r0, const PrecisionPolicy& policy,
                        int n_max, int k_confirm, const SolveOptions& options) {
  spec.validate();
  policy.validate();
  if (!(r0 > 0)) throw DomainError("r0 must be positive");
  if (n_max < 5) throw ConfigurationError("n_max must be at least 5");
  if (k_confirm < 2) throw ConfigurationError("k_confirm must be at least 2");

  ConvergenceReport report;
  report.backend = options.backend;
  if (spec.alpha == 2) {
    PrecisionContext ctx(policy.start_digits);
    report.energy = exact_alpha2(spec);
    report.iterations_used = 0;
    report.r0_used = r0;
    report.digits_used = policy.start_digits;
    report.termination = Termination::Converged;
    report.closed_form = true;
    return report;
  }

  int digits = policy.start_digits;
  BigReal r0_cur = r0;
  bool bumped = false;
  std::optional<AttemptOutcome> previous;
  while (true) {
    AttemptOutcome a = run_attempt(spec, r0_cur, digits, policy.target_digits, n_max, k_confirm, options);
    report.attempts.push_back({digits, r0_cur, a.iterations, a.oscillation});
    report.energy = a.energy;
    report.iterations_used = a.iterations;
    report.history = a.history;
    report.r0_used = r0_cur;
    report.digits_used = digits;
    report.termination = a.termination;
    if (a.termination != Termination::OscillationUnresolved || !options.escalate) return report;

    // A retry at higher precision that reproduces the same estimates shows
    // the oscillation is not round-off; only a new r0 can help.
    const bool precision_bound = !previous || !same_trajectory(*previous, a, policy.target_digits);
    if (precision_bound && digits + policy.escalation_step <= policy.max_digits) {
      digits += policy.escalation_step;
      previous = std::move(a);
    } else if (options.bump_r0 && !bumped) {
      r0_cur += 1;
      bumped = true;
      previous.reset();
    } else {
      return report;
    }
  }
}

}  // namespace aim
