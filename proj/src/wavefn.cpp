#include "aim/wavefn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "aim/error.hpp"
#include "aim/oracle.hpp"

namespace aim {

namespace {

using real = long double;

struct Pole {
  BigReal where;
  BigReal residue;
};

BigReal eval_at(const SymFunc& f, const BigReal& r, const BigReal& energy) {
  return sf_eval(f, r)(energy);
}

// Adaptive Simpson on [a, b] with cached endpoint/midpoint values.
real simpson(const std::function<real(real)>& g, real a, real b, real fa, real fm, real fb,
             real whole, real tol, int depth) {
  const real m = (a + b) / 2;
  const real lm = (a + m) / 2;
  const real rm = (m + b) / 2;
  const real flm = g(lm);
  const real frm = g(rm);
  const real left = (m - a) / 6 * (fa + 4 * flm + fm);
  const real right = (b - m) / 6 * (fm + 4 * frm + fb);
  const real diff = left + right - whole;
  if (std::abs(diff) <= 15 * tol) return left + right + diff / 15;
  if (depth <= 0) {
    throw PoleError("quadrature of rho did not settle near r = " + std::to_string(static_cast<double>(m)),
                    static_cast<double>(m));
  }
  return simpson(g, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson(g, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

real integrate(const std::function<real(real)>& g, real a, real b, real tol) {
  const real fa = g(a);
  const real fb = g(b);
  const real fm = g((a + b) / 2);
  return simpson(g, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, 40);
}

}  // namespace

std::vector<double> WavefnSamples::normalized() const {
  std::vector<double> out = values;
  if (normalization > 0) {
    for (double& v : out) v /= normalization;
  }
  return out;
}

BigReal rho_at(const SymbolicState& state, const BigReal& r, const BigReal& energy) {
  const BigReal lam = eval_at(state.lam, r, energy);
  const BigReal s = eval_at(state.s, r, energy);
  const BigReal guard = pow10_neg(std::max(1, PrecisionContext::current() - 5));
  if (lam == 0 || abs(lam) <= guard * abs(s)) {
    const double where = static_cast<double>(r);
    throw PoleError("lambda_n vanishes at r = " + to_string(r, 12), where);
  }
  return s / lam;
}

SymbolicState state_at_energy(const ProblemSpec& spec, const BigReal& energy, int n) {
  if (n < 0) throw DomainError("iteration index must be non-negative");
  const AimSeed seed = build_seed(spec);
  AimSeed fixed;
  for (const auto& [p, c] : seed.lambda0.terms()) fixed.lambda0.add_term(p, EPoly::constant(c(energy)));
  for (const auto& [p, c] : seed.s0.terms()) fixed.s0.add_term(p, EPoly::constant(c(energy)));
  SymbolicState state = SymbolicState::base(fixed);
  for (int i = 0; i < n; ++i) {
    state = aim_step(state, fixed);
    if (!state.lam.is_zero() || !state.s.is_zero()) state = normalize(std::move(state));
  }
  return state;
}

std::vector<double> default_radii(const ProblemSpec& spec, double energy, int count) {
  if (count < 10) throw DomainError("need at least 10 radii");
  const double lo = make_ansatz(spec).regime == Regime::Supersingular ? default_grid(spec, energy).r_min : 1e-7;
  const double hi = std::sqrt(std::max(energy, 1.0)) + 5;
  std::vector<double> radii(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) radii[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  return radii;
}

WavefnSamples reconstruct(const ProblemSpec& spec, const ConvergenceReport& report,
                          const std::vector<double>& radii) {
  if (report.termination != Termination::Converged) {
    throw DomainError("wavefunction needs a converged solve");
  }
  // lambda = 0 terminates exactly after state_index steps; a closed form with
  // lambda > 0 has no iteration behind it.
  int n = report.iterations_used;
  if (report.closed_form) {
    if (spec.lambda != 0) throw DomainError("closed-form energy with lambda > 0 has no AIM state to reconstruct from");
    n = spec.state_index + 2;
  }
  if (radii.size() < 2) throw DomainError("need at least two radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0) || (i > 0 && !(radii[i] > radii[i - 1]))) {
      throw DomainError("radii must be positive and strictly ascending");
    }
  }

  PrecisionContext ctx(report.digits_used + 10);
  const BigReal energy = report.energy;
  const SymbolicState state = state_at_energy(spec, energy, n);
  const SymFunc dlam = sf_diff(state.lam);
  const Ansatz ansatz = make_ansatz(spec);

  // Poles of rho are sign changes of lambda_n.
  std::vector<Pole> poles;
  const real lo = radii.front();
  const real hi = radii.back();
  const int scan = std::max(4000, static_cast<int>(8 * radii.size()));
  BigReal prev_r = make_real(static_cast<double>(lo));
  BigReal prev_v = eval_at(state.lam, prev_r, energy);
  for (int i = 1; i <= scan; ++i) {
    BigReal r = make_real(static_cast<double>(lo + (hi - lo) * i / scan));
    BigReal v = eval_at(state.lam, r, energy);
    if (v == 0 || (prev_v < 0) != (v < 0)) {
      BigReal a = prev_r;
      BigReal b = r;
      BigReal fa = prev_v;
      for (int it = 0; it < 200 && b - a > abs(b) * pow10_neg(PrecisionContext::current() - 3); ++it) {
        BigReal mid = (a + b) / 2;
        BigReal fm = eval_at(state.lam, mid, energy);
        if ((fa < 0) == (fm < 0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      const BigReal z = (a + b) / 2;
      const BigReal residue = eval_at(state.s, z, energy) / eval_at(dlam, z, energy);
      // residue -1: simple zero of f. Near 0: s_n and lambda_n share the zero
      // up to round-off, subtracted all the same so quadrature stays smooth.
      if (abs(residue + 1) < BigReal(0.1) || abs(residue) < BigReal(0.1)) {
        poles.push_back({z, residue});
      } else {
        throw PoleError("rho has a pole at r = " + to_string(z, 12) + " with residue " + to_string(residue, 6),
                        static_cast<double>(z));
      }
    }
    prev_r = std::move(r);
    prev_v = std::move(v);
  }

  auto rho_reg = [&](real t) -> real {
    const BigReal r = make_real(static_cast<double>(t));
    BigReal v = rho_at(state, r, energy);
    for (const Pole& p : poles) v -= p.residue / (r - p.where);
    const real out = static_cast<real>(v);
    if (!std::isfinite(out)) {
      throw PoleError("rho is not finite at r = " + std::to_string(static_cast<double>(t)),
                      static_cast<double>(t));
    }
    return out;
  };

  // log |f| relative to the first radius, plus the subtracted pole terms.
  const real total_tol = 1e-10L;
  std::vector<real> log_psi(radii.size());
  std::vector<int> sign(radii.size(), 1);
  real acc = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (i > 0) {
      const real a = radii[i - 1];
      const real b = radii[i];
      acc -= integrate(rho_reg, a, b, total_tol * (b - a) / (hi - lo));
    }
    real lf = acc;
    int sg = 1;
    for (const Pole& p : poles) {
      const real z = static_cast<real>(p.where);
      const real res = static_cast<real>(p.residue);
      lf -= res * (std::log(std::abs(radii[i] - z)) - std::log(std::abs(radii.front() - z)));
      if (radii[i] > z && res < -0.5L) sg = -sg;
    }
    log_psi[i] = lf + static_cast<real>(ansatz.log_value(make_real(radii[i])));
    sign[i] = sg;
  }

  const real top = *std::max_element(log_psi.begin(), log_psi.end());
  WavefnSamples out;
  out.radii = radii;
  out.values.resize(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    out.values[i] = static_cast<double>(sign[i] * std::exp(log_psi[i] - top));
  }
  double norm2 = 0;
  for (std::size_t i = 1; i < radii.size(); ++i) {
    norm2 += 0.5 * (radii[i] - radii[i - 1]) *
             (out.values[i] * out.values[i] + out.values[i - 1] * out.values[i - 1]);
  }
  out.normalization = std::sqrt(norm2);
  return out;
}

int node_count(const std::vector<double>& values) {
  if (values.size() < 10) throw DomainError("node count needs at least 10 samples");
  double top = 0;
  for (double v : values) top = std::max(top, std::abs(v));
  const double floor = 1e-9 * top;
  int nodes = 0;
  int last = 0;
  for (double v : values) {
    if (std::abs(v) < floor) continue;
    const int s = v > 0 ? 1 : -1;
    if (last != 0 && s != last) ++nodes;
    last = s;
  }
  return nodes;
}

}  // namespace aim
