#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aim/error.hpp"
#include "aim/oracle.hpp"
#include "aim/wavefn.hpp"

#include <algorithm>
#include <cmath>

using namespace aim;

namespace {

ProblemSpec make(const char* alpha, const char* lambda, const char* gamma, int state = 0) {
  ProblemSpec s;
  s.alpha = parse_rational(alpha);
  s.lambda = parse_rational(lambda);
  s.gamma = parse_rational(gamma);
  s.state_index = state;
  return s;
}

ConvergenceReport converged(const ProblemSpec& spec, int target = 10) {
  PrecisionPolicy policy;
  policy.start_digits = 30;
  policy.target_digits = target;
  ConvergenceReport r = solve(spec, r0_heuristic(spec), policy, 300, 3);
  REQUIRE(r.termination == Termination::Converged);
  return r;
}

std::size_t argmax_abs(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end(), [](double a, double b) {
                                    return std::abs(a) < std::abs(b);
                                  }) - v.begin());
}

std::vector<double> uniform(double lo, double hi, int count) {
  std::vector<double> r;
  for (int i = 0; i < count; ++i) r.push_back(lo + (hi - lo) * i / (count - 1));
  return r;
}

}  // namespace

TEST_CASE("rho on exact oscillator states") {
  PrecisionContext ctx(40);
  const ProblemSpec spec = make("1", "0", "0");
  SUBCASE("ground state has f = 1") {
    const SymbolicState s = state_at_energy(spec, BigReal(3), 0);
    for (double r : {0.5, 2.0, 3.7}) CHECK(rho_at(s, BigReal(r), BigReal(3)) == 0);
  }
  SUBCASE("first excited state") {
    // f = 1 - 2r^2/3, rho = -f'/f
    const SymbolicState s = state_at_energy(spec, BigReal(7), 2);
    for (const char* rs : {"2", "0.5", "3.1"}) {
      const BigReal r = make_real(rs);
      const BigReal f = 1 - 2 * r * r / 3;
      const BigReal df = -4 * r / 3;
      CHECK(abs(rho_at(s, r, BigReal(7)) + df / f) < pow10_neg(30));
    }
    CHECK(abs(rho_at(s, BigReal(2), BigReal(7)) - make_real("-1.6")) < pow10_neg(30));
  }
  SUBCASE("zero of lambda_n") {
    // lambda_0 = 2r - 2/r vanishes at r = 1
    const SymbolicState s = state_at_energy(spec, BigReal(5), 0);
    CHECK_THROWS_AS(rho_at(s, BigReal(1), BigReal(5)), PoleError);
  }
  CHECK_THROWS_AS(state_at_energy(spec, BigReal(3), -1), DomainError);
}

TEST_CASE("node_count") {
  std::vector<double> ground, first;
  for (double r : uniform(0.01, 6, 200)) {
    ground.push_back(r * std::exp(-r * r / 2));
    first.push_back(r * (1 - 2 * r * r / 3) * std::exp(-r * r / 2));
  }
  CHECK(node_count(ground) == 0);
  CHECK(node_count(first) == 1);
  // tiny wiggles in the tail are ignored
  std::vector<double> noisy = ground;
  noisy.back() = -1e-14;
  CHECK(node_count(noisy) == 0);
  CHECK_THROWS_AS(node_count(std::vector<double>(5, 1.0)), DomainError);
}

TEST_CASE("reconstructed oscillator ground state") {
  const ProblemSpec spec = make("1", "0", "0");
  const ConvergenceReport r = converged(spec);
  const WavefnSamples w = reconstruct(spec, r, default_radii(spec, 3));
  const std::vector<double> psi = w.normalized();
  CHECK(node_count(w) == 0);
  CHECK(std::abs(w.radii[argmax_abs(psi)] - 1.0) < 0.03);

  // pointwise against r e^(-r^2/2), normalised the same way
  WavefnSamples exact;
  exact.radii = w.radii;
  for (double x : w.radii) exact.values.push_back(x * std::exp(-x * x / 2));
  double norm = 0;
  for (std::size_t i = 1; i < exact.radii.size(); ++i) {
    const double a = exact.values[i - 1], b = exact.values[i];
    norm += 0.5 * (a * a + b * b) * (exact.radii[i] - exact.radii[i - 1]);
  }
  const double peak = *std::max_element(psi.begin(), psi.end());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (std::abs(psi[i]) < 1e-3 * peak) continue;
    CHECK(std::abs(psi[i] - exact.values[i] / std::sqrt(norm)) <= 1e-6 * std::abs(psi[i]));
  }
}

TEST_CASE("node theorem on unperturbed states") {
  for (const char* gamma : {"0", "1"}) {
    for (int k = 0; k <= 3; ++k) {
      CAPTURE(gamma);
      CAPTURE(k);
      const ProblemSpec spec = make("1", "0", gamma, k);
      const ConvergenceReport r = converged(spec);
      const WavefnSamples w = reconstruct(spec, r, default_radii(spec, static_cast<double>(r.energy)));
      CHECK(node_count(w) == k);
    }
  }
}

TEST_CASE("first excited node position") {
  const ProblemSpec spec = make("1", "0", "0", 1);
  const ConvergenceReport r = converged(spec);
  const WavefnSamples w = reconstruct(spec, r, uniform(0.01, 6, 600));
  REQUIRE(node_count(w) == 1);
  for (std::size_t i = 1; i < w.values.size(); ++i) {
    if ((w.values[i - 1] > 0) != (w.values[i] > 0)) {
      CHECK(w.radii[i - 1] <= std::sqrt(1.5) + 1e-12);
      CHECK(w.radii[i] >= std::sqrt(1.5) - 1e-12);
    }
  }
}

TEST_CASE("supersingular ground state") {
  const ProblemSpec spec = make("4", "0.1", "0");
  const ConvergenceReport r = converged(spec, 7);
  const WavefnSamples w = reconstruct(spec, r, default_radii(spec, static_cast<double>(r.energy)));
  const std::vector<double> psi = w.normalized();
  CHECK(node_count(w) == 0);
  const double peak = std::abs(psi[argmax_abs(psi)]);
  CHECK(std::abs(psi.front()) < 1e-6 * peak);
  CHECK(std::abs(psi.back()) < 1e-6 * peak);

  // same sign pattern as the finite-difference eigenvector
  CHECK(node_count(fd_eigenvector(spec, default_grid(spec), 0).values) == 0);
}

TEST_CASE("reconstruct preconditions") {
  const ProblemSpec spec = make("1", "0", "0");
  ConvergenceReport r = converged(spec);
  CHECK_THROWS_AS(reconstruct(spec, r, {1.0}), DomainError);
  CHECK_THROWS_AS(reconstruct(spec, r, {1.0, 0.5, 2.0}), DomainError);
  CHECK_THROWS_AS(reconstruct(spec, r, {-1.0, 1.0}), DomainError);
  r.termination = Termination::MaxIter;
  CHECK_THROWS_AS(reconstruct(spec, r, {0.5, 1.0}), DomainError);

  const ProblemSpec spiked = make("2", "2", "0");
  PrecisionPolicy policy;
  const ConvergenceReport closed = solve(spiked, BigReal(3), policy, 100, 3);
  REQUIRE(closed.closed_form);
  CHECK_THROWS_AS(reconstruct(spiked, closed, {0.5, 1.0}), DomainError);
}

TEST_CASE("default radii") {
  const ProblemSpec soft = make("1", "0", "0");
  const auto r = default_radii(soft, 3, 50);
  CHECK(r.size() == 50);
  CHECK(r.front() > 0);
  CHECK(r.back() == doctest::Approx(std::sqrt(3.0) + 5));
  CHECK(std::is_sorted(r.begin(), r.end()));
  // the spike keeps psi negligible below the supersingular grid start
  const ProblemSpec spiky = make("4", "1", "0");
  CHECK(default_radii(spiky, 4.5).front() == doctest::Approx(default_grid(spiky).r_min));
  CHECK_THROWS_AS(default_radii(soft, 3, 5), DomainError);
}
