#include "aim/oracle.hpp"

#include "aim/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace aim {

namespace {

using real = long double;

struct Params {
  real alpha;
  real lambda;
  real gamma;
  bool supersingular;
};

Params params_of(const ProblemSpec& spec) {
  spec.validate();
  return {static_cast<real>(to_double(spec.alpha)), static_cast<real>(to_double(spec.lambda)),
          static_cast<real>(to_double(spec.gamma)), spec.alpha > 2 && spec.lambda > 0};
}

// Box truncation and extended-precision round-off are not seen by the
// resolution-based error estimates; this is their allowance.
real truncation_floor(real e) { return 1e-9L * std::max<real>(1, std::abs(e)); }

real potential(const Params& p, real r) {
  real v = r * r + p.gamma * (p.gamma + 1) / (r * r);
  if (p.lambda != 0) v += p.lambda * std::pow(r, -p.alpha);
  return v;
}

// Interior nodes of one finite-difference grid.
struct Mesh {
  real left;
  real h;
  int n;
  real node(int i) const { return left + h * (i + 1); }
};

Mesh fd_mesh(const Params& p, const GridSpec& g, int n) {
  const real left = p.supersingular ? static_cast<real>(g.r_min) : 0.0L;
  return {left, (static_cast<real>(g.r_max) - left) / (n + 1), n};
}

// Number of eigenvalues below x (Sturm sequence of the shifted LDL^T).
int sturm_count(const std::vector<real>& diag, real off2, real x) {
  int count = 0;
  real q = 1;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    q = diag[i] - x - (i == 0 ? 0 : off2 / q);
    if (q == 0) q = -std::numeric_limits<real>::epsilon() * (std::abs(x) + 1);
    if (q < 0) ++count;
  }
  return count;
}

real fd_level(const Params& p, const Mesh& mesh, int which) {
  std::vector<real> diag(static_cast<std::size_t>(mesh.n));
  const real inv_h2 = 1 / (mesh.h * mesh.h);
  real lo = std::numeric_limits<real>::max();
  real hi = -lo;
  for (int i = 0; i < mesh.n; ++i) {
    diag[static_cast<std::size_t>(i)] = 2 * inv_h2 + potential(p, mesh.node(i));
    lo = std::min(lo, diag[static_cast<std::size_t>(i)] - 2 * inv_h2);
    hi = std::max(hi, diag[static_cast<std::size_t>(i)] + 2 * inv_h2);
  }
  const real off2 = inv_h2 * inv_h2;
  for (int it = 0; it < 400 && hi - lo > 4 * std::numeric_limits<real>::epsilon() * std::abs(hi); ++it) {
    const real mid = lo + (hi - lo) / 2;
    if (sturm_count(diag, off2, mid) > which) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo + (hi - lo) / 2;
}

// Fine-grid point count n = 4k + 3 so that (n-1)/2 and (n-3)/4 are the
// h-doubled grids.
int fine_points(int points) { return ((points - 3) / 4) * 4 + 3; }

}  // namespace

void GridSpec::validate() const {
  if (!(r_min > 0)) throw ConfigurationError("grid r_min must be positive");
  if (!(r_min < r_max)) throw ConfigurationError("grid needs r_min < r_max");
  if (points < 100) throw ConfigurationError("grid needs at least 100 points");
}

GridSpec default_grid(const ProblemSpec& spec, double energy_hint) {
  const Params p = params_of(spec);
  GridSpec g;
  if (p.supersingular) {
    // (2 sqrt(lambda) / (alpha - 2)) r^(1 - alpha/2) = 30
    const double a = static_cast<double>(p.alpha);
    const double coef = 2 * std::sqrt(static_cast<double>(p.lambda)) / (a - 2);
    g.r_min = std::pow(30.0 / coef, 1.0 / (1.0 - a / 2));
  } else {
    g.r_min = 1e-4;
  }
  g.r_max = std::max(12.0, std::sqrt(std::max(energy_hint, 0.0)) + 8.0);
  return g;
}

OracleValue fd_eigenvalue(const ProblemSpec& spec, const GridSpec& grid, int which,
                          double tolerance) {
  grid.validate();
  if (which < 0) throw ConfigurationError("eigenvalue index must be non-negative");
  const Params p = params_of(spec);
  const int n_fine = fine_points(grid.points);
  const int n_mid = (n_fine - 1) / 2;
  const int n_coarse = (n_mid - 1) / 2;
  const real e_fine = fd_level(p, fd_mesh(p, grid, n_fine), which);
  const real e_mid = fd_level(p, fd_mesh(p, grid, n_mid), which);
  const real e_coarse = fd_level(p, fd_mesh(p, grid, n_coarse), which);

  const real rich = (4 * e_fine - e_mid) / 3;
  const real rich_coarse = (4 * e_mid - e_coarse) / 3;
  OracleValue out{rich, std::abs(rich - rich_coarse)};
  if (out.error_bar > tolerance) {
    throw AccuracyError("finite-difference grid too coarse: extrapolants differ by " +
                            std::to_string(static_cast<double>(out.error_bar)),
                        static_cast<double>(e_mid), static_cast<double>(e_fine));
  }
  out.error_bar = std::max(out.error_bar, truncation_floor(rich));
  return out;
}

FdEigenvector fd_eigenvector(const ProblemSpec& spec, const GridSpec& grid, int which) {
  grid.validate();
  const Params p = params_of(spec);
  const Mesh mesh = fd_mesh(p, grid, grid.points);
  const real e = fd_level(p, mesh, which);
  const real h2 = mesh.h * mesh.h;
  const int n = mesh.n;
  auto diag = [&](int i) { return 2 + h2 * (potential(p, mesh.node(i)) - e); };

  // Outward recurrence up to the outer turning point, inward from the far
  // edge down to it; each direction is stable only into its own region.
  int turn = n - 1;
  while (turn > 1 && potential(p, mesh.node(turn)) > e) --turn;
  std::vector<real> psi(static_cast<std::size_t>(n), 0);
  auto at = [&](int i) -> real& { return psi[static_cast<std::size_t>(i)]; };
  constexpr real kBig = 1e100L;

  at(0) = 1e-30L;
  if (n > 1) at(1) = diag(0) * at(0);
  for (int i = 1; i < turn; ++i) {
    at(i + 1) = diag(i) * at(i) - at(i - 1);
    if (std::abs(at(i + 1)) > kBig) {
      for (int j = 0; j <= i + 1; ++j) at(j) /= kBig;
    }
  }
  const real left = at(turn);

  std::vector<real> tail(static_cast<std::size_t>(n), 0);
  auto tl = [&](int i) -> real& { return tail[static_cast<std::size_t>(i)]; };
  tl(n - 1) = 1e-30L;
  if (n > 1) tl(n - 2) = diag(n - 1) * tl(n - 1);
  for (int i = n - 2; i > turn; --i) {
    tl(i - 1) = diag(i) * tl(i) - tl(i + 1);
    if (std::abs(tl(i - 1)) > kBig) {
      for (int j = i - 1; j < n; ++j) tl(j) /= kBig;
    }
  }
  const real scale = tl(turn) != 0 ? left / tl(turn) : 0;
  for (int i = turn + 1; i < n; ++i) at(i) = tl(i) * scale;

  real peak = 0;
  for (real v : psi) peak = std::max(peak, std::abs(v));
  FdEigenvector out;
  for (int i = 0; i < n; ++i) {
    out.radii.push_back(static_cast<double>(mesh.node(i)));
    out.values.push_back(peak > 0 ? static_cast<double>(at(i) / peak) : 0.0);
  }
  return out;
}

namespace {

// Solutions of psi'' = (V - E) psi on a uniform mesh by Numerov's method.
struct ShootMesh {
  real left;
  real h;
  int n;  // nodes 0..n
  real node(int i) const { return left + h * i; }
};

void numerov_rescale(std::vector<real>& psi, int from, int to) {
  const real big = 1e200L;
  if (std::abs(psi[static_cast<std::size_t>(to)]) > big) {
    const int lo = std::min(from, to);
    const int hi = std::max(from, to);
    for (int i = lo; i <= hi; ++i) psi[static_cast<std::size_t>(i)] /= big;
  }
}

real wronskian_mismatch(const Params& p, const ShootMesh& m, real e, int match) {
  const real h2 = m.h * m.h / 12;
  auto q = [&](int i) { return potential(p, m.node(i)) - e; };
  std::vector<real> out(static_cast<std::size_t>(m.n) + 1, 0);
  std::vector<real> in(static_cast<std::size_t>(m.n) + 1, 0);

  // outward start
  for (int i = 0; i < 2; ++i) {
    const real r = m.node(i);
    real v;
    if (p.supersingular) {
      const real mm = (p.alpha - 2) / 2;
      v = std::pow(r, (mm + 1) / 2) * std::exp(-std::sqrt(p.lambda) / (mm * std::pow(r, mm)) - r * r / 2);
    } else if (p.alpha == 2 || p.lambda == 0) {
      // lambda/r^2 joins the centrifugal term
      const real g = -0.5L + std::sqrt((p.gamma + 0.5L) * (p.gamma + 0.5L) + (p.alpha == 2 ? p.lambda : 0));
      v = std::pow(r, g + 1);
    } else {
      // r^(gamma+1) (1 + c r^(2-alpha)) with the leading correction from lambda/r^alpha
      const real c = p.lambda / ((2 - p.alpha) * (2 * p.gamma + 3 - p.alpha));
      v = std::pow(r, p.gamma + 1) * (1 + c * std::pow(r, 2 - p.alpha));
    }
    out[static_cast<std::size_t>(i)] = v;
  }
  if (out[0] == 0 && out[1] == 0) throw NumericError("outward start underflows; raise r_min");
  for (int i = 1; i < match + 1; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k + 1] = (2 * out[k] * (1 + 5 * h2 * q(i)) - out[k - 1] * (1 - h2 * q(i - 1))) /
                 (1 - h2 * q(i + 1));
    numerov_rescale(out, 0, i + 1);
  }

  // inward start from Gaussian decay
  const real rmax = m.node(m.n);
  for (int i = m.n; i >= m.n - 1; --i) {
    const real r = m.node(i);
    in[static_cast<std::size_t>(i)] = std::exp(-(r * r - rmax * rmax) / 2) * std::pow(r / rmax, (e - 1) / 2);
  }
  for (int i = m.n - 1; i > match; --i) {
    const auto k = static_cast<std::size_t>(i);
    in[k - 1] = (2 * in[k] * (1 + 5 * h2 * q(i)) - in[k + 1] * (1 - h2 * q(i + 1))) /
                (1 - h2 * q(i - 1));
    numerov_rescale(in, m.n, i - 1);
  }

  const auto a = static_cast<std::size_t>(match);
  const real w = out[a + 1] * in[a] - out[a] * in[a + 1];
  const real no = std::hypot(out[a], out[a + 1]);
  const real ni = std::hypot(in[a], in[a + 1]);
  return w / (no * ni);
}

}  // namespace

OracleValue shoot_eigenvalue(const ProblemSpec& spec, const GridSpec& grid, double e_lo,
                             double e_hi, int target_digits) {
  grid.validate();
  if (!(e_lo < e_hi)) throw BracketError("shooting bracket needs lo < hi");
  const Params p = params_of(spec);
  const ShootMesh m{static_cast<real>(grid.r_min),
                    (static_cast<real>(grid.r_max) - static_cast<real>(grid.r_min)) / grid.points,
                    grid.points};

  auto match_index = [&](real e) {
    // outer classical turning point, kept away from both ends
    int idx = m.n / 2;
    for (int i = m.n - 10; i > 10; --i) {
      if (potential(p, m.node(i)) < e) {
        idx = i;
        break;
      }
    }
    return std::clamp(idx, 10, m.n - 10);
  };
  // one matching point for the whole bisection keeps the mismatch continuous in E
  const int match = match_index(static_cast<real>(0.5 * (e_lo + e_hi)));

  real lo = e_lo;
  real hi = e_hi;
  real f_lo = wronskian_mismatch(p, m, lo, match);
  const real f_hi = wronskian_mismatch(p, m, hi, match);
  if (f_lo * f_hi > 0) {
    throw BracketError("no sign change of the shooting mismatch in [" + std::to_string(e_lo) +
                       ", " + std::to_string(e_hi) + "]");
  }
  const real tol = std::pow(10.0L, -static_cast<real>(target_digits));
  while (hi - lo > tol) {
    const real mid = lo + (hi - lo) / 2;
    if (mid == lo || mid == hi) break;
    const real f_mid = wronskian_mismatch(p, m, mid, match);
    if ((f_mid < 0) == (f_lo < 0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  const real e = lo + (hi - lo) / 2;
  return {e, std::max(hi - lo, truncation_floor(e))};
}

BigReal perturbation_first_order(const ProblemSpec& spec) {
  spec.validate();
  if (spec.alpha >= 2 * spec.gamma + 3) {
    throw ConfigurationError(
        "first-order shift diverges for alpha >= 2 gamma + 3 (the matrix element of r^-alpha is infinite)");
  }
  const BigReal g = to_big(spec.gamma);
  const BigReal a = to_big(spec.alpha);
  const BigReal ratio = boost::math::tgamma(BigReal(g + (3 - a) / 2)) / boost::math::tgamma(BigReal(g + BigReal(3) / 2));
  return 2 * g + 3 + to_big(spec.lambda) * ratio;
}

}  // namespace aim
