#include "aim/roots.hpp"

#include "aim/error.hpp"

namespace aim {

namespace {

int sign_of(const BigReal& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

}  // namespace

BigReal bisect_root(const EPoly& p, BigReal a, BigReal b) {
  int sa = sign_of(p(a));
  if (sa == 0) return a;
  if (sign_of(p(b)) == 0) return b;
  const long bits = static_cast<long>(BigReal::default_precision() * 3.33) + 8;
  const BigReal eps = pow(BigReal(2), -bits);
  for (long it = 0; it < 4 * bits; ++it) {
    BigReal m = (a + b) / 2;
    if (m == a || m == b) break;
    const int sm = sign_of(p(m));
    if (sm == 0) return m;
    if (sm == sa) {
      a = m;
    } else {
      b = m;
    }
    if (b - a <= eps * (1 + abs(m))) break;
  }
  return (a + b) / 2;
}

std::vector<BigReal> epoly_real_roots(const EPoly& p, const BigReal& lo,
                                      const BigReal& hi, int scan_points) {
  if (!(lo < hi)) throw DomainError("root search needs lo < hi");
  if (scan_points < 2) throw DomainError("root search needs at least 2 scan points");
  if (p.has_non_finite()) throw NumericError("polynomial has non-finite coefficients");
  std::vector<BigReal> out;
  if (p.is_zero()) return out;

  const BigReal step = (hi - lo) / scan_points;
  BigReal x0 = lo;
  BigReal f0 = p(x0);
  if (f0 == 0) out.push_back(x0);
  for (int i = 1; i <= scan_points; ++i) {
    BigReal x1 = (i == scan_points) ? hi : lo + step * i;
    BigReal f1 = p(x1);
    if (f1 == 0) {
      out.push_back(x1);
    } else if (f0 != 0 && sign_of(f0) != sign_of(f1)) {
      out.push_back(bisect_root(p, x0, x1));
    }
    x0 = std::move(x1);
    f0 = std::move(f1);
  }
  return out;
}

std::optional<BigReal> nearest_root(const EPoly& p, const BigReal& center,
                                    const BigReal& half_width, int scan_points) {
  auto roots = epoly_real_roots(p, center - half_width, center + half_width, scan_points);
  if (roots.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < roots.size(); ++i) {
    if (abs(roots[i] - center) < abs(roots[best] - center)) best = i;
  }
  return roots[best];
}

}  // namespace aim
