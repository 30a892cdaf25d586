#pragma once

#include "aim/epoly.hpp"

#include <optional>
#include <vector>

namespace aim {

inline constexpr int kDefaultScanPoints = 256;
inline constexpr int kMaxScanPoints = 4096;

/// Real roots of p in [lo, hi], ascending. Uniform sign-change scan over
/// scan_points cells, each bracket bisected to the working precision.
/// Pairs of roots sharing one cell cancel and are missed; callers rescan at
/// a finer resolution when that matters.
std::vector<BigReal> epoly_real_roots(const EPoly& p, const BigReal& lo,
                                      const BigReal& hi, int scan_points);

/// Bisects a bracket [a, b] with p(a)*p(b) <= 0 down to working precision.
BigReal bisect_root(const EPoly& p, BigReal a, BigReal b);

/// Root of p closest to `center` inside [center - half_width, center + half_width],
/// or nothing when the window holds no sign change.
std::optional<BigReal> nearest_root(const EPoly& p, const BigReal& center,
                                    const BigReal& half_width, int scan_points = 64);

}  // namespace aim
