#pragma once

#include <algorithm>
#include <vector>

namespace shadowbench::detail {

// One linear interpolation tap: value = lerp(src[lo], src[hi], frac).
struct LinearTap {
  int lo = 0;
  int hi = 0;
  double frac = 0.0;
};

// Half-pixel-centered source coordinates with edge clamp. Shared by mask
// resizing and tensor upsampling so both use the same sampling convention.
inline std::vector<LinearTap> linear_taps(int src_size, int dst_size) {
  std::vector<LinearTap> taps(static_cast<std::size_t>(dst_size));
  const double scale = static_cast<double>(src_size) / static_cast<double>(dst_size);
  for (int i = 0; i < dst_size; ++i) {
    double s = (i + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src_size - 1));
    const int lo = static_cast<int>(s);
    const int hi = std::min(lo + 1, src_size - 1);
    taps[static_cast<std::size_t>(i)] = {lo, hi, s - lo};
  }
  return taps;
}

// Convex combination that never leaves [min(a,b), max(a,b)], even under
// floating-point rounding.
inline double lerp_within(double a, double b, double frac) {
  const double v = a + frac * (b - a);
  return std::clamp(v, std::min(a, b), std::max(a, b));
}

}  // namespace shadowbench::detail
