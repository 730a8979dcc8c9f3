#pragma once

// Exact Euclidean distance transform via the separable lower-envelope-of-
// parabolas method. All intermediate squared distances are small integers
// held in doubles, so the result matches a brute-force scan bit for bit.

#include <cmath>
#include <limits>
#include <vector>

#include "shadowbench/mask.hpp"

namespace shadowbench {

/// Per-pixel Euclidean distance to the nearest foreground pixel.
/// Zero exactly at foreground pixels; +infinity everywhere when the mask
/// has no foreground at all.
struct DistanceField {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

namespace detail {

// 1-D squared distance transform: d[x] = min_q (x-q)^2 + f[q].
// Entries of f may be +infinity; such parabolas are skipped.
inline void squared_dt_1d(const std::vector<double>& f, std::vector<double>& d,
                          std::vector<int>& v, std::vector<double>& z) {
  const double inf = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[static_cast<std::size_t>(q)] == inf) continue;
    double s = 0.0;
    while (k >= 0) {
      const int p = v[static_cast<std::size_t>(k)];
      // Intersection of the parabolas rooted at q and p.
      s = ((f[static_cast<std::size_t>(q)] + static_cast<double>(q) * q) -
           (f[static_cast<std::size_t>(p)] + static_cast<double>(p) * p)) /
          (2.0 * q - 2.0 * p);
      if (s <= z[static_cast<std::size_t>(k)]) {
        --k;
      } else {
        break;
      }
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
    } else {
      ++k;
      v[static_cast<std::size_t>(k)] = q;
      z[static_cast<std::size_t>(k)] = s;
      z[static_cast<std::size_t>(k) + 1] = inf;
    }
  }
  if (k < 0) {
    for (int x = 0; x < n; ++x) d[static_cast<std::size_t>(x)] = inf;
    return;
  }
  int j = 0;
  for (int x = 0; x < n; ++x) {
    while (z[static_cast<std::size_t>(j) + 1] < x) ++j;
    const int p = v[static_cast<std::size_t>(j)];
    const double dx = static_cast<double>(x - p);
    d[static_cast<std::size_t>(x)] = dx * dx + f[static_cast<std::size_t>(p)];
  }
}

}  // namespace detail

inline DistanceField euclidean_distance_transform(const BinaryMask& gt) {
  const double inf = std::numeric_limits<double>::infinity();
  const int w = gt.width;
  const int h = gt.height;
  DistanceField out{w, h, std::vector<double>(gt.pixel_count())};

  // Column pass: squared distance to the nearest foreground pixel in the
  // same column (integer distances, two sweeps).
  std::vector<double> colsq(gt.pixel_count());
  for (int x = 0; x < w; ++x) {
    double dist = inf;
    for (int y = 0; y < h; ++y) {
      dist = gt.at(x, y) ? 0.0 : dist + 1.0;
      colsq[static_cast<std::size_t>(y) * w + x] = dist;
    }
    dist = inf;
    for (int y = h - 1; y >= 0; --y) {
      dist = gt.at(x, y) ? 0.0 : dist + 1.0;
      double& cell = colsq[static_cast<std::size_t>(y) * w + x];
      cell = std::min(cell, dist);
      cell *= cell;  // inf stays inf
    }
  }

  // Row pass: 1-D transform over the squared column distances.
  std::vector<double> f(static_cast<std::size_t>(w));
  std::vector<double> d(static_cast<std::size_t>(w));
  std::vector<int> v(static_cast<std::size_t>(w));
  std::vector<double> z(static_cast<std::size_t>(w) + 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      f[static_cast<std::size_t>(x)] = colsq[static_cast<std::size_t>(y) * w + x];
    }
    detail::squared_dt_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) {
      out.values[static_cast<std::size_t>(y) * w + x] = std::sqrt(d[static_cast<std::size_t>(x)]);
    }
  }
  return out;
}

}  // namespace shadowbench
