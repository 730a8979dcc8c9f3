#pragma once

// Dataset-complexity statistics over binary shadow masks and their images:
// area proportion, connected shadow regions, spatial location maps, and the
// chi-squared color contrast between shadow and non-shadow regions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "shadowbench/errors.hpp"
#include "shadowbench/interp.hpp"
#include "shadowbench/mask.hpp"

namespace shadowbench {

/// Fraction of pixels that are foreground, in [0,1].
inline double area_proportion(const BinaryMask& gt) {
  if (gt.pixel_count() == 0) return 0.0;
  return static_cast<double>(gt.foreground_count()) /
         static_cast<double>(gt.pixel_count());
}

enum class Connectivity { four = 4, eight = 8 };

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Pixel counts of every foreground connected component, unordered.
inline std::vector<std::uint64_t> component_sizes(const BinaryMask& gt,
                                                  Connectivity conn = Connectivity::eight) {
  const int w = gt.width;
  const int h = gt.height;
  detail::UnionFind uf(gt.pixel_count());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!gt.values[i]) continue;
      if (x > 0 && gt.values[i - 1]) uf.unite(i, i - 1);
      if (y > 0 && gt.values[i - w]) uf.unite(i, i - w);
      if (conn == Connectivity::eight && y > 0) {
        if (x > 0 && gt.values[i - w - 1]) uf.unite(i, i - w - 1);
        if (x + 1 < w && gt.values[i - w + 1]) uf.unite(i, i - w + 1);
      }
    }
  }
  std::map<std::size_t, std::uint64_t> sizes;
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    if (gt.values[i]) ++sizes[uf.find(i)];
  }
  std::vector<std::uint64_t> out;
  out.reserve(sizes.size());
  for (const auto& [root, size] : sizes) out.push_back(size);
  return out;
}

/// Number of foreground components whose area is at least min_area_frac of
/// the image (inclusive threshold). Speckles below the floor are ignored.
inline int count_shadow_regions(const BinaryMask& gt, double min_area_frac = 0.0005,
                                Connectivity conn = Connectivity::eight) {
  if (min_area_frac < 0.0 || min_area_frac > 1.0) {
    throw std::invalid_argument("count_shadow_regions: min_area_frac must lie in [0,1]");
  }
  const double floor_px = min_area_frac * static_cast<double>(gt.pixel_count());
  int n = 0;
  for (std::uint64_t s : component_sizes(gt, conn)) {
    if (static_cast<double>(s) >= floor_px) ++n;
  }
  return n;
}

/// Mean and population standard deviation of a sample.
struct ComponentStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::uint64_t count = 0;
};

inline ComponentStats summarize_sample(const std::vector<double>& xs) {
  ComponentStats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(acc / static_cast<double>(xs.size()));
  return s;
}

/// Average foreground occupancy on a fixed grid; every mask is resampled to
/// kSize x kSize so images of different shapes can be averaged.
struct LocationMap {
  static constexpr int kSize = 512;
  std::vector<double> cells;  // kSize * kSize, each in [0,1]
  std::uint64_t image_count = 0;
};

/// Accumulates location maps one mask at a time; mergeable across workers.
class LocationAccumulator {
 public:
  LocationAccumulator()
      : sum_(static_cast<std::size_t>(LocationMap::kSize) * LocationMap::kSize, 0.0) {}

  void add(const BinaryMask& gt) {
    const ProbMask resized =
        resize_bilinear(to_prob(gt), LocationMap::kSize, LocationMap::kSize);
    for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += resized.values[i];
    ++count_;
  }

  void merge(const LocationAccumulator& o) {
    for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += o.sum_[i];
    count_ += o.count_;
  }

  std::uint64_t count() const { return count_; }

  LocationMap finalize() const {
    if (count_ == 0) throw EmptyStream("LocationAccumulator: no masks accumulated");
    LocationMap m;
    m.image_count = count_;
    m.cells.resize(sum_.size());
    for (std::size_t i = 0; i < sum_.size(); ++i) {
      m.cells[i] = sum_[i] / static_cast<double>(count_);
    }
    return m;
  }

 private:
  std::vector<double> sum_;
  std::uint64_t count_ = 0;
};

inline LocationMap accumulate_location_map(const std::vector<BinaryMask>& masks) {
  LocationAccumulator acc;
  for (const auto& m : masks) acc.add(m);
  return acc.finalize();
}

/// Chi-squared distance between the joint RGB color histograms (8 bins per
/// channel, 512 joint bins, L1-normalized) of the foreground and background
/// regions of an image. 0 for identical distributions, 1 for disjoint ones.
inline double color_contrast(const RgbImage& image, const BinaryMask& gt) {
  if (!same_dimensions(image.width, image.height, gt.width, gt.height)) {
    throw DimensionMismatch("color_contrast: image and mask differ in size");
  }
  const std::uint64_t fg = gt.foreground_count();
  const std::uint64_t bg = gt.pixel_count() - fg;
  if (fg == 0 || bg == 0) {
    throw DegenerateRegion("color_contrast: one of the regions is empty");
  }
  std::vector<double> hf(512, 0.0);
  std::vector<double> hb(512, 0.0);
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    const std::uint8_t r = image.values[3 * i];
    const std::uint8_t g = image.values[3 * i + 1];
    const std::uint8_t b = image.values[3 * i + 2];
    const std::size_t bin = (static_cast<std::size_t>(r >> 5) << 6) |
                            (static_cast<std::size_t>(g >> 5) << 3) |
                            static_cast<std::size_t>(b >> 5);
    (gt.values[i] ? hf : hb)[bin] += 1.0;
  }
  for (double& v : hf) v /= static_cast<double>(fg);
  for (double& v : hb) v /= static_cast<double>(bg);
  double chi2 = 0.0;
  for (std::size_t k = 0; k < 512; ++k) {
    const double den = hf[k] + hb[k];
    if (den > 0.0) {
      const double diff = hf[k] - hb[k];
      chi2 += diff * diff / den;
    }
  }
  return 0.5 * chi2;
}

/// Fixed-width histogram over [lo, hi]; bins are right-open except the last,
/// which also takes hi itself. Out-of-range samples clamp into the end bins.
struct HistogramSpec {
  int bin_count = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> counts;
  std::vector<double> normalized;  // counts / total, or all zeros when empty
};

inline HistogramSpec build_histogram(const std::vector<double>& xs, int bin_count,
                                     double lo, double hi) {
  if (bin_count < 1) throw std::invalid_argument("build_histogram: bin_count must be >= 1");
  if (!(lo < hi)) throw std::invalid_argument("build_histogram: lo must be < hi");
  HistogramSpec spec;
  spec.bin_count = bin_count;
  spec.lo = lo;
  spec.hi = hi;
  spec.counts.assign(static_cast<std::size_t>(bin_count), 0);
  spec.normalized.assign(static_cast<std::size_t>(bin_count), 0.0);
  for (double x : xs) {
    int b = static_cast<int>(std::floor((x - lo) / (hi - lo) * bin_count));
    b = std::clamp(b, 0, bin_count - 1);
    ++spec.counts[static_cast<std::size_t>(b)];
  }
  if (!xs.empty()) {
    for (std::size_t i = 0; i < spec.counts.size(); ++i) {
      spec.normalized[i] =
          static_cast<double>(spec.counts[i]) / static_cast<double>(xs.size());
    }
  }
  return spec;
}

}  // namespace shadowbench
