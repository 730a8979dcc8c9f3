#pragma once

// Binary-mask BER and the weighted F-measure for continuous predictions,
// plus the dense-matrix oracle used to cross-check the fast path.
//
// The weighted measure couples errors at nearby foreground pixels through a
// Gaussian dependency operator and inflates false positives far from the
// foreground through an exponential importance map. The fast path applies
// the dependency operator as a pair of separable truncated-Gaussian
// convolutions; the oracle materializes it as a dense matrix.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "shadowbench/distance_transform.hpp"
#include "shadowbench/errors.hpp"
#include "shadowbench/mask.hpp"

namespace shadowbench {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

inline ConfusionCounts confusion_counts(const BinaryMask& pred, const BinaryMask& gt) {
  if (!same_dimensions(pred.width, pred.height, gt.width, gt.height)) {
    throw DimensionMismatch("confusion_counts: prediction and ground truth differ in size");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    if (gt.values[i]) {
      if (pred.values[i]) ++c.tp; else ++c.fn;
    } else {
      if (pred.values[i]) ++c.fp; else ++c.tn;
    }
  }
  return c;
}

/// Balanced error rate in [0,100]. Both classes weigh equally regardless of
/// their pixel counts; each class must be present.
inline double ber(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0 || c.tn + c.fp == 0) {
    throw DegenerateClass("ber: one of the classes has no pixels");
  }
  const double pos = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  const double neg = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  return (1.0 - 0.5 * (pos + neg)) * 100.0;
}

/// kernel_radius value that applies the dependency window to the whole image.
inline constexpr int kFullKernel = -1;

/// Defaults follow the measure's reference settings.
struct MetricConfig {
  double sigma_sq = 5.0;  // variance of the dependency Gaussian, pixels^2
  double beta_sq = 1.0;
  int kernel_radius = 7;  // ceil(3*sigma) for sigma^2 = 5, or kFullKernel
  double alpha_decay = std::log(0.5) / 5.0;  // importance falloff, negative
  // When false, foreground rows of the dependency operator keep the raw
  // 1/sqrt(2*pi*sigma^2)-scaled Gaussian weights instead of being divided
  // by their row sum. Exposed for sensitivity analysis only.
  bool normalize_propagation = true;

  bool full_kernel() const { return kernel_radius == kFullKernel; }

  void validate() const {
    if (!(sigma_sq > 0.0)) throw std::invalid_argument("MetricConfig: sigma_sq must be positive");
    if (!(beta_sq > 0.0)) throw std::invalid_argument("MetricConfig: beta_sq must be positive");
    if (kernel_radius < 1 && kernel_radius != kFullKernel) {
      throw std::invalid_argument("MetricConfig: kernel_radius must be >= 1 or full");
    }
    if (!(alpha_decay < 0.0)) throw std::invalid_argument("MetricConfig: alpha_decay must be negative");
  }
};

/// Intermediate fields of the weighted measure, kept for inspection and tests.
struct WeightedErrorState {
  int width = 0;
  int height = 0;
  std::vector<double> error;        // |G - M|
  std::vector<double> propagated;   // dependency-weighted error
  std::vector<double> distance;     // to the nearest foreground pixel
  std::vector<double> importance;   // 1 on foreground, 2 - exp(alpha*distance) off it
  std::vector<double> weighted;     // min(error, propagated) * importance
};

struct WeightedCounts {
  double tp = 0.0;
  double tn = 0.0;
  double fp = 0.0;
  double fn = 0.0;
};

namespace detail {

inline double gaussian_prefactor(double sigma_sq) {
  return 1.0 / std::sqrt(2.0 * 3.141592653589793238462643383279502884 * sigma_sq);
}

inline std::vector<double> gaussian_taps(double sigma_sq, int radius) {
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  for (int k = -radius; k <= radius; ++k) {
    taps[static_cast<std::size_t>(k + radius)] =
        std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma_sq));
  }
  return taps;
}

// Separable weighted blur with zero padding outside the image.
inline std::vector<double> blur_separable(const std::vector<double>& src, int w, int h,
                                          const std::vector<double>& taps_x,
                                          const std::vector<double>& taps_y) {
  const int rx = (static_cast<int>(taps_x.size()) - 1) / 2;
  const int ry = (static_cast<int>(taps_y.size()) - 1) / 2;
  std::vector<double> tmp(src.size());
  std::vector<double> out(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int k0 = std::max(-rx, -x);
      const int k1 = std::min(rx, w - 1 - x);
      double sum = 0.0;
      for (int k = k0; k <= k1; ++k) {
        sum += taps_x[static_cast<std::size_t>(k + rx)] *
               src[static_cast<std::size_t>(y) * w + (x + k)];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = sum;
    }
  }
  for (int y = 0; y < h; ++y) {
    const int k0 = std::max(-ry, -y);
    const int k1 = std::min(ry, h - 1 - y);
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      for (int k = k0; k <= k1; ++k) {
        sum += taps_y[static_cast<std::size_t>(k + ry)] *
               tmp[static_cast<std::size_t>(y + k) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = sum;
    }
  }
  return out;
}

}  // namespace detail

/// Propagate an error map through the Gaussian dependency operator.
/// At foreground pixels the result is the Gaussian-weighted combination of
/// errors at foreground pixels inside the window; background pixels keep
/// their own error (the operator is the identity there).
inline std::vector<double> gaussian_propagate(const std::vector<double>& error,
                                              const BinaryMask& gt,
                                              const MetricConfig& cfg) {
  cfg.validate();
  if (error.size() != gt.pixel_count()) {
    throw DimensionMismatch("gaussian_propagate: error map and mask differ in size");
  }
  const int w = gt.width;
  const int h = gt.height;
  const int rx = cfg.full_kernel() ? w - 1 : cfg.kernel_radius;
  const int ry = cfg.full_kernel() ? h - 1 : cfg.kernel_radius;
  const auto taps_x = detail::gaussian_taps(cfg.sigma_sq, rx);
  const auto taps_y = detail::gaussian_taps(cfg.sigma_sq, ry);

  std::vector<double> fg(gt.pixel_count());
  std::vector<double> masked_error(gt.pixel_count());
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    fg[i] = static_cast<double>(gt.values[i]);
    masked_error[i] = error[i] * fg[i];
  }
  const auto num = detail::blur_separable(masked_error, w, h, taps_x, taps_y);
  const auto den = detail::blur_separable(fg, w, h, taps_x, taps_y);

  const double prefactor = detail::gaussian_prefactor(cfg.sigma_sq);
  std::vector<double> out(gt.pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (gt.values[i]) {
      // den >= 1 here: the pixel's own tap always contributes weight 1.
      out[i] = cfg.normalize_propagation ? num[i] / den[i] : prefactor * num[i];
    } else {
      out[i] = error[i];
    }
  }
  return out;
}

namespace detail {

inline void fill_weighted_tail(WeightedErrorState& st, const BinaryMask& gt,
                               const MetricConfig& cfg) {
  st.importance.resize(gt.pixel_count());
  st.weighted.resize(gt.pixel_count());
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    st.importance[i] =
        gt.values[i] ? 1.0 : 2.0 - std::exp(cfg.alpha_decay * st.distance[i]);
    st.weighted[i] = std::min(st.error[i], st.propagated[i]) * st.importance[i];
  }
}

}  // namespace detail

/// Full weighted error map: error, propagated error, distance field,
/// importance weights, and their combination.
inline WeightedErrorState weighted_error_map(const ProbMask& pred, const BinaryMask& gt,
                                             const MetricConfig& cfg) {
  cfg.validate();
  if (!same_dimensions(pred.width, pred.height, gt.width, gt.height)) {
    throw DimensionMismatch("weighted_error_map: prediction and ground truth differ in size");
  }
  if (gt.foreground_count() == 0) {
    throw EmptyGroundTruth("weighted_error_map: ground truth has no foreground");
  }
  WeightedErrorState st;
  st.width = gt.width;
  st.height = gt.height;
  st.error.resize(gt.pixel_count());
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    st.error[i] = std::abs(static_cast<double>(gt.values[i]) - pred.values[i]);
  }
  st.propagated = gaussian_propagate(st.error, gt, cfg);
  const DistanceField df = euclidean_distance_transform(gt);
  st.distance = df.values;
  detail::fill_weighted_tail(st, gt, cfg);
  return st;
}

inline WeightedCounts weighted_counts(const WeightedErrorState& st, const BinaryMask& gt) {
  WeightedCounts c;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    if (gt.values[i]) {
      c.tp += 1.0 - st.weighted[i];
      c.fn += st.weighted[i];
    } else {
      c.tn += 1.0 - st.weighted[i];
      c.fp += st.weighted[i];
    }
  }
  return c;
}

inline double weighted_fbeta_from_counts(const WeightedCounts& c, double beta_sq) {
  const double precision = (c.tp + c.fp) > 0.0 ? c.tp / (c.tp + c.fp) : 0.0;
  const double recall = (c.tp + c.fn) > 0.0 ? c.tp / (c.tp + c.fn) : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return (1.0 + beta_sq) * precision * recall / (beta_sq * precision + recall);
}

/// The weighted F-measure of a continuous prediction against a binary mask.
inline double weighted_fbeta(const ProbMask& pred, const BinaryMask& gt,
                             const MetricConfig& cfg) {
  const auto st = weighted_error_map(pred, gt, cfg);
  return weighted_fbeta_from_counts(weighted_counts(st, gt), cfg.beta_sq);
}

/// Pixel budget for the dense oracle below (the N x N matrix is materialized).
inline constexpr std::size_t kDenseOracleBudget = 4096;

/// Verification route for the weighted measure: builds the dependency matrix
/// literally, applies it by dense matrix-vector product, and finds nearest
/// foreground distances by brute-force minimization. Always uses the full
/// window. Intended for small inputs and tests only.
inline WeightedErrorState weighted_error_map_oracle(const ProbMask& pred,
                                                    const BinaryMask& gt,
                                                    const MetricConfig& cfg) {
  cfg.validate();
  if (!same_dimensions(pred.width, pred.height, gt.width, gt.height)) {
    throw DimensionMismatch("weighted_error_map_oracle: prediction and ground truth differ in size");
  }
  const std::size_t n = gt.pixel_count();
  if (n > kDenseOracleBudget) {
    throw TooLarge("weighted_error_map_oracle: image exceeds the dense pixel budget");
  }
  if (gt.foreground_count() == 0) {
    throw EmptyGroundTruth("weighted_error_map_oracle: ground truth has no foreground");
  }

  const int w = gt.width;
  std::vector<std::size_t> fg_idx;
  for (std::size_t i = 0; i < n; ++i) {
    if (gt.values[i]) fg_idx.push_back(i);
  }

  WeightedErrorState st;
  st.width = gt.width;
  st.height = gt.height;
  st.error.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    st.error[i] = std::abs(static_cast<double>(gt.values[i]) - pred.values[i]);
  }

  const double prefactor = detail::gaussian_prefactor(cfg.sigma_sq);
  std::vector<double> matrix(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (gt.values[i]) {
      const int xi = static_cast<int>(i) % w;
      const int yi = static_cast<int>(i) / w;
      for (std::size_t j : fg_idx) {
        const int dx = xi - static_cast<int>(j) % w;
        const int dy = yi - static_cast<int>(j) / w;
        matrix[i * n + j] =
            prefactor * std::exp(-(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy) /
                                 (2.0 * cfg.sigma_sq));
      }
    } else {
      matrix[i * n + i] = 1.0;
    }
  }
  if (cfg.normalize_propagation) {
    for (std::size_t i = 0; i < n; ++i) {
      double row_sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) row_sum += matrix[i * n + j];
      for (std::size_t j = 0; j < n; ++j) matrix[i * n + j] /= row_sum;
    }
  }

  st.propagated.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += matrix[i * n + j] * st.error[j];
    st.propagated[i] = sum;
  }

  st.distance.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int xi = static_cast<int>(i) % w;
    const int yi = static_cast<int>(i) / w;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j : fg_idx) {
      const int dx = xi - static_cast<int>(j) % w;
      const int dy = yi - static_cast<int>(j) / w;
      best = std::min(best, static_cast<double>(dx) * dx + static_cast<double>(dy) * dy);
    }
    st.distance[i] = std::sqrt(best);
  }

  detail::fill_weighted_tail(st, gt, cfg);
  return st;
}

inline double weighted_fbeta_oracle(const ProbMask& pred, const BinaryMask& gt,
                                    const MetricConfig& cfg) {
  const auto st = weighted_error_map_oracle(pred, gt, cfg);
  return weighted_fbeta_from_counts(weighted_counts(st, gt), cfg.beta_sq);
}

}  // namespace shadowbench
