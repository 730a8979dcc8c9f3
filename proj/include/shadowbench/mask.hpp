#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "shadowbench/errors.hpp"
#include "shadowbench/interp.hpp"

namespace shadowbench {

/// Continuous prediction map, values in [0,1], row-major.
struct ProbMask {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  double& at(int x, int y) {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t pixel_count() const { return values.size(); }
};

/// Hard {0,1} mask, row-major. Used for ground truths and quantized predictions.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  std::uint8_t at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t pixel_count() const { return values.size(); }

  std::size_t foreground_count() const {
    std::size_t n = 0;
    for (std::uint8_t v : values) n += v;
    return n;
  }
};

/// Interleaved 8-bit RGB image, row-major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // 3 bytes per pixel

  std::size_t pixel_count() const { return values.size() / 3; }
};

inline bool same_dimensions(int w1, int h1, int w2, int h2) {
  return w1 == w2 && h1 == h2;
}

/// Quantize a continuous mask: values below the threshold become 0, the rest 1.
inline BinaryMask binarize(const ProbMask& m, double threshold = 0.5) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("binarize: threshold must lie in (0,1)");
  }
  BinaryMask out{m.width, m.height, std::vector<std::uint8_t>(m.pixel_count())};
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    out.values[i] = m.values[i] < threshold ? 0 : 1;
  }
  return out;
}

inline ProbMask to_prob(const BinaryMask& m) {
  ProbMask out{m.width, m.height, std::vector<double>(m.pixel_count())};
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    out.values[i] = static_cast<double>(m.values[i]);
  }
  return out;
}

/// Bilinear resize with half-pixel-centered sampling and edge clamp.
/// Output values stay inside [min(input), max(input)].
inline ProbMask resize_bilinear(const ProbMask& m, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) {
    throw std::invalid_argument("resize_bilinear: target dimensions must be positive");
  }
  ProbMask out{out_w, out_h,
               std::vector<double>(static_cast<std::size_t>(out_w) * out_h)};
  const auto tx = detail::linear_taps(m.width, out_w);
  const auto ty = detail::linear_taps(m.height, out_h);
  for (int y = 0; y < out_h; ++y) {
    const auto& row = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < out_w; ++x) {
      const auto& col = tx[static_cast<std::size_t>(x)];
      const double top =
          detail::lerp_within(m.at(col.lo, row.lo), m.at(col.hi, row.lo), col.frac);
      const double bot =
          detail::lerp_within(m.at(col.lo, row.hi), m.at(col.hi, row.hi), col.frac);
      out.values[static_cast<std::size_t>(y) * out_w + x] =
          detail::lerp_within(top, bot, row.frac);
    }
  }
  return out;
}

}  // namespace shadowbench
