#pragma once

// Reference numerics for the detail-enhancement gate: channel projection,
// bilinear upsampling, the logarithmic gate map, the refined feature, and
// analytic gradients for every input and parameter, checked against central
// finite differences. Desk-scale, CPU-only, no training framework.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "shadowbench/errors.hpp"
#include "shadowbench/interp.hpp"
#include "shadowbench/tensor.hpp"

namespace shadowbench {

/// Parameters of the gate: a 1x1 projection (out_channels x in_channels
/// weight matrix plus bias) and the learnable gate scale.
struct DemParams {
  int out_channels = 0;
  int in_channels = 0;
  std::vector<double> weight;  // out_channels * in_channels, row-major
  std::vector<double> bias;    // out_channels
  double alpha_gate = 1.0;

  double& w(int o, int c) { return weight[static_cast<std::size_t>(o) * in_channels + c]; }
  double w(int o, int c) const { return weight[static_cast<std::size_t>(o) * in_channels + c]; }

  void validate() const {
    if (out_channels < 1 || in_channels < 1 ||
        weight.size() != static_cast<std::size_t>(out_channels) * in_channels ||
        bias.size() != static_cast<std::size_t>(out_channels)) {
      throw DimensionMismatch("DemParams: weight/bias sizes inconsistent with channel counts");
    }
  }
};

/// Per-site channel projection: out(o, s) = sum_c weight(o,c) * in(c, s) + bias(o).
inline Tensor3 project_1x1(const Tensor3& fd, const DemParams& p) {
  p.validate();
  if (fd.channels != p.in_channels) {
    throw DimensionMismatch("project_1x1: input channels do not match the weight matrix");
  }
  Tensor3 out = Tensor3::zeros(p.out_channels, fd.height, fd.width);
  const std::size_t plane = static_cast<std::size_t>(fd.height) * fd.width;
  for (int o = 0; o < p.out_channels; ++o) {
    for (std::size_t s = 0; s < plane; ++s) {
      double acc = p.bias[static_cast<std::size_t>(o)];
      for (int c = 0; c < p.in_channels; ++c) {
        acc += p.w(o, c) * fd.values[static_cast<std::size_t>(c) * plane + s];
      }
      out.values[static_cast<std::size_t>(o) * plane + s] = acc;
    }
  }
  return out;
}

/// Per-channel bilinear resampling to (out_h, out_w); the sampling grid is
/// the half-pixel-centered one shared with the mask resizer.
inline Tensor3 upsample_to(const Tensor3& src, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) {
    throw DimensionMismatch("upsample_to: target size must be positive");
  }
  Tensor3 out = Tensor3::zeros(src.channels, out_h, out_w);
  const auto ty = detail::linear_taps(src.height, out_h);
  const auto tx = detail::linear_taps(src.width, out_w);
  for (int c = 0; c < src.channels; ++c) {
    for (int y = 0; y < out_h; ++y) {
      for (int x = 0; x < out_w; ++x) {
        const auto& ay = ty[static_cast<std::size_t>(y)];
        const auto& ax = tx[static_cast<std::size_t>(x)];
        const double top = src.at(c, ay.lo, ax.lo) +
                           ax.frac * (src.at(c, ay.lo, ax.hi) - src.at(c, ay.lo, ax.lo));
        const double bot = src.at(c, ay.hi, ax.lo) +
                           ax.frac * (src.at(c, ay.hi, ax.hi) - src.at(c, ay.hi, ax.lo));
        out.at(c, y, x) = top + ay.frac * (bot - top);
      }
    }
  }
  return out;
}

/// G = alpha * ln(1 + (fl - fd_up)^2), elementwise.
inline Tensor3 gate_map(const Tensor3& fl, const Tensor3& fd_up, double alpha_gate) {
  if (!fl.same_shape(fd_up)) {
    throw DimensionMismatch("gate_map: operand shapes differ");
  }
  Tensor3 g = Tensor3::zeros(fl.channels, fl.height, fl.width);
  for (std::size_t i = 0; i < fl.values.size(); ++i) {
    const double d = fl.values[i] - fd_up.values[i];
    g.values[i] = alpha_gate * std::log1p(d * d);
  }
  return g;
}

/// Intermediates retained by the forward pass for the backward pass.
struct DemCache {
  Tensor3 fl;
  Tensor3 fd;
  Tensor3 fd_up;  // upsampled projection of fd, same shape as fl
  Tensor3 gate;
  DemParams params;
};

/// Refined feature: fe = gate_map(fl, upsample(project(fd)), alpha) * fl.
inline std::pair<Tensor3, DemCache> dem_forward(const Tensor3& fl, const Tensor3& fd,
                                                const DemParams& p) {
  p.validate();
  if (fl.channels != p.out_channels) {
    throw DimensionMismatch("dem_forward: projection output channels must match fl");
  }
  DemCache cache;
  cache.fl = fl;
  cache.fd = fd;
  cache.fd_up = upsample_to(project_1x1(fd, p), fl.height, fl.width);
  cache.gate = gate_map(fl, cache.fd_up, p.alpha_gate);
  cache.params = p;
  Tensor3 fe = Tensor3::zeros(fl.channels, fl.height, fl.width);
  for (std::size_t i = 0; i < fe.values.size(); ++i) {
    fe.values[i] = cache.gate.values[i] * fl.values[i];
  }
  return {std::move(fe), std::move(cache)};
}

struct DemGradients {
  Tensor3 d_fl;
  Tensor3 d_fd;
  std::vector<double> d_weight;  // same layout as DemParams::weight
  std::vector<double> d_bias;
  double d_alpha = 0.0;
};

/// Chain-rule gradients of a scalar loss with upstream = dL/dfe.
inline DemGradients dem_gradients(const DemCache& cache, const Tensor3& upstream) {
  if (!upstream.same_shape(cache.fl)) {
    throw DimensionMismatch("dem_gradients: upstream shape must match fe");
  }
  const Tensor3& fl = cache.fl;
  const DemParams& p = cache.params;
  const std::size_t n = fl.values.size();

  DemGradients g;
  g.d_fl = Tensor3::zeros(fl.channels, fl.height, fl.width);
  Tensor3 d_up = Tensor3::zeros(fl.channels, fl.height, fl.width);

  // fe = G * fl with G = alpha * ln(1 + D^2), D = fl - fd_up.
  for (std::size_t i = 0; i < n; ++i) {
    const double up_fl = upstream.values[i] * fl.values[i];  // dL/dG
    const double d = fl.values[i] - cache.fd_up.values[i];
    g.d_alpha += up_fl * std::log1p(d * d);
    const double dD = up_fl * p.alpha_gate * 2.0 * d / (1.0 + d * d);
    g.d_fl.values[i] = upstream.values[i] * cache.gate.values[i] + dD;
    d_up.values[i] = -dD;
  }

  // Transpose of the bilinear resampling: scatter each output gradient onto
  // the four source sites with the interpolation weights.
  Tensor3 d_proj = Tensor3::zeros(fl.channels, cache.fd.height, cache.fd.width);
  const auto ty = detail::linear_taps(cache.fd.height, fl.height);
  const auto tx = detail::linear_taps(cache.fd.width, fl.width);
  for (int c = 0; c < fl.channels; ++c) {
    for (int y = 0; y < fl.height; ++y) {
      for (int x = 0; x < fl.width; ++x) {
        const auto& ay = ty[static_cast<std::size_t>(y)];
        const auto& ax = tx[static_cast<std::size_t>(x)];
        const double v = d_up.at(c, y, x);
        d_proj.at(c, ay.lo, ax.lo) += (1.0 - ay.frac) * (1.0 - ax.frac) * v;
        d_proj.at(c, ay.lo, ax.hi) += (1.0 - ay.frac) * ax.frac * v;
        d_proj.at(c, ay.hi, ax.lo) += ay.frac * (1.0 - ax.frac) * v;
        d_proj.at(c, ay.hi, ax.hi) += ay.frac * ax.frac * v;
      }
    }
  }

  // Transpose of the affine projection.
  g.d_fd = Tensor3::zeros(cache.fd.channels, cache.fd.height, cache.fd.width);
  g.d_weight.assign(p.weight.size(), 0.0);
  g.d_bias.assign(p.bias.size(), 0.0);
  const std::size_t plane = static_cast<std::size_t>(cache.fd.height) * cache.fd.width;
  for (int o = 0; o < p.out_channels; ++o) {
    for (std::size_t s = 0; s < plane; ++s) {
      const double dp = d_proj.values[static_cast<std::size_t>(o) * plane + s];
      g.d_bias[static_cast<std::size_t>(o)] += dp;
      for (int c = 0; c < p.in_channels; ++c) {
        g.d_weight[static_cast<std::size_t>(o) * p.in_channels + c] +=
            dp * cache.fd.values[static_cast<std::size_t>(c) * plane + s];
        g.d_fd.values[static_cast<std::size_t>(c) * plane + s] += p.w(o, c) * dp;
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Finite-difference verification harness.

/// One reported line of the check: the worst component of one parameter
/// group in one random case. `pass` covers every component in the group.
struct GradCheckRow {
  int case_index = 0;
  std::string parameter;  // fl | fd | proj_weight | proj_bias | alpha_gate
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<GradCheckRow> rows;
  bool all_pass = true;
  double max_violation = 0.0;       // abs error / tolerance; pass iff <= 1
  double max_relative_error = 0.0;  // abs error / max(|analytic|, 1e-8)
  int cases = 0;
  std::uint64_t scalar_checks = 0;
};

/// Gradient implementation under test; swappable so the harness itself can
/// be shown to catch a wrong gradient.
using DemGradientFn = std::function<DemGradients(const DemCache&, const Tensor3&)>;

namespace detail {

class UniformRng {
 public:
  explicit UniformRng(std::uint64_t seed) : rng_(seed) {}
  double u01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double sym() { return 2.0 * u01() - 1.0; }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 rng_;
};

inline double dem_loss(const Tensor3& fl, const Tensor3& fd, const DemParams& p,
                       const Tensor3& upstream) {
  const auto fe = dem_forward(fl, fd, p).first;
  double loss = 0.0;
  for (std::size_t i = 0; i < fe.values.size(); ++i) {
    loss += upstream.values[i] * fe.values[i];
  }
  return loss;
}

}  // namespace detail

/// Tolerance rule: a gradient passes when |analytic - numeric| is within
/// 1e-6 relative to the analytic value, or within 1e-8 absolutely.
inline bool gradient_within_tolerance(double analytic, double numeric) {
  const double err = std::abs(analytic - numeric);
  return err <= std::max(1e-8, 1e-6 * std::abs(analytic));
}

/// Run `cases` random gate instances: compute analytic gradients with
/// grad_fn (the production implementation by default) and compare every
/// scalar component against central finite differences of the summed loss
/// L = sum(upstream * fe). One row per parameter group per case reports the
/// worst component.
inline GradCheckReport run_dem_gradient_checks(std::uint64_t seed, int cases,
                                               double step = 1e-5,
                                               const DemGradientFn& grad_fn = dem_gradients) {
  GradCheckReport report;
  report.cases = cases;
  detail::UniformRng rng(seed);

  for (int case_index = 0; case_index < cases; ++case_index) {
    const int cd = rng.uniform_int(1, 3);
    const int cl = rng.uniform_int(1, 3);
    const int sh = rng.uniform_int(2, 3);
    const int sw = rng.uniform_int(2, 3);
    const int dh = rng.uniform_int(sh, 5);
    const int dw = rng.uniform_int(sw, 5);

    Tensor3 fd = Tensor3::zeros(cd, sh, sw);
    for (double& v : fd.values) v = rng.sym();
    Tensor3 fl = Tensor3::zeros(cl, dh, dw);
    for (double& v : fl.values) v = rng.sym();
    Tensor3 upstream = Tensor3::zeros(cl, dh, dw);
    for (double& v : upstream.values) v = rng.sym();

    DemParams p;
    p.out_channels = cl;
    p.in_channels = cd;
    p.weight.resize(static_cast<std::size_t>(cl) * cd);
    p.bias.resize(static_cast<std::size_t>(cl));
    for (double& v : p.weight) v = rng.sym();
    for (double& v : p.bias) v = rng.sym();
    p.alpha_gate = (case_index % 2 == 0 ? 1.0 : -1.0) * (0.5 + rng.u01());

    const DemCache cache = dem_forward(fl, fd, p).second;
    const DemGradients grads = grad_fn(cache, upstream);

    struct GroupScan {
      GradCheckRow worst;
      double worst_violation = -1.0;
      bool group_pass = true;
    };
    auto scan = [&](GroupScan& gs, const std::string& name, double analytic,
                    double* slot) {
      const double saved = *slot;
      *slot = saved + step;
      const double lp = detail::dem_loss(fl, fd, p, upstream);
      *slot = saved - step;
      const double lm = detail::dem_loss(fl, fd, p, upstream);
      *slot = saved;
      const double numeric = (lp - lm) / (2.0 * step);
      const double err = std::abs(analytic - numeric);
      const double tol = std::max(1e-8, 1e-6 * std::abs(analytic));
      const double violation = err / tol;
      const double rel = err / std::max(std::abs(analytic), 1e-8);
      const bool ok = err <= tol;
      gs.group_pass = gs.group_pass && ok;
      ++report.scalar_checks;
      report.max_violation = std::max(report.max_violation, violation);
      report.max_relative_error = std::max(report.max_relative_error, rel);
      if (violation > gs.worst_violation) {
        gs.worst_violation = violation;
        gs.worst = GradCheckRow{case_index, name, analytic, numeric, rel, ok};
      }
    };
    auto flush = [&](GroupScan& gs) {
      gs.worst.pass = gs.group_pass;
      report.all_pass = report.all_pass && gs.group_pass;
      report.rows.push_back(gs.worst);
    };

    GroupScan g_fl, g_fd, g_w, g_b, g_a;
    for (std::size_t i = 0; i < fl.values.size(); ++i) {
      scan(g_fl, "fl", grads.d_fl.values[i], &fl.values[i]);
    }
    for (std::size_t i = 0; i < fd.values.size(); ++i) {
      scan(g_fd, "fd", grads.d_fd.values[i], &fd.values[i]);
    }
    for (std::size_t i = 0; i < p.weight.size(); ++i) {
      scan(g_w, "proj_weight", grads.d_weight[i], &p.weight[i]);
    }
    for (std::size_t i = 0; i < p.bias.size(); ++i) {
      scan(g_b, "proj_bias", grads.d_bias[i], &p.bias[i]);
    }
    scan(g_a, "alpha_gate", grads.d_alpha, &p.alpha_gate);
    flush(g_fl);
    flush(g_fd);
    flush(g_w);
    flush(g_b);
    flush(g_a);
  }
  return report;
}

/// Serialize the report; one line per parameter group per case.
inline void write_grad_check_csv(std::ostream& out, const GradCheckReport& report) {
  out << "case,parameter,analytic,numeric,relative_error,pass\n";
  for (const auto& r : report.rows) {
    out << r.case_index << ',' << r.parameter << ',' << detail::format_double(r.analytic)
        << ',' << detail::format_double(r.numeric) << ','
        << detail::format_double(r.relative_error) << ',' << (r.pass ? 1 : 0) << '\n';
  }
}

}  // namespace shadowbench
