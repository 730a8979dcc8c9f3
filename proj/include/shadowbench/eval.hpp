#pragma once

// Directory-level evaluation: pair each manifest entry's ground-truth mask
// with a prediction of the same stem, score it (weighted F-measure on the
// continuous prediction, confusion counts on the thresholded one), and
// aggregate per category and overall.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shadowbench/errors.hpp"
#include "shadowbench/manifest.hpp"
#include "shadowbench/mask.hpp"
#include "shadowbench/metrics.hpp"
#include "shadowbench/parallel.hpp"
#include "shadowbench/png_io.hpp"

namespace shadowbench {

struct EvalOptions {
  std::string pred_dir;
  std::string gt_dir;
  MetricConfig metric;
  double threshold = 0.5;   // quantization threshold for the BER counts
  bool resize_pred = false; // resize predictions to the GT size instead of failing
  bool skip_errors = false; // record per-image failures instead of aborting
  bool eval_at_512 = false; // score everything on a 512x512 grid
  std::optional<Split> split_filter;  // evaluate only entries of this split
  int threads = 1;
};

enum class ImageStatus { ok, empty_gt, failed };

inline std::string to_string(ImageStatus s) {
  switch (s) {
    case ImageStatus::ok: return "ok";
    case ImageStatus::empty_gt: return "empty_gt";
    case ImageStatus::failed: return "failed";
  }
  return "failed";
}

struct ImageResult {
  std::string path;
  std::string category;
  ImageStatus status = ImageStatus::ok;
  std::string message;           // failure detail when status == failed
  double fbeta = 0.0;            // valid when status == ok
  ConfusionCounts counts;        // valid when status == ok
  bool ber_defined = false;      // both classes present in this image
  double ber_value = 0.0;        // valid when ber_defined
};

struct CategorySummary {
  std::string category;
  std::uint64_t image_count = 0;  // images that produced metrics
  std::uint64_t skipped = 0;      // empty GT or recorded failures
  double fbeta_mean = 0.0;
  ConfusionCounts accumulated;
  bool ber_accumulated_defined = false;
  double ber_accumulated = 0.0;
  std::uint64_t ber_image_count = 0;   // images with per-image BER defined
  double ber_per_image_mean = 0.0;
};

struct EvaluationReport {
  CategorySummary overall;
  std::vector<CategorySummary> per_category;  // sorted by category name
  std::vector<ImageResult> per_image;         // manifest order
};

namespace detail {

/// Prediction path for a manifest entry: the mirrored relative path as-is,
/// falling back to the same stem with a .png extension.
inline std::filesystem::path prediction_path(const std::filesystem::path& pred_dir,
                                             const std::string& rel) {
  const std::filesystem::path direct = pred_dir / rel;
  std::error_code ec;
  if (std::filesystem::exists(direct, ec)) return direct;
  std::filesystem::path swapped = direct;
  swapped.replace_extension(".png");
  if (swapped != direct && std::filesystem::exists(swapped, ec)) return swapped;
  throw MissingPrediction("eval: no prediction for '" + rel + "' under '" +
                          pred_dir.string() + "'");
}

inline void finalize_summary(CategorySummary& s) {
  if (s.image_count > 0) s.fbeta_mean /= static_cast<double>(s.image_count);
  if (s.ber_image_count > 0) s.ber_per_image_mean /= static_cast<double>(s.ber_image_count);
  if (s.accumulated.tp + s.accumulated.fn > 0 && s.accumulated.tn + s.accumulated.fp > 0) {
    s.ber_accumulated_defined = true;
    s.ber_accumulated = ber(s.accumulated);
  }
}

}  // namespace detail

/// Score one prediction/ground-truth pair under the given options.
inline ImageResult evaluate_pair(const ProbMask& pred_in, const BinaryMask& gt_in,
                                 const EvalOptions& opt) {
  ProbMask pred = pred_in;
  BinaryMask gt = gt_in;
  if (opt.eval_at_512) {
    gt = binarize(resize_bilinear(to_prob(gt), 512, 512), 0.5);
    pred = resize_bilinear(pred, 512, 512);
  } else if (!same_dimensions(pred.width, pred.height, gt.width, gt.height)) {
    if (!opt.resize_pred) {
      throw DimensionMismatch("eval: prediction and ground truth differ in size");
    }
    pred = resize_bilinear(pred, gt.width, gt.height);
  }

  ImageResult r;
  if (gt.foreground_count() == 0) {
    r.status = ImageStatus::empty_gt;
    return r;
  }
  r.fbeta = weighted_fbeta(pred, gt, opt.metric);
  r.counts = confusion_counts(binarize(pred, opt.threshold), gt);
  if (r.counts.tp + r.counts.fn > 0 && r.counts.tn + r.counts.fp > 0) {
    r.ber_defined = true;
    r.ber_value = ber(r.counts);
  }
  return r;
}

/// Evaluate every selected manifest entry. Results are merged in manifest
/// order regardless of thread count, so the report is deterministic.
inline EvaluationReport run_evaluation(const DatasetManifest& manifest,
                                       const EvalOptions& opt) {
  opt.metric.validate();
  if (!(opt.threshold > 0.0 && opt.threshold < 1.0)) {
    throw std::invalid_argument("eval: threshold must lie in (0,1)");
  }

  std::vector<const ManifestEntry*> selected;
  for (const auto& e : manifest.entries) {
    if (!opt.split_filter || e.split == *opt.split_filter) selected.push_back(&e);
  }

  std::vector<ImageResult> results(selected.size());
  detail::parallel_for(selected.size(), opt.threads, [&](std::size_t i) {
    const ManifestEntry& e = *selected[i];
    ImageResult r;
    try {
      const auto gt_path = std::filesystem::path(opt.gt_dir) / e.path;
      const BinaryMask gt = load_binary_mask(gt_path.string());
      const auto pred_path = detail::prediction_path(opt.pred_dir, e.path);
      const ProbMask pred = load_prob_mask(pred_path.string());
      r = evaluate_pair(pred, gt, opt);
    } catch (const Error& err) {
      if (!opt.skip_errors) throw;
      r.status = ImageStatus::failed;
      r.message = err.what();
    }
    r.path = e.path;
    r.category = e.category;
    results[i] = std::move(r);
  });

  EvaluationReport report;
  report.overall.category = "overall";
  std::map<std::string, CategorySummary> cats;
  for (auto& r : results) {
    CategorySummary& c = cats[r.category];
    c.category = r.category;
    if (r.status == ImageStatus::ok) {
      for (CategorySummary* s : {&c, &report.overall}) {
        s->image_count += 1;
        s->fbeta_mean += r.fbeta;
        s->accumulated += r.counts;
        if (r.ber_defined) {
          s->ber_image_count += 1;
          s->ber_per_image_mean += r.ber_value;
        }
      }
    } else {
      c.skipped += 1;
      report.overall.skipped += 1;
    }
  }
  detail::finalize_summary(report.overall);
  for (auto& [name, summary] : cats) {
    detail::finalize_summary(summary);
    report.per_category.push_back(std::move(summary));
  }
  report.per_image = std::move(results);
  return report;
}

}  // namespace shadowbench
