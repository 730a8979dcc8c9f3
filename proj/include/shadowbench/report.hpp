#pragma once

// Serialization of evaluation reports (CSV and markdown tables) and the
// dataset-statistics pipeline with its file outputs. Data files carry no
// timestamps; configuration is recorded on '#'-prefixed metadata lines, so
// reruns on unchanged inputs are byte-identical.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "shadowbench/csv.hpp"
#include "shadowbench/errors.hpp"
#include "shadowbench/eval.hpp"
#include "shadowbench/parallel.hpp"
#include "shadowbench/png_io.hpp"
#include "shadowbench/stats.hpp"

namespace shadowbench {

namespace detail {

inline std::string eval_config_line(const EvalOptions& opt) {
  std::ostringstream os;
  os << "# sigma_sq=" << format_double(opt.metric.sigma_sq)
     << " beta_sq=" << format_double(opt.metric.beta_sq) << " kernel_radius="
     << (opt.metric.full_kernel() ? std::string("full") : std::to_string(opt.metric.kernel_radius))
     << " normalize_propagation=" << (opt.metric.normalize_propagation ? 1 : 0)
     << " threshold=" << format_double(opt.threshold)
     << " resize_pred=" << (opt.resize_pred ? 1 : 0)
     << " eval_at_512=" << (opt.eval_at_512 ? 1 : 0) << " split="
     << (opt.split_filter ? to_string(*opt.split_filter) : std::string("all"));
  return os.str();
}

/// Full-precision field, empty when the quantity is undefined.
inline std::string opt_field(bool defined, double v) {
  return defined ? format_double(v) : std::string();
}

/// 2-decimal table cell, "-" when undefined.
inline std::string opt_cell(bool defined, double v) {
  return defined ? format_fixed(v, 2) : std::string("-");
}

inline void summary_csv_row(std::ostream& out, const CategorySummary& s) {
  out << csv_escape(s.category) << ',' << s.image_count << ',' << s.skipped << ','
      << opt_field(s.image_count > 0, s.fbeta_mean) << ','
      << opt_field(s.ber_accumulated_defined, s.ber_accumulated) << ','
      << opt_field(s.ber_image_count > 0, s.ber_per_image_mean) << '\n';
}

inline std::string sanitize_filename(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    out += ok ? c : '_';
  }
  return out.empty() ? std::string("_") : out;
}

}  // namespace detail

/// Machine-readable summary: full-precision values, categories sorted,
/// overall last. F-measure is kept on its native [0,1] scale.
inline std::string format_eval_summary_csv(const EvaluationReport& report,
                                           const EvalOptions& opt) {
  std::ostringstream out;
  out << "# shadow-bench eval\n" << detail::eval_config_line(opt) << '\n';
  out << "category,image_count,skipped,fbeta_mean,ber_accumulated,ber_per_image_mean\n";
  for (const auto& c : report.per_category) detail::summary_csv_row(out, c);
  detail::summary_csv_row(out, report.overall);
  return out.str();
}

/// Human-facing table: 2 decimal places, F-measure scaled by 100 so values
/// line up with conventional benchmark tables.
inline std::string format_eval_summary_markdown(const EvaluationReport& report,
                                                const EvalOptions& opt) {
  std::ostringstream out;
  out << "| Category | Images | Skipped | Fw (x100) | BER | BER (per-image mean) |\n";
  out << "|---|---:|---:|---:|---:|---:|\n";
  auto row = [&](const CategorySummary& s) {
    out << "| " << s.category << " | " << s.image_count << " | " << s.skipped << " | "
        << detail::opt_cell(s.image_count > 0, s.fbeta_mean * 100.0) << " | "
        << detail::opt_cell(s.ber_accumulated_defined, s.ber_accumulated) << " | "
        << detail::opt_cell(s.ber_image_count > 0, s.ber_per_image_mean) << " |\n";
  };
  for (const auto& c : report.per_category) row(c);
  row(report.overall);
  out << '\n' << detail::eval_config_line(opt) << '\n';
  return out.str();
}

inline std::string format_per_image_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "path,category,status,fbeta,tp,tn,fp,fn,ber,message\n";
  for (const auto& r : report.per_image) {
    out << detail::csv_escape(r.path) << ',' << detail::csv_escape(r.category) << ','
        << to_string(r.status) << ',';
    if (r.status == ImageStatus::ok) {
      out << detail::format_double(r.fbeta) << ',' << r.counts.tp << ',' << r.counts.tn
          << ',' << r.counts.fp << ',' << r.counts.fn << ','
          << detail::opt_field(r.ber_defined, r.ber_value) << ',';
    } else {
      out << ",,,,,,";
    }
    out << detail::csv_escape(r.message) << '\n';
  }
  return out.str();
}

/// Write summary.(csv|md) and per_image.csv into out_dir.
inline void write_eval_outputs(const std::filesystem::path& out_dir,
                               const EvaluationReport& report, const EvalOptions& opt,
                               const std::string& format) {
  std::filesystem::create_directories(out_dir);
  auto write_file = [&](const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("eval: cannot open '" + p.string() + "' for writing");
    f << content;
    if (!f) throw IoError("eval: failed writing '" + p.string() + "'");
  };
  if (format == "markdown") {
    write_file(out_dir / "summary.md", format_eval_summary_markdown(report, opt));
  } else if (format == "csv") {
    write_file(out_dir / "summary.csv", format_eval_summary_csv(report, opt));
  } else {
    throw std::invalid_argument("eval: unknown format '" + format + "'");
  }
  write_file(out_dir / "per_image.csv", format_per_image_csv(report));
}

// ---------------------------------------------------------------------------
// Dataset statistics pipeline.

struct StatsOptions {
  std::string gt_dir;
  std::string image_dir;  // empty: skip color-contrast statistics
  int threads = 1;
  int bins = 10;
  double min_area_frac = 0.0005;
  Connectivity connectivity = Connectivity::eight;
  std::optional<Split> split_filter;
  bool skip_errors = false;
};

struct PerImageStats {
  std::string path;
  std::string category;
  bool ok = true;
  std::string message;
  double area = 0.0;
  int regions = 0;
  bool contrast_defined = false;
  double contrast = 0.0;
};

struct CategoryStats {
  std::string category;
  std::uint64_t image_count = 0;  // successfully processed masks
  std::uint64_t skipped = 0;
  std::vector<double> areas;
  std::vector<double> region_counts;
  std::vector<double> contrasts;        // only where defined
  ComponentStats regions;               // mean/std of region_counts
  std::optional<LocationMap> location;  // absent when no mask accumulated
};

struct StatsBundle {
  CategoryStats overall;
  std::vector<CategoryStats> per_category;  // sorted by category name
  std::vector<PerImageStats> per_image;     // manifest order
};

namespace detail {

struct StatsChunk {
  std::vector<PerImageStats> items;
  std::map<std::string, LocationAccumulator> locations;
};

constexpr std::size_t kStatsChunkSize = 32;

}  // namespace detail

/// Compute per-image statistics for every selected manifest entry and
/// aggregate per category and overall. Images are processed in fixed chunks
/// merged in chunk order, so results do not depend on the thread count.
inline StatsBundle run_stats(const DatasetManifest& manifest, const StatsOptions& opt) {
  std::vector<const ManifestEntry*> selected;
  for (const auto& e : manifest.entries) {
    if (!opt.split_filter || e.split == *opt.split_filter) selected.push_back(&e);
  }
  const std::size_t chunk_count =
      (selected.size() + detail::kStatsChunkSize - 1) / detail::kStatsChunkSize;

  StatsBundle bundle;
  bundle.overall.category = "overall";
  std::map<std::string, CategoryStats> cats;
  std::map<std::string, LocationAccumulator> cat_locations;

  detail::OrderedReducer<detail::StatsChunk> reducer([&](detail::StatsChunk&& chunk) {
    for (auto& item : chunk.items) {
      CategoryStats& c = cats[item.category];
      c.category = item.category;
      if (item.ok) {
        for (CategoryStats* s : {&c, &bundle.overall}) {
          s->image_count += 1;
          s->areas.push_back(item.area);
          s->region_counts.push_back(static_cast<double>(item.regions));
          if (item.contrast_defined) s->contrasts.push_back(item.contrast);
        }
      } else {
        c.skipped += 1;
        bundle.overall.skipped += 1;
      }
      bundle.per_image.push_back(std::move(item));
    }
    for (auto& [category, acc] : chunk.locations) {
      cat_locations[category].merge(acc);
    }
  });

  detail::parallel_for(chunk_count, opt.threads, [&](std::size_t chunk_index) {
    detail::StatsChunk chunk;
    const std::size_t begin = chunk_index * detail::kStatsChunkSize;
    const std::size_t end = std::min(begin + detail::kStatsChunkSize, selected.size());
    for (std::size_t i = begin; i < end; ++i) {
      const ManifestEntry& e = *selected[i];
      PerImageStats item;
      item.path = e.path;
      item.category = e.category;
      try {
        const auto gt_path = std::filesystem::path(opt.gt_dir) / e.path;
        const BinaryMask gt = load_binary_mask(gt_path.string());
        item.area = area_proportion(gt);
        item.regions = count_shadow_regions(gt, opt.min_area_frac, opt.connectivity);
        if (!opt.image_dir.empty()) {
          const auto img_path = std::filesystem::path(opt.image_dir) / e.path;
          const RgbImage img = load_rgb_image(img_path.string());
          try {
            item.contrast = color_contrast(img, gt);
            item.contrast_defined = true;
          } catch (const DegenerateRegion&) {
            // one-sided mask: contrast undefined for this image, not an error
          }
        }
        chunk.locations[e.category].add(gt);
      } catch (const Error& err) {
        if (!opt.skip_errors) throw;
        item.ok = false;
        item.message = err.what();
      }
      chunk.items.push_back(std::move(item));
    }
    reducer.submit(chunk_index, std::move(chunk));
  });

  LocationAccumulator overall_location;
  for (auto& [category, acc] : cat_locations) {
    overall_location.merge(acc);
    CategoryStats& c = cats[category];
    if (acc.count() > 0) c.location = acc.finalize();
  }
  if (overall_location.count() > 0) bundle.overall.location = overall_location.finalize();

  bundle.overall.regions = summarize_sample(bundle.overall.region_counts);
  for (auto& [name, c] : cats) {
    c.regions = summarize_sample(c.region_counts);
    bundle.per_category.push_back(std::move(c));
  }
  return bundle;
}

namespace detail {

inline void write_histogram_rows(std::ostream& out, const std::string& category,
                                 const std::vector<double>& xs, int bins, double lo,
                                 double hi) {
  const HistogramSpec h = build_histogram(xs, bins, lo, hi);
  for (int b = 0; b < bins; ++b) {
    const double bin_lo = lo + (hi - lo) * b / bins;
    const double bin_hi = lo + (hi - lo) * (b + 1) / bins;
    out << csv_escape(category) << ',' << format_double(bin_lo) << ','
        << format_double(bin_hi) << ',' << h.counts[static_cast<std::size_t>(b)] << ','
        << format_double(h.normalized[static_cast<std::size_t>(b)]) << '\n';
  }
}

inline void write_location_outputs(const std::filesystem::path& out_dir,
                                   const std::string& label, const LocationMap& map) {
  const int n = LocationMap::kSize;
  std::vector<std::uint8_t> gray(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    gray[i] = static_cast<std::uint8_t>(std::lround(255.0 * map.cells[i]));
  }
  save_gray_png(out_dir / ("location_" + label + ".png"), n, n, gray);

  std::ofstream csv(out_dir / ("location_" + label + ".csv"), std::ios::binary);
  if (!csv) throw IoError("stats: cannot write location CSV for '" + label + "'");
  csv << "# location map cells, images=" << map.image_count << '\n';
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      if (x) csv << ',';
      csv << format_double(map.cells[static_cast<std::size_t>(y) * n + x]);
    }
    csv << '\n';
  }
  if (!csv) throw IoError("stats: failed writing location CSV for '" + label + "'");
}

}  // namespace detail

/// Write components.csv, area_hist.csv, contrast_hist.csv, per-category and
/// overall location maps (PNG + CSV), and per_image_stats.csv into out_dir.
inline void write_stats_outputs(const std::filesystem::path& out_dir,
                                const StatsBundle& bundle, const StatsOptions& opt) {
  std::filesystem::create_directories(out_dir);

  {
    std::ofstream f(out_dir / "components.csv", std::ios::binary);
    if (!f) throw IoError("stats: cannot write components.csv");
    f << "category,mean,std\n";
    auto row = [&](const CategoryStats& c) {
      f << detail::csv_escape(c.category) << ',' << detail::format_double(c.regions.mean)
        << ',' << detail::format_double(c.regions.stddev) << '\n';
    };
    for (const auto& c : bundle.per_category) row(c);
    row(bundle.overall);
  }

  auto write_hist = [&](const std::string& filename, auto pick) {
    std::ofstream f(out_dir / filename, std::ios::binary);
    if (!f) throw IoError("stats: cannot write " + filename);
    f << "category,bin_lo,bin_hi,count,fraction\n";
    for (const auto& c : bundle.per_category) {
      detail::write_histogram_rows(f, c.category, pick(c), opt.bins, 0.0, 1.0);
    }
    detail::write_histogram_rows(f, "overall", pick(bundle.overall), opt.bins, 0.0, 1.0);
  };
  write_hist("area_hist.csv", [](const CategoryStats& c) -> const std::vector<double>& {
    return c.areas;
  });
  write_hist("contrast_hist.csv", [](const CategoryStats& c) -> const std::vector<double>& {
    return c.contrasts;
  });

  for (const auto& c : bundle.per_category) {
    if (c.location) {
      detail::write_location_outputs(out_dir, detail::sanitize_filename(c.category),
                                     *c.location);
    }
  }
  if (bundle.overall.location) {
    detail::write_location_outputs(out_dir, "overall", *bundle.overall.location);
  }

  {
    std::ofstream f(out_dir / "per_image_stats.csv", std::ios::binary);
    if (!f) throw IoError("stats: cannot write per_image_stats.csv");
    f << "path,category,status,area,regions,contrast,message\n";
    for (const auto& item : bundle.per_image) {
      f << detail::csv_escape(item.path) << ',' << detail::csv_escape(item.category) << ','
        << (item.ok ? "ok" : "failed") << ',';
      if (item.ok) {
        f << detail::format_double(item.area) << ',' << item.regions << ','
          << detail::opt_field(item.contrast_defined, item.contrast) << ',';
      } else {
        f << ",,,";
      }
      f << detail::csv_escape(item.message) << '\n';
    }
  }
}

}  // namespace shadowbench
