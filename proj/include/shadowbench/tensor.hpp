#pragma once

// A plain channels x height x width tensor of doubles plus a lossless CSV
// round-trip, used by the feature-enhancement reference numerics.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "shadowbench/csv.hpp"
#include "shadowbench/errors.hpp"

namespace shadowbench {

struct Tensor3 {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;  // ((c * height) + y) * width + x

  static Tensor3 zeros(int c, int h, int w) {
    Tensor3 t;
    t.channels = c;
    t.height = h;
    t.width = w;
    t.values.assign(static_cast<std::size_t>(c) * h * w, 0.0);
    return t;
  }

  double& at(int c, int y, int x) {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }

  std::size_t size() const { return values.size(); }

  bool same_shape(const Tensor3& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

/// Layout: three header lines "C,<n>" "H,<n>" "W,<n>", then C*H rows of W
/// comma-separated values (channel-major). Doubles are written shortest
/// round-trip, so read(write(t)) == t bit for bit.
inline void write_tensor_csv(std::ostream& out, const Tensor3& t) {
  out << "C," << t.channels << "\nH," << t.height << "\nW," << t.width << '\n';
  for (int c = 0; c < t.channels; ++c) {
    for (int y = 0; y < t.height; ++y) {
      for (int x = 0; x < t.width; ++x) {
        if (x) out << ',';
        out << detail::format_double(t.at(c, y, x));
      }
      out << '\n';
    }
  }
}

inline void write_tensor_csv(const std::string& path, const Tensor3& t) {
  std::ofstream out(path);
  if (!out) throw IoError("tensor: cannot open '" + path + "' for writing");
  write_tensor_csv(out, t);
  if (!out) throw IoError("tensor: failed writing '" + path + "'");
}

inline Tensor3 read_tensor_csv(std::istream& in, const std::string& origin) {
  auto read_header = [&](char expect) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("tensor: " + origin + ": truncated header");
    detail::chomp(line);
    const auto fields = detail::csv_split(line);
    if (fields.size() != 2 || fields[0].size() != 1 || fields[0][0] != expect) {
      throw ParseError("tensor: " + origin + ": expected header line '" +
                       std::string(1, expect) + ",<n>'");
    }
    const long long v = detail::parse_int(fields[1]);
    if (v < 1) throw ParseError("tensor: " + origin + ": non-positive dimension");
    return static_cast<int>(v);
  };
  const int c = read_header('C');
  const int h = read_header('H');
  const int w = read_header('W');
  Tensor3 t = Tensor3::zeros(c, h, w);
  std::string line;
  for (int cc = 0; cc < c; ++cc) {
    for (int y = 0; y < h; ++y) {
      if (!std::getline(in, line)) throw ParseError("tensor: " + origin + ": truncated data");
      detail::chomp(line);
      const auto fields = detail::csv_split(line);
      if (static_cast<int>(fields.size()) != w) {
        throw ParseError("tensor: " + origin + ": row has " +
                         std::to_string(fields.size()) + " values, expected " +
                         std::to_string(w));
      }
      for (int x = 0; x < w; ++x) t.at(cc, y, x) = detail::parse_double(fields[static_cast<std::size_t>(x)]);
    }
  }
  return t;
}

inline Tensor3 read_tensor_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("tensor: cannot open '" + path + "'");
  return read_tensor_csv(in, path);
}

}  // namespace shadowbench
