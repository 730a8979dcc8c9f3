#pragma once

// Dataset manifests (path, category, split) and the deterministic
// category-stratified 7:1:2 train/val/test split.
//
// The split must reproduce bit-for-bit across platforms and be independent
// of both manifest order within a category and the set of other categories,
// so it uses its own hash (FNV-1a + splitmix64 mix into a per-category
// mt19937_64 seed) and a hand-rolled Fisher-Yates shuffle instead of
// std::hash / std::shuffle, whose outputs are implementation-defined.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "shadowbench/csv.hpp"
#include "shadowbench/errors.hpp"

namespace shadowbench {

enum class Split { train, val, test, unassigned };

inline std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::unassigned: return "";
  }
  return "";
}

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  if (s.empty()) return Split::unassigned;
  throw ParseError("manifest: unknown split '" + s + "'");
}

struct ManifestEntry {
  std::string path;
  std::string category;
  Split split = Split::unassigned;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

inline DatasetManifest parse_manifest(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("manifest: " + origin + " is empty");
  }
  detail::chomp(line);
  if (line != "path,category,split") {
    throw ParseError("manifest: " + origin + " must start with header 'path,category,split'");
  }
  DatasetManifest m;
  std::set<std::string> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    detail::chomp(line);
    if (line.empty()) continue;
    const auto fields = detail::csv_split(line);
    if (fields.size() != 3) {
      throw ParseError("manifest: " + origin + " line " + std::to_string(lineno) +
                       ": expected 3 fields, got " + std::to_string(fields.size()));
    }
    ManifestEntry e;
    e.path = fields[0];
    e.category = fields[1];
    e.split = parse_split(fields[2]);
    if (e.path.empty()) {
      throw ParseError("manifest: " + origin + " line " + std::to_string(lineno) +
                       ": empty path");
    }
    if (!seen.insert(e.path).second) {
      throw ParseError("manifest: " + origin + ": duplicate path '" + e.path + "'");
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("manifest: cannot open '" + path + "'");
  return parse_manifest(in, path);
}

inline void write_manifest(std::ostream& out, const DatasetManifest& m) {
  out << "path,category,split\n";
  for (const auto& e : m.entries) {
    out << detail::csv_escape(e.path) << ',' << detail::csv_escape(e.category) << ','
        << to_string(e.split) << '\n';
  }
}

inline void write_manifest(const std::string& path, const DatasetManifest& m) {
  std::ofstream out(path);
  if (!out) throw IoError("manifest: cannot open '" + path + "' for writing");
  write_manifest(out, m);
  if (!out) throw IoError("manifest: failed writing '" + path + "'");
}

namespace detail {

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Portions of n summed from integer weights w (in tenths), distributed by
/// largest remainder; ties go to the earlier bucket. Exact in integers, so
/// 7:1:2 of 13 is 9/1/3 on every platform.
inline std::vector<std::size_t> largest_remainder_tenths(std::size_t n,
                                                         const std::vector<std::size_t>& w) {
  std::vector<std::size_t> base(w.size());
  std::vector<std::size_t> rem(w.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    base[i] = n * w[i] / 10;
    rem[i] = n * w[i] % 10;
    assigned += base[i];
  }
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < n; ++k) {
    ++base[order[k % order.size()]];
    ++assigned;
  }
  return base;
}

}  // namespace detail

/// Assign a 7:1:2 train/val/test split independently inside every category.
/// Deterministic in (seed, category, set of paths in the category): entry
/// order in the manifest and the presence of other categories do not change
/// the outcome. Existing split values are overwritten. Output preserves the
/// original entry order.
inline DatasetManifest split_dataset(const DatasetManifest& input, std::uint64_t seed) {
  for (const auto& e : input.entries) {
    if (e.category.empty()) {
      throw ParseError("split: entry '" + e.path + "' has no category");
    }
  }

  // Category -> entry indices, with indices ordered by path so the shuffle
  // input is canonical regardless of manifest order.
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < input.entries.size(); ++i) {
    groups[input.entries[i].category].push_back(i);
  }
  DatasetManifest out = input;
  for (auto& [category, idxs] : groups) {
    std::sort(idxs.begin(), idxs.end(), [&](std::size_t a, std::size_t b) {
      return input.entries[a].path < input.entries[b].path;
    });
    std::mt19937_64 rng(detail::splitmix64(seed ^ detail::fnv1a64(category)));
    // Fisher-Yates with an explicit modulo draw: std::shuffle's sequence of
    // engine calls is implementation-defined, this is not.
    for (std::size_t i = idxs.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(idxs[i - 1], idxs[j]);
    }
    const auto sizes = detail::largest_remainder_tenths(idxs.size(), {7, 1, 2});
    std::size_t pos = 0;
    for (std::size_t k = 0; k < sizes[0]; ++k) out.entries[idxs[pos++]].split = Split::train;
    for (std::size_t k = 0; k < sizes[1]; ++k) out.entries[idxs[pos++]].split = Split::val;
    for (std::size_t k = 0; k < sizes[2]; ++k) out.entries[idxs[pos++]].split = Split::test;
  }
  return out;
}

}  // namespace shadowbench
