#pragma once

// PNG decode/encode behind small value-type interfaces. Everything beyond
// 8-bit gray and 8-bit RGB (palette, 16-bit, alpha, interlacing) is folded
// down to one of those two layouts at read time.

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <vector>

#include "shadowbench/errors.hpp"
#include "shadowbench/mask.hpp"

namespace shadowbench {

namespace detail {

struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;                 // 1 (gray) or 3 (rgb)
  std::vector<std::uint8_t> bytes;  // interleaved, row-major
};

struct FileHandle {
  std::FILE* f = nullptr;
  ~FileHandle() {
    if (f) std::fclose(f);
  }
};

inline DecodedPng decode_png(const std::filesystem::path& path) {
  FileHandle file{std::fopen(path.string().c_str(), "rb")};
  if (!file.f) throw DecodeError("cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  struct ReadGuard {
    png_structp* png;
    png_infop* info;
    ~ReadGuard() {
      if (*png) png_destroy_read_struct(png, info, nullptr);
    }
  } guard{&png, &info};
  if (!png || !info) throw DecodeError("libpng init failed for " + path.string());

  // libpng reports errors via longjmp; convert to an exception here.
  if (setjmp(png_jmpbuf(png))) {
    throw DecodeError("not a decodable PNG: " + path.string());
  }

  png_init_io(png, file.f);
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_packing(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
  }
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY &&
      png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_tRNS_to_alpha(png);
  }
  png_set_strip_alpha(png);
  (void)png_set_interlace_handling(png);
  png_read_update_info(png, info);

  DecodedPng img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.channels = static_cast<int>(png_get_channels(png, info));
  if (img.width < 1 || img.height < 1 || (img.channels != 1 && img.channels != 3)) {
    throw DecodeError("unsupported PNG layout in " + path.string());
  }

  img.bytes.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
  for (int y = 0; y < img.height; ++y) {
    rows[static_cast<std::size_t>(y)] = img.bytes.data() + static_cast<std::size_t>(y) * stride;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  return img;
}

inline void encode_png(const std::filesystem::path& path, int width, int height,
                       int channels, const std::vector<std::uint8_t>& bytes) {
  if (width < 1 || height < 1 || (channels != 1 && channels != 3) ||
      bytes.size() != static_cast<std::size_t>(width) * height * channels) {
    throw IoError("encode_png: inconsistent image buffer for " + path.string());
  }
  FileHandle file{std::fopen(path.string().c_str(), "wb")};
  if (!file.f) throw IoError("cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  struct WriteGuard {
    png_structp* png;
    png_infop* info;
    ~WriteGuard() {
      if (*png) png_destroy_write_struct(png, info);
    }
  } guard{&png, &info};
  if (!png || !info) throw IoError("libpng init failed for " + path.string());

  if (setjmp(png_jmpbuf(png))) {
    throw IoError("PNG write failed: " + path.string());
  }

  png_init_io(png, file.f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               8, channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * stride));
  }
  png_write_end(png, nullptr);
}

}  // namespace detail

/// Decode a PNG into a continuous mask. 8-bit code u maps to u/255; RGB input
/// is reduced with the BT.601 luma weights before the division.
inline ProbMask load_prob_mask(const std::filesystem::path& path) {
  const auto img = detail::decode_png(path);
  ProbMask m{img.width, img.height,
             std::vector<double>(static_cast<std::size_t>(img.width) * img.height)};
  if (img.channels == 1) {
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      m.values[i] = img.bytes[i] / 255.0;
    }
  } else {
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      const double r = img.bytes[3 * i + 0];
      const double g = img.bytes[3 * i + 1];
      const double b = img.bytes[3 * i + 2];
      const double luma = (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
      m.values[i] = std::clamp(luma, 0.0, 1.0);
    }
  }
  return m;
}

inline BinaryMask load_binary_mask(const std::filesystem::path& path, double threshold = 0.5) {
  return binarize(load_prob_mask(path), threshold);
}

inline RgbImage load_rgb_image(const std::filesystem::path& path) {
  const auto img = detail::decode_png(path);
  RgbImage out{img.width, img.height,
               std::vector<std::uint8_t>(static_cast<std::size_t>(img.width) * img.height * 3)};
  if (img.channels == 3) {
    out.values = img.bytes;
  } else {
    for (std::size_t i = 0; i < img.bytes.size(); ++i) {
      out.values[3 * i + 0] = img.bytes[i];
      out.values[3 * i + 1] = img.bytes[i];
      out.values[3 * i + 2] = img.bytes[i];
    }
  }
  return out;
}

inline void save_gray_png(const std::filesystem::path& path, int width, int height,
                          const std::vector<std::uint8_t>& pixels) {
  detail::encode_png(path, width, height, 1, pixels);
}

inline void save_rgb_png(const std::filesystem::path& path, int width, int height,
                         const std::vector<std::uint8_t>& rgb) {
  detail::encode_png(path, width, height, 3, rgb);
}

}  // namespace shadowbench
