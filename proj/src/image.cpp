#include "tks/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "tks/error.hpp"

namespace tks {

void Image::fill(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = r;
    pixels[i + 1] = g;
    pixels[i + 2] = b;
  }
}

void Image::fill_rect(int x1, int y1, int x2, int y2, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  x1 = std::max(x1, 0);
  y1 = std::max(y1, 0);
  x2 = std::min(x2, width);
  y2 = std::min(y2, height);
  for (int y = y1; y < y2; ++y) {
    for (int x = x1; x < x2; ++x) {
      std::uint8_t* p = pixel(x, y);
      p[0] = r;
      p[1] = g;
      p[2] = b;
    }
  }
}

namespace {

struct Tap {
  int lo = 0;
  int hi = 0;
  double w = 0.0;  // weight of hi
};

std::vector<Tap> make_taps(int offset, int in_size, int out_size) {
  std::vector<Tap> taps(static_cast<std::size_t>(out_size));
  const double scale = static_cast<double>(in_size) / out_size;
  for (int i = 0; i < out_size; ++i) {
    double src = (i + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in_size - 1));
    const int lo = static_cast<int>(std::floor(src));
    const int hi = std::min(lo + 1, in_size - 1);
    taps[static_cast<std::size_t>(i)] = {offset + lo, offset + hi, src - lo};
  }
  return taps;
}

std::uint8_t to_byte(double v) {
  // nearbyint uses the default round-half-to-even mode.
  return static_cast<std::uint8_t>(std::clamp(std::nearbyint(v), 0.0, 255.0));
}

}  // namespace

void resize_bilinear(const Image& src, const CropRect& region, int out_width, int out_height,
                     std::span<std::uint8_t> dst) {
  if (out_width < 1 || out_height < 1) throw ValidationError("resize target must be at least 1x1");
  if (region.x1 < 0 || region.y1 < 0 || region.x2 > src.width || region.y2 > src.height ||
      region.x1 >= region.x2 || region.y1 >= region.y2) {
    throw ValidationError("crop region outside the source frame");
  }
  if (dst.size() != static_cast<std::size_t>(out_width) * out_height * 3) {
    throw ValidationError("resize destination has the wrong size");
  }

  const auto xs = make_taps(region.x1, region.width(), out_width);
  const auto ys = make_taps(region.y1, region.height(), out_height);
  std::uint8_t* out = dst.data();
  for (const Tap& ty : ys) {
    const std::uint8_t* row0 = src.pixel(0, ty.lo);
    const std::uint8_t* row1 = src.pixel(0, ty.hi);
    for (const Tap& tx : xs) {
      const std::uint8_t* a = row0 + tx.lo * 3;
      const std::uint8_t* b = row0 + tx.hi * 3;
      const std::uint8_t* c = row1 + tx.lo * 3;
      const std::uint8_t* d = row1 + tx.hi * 3;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = a[ch] + (b[ch] - a[ch]) * tx.w;
        const double bottom = c[ch] + (d[ch] - c[ch]) * tx.w;
        *out++ = to_byte(top + (bottom - top) * ty.w);
      }
    }
  }
}

Image resize_bilinear(const Image& src, const CropRect& region, int out_width, int out_height) {
  Image out(out_width, out_height);
  resize_bilinear(src, region, out_width, out_height, out.pixels);
  return out;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Image read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&img, path.c_str()) == 0) {
    throw IoError("cannot read PNG " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  Image out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr) == 0) {
    std::string msg = img.message;
    png_image_free(&img);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  if (png_image_write_to_stdio(&img, file.get(), 0, image.pixels.data(), 0, nullptr) == 0) {
    throw IoError("cannot encode PNG " + path.string() + ": " + img.message);
  }
}

}  // namespace tks
