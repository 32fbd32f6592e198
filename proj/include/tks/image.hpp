#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tks/plan.hpp"

namespace tks {

// Interleaved 8-bit RGB, row-major, no padding.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

  [[nodiscard]] std::size_t byte_size() const noexcept { return pixels.size(); }
  [[nodiscard]] std::uint8_t* pixel(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  [[nodiscard]] const std::uint8_t* pixel(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  void fill(std::uint8_t r, std::uint8_t g, std::uint8_t b);
  // Fills [x1, x2) x [y1, y2) clipped to the image.
  void fill_rect(int x1, int y1, int x2, int y2, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  friend bool operator==(const Image&, const Image&) = default;
};

// Bilinear resize of `region` of `src` into out_width x out_height pixels
// written to `dst` (out_width * out_height * 3 bytes). Sample centers sit at
// half-pixel offsets, edges clamp, and values round half to even.
void resize_bilinear(const Image& src, const CropRect& region, int out_width, int out_height,
                     std::span<std::uint8_t> dst);

Image resize_bilinear(const Image& src, const CropRect& region, int out_width, int out_height);

Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace tks
