#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tks/frame_source.hpp"
#include "tks/plan.hpp"

namespace tks {

inline constexpr int kDefaultClipSize = 224;
inline constexpr std::uint32_t kClipVersion = 1;

// n x h x w x 3 RGB frames, row-major, plus a JSON provenance document
// (sample id, plan, crop mode).
struct ClipTensor {
  std::uint32_t n = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 3;
  std::vector<std::uint8_t> pixels;
  std::string provenance;

  [[nodiscard]] std::size_t frame_bytes() const noexcept {
    return static_cast<std::size_t>(height) * width * channels;
  }
  [[nodiscard]] std::span<const std::uint8_t> frame(std::size_t i) const {
    return std::span<const std::uint8_t>(pixels).subspan(i * frame_bytes(), frame_bytes());
  }
  friend bool operator==(const ClipTensor&, const ClipTensor&) = default;
};

// Fetch every planned frame, crop it to its entry's rect (full frame when
// unset), resize bilinearly to height x width and stack in plan order.
ClipTensor materialize(const SamplingPlan& plan, const FrameSource& source, int height = kDefaultClipSize,
                       int width = kDefaultClipSize);

// "TKSM" container: magic, version, n, h, w, c (u32 little-endian), pixel
// payload, then a u32 little-endian length and the UTF-8 provenance.
std::vector<std::uint8_t> pack_clip(const ClipTensor& clip);
ClipTensor unpack_clip(std::span<const std::uint8_t> bytes);

void write_clip(const std::filesystem::path& path, const ClipTensor& clip);
ClipTensor read_clip(const std::filesystem::path& path);

}  // namespace tks
