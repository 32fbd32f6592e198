#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>

#include "tks/image.hpp"
#include "tks/timeline.hpp"

namespace tks {

// Random access to decoded RGB frames. Implementations allow concurrent
// readers.
class FrameSource {
 public:
  virtual ~FrameSource() = default;

  [[nodiscard]] virtual FrameIndex frame_count() const = 0;
  [[nodiscard]] virtual int width() const = 0;
  [[nodiscard]] virtual int height() const = 0;
  // Throws IoError naming the frame when it cannot be produced.
  [[nodiscard]] virtual Image read(FrameIndex f) const = 0;
};

// Raw packed frames: 16-byte header ("TKSF", then frame count, height, width
// as u32 little-endian) followed by count * height * width * 3 bytes of RGB.
inline constexpr char kPackedFramesMagic[4] = {'T', 'K', 'S', 'F'};
inline constexpr std::size_t kPackedFramesHeader = 16;

class PackedFrameSource final : public FrameSource {
 public:
  explicit PackedFrameSource(const std::filesystem::path& path);
  ~PackedFrameSource() override;
  PackedFrameSource(const PackedFrameSource&) = delete;
  PackedFrameSource& operator=(const PackedFrameSource&) = delete;

  [[nodiscard]] FrameIndex frame_count() const override { return count_; }
  [[nodiscard]] int width() const override { return width_; }
  [[nodiscard]] int height() const override { return height_; }
  [[nodiscard]] Image read(FrameIndex f) const override;

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  FrameIndex count_ = 0;
  int width_ = 0;
  int height_ = 0;
};

// Appends frames to a packed-frames file; the header is finalized on close().
class PackedFrameWriter {
 public:
  PackedFrameWriter(const std::filesystem::path& path, int width, int height);
  ~PackedFrameWriter();
  PackedFrameWriter(const PackedFrameWriter&) = delete;
  PackedFrameWriter& operator=(const PackedFrameWriter&) = delete;

  void write(const Image& frame);
  void close();

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  int width_;
  int height_;
  std::uint32_t count_ = 0;
};

// Directory of images numbered from 0 through a printf pattern such as
// "%06d.png". The frame count is the length of the consecutive run from 0.
class ImageDirectorySource final : public FrameSource {
 public:
  explicit ImageDirectorySource(std::filesystem::path directory, std::string pattern = "%06d.png");

  [[nodiscard]] FrameIndex frame_count() const override { return count_; }
  [[nodiscard]] int width() const override { return width_; }
  [[nodiscard]] int height() const override { return height_; }
  [[nodiscard]] Image read(FrameIndex f) const override;
  [[nodiscard]] std::filesystem::path frame_path(FrameIndex f) const;

 private:
  std::filesystem::path directory_;
  std::string pattern_;
  FrameIndex count_ = 0;
  int width_ = 0;
  int height_ = 0;
};

// Frames produced on demand by a callback (synthetic scenes, tests).
class GeneratedFrameSource final : public FrameSource {
 public:
  using Render = std::function<Image(FrameIndex)>;
  GeneratedFrameSource(FrameIndex count, int width, int height, Render render);

  [[nodiscard]] FrameIndex frame_count() const override { return count_; }
  [[nodiscard]] int width() const override { return width_; }
  [[nodiscard]] int height() const override { return height_; }
  [[nodiscard]] Image read(FrameIndex f) const override;

 private:
  FrameIndex count_;
  int width_;
  int height_;
  Render render_;
};

// A regular file opens as packed frames. A directory opens as an image
// directory with "%06d.png"; a path containing '%' is split into directory
// and file pattern.
std::unique_ptr<FrameSource> open_frame_source(const std::string& spec);

}  // namespace tks
