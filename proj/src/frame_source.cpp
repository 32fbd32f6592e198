#include "tks/frame_source.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstdio>
#include <cstring>

#include "tks/error.hpp"

namespace tks {

namespace {

std::uint32_t load_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void store_u32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void read_exact(int fd, std::uint8_t* dst, std::size_t size, off_t offset, const std::filesystem::path& path) {
  std::size_t done = 0;
  while (done < size) {
    const ssize_t got = ::pread(fd, dst + done, size - done, offset + static_cast<off_t>(done));
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) throw IoError("short read from " + path.string());
    done += static_cast<std::size_t>(got);
  }
}

std::string out_of_range(FrameIndex f, FrameIndex count) {
  return "frame " + std::to_string(f) + " not available (source has " + std::to_string(count) + " frames)";
}

}  // namespace

PackedFrameSource::PackedFrameSource(const std::filesystem::path& path) : path_(path) {
  fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd_ < 0) throw IoError("cannot open packed frames " + path.string() + ": " + std::strerror(errno));
  try {
    struct stat st {};
    if (::fstat(fd_, &st) != 0) throw IoError("cannot stat " + path.string());
    if (static_cast<std::size_t>(st.st_size) < kPackedFramesHeader) {
      throw IoError("header mismatch in " + path.string() + ": file shorter than header");
    }
    std::array<std::uint8_t, kPackedFramesHeader> header{};
    read_exact(fd_, header.data(), header.size(), 0, path);
    if (std::memcmp(header.data(), kPackedFramesMagic, 4) != 0) {
      throw IoError("header mismatch in " + path.string() + ": bad magic");
    }
    count_ = load_u32(header.data() + 4);
    height_ = static_cast<int>(load_u32(header.data() + 8));
    width_ = static_cast<int>(load_u32(header.data() + 12));
    if (height_ < 1 || width_ < 1) throw IoError("header mismatch in " + path.string() + ": zero frame size");
    const auto expected = kPackedFramesHeader + static_cast<std::size_t>(count_) * width_ * height_ * 3;
    if (static_cast<std::size_t>(st.st_size) != expected) {
      throw IoError("header mismatch in " + path.string() + ": expected " + std::to_string(expected) +
                    " bytes, found " + std::to_string(st.st_size));
    }
  } catch (...) {
    ::close(fd_);
    throw;
  }
}

PackedFrameSource::~PackedFrameSource() {
  if (fd_ >= 0) ::close(fd_);
}

Image PackedFrameSource::read(FrameIndex f) const {
  if (f < 0 || f >= count_) throw IoError(out_of_range(f, count_) + " in " + path_.string());
  Image img(width_, height_);
  const auto offset = static_cast<off_t>(kPackedFramesHeader + static_cast<std::size_t>(f) * img.byte_size());
  read_exact(fd_, img.pixels.data(), img.byte_size(), offset, path_);
  return img;
}

PackedFrameWriter::PackedFrameWriter(const std::filesystem::path& path, int width, int height)
    : path_(path), width_(width), height_(height) {
  if (width < 1 || height < 1) throw ValidationError("packed frame size must be positive");
  file_ = std::fopen(path.c_str(), "wb");
  if (file_ == nullptr) throw IoError("cannot open " + path.string() + " for writing");
  std::array<std::uint8_t, kPackedFramesHeader> header{};
  if (std::fwrite(header.data(), 1, header.size(), file_) != header.size()) {
    throw IoError("write failed: " + path.string());
  }
}

PackedFrameWriter::~PackedFrameWriter() {
  if (file_ != nullptr) {
    try {
      close();
    } catch (...) {
    }
  }
}

void PackedFrameWriter::write(const Image& frame) {
  if (file_ == nullptr) throw IoError("writer already closed: " + path_.string());
  if (frame.width != width_ || frame.height != height_) {
    throw ValidationError("frame size " + std::to_string(frame.width) + "x" + std::to_string(frame.height) +
                          " does not match packed file");
  }
  if (std::fwrite(frame.pixels.data(), 1, frame.byte_size(), file_) != frame.byte_size()) {
    throw IoError("write failed: " + path_.string());
  }
  ++count_;
}

void PackedFrameWriter::close() {
  if (file_ == nullptr) return;
  std::array<std::uint8_t, kPackedFramesHeader> header{};
  std::memcpy(header.data(), kPackedFramesMagic, 4);
  store_u32(header.data() + 4, count_);
  store_u32(header.data() + 8, static_cast<std::uint32_t>(height_));
  store_u32(header.data() + 12, static_cast<std::uint32_t>(width_));
  const bool ok = std::fseek(file_, 0, SEEK_SET) == 0 &&
                  std::fwrite(header.data(), 1, header.size(), file_) == header.size();
  const bool closed = std::fclose(file_) == 0;
  file_ = nullptr;
  if (!ok || !closed) throw IoError("cannot finalize " + path_.string());
}

ImageDirectorySource::ImageDirectorySource(std::filesystem::path directory, std::string pattern)
    : directory_(std::move(directory)), pattern_(std::move(pattern)) {
  if (!std::filesystem::is_directory(directory_)) throw IoError("not a directory: " + directory_.string());
  while (std::filesystem::exists(frame_path(count_))) ++count_;
  if (count_ == 0) throw IoError("no frames matching " + pattern_ + " in " + directory_.string());
  const Image first = read_png(frame_path(0));
  width_ = first.width;
  height_ = first.height;
}

std::filesystem::path ImageDirectorySource::frame_path(FrameIndex f) const {
  std::array<char, 256> name{};
  std::snprintf(name.data(), name.size(), pattern_.c_str(), static_cast<int>(f));
  return directory_ / name.data();
}

Image ImageDirectorySource::read(FrameIndex f) const {
  if (f < 0 || f >= count_) throw IoError(out_of_range(f, count_) + " in " + directory_.string());
  Image img = read_png(frame_path(f));
  if (img.width != width_ || img.height != height_) {
    throw IoError("frame " + std::to_string(f) + " has size " + std::to_string(img.width) + "x" +
                  std::to_string(img.height) + ", expected " + std::to_string(width_) + "x" + std::to_string(height_));
  }
  return img;
}

GeneratedFrameSource::GeneratedFrameSource(FrameIndex count, int width, int height, Render render)
    : count_(count), width_(width), height_(height), render_(std::move(render)) {}

Image GeneratedFrameSource::read(FrameIndex f) const {
  if (f < 0 || f >= count_) throw IoError(out_of_range(f, count_));
  return render_(f);
}

std::unique_ptr<FrameSource> open_frame_source(const std::string& spec) {
  const std::filesystem::path path(spec);
  if (spec.find('%') != std::string::npos) {
    return std::make_unique<ImageDirectorySource>(path.parent_path(), path.filename().string());
  }
  if (std::filesystem::is_directory(path)) return std::make_unique<ImageDirectorySource>(path);
  if (std::filesystem::is_regular_file(path)) return std::make_unique<PackedFrameSource>(path);
  throw IoError("frame source not found: " + spec);
}

}  // namespace tks
