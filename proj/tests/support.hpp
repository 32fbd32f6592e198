#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tks/timeline.hpp"

namespace tks::test {

// Contiguous segments from (name, length) pairs starting at frame 0.
inline TaskTimeline make_timeline(const std::vector<std::pair<std::string, FrameIndex>>& parts,
                                  std::string sample_id = "s0") {
  TaskTimeline t;
  t.sample_id = std::move(sample_id);
  FrameIndex at = 0;
  for (const auto& [name, len] : parts) {
    t.segments.push_back({name, at, at + len});
    at += len;
  }
  t.frame_count = at;
  return t;
}

// Pick[0,40) MoveDestination[40,80) Wait[80,120) Place[120,160) MoveSource[160,200)
inline TaskTimeline armbench(FrameIndex len = 40) {
  return make_timeline({{"Pick", len}, {"MoveDestination", len}, {"Wait", len}, {"Place", len}, {"MoveSource", len}});
}

inline TaskTimeline armbench(const std::vector<FrameIndex>& lens) {
  static const char* names[] = {"Pick", "MoveDestination", "Wait", "Place", "MoveSource"};
  std::vector<std::pair<std::string, FrameIndex>> parts;
  for (std::size_t i = 0; i < lens.size(); ++i) parts.emplace_back(names[i], lens[i]);
  return make_timeline(parts);
}

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() / ("tks-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace tks::test
