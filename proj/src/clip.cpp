#include "tks/clip.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "tks/error.hpp"
#include "tks/serialize.hpp"

namespace tks {

namespace {

constexpr char kMagic[4] = {'T', 'K', 'S', 'M'};
constexpr std::size_t kHeaderBytes = 24;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[at + i]) << (8 * i);
  return v;
}

}  // namespace

ClipTensor materialize(const SamplingPlan& plan, const FrameSource& source, int height, int width) {
  if (plan.entries.empty()) throw ValidationError("cannot materialize an empty plan");
  if (height < 1 || width < 1) throw ValidationError("clip size must be positive");

  ClipTensor clip;
  clip.n = static_cast<std::uint32_t>(plan.entries.size());
  clip.height = static_cast<std::uint32_t>(height);
  clip.width = static_cast<std::uint32_t>(width);
  clip.pixels.resize(clip.n * clip.frame_bytes());

  const CropRect full = CropRect::full_frame(source.width(), source.height());
  Image frame;
  FrameIndex loaded = -1;
  for (std::size_t i = 0; i < plan.entries.size(); ++i) {
    const PlanEntry& e = plan.entries[i];
    if (e.frame != loaded) {
      try {
        frame = source.read(e.frame);
      } catch (const Error& err) {
        throw IoError("sample " + plan.sample_id + ": cannot fetch frame " + std::to_string(e.frame) + ": " +
                      err.what());
      }
      loaded = e.frame;
    }
    std::span<std::uint8_t> dst(clip.pixels.data() + i * clip.frame_bytes(), clip.frame_bytes());
    resize_bilinear(frame, e.crop.value_or(full), width, height, dst);
  }

  Json prov;
  prov["sample_id"] = plan.sample_id;
  prov["crop_mode"] = plan.crop_mode.empty() ? "none" : plan.crop_mode;
  prov["plan"] = plan_to_json(plan);
  clip.provenance = prov.dump();
  return clip;
}

std::vector<std::uint8_t> pack_clip(const ClipTensor& clip) {
  const std::size_t payload = static_cast<std::size_t>(clip.n) * clip.frame_bytes();
  if (clip.pixels.size() != payload) throw ValidationError("clip payload does not match n*h*w*c");
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + payload + 4 + clip.provenance.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kClipVersion);
  put_u32(out, clip.n);
  put_u32(out, clip.height);
  put_u32(out, clip.width);
  put_u32(out, clip.channels);
  out.insert(out.end(), clip.pixels.begin(), clip.pixels.end());
  put_u32(out, static_cast<std::uint32_t>(clip.provenance.size()));
  out.insert(out.end(), clip.provenance.begin(), clip.provenance.end());
  return out;
}

ClipTensor unpack_clip(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw IoError("truncated clip: header incomplete");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw IoError("bad clip magic");
  if (get_u32(bytes, 4) != kClipVersion) throw IoError("unsupported clip version " + std::to_string(get_u32(bytes, 4)));

  ClipTensor clip;
  clip.n = get_u32(bytes, 8);
  clip.height = get_u32(bytes, 12);
  clip.width = get_u32(bytes, 16);
  clip.channels = get_u32(bytes, 20);
  const std::uint64_t payload = static_cast<std::uint64_t>(clip.n) * clip.height * clip.width * clip.channels;
  const std::uint64_t available = bytes.size() - kHeaderBytes;
  if (available < payload + 4) {
    throw IoError("truncated clip: declared n*h*w*c = " + std::to_string(payload) + " bytes, payload holds " +
                  std::to_string(available < 4 ? 0 : available - 4));
  }
  const std::size_t prov_at = kHeaderBytes + static_cast<std::size_t>(payload);
  const std::uint32_t prov_len = get_u32(bytes, prov_at);
  if (available != payload + 4 + prov_len) {
    throw IoError("clip length mismatch: declared n*h*w*c = " + std::to_string(payload) +
                  " and provenance " + std::to_string(prov_len) + " bytes do not match the container size");
  }
  clip.pixels.assign(bytes.begin() + kHeaderBytes, bytes.begin() + static_cast<std::ptrdiff_t>(prov_at));
  clip.provenance.assign(reinterpret_cast<const char*>(bytes.data()) + prov_at + 4, prov_len);
  return clip;
}

void write_clip(const std::filesystem::path& path, const ClipTensor& clip) {
  const auto bytes = pack_clip(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

ClipTensor read_clip(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read clip " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return unpack_clip(bytes);
}

}  // namespace tks
