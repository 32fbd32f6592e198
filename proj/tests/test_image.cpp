#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "tks/error.hpp"
#include "tks/image.hpp"

using namespace tks;

namespace {

Image random_image(std::mt19937_64& rng, int w, int h) {
  Image img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() % 256);
  return img;
}

}  // namespace

TEST_CASE("identity resize copies the frame") {
  std::mt19937_64 rng(71);
  const Image img = random_image(rng, 13, 7);
  CHECK(resize_bilinear(img, CropRect::full_frame(13, 7), 13, 7) == img);
}

TEST_CASE("solid color survives any crop and size") {
  Image img(40, 30);
  img.fill(12, 200, 77);
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 50; ++trial) {
    const int x1 = static_cast<int>(rng() % 39);
    const int y1 = static_cast<int>(rng() % 29);
    const CropRect r{x1, y1, x1 + 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(40 - x1)),
                     y1 + 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(30 - y1))};
    const Image out = resize_bilinear(img, r, 1 + static_cast<int>(rng() % 60), 1 + static_cast<int>(rng() % 60));
    for (std::size_t i = 0; i < out.pixels.size(); i += 3) {
      CHECK(out.pixels[i] == 12);
      CHECK(out.pixels[i + 1] == 200);
      CHECK(out.pixels[i + 2] == 77);
    }
  }
}

TEST_CASE("resize agrees with a separable reference") {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 500; ++trial) {
    const Image img = random_image(rng, 8, 8);
    const auto ref = oracle::separable_bilinear(img.pixels, 8, 8, 0, 0, 8, 8, 5, 5);
    const Image out = resize_bilinear(img, CropRect::full_frame(8, 8), 5, 5);
    for (std::size_t i = 0; i < out.pixels.size(); ++i) CHECK(std::abs(out.pixels[i] - ref[i]) <= 1.0);
  }
  // Cropped and upscaled.
  for (int trial = 0; trial < 200; ++trial) {
    const Image img = random_image(rng, 12, 9);
    const auto ref = oracle::separable_bilinear(img.pixels, 12, 9, 3, 2, 6, 5, 11, 7);
    const Image out = resize_bilinear(img, {3, 2, 9, 7}, 11, 7);
    for (std::size_t i = 0; i < out.pixels.size(); ++i) CHECK(std::abs(out.pixels[i] - ref[i]) <= 1.0);
  }
}

TEST_CASE("halving averages pixel pairs with round-half-to-even") {
  Image img(4, 1);
  const std::uint8_t values[4] = {10, 11, 20, 23};
  for (int x = 0; x < 4; ++x) {
    img.pixel(x, 0)[0] = values[x];
    img.pixel(x, 0)[1] = values[x];
    img.pixel(x, 0)[2] = values[x];
  }
  const Image out = resize_bilinear(img, CropRect::full_frame(4, 1), 2, 1);
  CHECK(out.pixel(0, 0)[0] == 10);  // 10.5 -> 10
  CHECK(out.pixel(1, 0)[0] == 22);  // 21.5 -> 22
}

TEST_CASE("resize argument checks") {
  Image img(4, 4);
  std::vector<std::uint8_t> dst(3);
  CHECK_THROWS_AS(resize_bilinear(img, {0, 0, 5, 4}, 1, 1, dst), ValidationError);
  CHECK_THROWS_AS(resize_bilinear(img, {0, 0, 4, 4}, 0, 1), ValidationError);
  CHECK_THROWS_AS(resize_bilinear(img, {0, 0, 4, 4}, 2, 2, dst), ValidationError);
}

TEST_CASE("PNG round-trip") {
  test::TempDir dir;
  std::mt19937_64 rng(83);
  const Image img = random_image(rng, 17, 9);
  write_png(dir / "a.png", img);
  CHECK(read_png(dir / "a.png") == img);
  CHECK_THROWS_AS(read_png(dir / "missing.png"), IoError);
}

TEST_CASE("fill_rect clips to the image") {
  Image img(4, 4);
  img.fill_rect(-2, 2, 10, 10, 1, 2, 3);
  CHECK(img.pixel(0, 1)[0] == 0);
  CHECK(img.pixel(0, 2)[0] == 1);
  CHECK(img.pixel(3, 3)[2] == 3);
}
