// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "medcorpus/fixture.hpp"
#include "medcorpus/kernels.hpp"
#include "medcorpus/stats.hpp"

using namespace medcorpus;

namespace {

ImageBuffer noise(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ImageBuffer img;
  img.width = static_cast<std::size_t>(w);
  img.height = static_cast<std::size_t>(h);
  img.pixels.resize(img.width * img.height * 3);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng());
  return img;
}

}  // namespace

TEST_CASE("parallel resize matches the serial reference bit for bit") {
  std::mt19937_64 rng(7);
  for (int threads : {1, 2, 4}) {
    set_worker_threads(threads);
    for (int i = 0; i < 40; ++i) {
      const int sw = 1 + static_cast<int>(rng() % 200);
      const int sh = 1 + static_cast<int>(rng() % 200);
      const int dw = 1 + static_cast<int>(rng() % 200);
      const int dh = 1 + static_cast<int>(rng() % 200);
      const auto src = noise(sw, sh, rng());
      for (auto filter : {ResizeFilter::kBilinear, ResizeFilter::kNearest}) {
        CAPTURE(sw);
        CAPTURE(sh);
        CAPTURE(dw);
        CAPTURE(dh);
        const auto a = kernels::resize_reference(src, dw, dh, filter);
        const auto b = kernels::resize_parallel(src, dw, dh, filter);
        REQUIRE(a.width == static_cast<std::size_t>(dw));
        REQUIRE(a.height == static_cast<std::size_t>(dh));
        CHECK(a.pixels == b.pixels);
      }
    }
  }
  set_worker_threads(0);
}

TEST_CASE("same-size resize copies") {
  const auto src = noise(33, 17, 3);
  CHECK(kernels::resize_parallel(src, 33, 17, ResizeFilter::kBilinear).pixels == src.pixels);
  CHECK(kernels::resize_reference(src, 33, 17, ResizeFilter::kNearest).pixels == src.pixels);
}

TEST_CASE("bilinear halving averages 2x2 blocks") {
  ImageBuffer src;
  src.width = 2;
  src.height = 2;
  src.pixels = {0, 0, 0, 100, 100, 100, 100, 100, 100, 200, 200, 200};
  const auto out = kernels::resize_parallel(src, 1, 1, ResizeFilter::kBilinear);
  REQUIRE(out.pixels.size() == 3);
  CHECK(out.pixels[0] == 100);
}

TEST_CASE("a constant image stays constant") {
  ImageBuffer src;
  src.width = 50;
  src.height = 30;
  src.pixels.assign(50 * 30 * 3, 77);
  for (auto filter : {ResizeFilter::kBilinear, ResizeFilter::kNearest}) {
    const auto out = kernels::resize_parallel(src, 23, 61, filter);
    for (auto p : out.pixels) REQUIRE(p == 77);
  }
}

TEST_CASE("blit places a tile") {
  ImageBuffer dst;
  dst.width = 4;
  dst.height = 2;
  dst.pixels.assign(4 * 2 * 3, 0);
  ImageBuffer tile;
  tile.width = 2;
  tile.height = 1;
  tile.pixels = {1, 2, 3, 4, 5, 6};
  kernels::blit(tile, dst, 2, 1);
  CHECK(dst.pixels[(1 * 4 + 2) * 3] == 1);
  CHECK(dst.pixels[(1 * 4 + 3) * 3 + 2] == 6);
  CHECK(dst.pixels[0] == 0);
}

TEST_CASE("batch token counting agrees with the serial reference") {
  std::vector<std::string> texts;
  for (std::uint64_t i = 0; i < 3000; ++i) texts.push_back(fixture_sentence(i, i % 40) + " 肿瘤" + std::to_string(i));
  texts.emplace_back();
  for (int threads : {1, 3}) {
    set_worker_threads(threads);
    CHECK(kernels::count_batch_parallel(texts, &count_tokens_default) ==
          kernels::count_batch_reference(texts, &count_tokens_default));
  }
  set_worker_threads(0);
}
