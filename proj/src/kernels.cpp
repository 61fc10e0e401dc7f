// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include "medcorpus/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace medcorpus {

namespace {

struct Tap {
  int lo;
  int hi;
  double frac;
};

// Source coordinate for destination index i under pixel-centre alignment.
Tap bilinear_tap(int i, int src_len, int dst_len) {
  double s = (static_cast<double>(i) + 0.5) * src_len / dst_len - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(src_len - 1));
  const int lo = static_cast<int>(std::floor(s));
  return {lo, std::min(lo + 1, src_len - 1), s - lo};
}

int nearest_tap(int i, int src_len, int dst_len) {
  const int s = static_cast<int>(std::floor((static_cast<double>(i) + 0.5) * src_len / dst_len));
  return std::min(s, src_len - 1);
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

std::uint8_t bilinear_sample(const ImageBuffer& src, const Tap& tx, const Tap& ty, int c) {
  const auto* r0 = src.row(ty.lo);
  const auto* r1 = src.row(ty.hi);
  const double top = (1.0 - tx.frac) * r0[tx.lo * 3 + c] + tx.frac * r0[tx.hi * 3 + c];
  const double bottom = (1.0 - tx.frac) * r1[tx.lo * 3 + c] + tx.frac * r1[tx.hi * 3 + c];
  return to_byte((1.0 - ty.frac) * top + ty.frac * bottom);
}

}  // namespace

namespace kernels {

ImageBuffer resize_reference(const ImageBuffer& src, int width, int height, ResizeFilter filter) {
  if (src.width == width && src.height == height) return src;
  ImageBuffer dst(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      auto* out = dst.row(y) + x * 3;
      if (filter == ResizeFilter::kNearest) {
        const auto* in = src.row(nearest_tap(y, src.height, height)) +
                         nearest_tap(x, src.width, width) * 3;
        std::memcpy(out, in, 3);
      } else {
        const Tap tx = bilinear_tap(x, src.width, width);
        const Tap ty = bilinear_tap(y, src.height, height);
        for (int c = 0; c < 3; ++c) out[c] = bilinear_sample(src, tx, ty, c);
      }
    }
  }
  return dst;
}

ImageBuffer resize_parallel(const ImageBuffer& src, int width, int height, ResizeFilter filter) {
  if (src.width == width && src.height == height) return src;
  ImageBuffer dst(width, height);
  if (filter == ResizeFilter::kNearest) {
    std::vector<int> xs(static_cast<std::size_t>(width));
    for (int x = 0; x < width; ++x) xs[x] = nearest_tap(x, src.width, width);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < height; ++y) {
      const auto* in = src.row(nearest_tap(y, src.height, height));
      auto* out = dst.row(y);
      for (int x = 0; x < width; ++x) std::memcpy(out + x * 3, in + xs[x] * 3, 3);
    }
    return dst;
  }
  std::vector<Tap> xs(static_cast<std::size_t>(width));
  for (int x = 0; x < width; ++x) xs[x] = bilinear_tap(x, src.width, width);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    const Tap ty = bilinear_tap(y, src.height, height);
    auto* out = dst.row(y);
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) out[x * 3 + c] = bilinear_sample(src, xs[x], ty, c);
    }
  }
  return dst;
}

void blit(const ImageBuffer& tile, ImageBuffer& dst, int x, int y) {
  const auto row_bytes = static_cast<std::size_t>(tile.width) * 3;
  for (int r = 0; r < tile.height; ++r) {
    std::memcpy(dst.row(y + r) + static_cast<std::size_t>(x) * 3, tile.row(r), row_bytes);
  }
}

std::vector<std::size_t> count_batch_reference(std::span<const std::string> texts,
                                               TokenCounter count) {
  std::vector<std::size_t> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(count(t));
  return out;
}

std::vector<std::size_t> count_batch_parallel(std::span<const std::string> texts,
                                              TokenCounter count) {
  std::vector<std::size_t> out(texts.size());
  const auto n = static_cast<std::ptrdiff_t>(texts.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = count(texts[i]);
  return out;
}

}  // namespace kernels

int set_worker_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
  return omp_get_max_threads();
#else
  (void)n;
  return 1;
#endif
}

int worker_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace medcorpus
