// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medcorpus/image.hpp"

namespace medcorpus {

enum class ResizeFilter { kNearest, kBilinear };

// Kernels come in pairs: a straightforward serial reference and an OpenMP
// version. The pair must agree bit-for-bit; tests and bench_kernels compare
// them.
namespace kernels {

// Pixel-centre aligned resampling. Same-size input is copied unchanged.
ImageBuffer resize_reference(const ImageBuffer& src, int width, int height, ResizeFilter filter);
ImageBuffer resize_parallel(const ImageBuffer& src, int width, int height, ResizeFilter filter);

// Copies `tile` into `dst` with its top-left corner at (x, y).
void blit(const ImageBuffer& tile, ImageBuffer& dst, int x, int y);

using TokenCounter = std::size_t (*)(std::string_view);

std::vector<std::size_t> count_batch_reference(std::span<const std::string> texts,
                                               TokenCounter count);
std::vector<std::size_t> count_batch_parallel(std::span<const std::string> texts,
                                              TokenCounter count);

}  // namespace kernels

// Number of OpenMP threads the parallel kernels use; 0 leaves the runtime
// default. Returns the effective count.
int set_worker_threads(int n);
int worker_threads();

}  // namespace medcorpus
