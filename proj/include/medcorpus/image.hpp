// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace medcorpus {

// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  ImageBuffer() = default;
  ImageBuffer(int w, int h);

  std::uint8_t* row(int y) { return pixels.data() + static_cast<std::size_t>(y) * width * 3; }
  const std::uint8_t* row(int y) const {
    return pixels.data() + static_cast<std::size_t>(y) * width * 3;
  }

  bool operator==(const ImageBuffer&) const = default;
};

// PNG or JPEG, detected from the file signature. Grayscale and alpha inputs
// are converted to RGB (alpha is composited onto black).
// Throws Error(kFileNotFound) or Error(kDecodeError).
ImageBuffer load_image(const std::filesystem::path& path);
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_png(const ImageBuffer& image);
std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& image, int quality = 90);

// Writes encode_png(image) to path. Throws Error(kIoError).
void write_png(const std::filesystem::path& path, const ImageBuffer& image);

}  // namespace medcorpus
