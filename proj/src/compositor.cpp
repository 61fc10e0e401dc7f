// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include "medcorpus/compositor.hpp"

#include <algorithm>
#include <cstdint>

#include <fmt/format.h>

namespace medcorpus {

void CompositionPolicy::validate() const {
  if (max_images < 1) throw Error(ErrorCode::kConfigError, "max_images must be >= 1");
  if (!(max_extremeness >= 1.0)) throw Error(ErrorCode::kConfigError, "max_extremeness must be >= 1");
  if (min_edge_px < 1) throw Error(ErrorCode::kConfigError, "min_edge_px must be >= 1");
}

double extremeness(int width, int height) {
  const auto lo = static_cast<double>(std::min(width, height));
  const auto hi = static_cast<double>(std::max(width, height));
  return hi / lo;
}

int scale_edge(int length, int target, int reference) {
  const std::int64_t num = 2 * static_cast<std::int64_t>(length) * target + reference;
  const std::int64_t v = num / (2 * static_cast<std::int64_t>(reference));
  return static_cast<int>(std::max<std::int64_t>(v, 1));
}

namespace {

LayoutDecision candidate(std::span<const Dims> dims, Layout layout) {
  LayoutDecision d;
  d.layout = layout;
  d.source_dims.assign(dims.begin(), dims.end());
  if (layout == Layout::kHorizontal) {
    int h = dims[0].height;
    for (const auto& s : dims) h = std::min(h, s.height);
    d.target_common_edge = h;
    d.height = h;
    for (const auto& s : dims) {
      const Dims tile{scale_edge(s.width, h, s.height), h};
      d.tile_dims.push_back(tile);
      d.width += tile.width;
    }
  } else {
    int w = dims[0].width;
    for (const auto& s : dims) w = std::min(w, s.width);
    d.target_common_edge = w;
    d.width = w;
    for (const auto& s : dims) {
      const Dims tile{w, scale_edge(s.height, w, s.width)};
      d.tile_dims.push_back(tile);
      d.height += tile.height;
    }
  }
  d.extremeness = extremeness(d.width, d.height);
  return d;
}

}  // namespace

LayoutDecision plan_layout(std::span<const Dims> dims, const CompositionPolicy& policy) {
  if (dims.empty()) throw Error(ErrorCode::kInvalidInput, "no images to compose");
  for (const auto& d : dims) {
    if (d.width < 1 || d.height < 1) throw Error(ErrorCode::kInvalidInput, "image dimensions must be positive");
  }
  if (static_cast<int>(dims.size()) > policy.max_images) {
    throw Error(ErrorCode::kTooManyImages,
                fmt::format("{} images exceeds the limit of {}", dims.size(), policy.max_images));
  }

  LayoutDecision chosen;
  if (dims.size() == 1) {
    chosen.layout = Layout::kSingle;
    chosen.target_common_edge = dims[0].height;
    chosen.width = dims[0].width;
    chosen.height = dims[0].height;
    chosen.extremeness = extremeness(dims[0].width, dims[0].height);
    chosen.source_dims = {dims[0]};
    chosen.tile_dims = {dims[0]};
  } else {
    auto horizontal = candidate(dims, Layout::kHorizontal);
    auto vertical = candidate(dims, Layout::kVertical);
    chosen = vertical.extremeness < horizontal.extremeness ? std::move(vertical) : std::move(horizontal);
  }

  for (const auto& t : chosen.tile_dims) {
    if (t.width < policy.min_edge_px || t.height < policy.min_edge_px) {
      throw Error(ErrorCode::kTooSmall, fmt::format("tile {}x{} below the minimum edge of {} px",
                                                    t.width, t.height, policy.min_edge_px));
    }
  }
  if (chosen.extremeness > policy.max_extremeness) {
    throw Error(ErrorCode::kTooExtreme, fmt::format("{}x{} composite has aspect extremeness {:.4f} > {}",
                                                    chosen.width, chosen.height, chosen.extremeness,
                                                    policy.max_extremeness));
  }
  return chosen;
}

CompositeImage compose(std::span<const ImageBuffer> images, const LayoutDecision& decision,
                       const CompositionPolicy& policy) {
  if (images.size() != decision.source_dims.size() ||
      decision.tile_dims.size() != decision.source_dims.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("{} images for a {}-image layout", images.size(), decision.source_dims.size()));
  }
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Dims actual{images[i].width, images[i].height};
    if (actual != decision.source_dims[i]) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("image {} is {}x{}, layout expects {}x{}", i, actual.width, actual.height,
                              decision.source_dims[i].width, decision.source_dims[i].height));
    }
  }

  CompositeImage out;
  out.layout = decision.layout;
  out.source_count = static_cast<int>(images.size());
  out.width = decision.width;
  out.height = decision.height;
  if (decision.layout == Layout::kSingle) {
    out.pixels = images[0].pixels;
    return out;
  }

  ImageBuffer canvas(decision.width, decision.height);
  int offset = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& tile_dims = decision.tile_dims[i];
    const auto tile =
        kernels::resize_parallel(images[i], tile_dims.width, tile_dims.height, policy.resize_filter);
    if (decision.layout == Layout::kHorizontal) {
      kernels::blit(tile, canvas, offset, 0);
      offset += tile.width;
    } else {
      kernels::blit(tile, canvas, 0, offset);
      offset += tile.height;
    }
  }
  out.pixels = std::move(canvas.pixels);
  return out;
}

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::kTooManyImages: return "TooManyImages";
    case RejectReason::kTooExtreme: return "TooExtreme";
    case RejectReason::kTooSmall: return "TooSmall";
  }
  return "?";
}

CompositionOutcome apply_policy(const SourceRecord& record, std::span<const ImageBuffer> images,
                                const CompositionPolicy& policy) {
  if (images.size() != record.image_paths.size()) {
    throw Error(ErrorCode::kInvalidInput,
                fmt::format("record {} lists {} images, {} supplied", record.id,
                            record.image_paths.size(), images.size()));
  }
  std::vector<Dims> dims;
  dims.reserve(images.size());
  for (const auto& img : images) dims.push_back({img.width, img.height});
  try {
    const auto decision = plan_layout(dims, policy);
    return compose(images, decision, policy);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kTooManyImages: return Rejection{RejectReason::kTooManyImages, e.what()};
      case ErrorCode::kTooExtreme: return Rejection{RejectReason::kTooExtreme, e.what()};
      case ErrorCode::kTooSmall: return Rejection{RejectReason::kTooSmall, e.what()};
      default: throw;
    }
  }
}

ImageBuffer to_image_buffer(CompositeImage composite) {
  ImageBuffer b;
  b.width = composite.width;
  b.height = composite.height;
  b.pixels = std::move(composite.pixels);
  return b;
}

}  // namespace medcorpus
