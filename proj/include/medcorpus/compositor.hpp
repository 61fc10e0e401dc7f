// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "medcorpus/corpus_model.hpp"
#include "medcorpus/error.hpp"
#include "medcorpus/image.hpp"
#include "medcorpus/kernels.hpp"

namespace medcorpus {

struct Dims {
  int width = 0;
  int height = 0;

  bool operator==(const Dims&) const = default;
};

struct CompositionPolicy {
  int max_images = 4;
  double max_extremeness = 3.0;
  int min_edge_px = 32;
  ResizeFilter resize_filter = ResizeFilter::kBilinear;

  // Throws Error(kConfigError) when an invariant does not hold.
  void validate() const;
};

struct LayoutDecision {
  Layout layout = Layout::kSingle;
  // Shared height (horizontal) or width (vertical); for single, the height.
  int target_common_edge = 0;
  // max(W/H, H/W) of the planned composite.
  double extremeness = 1.0;
  int width = 0;
  int height = 0;
  std::vector<Dims> source_dims;
  std::vector<Dims> tile_dims;
};

// max(w/h, h/w).
double extremeness(int width, int height);

// Round-half-up of length * target / reference, at least 1.
int scale_edge(int length, int target, int reference);

// Plans the concatenation of images with the given dimensions.
//
// One image is passed through. Otherwise two candidates are evaluated:
// horizontal scales every image to the minimum height and sums the widths,
// vertical scales to the minimum width and sums the heights. The candidate
// with the smaller extremeness wins, ties go to horizontal. Scaling only ever
// shrinks images.
//
// Throws Error with kTooManyImages, kTooSmall (any tile edge below
// min_edge_px) or kTooExtreme, checked in that order; kInvalidInput for an
// empty list or non-positive dimensions.
LayoutDecision plan_layout(std::span<const Dims> dims, const CompositionPolicy& policy);

// Builds the composite described by decision. Tiles are placed left to right
// or top to bottom in input order, without gutters.
// Throws Error(kDimensionMismatch) if images do not match the planned sources.
CompositeImage compose(std::span<const ImageBuffer> images, const LayoutDecision& decision,
                       const CompositionPolicy& policy);

enum class RejectReason { kTooManyImages, kTooExtreme, kTooSmall };

std::string_view to_string(RejectReason r);

struct Rejection {
  RejectReason reason;
  std::string detail;
};

using CompositionOutcome = std::variant<CompositeImage, Rejection>;

// plan_layout + compose for one record. Never yields a partial composite.
CompositionOutcome apply_policy(const SourceRecord& record, std::span<const ImageBuffer> images,
                                const CompositionPolicy& policy);

ImageBuffer to_image_buffer(CompositeImage composite);

}  // namespace medcorpus
