// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <random>

#include "layout_oracle.hpp"
#include "medcorpus/compositor.hpp"
#include "medcorpus/error.hpp"

using namespace medcorpus;

namespace {

ImageBuffer solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  ImageBuffer img;
  img.width = static_cast<std::size_t>(w);
  img.height = static_cast<std::size_t>(h);
  for (int i = 0; i < w * h; ++i) img.pixels.insert(img.pixels.end(), {r, g, b});
  return img;
}

ErrorCode plan_error(std::vector<Dims> dims, const CompositionPolicy& policy = {}) {
  try {
    plan_layout(dims, policy);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected plan_layout to throw");
  return ErrorCode::kInvalidInput;
}

SourceRecord record_with(std::size_t images) {
  SourceRecord r;
  r.id = "r";
  r.text = "text";
  for (std::size_t i = 0; i < images; ++i) r.image_paths.push_back("x.png");
  return r;
}

}  // namespace

TEST_CASE("two 300x200 images stack vertically") {
  const std::vector<Dims> dims{{300, 200}, {300, 200}};
  const auto d = plan_layout(dims, {});
  CHECK(d.layout == Layout::kVertical);
  CHECK(d.width == 300);
  CHECK(d.height == 400);
  CHECK(d.extremeness == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(d.target_common_edge == 300);
}

TEST_CASE("five images are too many") {
  CHECK(plan_error({{100, 100}, {100, 100}, {100, 100}, {100, 100}, {100, 100}}) == ErrorCode::kTooManyImages);
}

TEST_CASE("single image passes through") {
  const std::vector<Dims> dims{{640, 480}};
  const auto d = plan_layout(dims, {});
  CHECK(d.layout == Layout::kSingle);
  CHECK(d.extremeness == 640.0 / 480.0);
  CHECK(d.width == 640);
  CHECK(d.height == 480);
}

TEST_CASE("ties break horizontal") {
  const std::vector<Dims> dims{{100, 100}, {100, 100}};
  const auto d = plan_layout(dims, {});
  CHECK(d.layout == Layout::kHorizontal);
  CHECK(d.width == 200);
  CHECK(d.height == 100);
}

TEST_CASE("mixed sizes scale to the minimum common edge") {
  const std::vector<Dims> dims{{200, 100}, {100, 200}};
  // horizontal: h*=100, widths 200 + 50 -> 250x100 (2.5)
  // vertical:   w*=100, heights 50 + 200 -> 100x250 (2.5) -> tie, horizontal
  const auto d = plan_layout(dims, {});
  CHECK(d.layout == Layout::kHorizontal);
  CHECK(d.width == 250);
  CHECK(d.tile_dims == std::vector<Dims>{{200, 100}, {50, 100}});
}

TEST_CASE("rejections") {
  CHECK(plan_error({{10, 10}, {10, 10}}) == ErrorCode::kTooSmall);
  CHECK(plan_error({{400, 100}}) == ErrorCode::kTooExtreme);
  CHECK(plan_error({}) == ErrorCode::kInvalidInput);
  CHECK(plan_error({{0, 10}}) == ErrorCode::kInvalidInput);
  CompositionPolicy loose;
  loose.max_extremeness = 4.0;
  CHECK(plan_layout(std::vector<Dims>{{400, 100}}, loose).layout == Layout::kSingle);
}

TEST_CASE("compose concatenates without resizing when edges agree") {
  const std::vector<ImageBuffer> images{solid(100, 100, 255, 0, 0), solid(100, 100, 0, 0, 255)};
  const std::vector<Dims> dims{{100, 100}, {100, 100}};
  const auto d = plan_layout(dims, {});
  const auto c = compose(images, d, {});
  CHECK(c.width == 200);
  CHECK(c.height == 100);
  CHECK(c.layout == Layout::kHorizontal);
  CHECK(c.source_count == 2);
  // left half red, right half blue
  CHECK(c.pixels[0] == 255);
  CHECK(c.pixels[(50 * 200 + 150) * 3 + 2] == 255);
  CHECK(c.pixels[(50 * 200 + 150) * 3 + 0] == 0);
}

TEST_CASE("vertical compose preserves top-to-bottom order") {
  const std::vector<ImageBuffer> images{solid(300, 200, 10, 20, 30), solid(300, 200, 40, 50, 60)};
  const std::vector<Dims> dims{{300, 200}, {300, 200}};
  const auto c = compose(images, plan_layout(dims, {}), {});
  CHECK(c.width == 300);
  CHECK(c.height == 400);
  CHECK(c.source_count == 2);
  CHECK(c.pixels[0] == 10);
  CHECK(c.pixels[(399 * 300) * 3] == 40);
  CHECK(validate_composite(c).ok());
}

TEST_CASE("single compose is the identity") {
  ImageBuffer img = solid(37, 41, 0, 0, 0);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 7);
  const std::vector<ImageBuffer> images{img};
  const std::vector<Dims> dims{{37, 41}};
  const auto c = compose(images, plan_layout(dims, {}), {});
  CHECK(c.layout == Layout::kSingle);
  CHECK(c.pixels == img.pixels);
}

TEST_CASE("compose rejects images that do not match the plan") {
  const std::vector<Dims> dims{{100, 100}, {100, 100}};
  const auto d = plan_layout(dims, {});
  const std::vector<ImageBuffer> images{solid(100, 100, 0, 0, 0), solid(90, 100, 0, 0, 0)};
  try {
    compose(images, d, {});
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
}

TEST_CASE("apply_policy outcomes") {
  const CompositionPolicy policy;
  {
    std::vector<ImageBuffer> images;
    for (int i = 0; i < 4; ++i) images.push_back(solid(120 + i * 10, 100, 1, 2, 3));
    const auto out = apply_policy(record_with(4), images, policy);
    REQUIRE(std::holds_alternative<CompositeImage>(out));
    CHECK(std::get<CompositeImage>(out).source_count == 4);
  }
  {
    std::vector<ImageBuffer> images(6, solid(64, 64, 0, 0, 0));
    const auto out = apply_policy(record_with(6), images, policy);
    REQUIRE(std::holds_alternative<Rejection>(out));
    CHECK(std::get<Rejection>(out).reason == RejectReason::kTooManyImages);
  }
  {
    std::vector<ImageBuffer> images(2, solid(10, 10, 0, 0, 0));
    const auto out = apply_policy(record_with(2), images, policy);
    REQUIRE(std::holds_alternative<Rejection>(out));
    CHECK(std::get<Rejection>(out).reason == RejectReason::kTooSmall);
  }
}

TEST_CASE("composition is deterministic") {
  const std::vector<ImageBuffer> images{solid(150, 90, 9, 8, 7), solid(80, 120, 1, 200, 3)};
  const auto a = apply_policy(record_with(2), images, {});
  const auto b = apply_policy(record_with(2), images, {});
  REQUIRE(std::holds_alternative<CompositeImage>(a));
  CHECK(std::get<CompositeImage>(a) == std::get<CompositeImage>(b));
}

TEST_CASE("plan_layout agrees with the brute-force oracle and is order-invariant in acceptance") {
  std::mt19937_64 rng(20240611);
  const CompositionPolicy policy;
  for (int sample = 0; sample < 2000; ++sample) {
    const int n = 1 + static_cast<int>(rng() % 6);
    std::vector<Dims> dims;
    for (int i = 0; i < n; ++i) {
      dims.push_back({8 + static_cast<int>(rng() % 600), 8 + static_cast<int>(rng() % 600)});
    }
    const auto oracle = medcorpus::testing::oracle_plan(dims, policy);
    std::optional<RejectReason> got;
    LayoutDecision decision;
    try {
      decision = plan_layout(dims, policy);
    } catch (const Error& e) {
      got = e.code() == ErrorCode::kTooManyImages ? RejectReason::kTooManyImages
            : e.code() == ErrorCode::kTooSmall    ? RejectReason::kTooSmall
                                                  : RejectReason::kTooExtreme;
    }
    CAPTURE(sample);
    REQUIRE(got == oracle.rejection);
    if (!got) {
      CHECK(decision.layout == oracle.layout);
      CHECK(decision.width == oracle.width);
      CHECK(decision.height == oracle.height);
      CHECK(decision.extremeness <= policy.max_extremeness);
    }
    auto shuffled = dims;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(medcorpus::testing::oracle_plan(shuffled, policy).rejection.has_value() == oracle.rejection.has_value());
    bool shuffled_ok = true;
    try {
      plan_layout(shuffled, policy);
    } catch (const Error&) {
      shuffled_ok = false;
    }
    CHECK(shuffled_ok == !got.has_value());
  }
}

TEST_CASE("policy validation") {
  CompositionPolicy p;
  p.max_images = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.max_extremeness = 0.5;
  CHECK_THROWS_AS(p.validate(), Error);
}
