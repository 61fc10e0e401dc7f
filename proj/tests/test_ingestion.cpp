// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>

#include <fmt/format.h>

#include "medcorpus/error.hpp"
#include "medcorpus/image.hpp"
#include "medcorpus/ingestion.hpp"
#include "test_util.hpp"

using namespace medcorpus;
using medcorpus::testing::TempDir;
using medcorpus::testing::write_text;

namespace {

std::string record_line(int i, Source source = Source::kPmcOa) {
  SourceRecord r;
  r.id = fmt::format("rec-{:04d}", i);
  r.source = source;
  r.image_paths = {fmt::format("images/{}.png", i)};
  r.text_role = TextRole::kInlineDescription;
  r.text = fmt::format("Figure {} shows an axial CT slice of the abdomen.", i);
  return to_jsonl_line(to_json(r)) + "\n";
}

std::string lines(int n, int first = 0) {
  std::string out;
  for (int i = first; i < first + n; ++i) out += record_line(i);
  return out;
}

long resident_kib() {
  std::ifstream statm("/proc/self/statm");
  long size = 0;
  long resident = 0;
  statm >> size >> resident;
  return resident * (::sysconf(_SC_PAGESIZE) / 1024);
}

ImageBuffer gradient(std::size_t w, std::size_t h) {
  ImageBuffer img;
  img.width = w;
  img.height = h;
  img.pixels.resize(w * h * 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i % 251);
  return img;
}

}  // namespace

TEST_CASE("three valid lines with zero budget") {
  TempDir dir;
  write_text(dir / "m.jsonl", lines(3));
  const auto contents = read_manifest(dir / "m.jsonl", 0.0);
  CHECK(contents.records.size() == 3);
  CHECK(contents.report.skipped == 0);
  CHECK(contents.report.total == 3);
  CHECK(contents.records[0].id == "rec-0000");
  CHECK(contents.records[2].id == "rec-0002");
}

TEST_CASE("one malformed line in ten is within a 0.2 budget") {
  TempDir dir;
  write_text(dir / "m.jsonl", lines(5) + "{\"id\": broken\n" + lines(4, 5));
  const auto contents = read_manifest(dir / "m.jsonl", 0.2);
  CHECK(contents.records.size() == 9);
  CHECK(contents.report.skipped == 1);
  REQUIRE(contents.report.entries.size() == 1);
  CHECK(contents.report.entries[0].line_no == 6);
  CHECK(contents.report.entries[0].reason == skip_reason::kMalformedJson);
}

TEST_CASE("same file with a 0.05 budget exceeds it") {
  TempDir dir;
  write_text(dir / "m.jsonl", lines(5) + "{\"id\": broken\n" + lines(4, 5));
  try {
    read_manifest(dir / "m.jsonl", 0.05);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(e.skipped() == 1);
    CHECK(e.total() == 10);
    CHECK(e.code() == ErrorCode::kBudgetExceeded);
  }
}

TEST_CASE("budget boundary is inclusive") {
  TempDir dir;
  write_text(dir / "m.jsonl", lines(9) + "not json\n");
  CHECK_NOTHROW(read_manifest(dir / "m.jsonl", 0.1));
}

TEST_CASE("missing manifest and bad budget") {
  TempDir dir;
  try {
    read_manifest(dir / "absent.jsonl");
    FAIL("expected FileNotFound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFileNotFound);
  }
  write_text(dir / "m.jsonl", lines(1));
  CHECK_THROWS_AS(read_manifest(dir / "m.jsonl", 1.5), Error);
}

TEST_CASE("invalid, mismatched and duplicate records are skipped with reasons") {
  TempDir dir;
  SourceRecord no_images;
  no_images.id = "no-images";
  no_images.text = "Some text";
  std::string content = record_line(0) + "\n   \n" + to_jsonl_line(to_json(no_images)) + "\n" +
                        record_line(1, Source::kPmcVqa) + record_line(0) + "[1, 2]\n";
  write_text(dir / "m.jsonl", content);
  const auto contents = read_manifest(dir / "m.jsonl", 1.0, Source::kPmcOa);
  CHECK(contents.records.size() == 1);
  CHECK(contents.report.total == 5);
  REQUIRE(contents.report.entries.size() == 4);
  CHECK(contents.report.entries[0].reason == skip_reason::kInvalidRecord);
  CHECK(contents.report.entries[0].id == std::optional<std::string>("no-images"));
  CHECK(contents.report.entries[0].line_no == 4);
  CHECK(contents.report.entries[1].reason == skip_reason::kSourceMismatch);
  CHECK(contents.report.entries[2].reason == skip_reason::kDuplicateId);
  CHECK(contents.report.entries[3].reason == skip_reason::kBadSchema);

  const auto report = skip_report_jsonl(contents.report);
  CHECK(report.find("\"line_no\":4") != std::string::npos);
  CHECK(report.find("\"reason\":\"invalid_record\"") != std::string::npos);
}

TEST_CASE("reading twice is deterministic") {
  TempDir dir;
  write_text(dir / "m.jsonl", lines(20) + "garbage\n");
  const auto a = read_manifest(dir / "m.jsonl", 0.1);
  const auto b = read_manifest(dir / "m.jsonl", 0.1);
  CHECK(a.records == b.records);
  CHECK(a.report == b.report);
}

TEST_CASE("streaming a 10^5-line manifest keeps memory bounded") {
  TempDir dir;
  const auto path = dir / "big.jsonl";
  const std::string padding(600, 'x');
  {
    std::ofstream out(path);
    for (int i = 0; i < 100'000; ++i) {
      SourceRecord r;
      r.id = fmt::format("big-{:06d}", i);
      r.image_paths = {"images/a.png"};
      r.text = "Padding " + padding;
      out << to_jsonl_line(to_json(r)) << '\n';
    }
  }
  const auto file_kib = static_cast<long>(std::filesystem::file_size(path) / 1024);
  REQUIRE(file_kib > 60'000);

  ManifestReader reader(path, 0.0);
  const long before = resident_kib();
  long peak = before;
  std::size_t n = 0;
  while (auto r = reader.next()) {
    if (++n % 5'000 == 0) peak = std::max(peak, resident_kib());
  }
  CHECK(n == 100'000);
  // The reader keeps the id set for uniqueness (about 6 MiB here); the
  // record text itself must not accumulate.
  CHECK(peak - before < 24'000);
  CHECK(peak - before < file_kib / 3);
}

TEST_CASE("load_image decodes PNG and JPEG") {
  TempDir dir;
  const auto img = gradient(64, 64);
  write_png(dir / "a.png", img);
  const auto png = load_image(dir / "a.png");
  CHECK(png.width == 64);
  CHECK(png.height == 64);
  CHECK(png.pixels == img.pixels);

  const auto jpeg_bytes = encode_jpeg(img, 95);
  write_text(dir / "a.jpg", std::string(jpeg_bytes.begin(), jpeg_bytes.end()));
  const auto jpg = load_image(dir / "a.jpg");
  CHECK(jpg.width == 64);
  CHECK(jpg.height == 64);
  CHECK(jpg.pixels.size() == 64 * 64 * 3);
}

TEST_CASE("grayscale and alpha PNGs become RGB") {
  // 2x1 images: gray {0, 200}; gray+alpha {(100, opaque), (50, transparent)}.
  const std::vector<std::uint8_t> kGrayPng{
      0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A, 0x00, 0x00, 0x00, 0x0D, 0x49, 0x48, 0x44, 0x52,
      0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x01, 0x08, 0x00, 0x00, 0x00, 0x00, 0xD1, 0x49, 0x20,
      0x56, 0x00, 0x00, 0x00, 0x0B, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9C, 0x63, 0x60, 0x38, 0x01, 0x00,
      0x00, 0xCB, 0x00, 0xC9, 0x69, 0xC8, 0xC3, 0x6C, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4E, 0x44,
      0xAE, 0x42, 0x60, 0x82};
  const std::vector<std::uint8_t> kGrayAlphaPng{
      0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A, 0x00, 0x00, 0x00, 0x0D, 0x49, 0x48, 0x44, 0x52,
      0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x01, 0x08, 0x04, 0x00, 0x00, 0x00, 0x5E, 0x2B, 0xB7,
      0x01, 0x00, 0x00, 0x00, 0x0D, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9C, 0x63, 0x48, 0xF9, 0x6F, 0xC4,
      0x00, 0x00, 0x04, 0xF6, 0x01, 0x96, 0xBA, 0x1E, 0x7A, 0xA8, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45,
      0x4E, 0x44, 0xAE, 0x42, 0x60, 0x82};

  const auto gray = decode_image(kGrayPng);
  CHECK(gray.width == 2);
  CHECK(gray.height == 1);
  CHECK(gray.pixels == std::vector<std::uint8_t>{0, 0, 0, 200, 200, 200});

  const auto la = decode_image(kGrayAlphaPng);
  REQUIRE(la.pixels.size() == 6);
  CHECK(la.pixels[0] == 100);
  CHECK(la.pixels[1] == 100);
  CHECK(la.pixels[2] == 100);
}

TEST_CASE("missing and truncated images") {
  TempDir dir;
  try {
    load_image(dir / "nope.png");
    FAIL("expected FileNotFound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFileNotFound);
  }
  const auto bytes = encode_png(gradient(64, 64));
  write_text(dir / "t.png", std::string(bytes.begin(), bytes.begin() + static_cast<long>(bytes.size() / 2)));
  const auto jpeg = encode_jpeg(gradient(64, 64));
  write_text(dir / "t.jpg", std::string(jpeg.begin(), jpeg.begin() + static_cast<long>(jpeg.size() / 2)));
  write_text(dir / "x.png", "plain text");
  for (const auto* name : {"t.png", "t.jpg", "x.png"}) {
    CAPTURE(name);
    try {
      load_image(dir / name);
      FAIL("expected DecodeError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kDecodeError);
    }
  }
}
