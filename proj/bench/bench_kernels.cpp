// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "medcorpus/fixture.hpp"
#include "medcorpus/kernels.hpp"
#include "medcorpus/stats.hpp"

namespace {

using namespace medcorpus;

ImageBuffer gradient(int w, int h) {
  ImageBuffer img;
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 31);
  return img;
}

template <auto Resize>
void BM_Resize(benchmark::State& state) {
  const auto src = gradient(1024, 768);
  const int w = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto out = Resize(src, w, w * 3 / 4, ResizeFilter::kBilinear);
    benchmark::DoNotOptimize(out.pixels.data());
  }
  state.SetItemsProcessed(state.iterations() * w * (w * 3 / 4));
}
BENCHMARK(BM_Resize<kernels::resize_reference>)->Name("resize/reference")->Arg(512)->Arg(1536);
BENCHMARK(BM_Resize<kernels::resize_parallel>)->Name("resize/parallel")->Arg(512)->Arg(1536);

std::vector<std::string> texts(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(fixture_sentence(i, 20 + i % 30));
  return out;
}

template <auto Count>
void BM_CountTokens(benchmark::State& state) {
  const auto batch = texts(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto counts = Count(batch, &count_tokens_default);
    benchmark::DoNotOptimize(counts.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CountTokens<kernels::count_batch_reference>)->Name("count_tokens/reference")->Arg(20000);
BENCHMARK(BM_CountTokens<kernels::count_batch_parallel>)->Name("count_tokens/parallel")->Arg(20000);

}  // namespace

BENCHMARK_MAIN();
