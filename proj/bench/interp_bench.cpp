// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

// Serial reference engine vs the OpenMP block-parallel engine on the
// corpus kernels, scaled up to interesting block counts.

#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "gpuir/interp.hpp"
#include "gpuir/parse.hpp"

using namespace gpuir;

namespace {

Module load_module(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  ParseResult r = parse_module(ss.str());
  if (!r.ok())
    throw std::runtime_error("cannot parse " + path);
  return std::move(*r.module);
}

std::string corpus(const std::string &name) {
  return std::string(GPUIR_BENCH_CORPUS) + "/" + name;
}

void run_vecadd(benchmark::State &state, Engine engine) {
  Module m = load_module(corpus("vecadd.ll"));
  const int blocks = int(state.range(0));
  const int threads = 256;
  size_t n = size_t(blocks); // indexed by tid.x only: size = block extent
  (void)n;
  std::vector<int32_t> a(256), b(256), c(256, 0);
  for (int i = 0; i < 256; ++i) {
    a[size_t(i)] = i;
    b[size_t(i)] = 2 * i;
  }
  DispatchConfig cfg;
  cfg.grid = {blocks, 1, 1};
  cfg.block = {threads, 1, 1};
  std::vector<BufferBinding> bindings = {BufferBinding::of_i32("a", a),
                                         BufferBinding::of_i32("b", b),
                                         BufferBinding::of_i32("c", c)};
  for (auto _ : state) {
    LaunchOutcome lo = launch(m, "vecadd", cfg, bindings,
                              Schedule::canonical(), engine);
    if (!lo.launched() || !lo.result.ok())
      state.SkipWithError("launch failed");
    benchmark::DoNotOptimize(lo.result.buffers);
  }
  state.SetItemsProcessed(state.iterations() * blocks * threads);
}

void run_reduce(benchmark::State &state, Engine engine) {
  Module m = load_module(corpus("reduce_sum.ll"));
  const int blocks = int(state.range(0));
  const int threads = 256;
  std::vector<int32_t> in(size_t(blocks) * threads);
  for (size_t i = 0; i < in.size(); ++i)
    in[i] = int32_t(i % 97);
  DispatchConfig cfg;
  cfg.grid = {blocks, 1, 1};
  cfg.block = {threads, 1, 1};
  std::vector<BufferBinding> bindings = {
      BufferBinding::of_i32("in", in),
      BufferBinding::of_i32("out", std::vector<int32_t>(size_t(blocks), 0))};
  for (auto _ : state) {
    LaunchOutcome lo = launch(m, "reduce_sum", cfg, bindings,
                              Schedule::canonical(), engine);
    if (!lo.launched() || !lo.result.ok())
      state.SkipWithError("launch failed");
    benchmark::DoNotOptimize(lo.result.buffers);
  }
  state.SetItemsProcessed(state.iterations() * blocks * threads);
}

void run_histogram(benchmark::State &state, Engine engine) {
  Module m = load_module(corpus("histogram.ll"));
  const int blocks = int(state.range(0));
  const int threads = 256;
  std::vector<int32_t> in(size_t(blocks) * threads);
  for (size_t i = 0; i < in.size(); ++i)
    in[i] = int32_t(i * 2654435761u);
  DispatchConfig cfg;
  cfg.grid = {blocks, 1, 1};
  cfg.block = {threads, 1, 1};
  std::vector<BufferBinding> bindings = {
      BufferBinding::of_i32("in", in),
      BufferBinding::of_i32("hist", std::vector<int32_t>(16, 0))};
  for (auto _ : state) {
    LaunchOutcome lo = launch(m, "histogram", cfg, bindings,
                              Schedule::canonical(), engine);
    if (!lo.launched() || !lo.result.ok())
      state.SkipWithError("launch failed");
    benchmark::DoNotOptimize(lo.result.buffers);
  }
  state.SetItemsProcessed(state.iterations() * blocks * threads);
}

void BM_vecadd_serial(benchmark::State &s) { run_vecadd(s, Engine::serial); }
void BM_vecadd_openmp(benchmark::State &s) { run_vecadd(s, Engine::openmp); }
void BM_reduce_serial(benchmark::State &s) { run_reduce(s, Engine::serial); }
void BM_reduce_openmp(benchmark::State &s) { run_reduce(s, Engine::openmp); }
void BM_histogram_serial(benchmark::State &s) {
  run_histogram(s, Engine::serial);
}
void BM_histogram_openmp(benchmark::State &s) {
  run_histogram(s, Engine::openmp);
}

} // namespace

BENCHMARK(BM_vecadd_serial)->Arg(64)->Arg(512);
BENCHMARK(BM_vecadd_openmp)->Arg(64)->Arg(512);
BENCHMARK(BM_reduce_serial)->Arg(16)->Arg(128);
BENCHMARK(BM_reduce_openmp)->Arg(16)->Arg(128);
BENCHMARK(BM_histogram_serial)->Arg(16)->Arg(128);
BENCHMARK(BM_histogram_openmp)->Arg(16)->Arg(128);

BENCHMARK_MAIN();
