// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

// The OpenMP engine runs blocks concurrently; the serial engine is the
// reference semantics. For kernels whose inter-block interaction is at most
// commutative atomics the two must agree bit for bit.

#include <doctest.h>

#include "gpuir/interp.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace gpuir;
using namespace gpuir::testing;

namespace {

void check_engines_agree(const Module &m, const std::string &kernel,
                         const DispatchConfig &cfg,
                         const std::vector<BufferBinding> &bindings) {
  LaunchOutcome serial =
      launch(m, kernel, cfg, bindings, Schedule::canonical(), Engine::serial);
  LaunchOutcome parallel =
      launch(m, kernel, cfg, bindings, Schedule::canonical(), Engine::openmp);
  REQUIRE(serial.launched());
  REQUIRE(parallel.launched());
  REQUIRE(serial.result.ok());
  REQUIRE(parallel.result.ok());
  CHECK(serial.result.barrier_waves == parallel.result.barrier_waves);
  REQUIRE(serial.result.buffers.size() == parallel.result.buffers.size());
  for (size_t b = 0; b < serial.result.buffers.size(); ++b)
    CHECK(serial.result.buffers[b].values ==
          parallel.result.buffers[b].values);
}

} // namespace

TEST_SUITE("parallel-engine") {
  TEST_CASE("vecadd agrees across engines over many blocks") {
    Module m = vecadd_module();
    const int blocks = 64, threads = 64;
    std::vector<int32_t> a, b, c(size_t(blocks * threads), 0);
    for (int i = 0; i < blocks * threads; ++i) {
      a.push_back(i * 3 + 1);
      b.push_back(-i);
    }
    DispatchConfig cfg;
    cfg.grid = {blocks, 1, 1};
    cfg.block = {threads, 1, 1};
    check_engines_agree(m, "vecadd", cfg,
                        {BufferBinding::of_i32("a", a),
                         BufferBinding::of_i32("b", b),
                         BufferBinding::of_i32("c", c)});
  }

  TEST_CASE("histogram with cross-block atomics agrees across engines") {
    Module m =
        parse_or_die(read_file_or_empty(corpus_dir() + "/histogram.ll"));
    const int blocks = 32, threads = 64;
    std::vector<int32_t> in;
    for (int i = 0; i < blocks * threads; ++i)
      in.push_back(i * 2654435761u);
    DispatchConfig cfg;
    cfg.grid = {blocks, 1, 1};
    cfg.block = {threads, 1, 1};
    check_engines_agree(m, "histogram", cfg,
                        {BufferBinding::of_i32("in", in),
                         BufferBinding::of_i32("hist",
                                               std::vector<int32_t>(16, 0))});
  }

  TEST_CASE("barrier reduction agrees across engines") {
    Module m =
        parse_or_die(read_file_or_empty(corpus_dir() + "/reduce_sum.ll"));
    const int blocks = 16, threads = 128;
    std::vector<int32_t> in;
    for (int i = 0; i < blocks * threads; ++i)
      in.push_back((i % 13) - 6);
    DispatchConfig cfg;
    cfg.grid = {blocks, 1, 1};
    cfg.block = {threads, 1, 1};
    check_engines_agree(m, "reduce_sum", cfg,
                        {BufferBinding::of_i32("in", in),
                         BufferBinding::of_i32(
                             "out", std::vector<int32_t>(blocks, 0))});
  }

  TEST_CASE("traps surface deterministically from the lowest block") {
    Module m = vecadd_module();
    // 8 blocks x 4 threads over 3-element buffers: every block faults; the
    // reported trap must come from block 0 regardless of engine.
    DispatchConfig cfg;
    cfg.grid = {8, 1, 1};
    cfg.block = {4, 1, 1};
    std::vector<BufferBinding> bindings = {
        BufferBinding::of_i32("a", {1, 2, 3}),
        BufferBinding::of_i32("b", {1, 2, 3}),
        BufferBinding::of_i32("c", {0, 0, 0}),
    };
    for (Engine e : {Engine::serial, Engine::openmp}) {
      LaunchOutcome lo =
          launch(m, "vecadd", cfg, bindings, Schedule::canonical(), e);
      REQUIRE(lo.launched());
      REQUIRE(lo.result.trap);
      CHECK(lo.result.trap->kind == TrapInfo::Kind::oob);
      CHECK(lo.result.trap->block == std::array<int, 3>{0, 0, 0});
    }
  }

  TEST_CASE("generated elementwise kernels agree across engines") {
    for (uint64_t seed = 300; seed < 308; ++seed) {
      EwKernel k = random_elementwise_kernel(seed);
      const int blocks = 8, threads = 32;
      BufferBinding a, b, out;
      a.arg_name = "a";
      b.arg_name = "b";
      out.arg_name = "out";
      a.elem_type = b.elem_type = out.elem_type = k.elem;
      Rng data(seed);
      for (int i = 0; i < blocks * threads; ++i) {
        uint64_t bits = k.elem->is_int()
                            ? uint64_t(uint32_t(data.bits()))
                            : (k.elem->bits == 32
                                   ? uint64_t(0x40a00000 + (i & 0xff))
                                   : 0x4014000000000000ull + uint64_t(i));
        a.values.push_back(bits);
        b.values.push_back(bits ^ 0x55);
        out.values.push_back(0);
      }
      DispatchConfig cfg;
      cfg.grid = {blocks, 1, 1};
      cfg.block = {threads, 1, 1};
      check_engines_agree(k.module, "ew", cfg, {a, b, out});
    }
  }
}
