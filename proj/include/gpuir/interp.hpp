// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#ifndef GPUIR_INTERP_HPP
#define GPUIR_INTERP_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gpuir/ir.hpp"

namespace gpuir {

struct DispatchConfig {
  std::array<int, 3> grid{1, 1, 1};
  std::array<int, 3> block{1, 1, 1};

  long long blocks_total() const {
    return (long long)grid[0] * grid[1] * grid[2];
  }
  long long threads_per_block() const {
    return (long long)block[0] * block[1] * block[2];
  }
};

// Desk-scale guards.
inline constexpr long long kMaxThreadsPerBlock = 1024;
inline constexpr long long kMaxBlocks = 1 << 20;

/// A named global-memory buffer bound to a kernel argument. Values are raw
/// bit patterns of elem_type (f32 uses the low 32 bits). A one-element
/// binding can also feed a scalar (by-value) kernel argument.
struct BufferBinding {
  std::string arg_name;
  TypeRef elem_type; // scalar integer or float type
  std::vector<uint64_t> values;

  static BufferBinding of_i32(std::string name, std::vector<int32_t> vals);
  static BufferBinding of_i64(std::string name, std::vector<int64_t> vals);
  static BufferBinding of_f32(std::string name, std::vector<float> vals);
  static BufferBinding of_f64(std::string name, std::vector<double> vals);

  int32_t i32_at(size_t i) const { return int32_t(uint32_t(values[i])); }
  int64_t i64_at(size_t i) const { return int64_t(values[i]); }
  float f32_at(size_t i) const;
  double f64_at(size_t i) const;
};

/// canonical: threads advance in ascending linear id, each running to its
/// next barrier or return before the next thread starts. seeded: random
/// single-instruction interleaving within each block.
struct Schedule {
  enum class Mode { canonical, seeded };
  Mode mode = Mode::canonical;
  uint64_t seed = 0;

  static Schedule canonical() { return {}; }
  static Schedule seeded(uint64_t seed) {
    return {Mode::seeded, seed};
  }
};

struct TrapInfo {
  enum class Kind {
    oob,
    div_by_zero,
    barrier_divergence,
    unresolved_callee,
    step_limit, // runaway-execution guard, not part of normal semantics
  };

  Kind kind = Kind::oob;
  std::array<int, 3> block{0, 0, 0};
  std::array<int, 3> thread{0, 0, 0};
  std::string function;
  std::string block_label;
  int inst_index = -1;
  std::string detail;

  std::string to_string() const;
};

const char *trap_kind_text(TrapInfo::Kind k);

struct LaunchResult {
  // Final global buffer contents in binding order. When a trap fired these
  // reflect the state at the trap and are not authoritative.
  std::vector<BufferBinding> buffers;
  long long barrier_waves = 0;
  std::optional<TrapInfo> trap;

  bool ok() const { return !trap.has_value(); }
};

struct LaunchOutcome {
  std::optional<std::string> setup_error; // bad config/bindings/kernel
  LaunchResult result;

  bool launched() const { return !setup_error.has_value(); }
};

/// Execution strategy. Results are bit-identical across engines whenever
/// inter-block interaction is limited to commutative atomics; the serial
/// engine is the reference semantics.
enum class Engine { serial, openmp };

/// Runs every thread of every block of `kernel` under the dialect's builtin
/// semantics. Deterministic given (module, kernel, cfg, bindings, schedule,
/// engine).
LaunchOutcome launch(const Module &m, const std::string &kernel,
                     const DispatchConfig &cfg,
                     const std::vector<BufferBinding> &bindings,
                     const Schedule &sched = Schedule::canonical(),
                     Engine engine = Engine::serial);

struct DiffOutcome {
  enum class Kind { equal, mismatch, src_trap, dst_trap, setup_error };

  Kind kind = Kind::equal;
  // mismatch details
  std::string buffer;
  size_t index = 0;
  uint64_t src_bits = 0, dst_bits = 0;
  // trap / setup details
  std::optional<TrapInfo> trap;
  std::string error;

  bool equal() const { return kind == Kind::equal; }
  std::string to_string() const;
};

/// Launches `kernel` from both modules on identical inputs under the
/// canonical schedule and requires bit-identical final buffers.
DiffOutcome differential_check(const Module &src, const Module &dst,
                               const std::string &kernel,
                               const DispatchConfig &cfg,
                               const std::vector<BufferBinding> &bindings);

} // namespace gpuir

#endif // GPUIR_INTERP_HPP
