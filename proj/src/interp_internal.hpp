// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#ifndef GPUIR_INTERP_INTERNAL_HPP
#define GPUIR_INTERP_INTERNAL_HPP

#include <atomic>
#include <map>
#include <memory>
#include <random>

#include "gpuir/builtins.hpp"
#include "gpuir/interp.hpp"

namespace gpuir::detail {

enum class ScalarKind : uint8_t { Int, F32, F64 };

struct MemPtr {
  uint8_t seg = 0; // 0 = launch-global, 1 = block-local, 2 = thread-private
  int32_t obj = -1;
  int64_t off = 0;
};

struct RtVal {
  enum class Tag : uint8_t { undef, intv, f32, f64, ptr, vec };

  Tag tag = Tag::undef;
  uint8_t width = 0;               // int bit width / vector lane count
  ScalarKind elem = ScalarKind::Int;
  uint8_t elem_width = 0;          // vector int element width
  uint64_t bits = 0;
  MemPtr ptr;
  std::array<uint64_t, 4> lanes{};

  static RtVal make_int(uint64_t v, int w);
  static RtVal make_f32(float f);
  static RtVal make_f64(double d);
  static RtVal make_ptr(MemPtr p);

  float as_f32() const;
  double as_f64() const;
  int64_t as_signed() const;
};

uint64_t mask_width(uint64_t v, int w);

/// Typed cell array. Cells hold atomics so the OpenMP engine can run
/// blocks concurrently; the serial engine uses relaxed access, which is
/// free on x86.
struct MemObject {
  ScalarKind elem = ScalarKind::Int;
  int elem_width = 32; // bits, for Int elements
  int elem_size = 4;   // bytes per cell
  bool read_only = false;
  std::string name;
  size_t count = 0;
  std::unique_ptr<std::atomic<uint64_t>[]> cells;

  void allocate(size_t n, bool zero = true);
  uint64_t get(size_t i) const {
    return cells[i].load(std::memory_order_relaxed);
  }
  void set(size_t i, uint64_t v) {
    cells[i].store(v, std::memory_order_relaxed);
  }
};

MemObject make_object_for(const TypeRef &elem_type, size_t count,
                          std::string name);

struct POperand {
  enum class Kind : uint8_t { Slot, Imm, BuiltinVar };
  Kind kind = Kind::Imm;
  int slot = -1;
  RtVal imm;
  SpirvVariable var = SpirvVariable::none; // BuiltinVar loads (SPIRV dialect)
};

struct BuiltinQuery {
  enum class Op : uint8_t {
    none,
    index,   // kind+dim -> scalar (width per dialect)
    barrier,
    math,    // sqrt/fabs/fma
    atomic,  // atomic_* callee in SPIRV/OpenCL dialects
  };
  Op op = Op::none;
  BuiltinKind::Kind kind = BuiltinKind::Kind::barrier;
  int dim = 0;
  int width = 32;     // result width for index queries
  int float_bits = 0; // math
  AtomicOp rmw = AtomicOp::add;
};

struct PInst {
  Opcode op = Opcode::ret;
  int result = -1;
  std::vector<POperand> ops;
  ICmpPred ipred = ICmpPred::eq;
  FCmpPred fpred = FCmpPred::oeq;
  AtomicOp rmw = AtomicOp::add;
  int width = 0;       // int result width
  int float_bits = 0;  // float op width
  int lanes = 0;       // vector ops: lane count (0 = scalar)
  ScalarKind lane_kind = ScalarKind::Int;
  int lane_width = 0;
  // memory ops
  int access_size = 0;  // bytes per accessed scalar element
  int access_lanes = 0; // vector load/store lane count (0 = scalar)
  ScalarKind access_kind = ScalarKind::Int;
  int access_width = 0;
  int64_t gep_scale0 = 0, gep_scale1 = 0;
  // control flow
  int target0 = -1, target1 = -1;
  // calls
  BuiltinQuery builtin;
  int user_callee = -1;
  // phi: filled when entering the block
  std::vector<std::pair<int, POperand>> phi_in; // (pred block id, value)
  // trap locus
  int src_block = 0, src_index = 0;
};

struct PBlock {
  std::string label;
  int phi_count = 0;
  std::vector<PInst> insts;
};

struct PFunc {
  const Function *src = nullptr;
  int nregs = 0;
  std::vector<PBlock> blocks;
};

struct PAlloca {
  ScalarKind elem;
  int elem_width;
  size_t count;
};

struct Prepared {
  const Module *module = nullptr;
  Dialect dialect = Dialect::NVVM;
  std::vector<PFunc> funcs;
  std::map<std::string, int> func_index;
  std::vector<std::string> unresolved_names; // for trap messages
  int entry = -1;

  // Launch-global objects: one per binding (binding order), then
  // global/constant-space module globals.
  std::vector<MemObject> globals;
  // Block-local templates: local-addrspace module globals, re-zeroed per
  // block.
  struct LocalTemplate {
    ScalarKind elem;
    int elem_width;
    size_t count;
    std::string name;
  };
  std::vector<LocalTemplate> locals;

  DispatchConfig cfg;
  std::vector<RtVal> scalar_args; // entry params: ptr or scalar values
};

struct Frame {
  const PFunc *fn = nullptr;
  int block = 0;
  int inst = 0;
  int ret_slot = -1; // caller slot receiving this frame's return value
  std::vector<RtVal> regs;
};

struct ThreadCtx {
  std::array<int, 3> tid{0, 0, 0};
  std::array<int, 3> ctaid{0, 0, 0};
  int linear_id = 0;

  enum class Status : uint8_t { runnable, at_barrier, done, trapped };
  Status status = Status::runnable;

  std::vector<Frame> stack;
  std::vector<MemObject> privates;
  long long barriers_executed = 0;
};

struct BlockRun {
  long long waves = 0;
  std::optional<TrapInfo> trap;
};

/// Executes one block to completion under the given schedule. rng is only
/// used in seeded mode.
BlockRun run_block(const Prepared &p, std::vector<MemObject> &globals,
                   const std::array<int, 3> &block_coords,
                   const Schedule &sched);

/// Builds the prepared program; returns a setup error string on failure.
std::optional<std::string>
prepare_launch(const Module &m, const std::string &kernel,
               const DispatchConfig &cfg,
               const std::vector<BufferBinding> &bindings, Prepared &out);

/// OpenMP block-parallel driver (falls back to serial order without
/// OpenMP). Defined in interp_parallel.cpp.
LaunchResult run_blocks_openmp(Prepared &p, size_t binding_count);

/// Serial reference driver: blocks in ascending linear order.
LaunchResult run_blocks_serial(Prepared &p, const Schedule &sched,
                               size_t binding_count);

/// Copies final buffer contents out of the global objects.
std::vector<BufferBinding> collect_buffers(const Prepared &p,
                                           size_t binding_count);

} // namespace gpuir::detail

#endif // GPUIR_INTERP_INTERNAL_HPP
