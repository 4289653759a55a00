// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#ifndef GPUIR_BUILTINS_HPP
#define GPUIR_BUILTINS_HPP

#include <optional>
#include <string>
#include <vector>

#include "gpuir/ir.hpp"

namespace gpuir {

/// The abstract primitive behind a device-specific builtin. dim is only
/// meaningful for the index/size queries.
struct BuiltinKind {
  enum class Kind {
    thread_index,
    group_index,
    group_size,
    num_groups, // extension beyond the core catalog; grid-sized kernels need it
    barrier,
    sqrt,
    fabs,
    fma,
  };

  Kind kind = Kind::barrier;
  int dim = -1; // 0..2 for index/size queries, -1 otherwise

  bool is_index_query() const {
    return kind == Kind::thread_index || kind == Kind::group_index ||
           kind == Kind::group_size || kind == Kind::num_groups;
  }
  bool operator==(const BuiltinKind &o) const {
    return kind == o.kind && dim == o.dim;
  }
};

const char *builtin_kind_text(BuiltinKind::Kind k);

/// SPIR-V builtin variables. Each is a <3 x i64> module global holding the
/// per-thread coordinate triple for its query.
enum class SpirvVariable { LocalInvocationId, WorkgroupId, WorkgroupSize,
                           NumWorkgroups, none };

/// Module-level name of the global that models a builtin variable.
const char *spirv_variable_name(SpirvVariable v);
std::optional<SpirvVariable> spirv_variable_from_name(const std::string &s);

/// One row of the NVVM -> SPIR-V -> OpenCL builtin catalog.
struct BuiltinMapping {
  std::string nvvm_name;      // e.g. "llvm.nvvm.read.ptx.sreg.tid.x"
  BuiltinKind kind;
  SpirvVariable spirv_variable = SpirvVariable::none;
  std::string opencl_callee;  // unmangled, e.g. "get_local_id"
  int float_bits = 0;         // math rows: 32 or 64
};

/// Full catalog; total over tid/ctaid/ntid/nctaid x {x,y,z}, barrier0 and
/// the sqrt/fabs/fma math rows in both widths.
const std::vector<BuiltinMapping> &builtin_table();

/// Looks up an NVVM callee name. The dimension suffix rule is part of the
/// table: a name ending in .x/.y/.z selects dim 0/1/2.
const BuiltinMapping *find_builtin(const std::string &nvvm_callee);

/// Itanium-mangled OpenCL-dialect callee for an index/size query,
/// e.g. "_Z12get_local_idj".
std::string mangled_index_callee(BuiltinKind::Kind kind);

/// Mangled math callee of the given width, e.g. "_Z4sqrtf" / "_Z4sqrtd".
std::string mangled_math_callee(BuiltinKind::Kind kind, int float_bits);

inline constexpr const char *kBarrierMangled = "_Z7barrierj";

// CLK_LOCAL_MEM_FENCE | CLK_GLOBAL_MEM_FENCE
inline constexpr int kBarrierBothFences = 3;

/// OpenCL callee for an atomic read-modify-write op ("atomic_add", ...).
/// Atomics keep unmangled names.
std::string atomic_callee(AtomicOp op);
std::optional<AtomicOp> atomic_op_from_callee(const std::string &callee);

} // namespace gpuir

#endif // GPUIR_BUILTINS_HPP
