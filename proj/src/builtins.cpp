// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#include "gpuir/builtins.hpp"

namespace gpuir {

const char *builtin_kind_text(BuiltinKind::Kind k) {
  switch (k) {
  case BuiltinKind::Kind::thread_index:
    return "thread_index";
  case BuiltinKind::Kind::group_index:
    return "group_index";
  case BuiltinKind::Kind::group_size:
    return "group_size";
  case BuiltinKind::Kind::num_groups:
    return "num_groups";
  case BuiltinKind::Kind::barrier:
    return "barrier";
  case BuiltinKind::Kind::sqrt:
    return "sqrt";
  case BuiltinKind::Kind::fabs:
    return "fabs";
  case BuiltinKind::Kind::fma:
    return "fma";
  }
  return "?";
}

const char *spirv_variable_name(SpirvVariable v) {
  switch (v) {
  case SpirvVariable::LocalInvocationId:
    return "__spirv_BuiltInLocalInvocationId";
  case SpirvVariable::WorkgroupId:
    return "__spirv_BuiltInWorkgroupId";
  case SpirvVariable::WorkgroupSize:
    return "__spirv_BuiltInWorkgroupSize";
  case SpirvVariable::NumWorkgroups:
    return "__spirv_BuiltInNumWorkgroups";
  case SpirvVariable::none:
    break;
  }
  return "";
}

std::optional<SpirvVariable> spirv_variable_from_name(const std::string &s) {
  for (SpirvVariable v :
       {SpirvVariable::LocalInvocationId, SpirvVariable::WorkgroupId,
        SpirvVariable::WorkgroupSize, SpirvVariable::NumWorkgroups})
    if (s == spirv_variable_name(v))
      return v;
  return std::nullopt;
}

namespace {

std::vector<BuiltinMapping> build_table() {
  std::vector<BuiltinMapping> t;
  struct IndexRow {
    const char *sreg;
    BuiltinKind::Kind kind;
    SpirvVariable var;
    const char *callee;
  };
  // A name suffix of .x/.y/.z selects dim 0/1/2.
  const IndexRow rows[] = {
      {"tid", BuiltinKind::Kind::thread_index, SpirvVariable::LocalInvocationId,
       "get_local_id"},
      {"ctaid", BuiltinKind::Kind::group_index, SpirvVariable::WorkgroupId,
       "get_group_id"},
      {"ntid", BuiltinKind::Kind::group_size, SpirvVariable::WorkgroupSize,
       "get_local_size"},
      {"nctaid", BuiltinKind::Kind::num_groups, SpirvVariable::NumWorkgroups,
       "get_num_groups"},
  };
  const char *axes = "xyz";
  for (const auto &r : rows) {
    for (int d = 0; d < 3; ++d) {
      BuiltinMapping m;
      m.nvvm_name = std::string("llvm.nvvm.read.ptx.sreg.") + r.sreg + "." +
                    axes[d];
      m.kind = {r.kind, d};
      m.spirv_variable = r.var;
      m.opencl_callee = r.callee;
      t.push_back(std::move(m));
    }
  }
  t.push_back({"llvm.nvvm.barrier0",
               {BuiltinKind::Kind::barrier, -1},
               SpirvVariable::none,
               "barrier",
               0});
  struct MathRow {
    const char *name;
    BuiltinKind::Kind kind;
  };
  const MathRow math[] = {
      {"sqrt", BuiltinKind::Kind::sqrt},
      {"fabs", BuiltinKind::Kind::fabs},
      {"fma", BuiltinKind::Kind::fma},
  };
  for (const auto &r : math) {
    for (int bits : {32, 64}) {
      BuiltinMapping m;
      m.nvvm_name =
          std::string("llvm.") + r.name + (bits == 32 ? ".f32" : ".f64");
      m.kind = {r.kind, -1};
      m.opencl_callee = r.name;
      m.float_bits = bits;
      t.push_back(std::move(m));
    }
  }
  return t;
}

} // namespace

const std::vector<BuiltinMapping> &builtin_table() {
  static const std::vector<BuiltinMapping> table = build_table();
  return table;
}

const BuiltinMapping *find_builtin(const std::string &nvvm_callee) {
  for (const auto &m : builtin_table())
    if (m.nvvm_name == nvvm_callee)
      return &m;
  return nullptr;
}

std::string mangled_index_callee(BuiltinKind::Kind kind) {
  switch (kind) {
  case BuiltinKind::Kind::thread_index:
    return "_Z12get_local_idj";
  case BuiltinKind::Kind::group_index:
    return "_Z12get_group_idj";
  case BuiltinKind::Kind::group_size:
    return "_Z14get_local_sizej";
  case BuiltinKind::Kind::num_groups:
    return "_Z14get_num_groupsj";
  default:
    return "";
  }
}

std::string mangled_math_callee(BuiltinKind::Kind kind, int float_bits) {
  char suffix = float_bits == 32 ? 'f' : 'd';
  switch (kind) {
  case BuiltinKind::Kind::sqrt:
    return std::string("_Z4sqrt") + suffix;
  case BuiltinKind::Kind::fabs:
    return std::string("_Z4fabs") + suffix;
  case BuiltinKind::Kind::fma:
    return std::string("_Z3fma") + std::string(3, suffix);
  default:
    return "";
  }
}

std::string atomic_callee(AtomicOp op) {
  switch (op) {
  case AtomicOp::add:
    return "atomic_add";
  case AtomicOp::sub:
    return "atomic_sub";
  case AtomicOp::xchg:
    return "atomic_xchg";
  case AtomicOp::and_:
    return "atomic_and";
  case AtomicOp::or_:
    return "atomic_or";
  case AtomicOp::xor_:
    return "atomic_xor";
  case AtomicOp::min:
    return "atomic_min";
  case AtomicOp::max:
    return "atomic_max";
  case AtomicOp::umin:
    return "atomic_umin";
  case AtomicOp::umax:
    return "atomic_umax";
  }
  return "";
}

std::optional<AtomicOp> atomic_op_from_callee(const std::string &callee) {
  for (int i = 0; i <= int(AtomicOp::umax); ++i)
    if (callee == atomic_callee(AtomicOp(i)))
      return AtomicOp(i);
  return std::nullopt;
}

} // namespace gpuir
