// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#ifndef GPUIR_TRANSLATE_HPP
#define GPUIR_TRANSLATE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gpuir/builtins.hpp"
#include "gpuir/ir.hpp"
#include "gpuir/verify.hpp"

namespace gpuir {

enum class InstructionClass { device_dependent, device_independent };

/// Device dependent: calls that resolve through the builtin catalog, and
/// atomicrmw. Everything else passes through translation untouched.
InstructionClass classify_instruction(const Instruction &inst);

struct UnsupportedUse {
  std::string function;
  int inst_index = 0; // linear index within the function body
  std::string callee;
};

struct TranslationReport {
  std::map<BuiltinKind::Kind, int> rewritten_calls;
  int rewritten_atomics = 0;
  std::vector<std::string> dropped_metadata;
  std::vector<std::string> added_metadata;
  std::vector<UnsupportedUse> unsupported;

  bool failed() const { return !unsupported.empty(); }
  int total_rewrites() const;
  std::string summary() const;
};

struct TranslateResult {
  std::optional<Module> module; // absent on failure
  TranslationReport report;
  std::vector<Diagnostic> errors; // precondition / verification findings

  bool ok() const { return module.has_value(); }
};

/// "nvptx64-nvidia-cuda" -> "spir64-unknown-unknown". Any other input
/// triple is an error, including an already-rewritten one.
std::optional<Diagnostic> rewrite_triple(Module &m);

/// Consumes nvvm.annotations: annotated kernels gain kernel_arg_addr_space
/// (1 per pointer parameter, 0 per value parameter) and kernel_arg_type
/// (source-level spellings reconstructed from IR types). Unrecognized
/// device-specific named metadata is dropped and recorded in the report.
std::optional<Diagnostic> transform_metadata(Module &m,
                                             TranslationReport &report);

/// Replacement sequence for an index/size builtin call: load of the 3-lane
/// i64 builtin variable, extractelement at the dim decoded from the name
/// suffix, trunc to the builtin's i32 return type (which keeps the original
/// result register). nullopt when the callee is not an index builtin or the
/// call shape is wrong.
std::optional<std::vector<Instruction>>
map_index_builtin(const Instruction &call);

/// barrier0() -> barrier(CLK_LOCAL_MEM_FENCE|CLK_GLOBAL_MEM_FENCE).
/// nullopt when the call carries arguments.
std::optional<Instruction> map_barrier(const Instruction &call);

/// atomicrmw op -> call to the matching atomic_* builtin with identical
/// operands. nullopt for non-i32 payloads.
std::optional<Instruction> map_atomic(const Instruction &inst);

/// The NVVM -> SPIRV rewrite: triple, metadata, then per-instruction
/// handling. Device-independent instructions are copied bit-identically.
/// Any unsupported builtin fails the whole translation; no module is
/// emitted in that case.
TranslateResult translate_nvvm_to_spirv(const Module &m);

struct LowerResult {
  std::optional<Module> module;
  std::vector<Diagnostic> errors;

  bool ok() const { return module.has_value(); }
};

/// SPIRV -> OpenCL: builtin-variable loads collapse into get_* calls,
/// barrier is renamed to its mangled form, kernels take the spir_kernel
/// convention. A builtin-variable use that is not a constant-lane extract
/// (e.g. stored to memory) is an error.
LowerResult lower_spirv_to_opencl(const Module &m);

/// Full pipeline: translate_nvvm_to_spirv then lower_spirv_to_opencl.
TranslateResult translate(const Module &m);

} // namespace gpuir

#endif // GPUIR_TRANSLATE_HPP
