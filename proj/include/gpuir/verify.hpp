// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#ifndef GPUIR_VERIFY_HPP
#define GPUIR_VERIFY_HPP

#include <string>
#include <vector>

#include "gpuir/ir.hpp"

namespace gpuir {

struct Diagnostic {
  std::string function; // empty for module-level findings
  std::string block;
  int inst_index = -1;
  std::string message;

  std::string to_string() const;
};

/// Full structural check: type signatures, SSA uniqueness and dominance,
/// terminator placement, metadata resolution and the per-dialect module
/// invariants. Returns an empty list iff the module is well formed.
std::vector<Diagnostic> verify_module(const Module &m);

struct KernelsResult {
  std::vector<const Function *> kernels; // in annotation / module order
  std::vector<Diagnostic> errors;
};

/// Kernel entry points. NVVM: functions named by "kernel"-tagged
/// nvvm.annotations entries, in annotation order. SPIRV/OpenCL: functions
/// with is_kernel set, in module order.
KernelsResult kernels_of(const Module &m);

} // namespace gpuir

#endif // GPUIR_VERIFY_HPP
