// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#ifndef GPUIR_PRINT_HPP
#define GPUIR_PRINT_HPP

#include <string>

#include "gpuir/ir.hpp"

namespace gpuir {

/// Deterministic textual emission. NVVM and OpenCL dialects print as
/// re-parseable .ll text with metadata densely renumbered from !0. The
/// SPIRV dialect prints a line-oriented dump marked non-reparseable.
/// Requires a module that verifies cleanly.
std::string print_module(const Module &m);

/// Single instruction in .ll syntax (no indentation); used by dumps and
/// diagnostics.
std::string print_instruction(const Instruction &inst, const Module *m = nullptr);

/// Textual form of a value with its type, e.g. "i32 %a".
std::string print_typed_value(const Value &v);

} // namespace gpuir

#endif // GPUIR_PRINT_HPP
