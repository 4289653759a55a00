// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#ifndef GPUIR_PARSE_HPP
#define GPUIR_PARSE_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpuir/ir.hpp"

namespace gpuir {

struct SourceSpan {
  int line = 1;   // 1-based
  int column = 1; // 1-based
  int length = 0;
};

struct ParseError {
  SourceSpan span;
  std::string message;
  std::optional<std::string> expected;

  std::string to_string() const;
};

struct ParseResult {
  std::optional<Module> module; // set iff errors is empty
  std::vector<ParseError> errors;

  bool ok() const { return module.has_value(); }
};

/// Parses the textual IR subset. The dialect is inferred from the target
/// triple. On success the returned module verifies cleanly; verifier
/// findings are reported as errors with the span of the offending
/// construct. Recoverable syntax errors do not stop the parse, so several
/// errors can be reported at once.
ParseResult parse_module(std::string_view text);

struct TypeParseResult {
  TypeRef type; // null on error
  std::optional<ParseError> error;
};

/// Parses a single type, e.g. "i32 addrspace(1)*" or "<3 x i64>".
TypeParseResult parse_type(std::string_view text);

} // namespace gpuir

#endif // GPUIR_PARSE_HPP
