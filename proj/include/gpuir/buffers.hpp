// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#ifndef GPUIR_BUFFERS_HPP
#define GPUIR_BUFFERS_HPP

#include <string>
#include <string_view>
#include <vector>

#include "gpuir/interp.hpp"

namespace gpuir {

/// Buffer files bind kernel arguments, one binding per line:
///
///   name:elemtype:v1,v2,...      elemtype in {i32, i64, f32, f64}
///
/// '#' starts a comment line. Floats parse in decimal or hex-float form and
/// print in shortest round-trip decimal.
struct BufferFileResult {
  std::vector<BufferBinding> bindings;
  std::vector<std::string> errors; // "line N: message"

  bool ok() const { return errors.empty(); }
};

BufferFileResult parse_buffer_file(std::string_view text);

std::string print_buffers(const std::vector<BufferBinding> &bindings);

} // namespace gpuir

#endif // GPUIR_BUFFERS_HPP
