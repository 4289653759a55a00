// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#ifndef GPUIR_CLI_HPP
#define GPUIR_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace gpuir::cli {

// Exit codes are a stable contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitMismatch = 2;
inline constexpr int kExitUnsupported = 3;
inline constexpr int kExitTrap = 4;

/// Runs the command line (without argv[0]). Machine-readable results go to
/// `out`; diagnostics go to `err`.
int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err);

} // namespace gpuir::cli

#endif // GPUIR_CLI_HPP
