// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#include <atomic>

#include "interp_internal.hpp"

namespace gpuir::detail {

// Blocks are independent except for global-memory atomics, which are
// lock-free on the cells themselves, so they can run concurrently. Results
// are bit-identical to the serial engine whenever inter-block interaction
// is limited to commutative atomics; the serial engine stays the reference
// semantics and the tests compare the two.
LaunchResult run_blocks_openmp(Prepared &p, size_t binding_count) {
  LaunchResult r;
  const auto &g = p.cfg.grid;
  long long nblocks = p.cfg.blocks_total();

  std::vector<BlockRun> runs(static_cast<size_t>(nblocks));
  std::atomic<bool> trapped{false};

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (long long lin = 0; lin < nblocks; ++lin) {
    if (trapped.load(std::memory_order_relaxed))
      continue;
    int x = int(lin % g[0]);
    int y = int((lin / g[0]) % g[1]);
    int z = int(lin / ((long long)g[0] * g[1]));
    runs[size_t(lin)] = run_block(p, p.globals, {x, y, z},
                                  Schedule::canonical());
    if (runs[size_t(lin)].trap)
      trapped.store(true, std::memory_order_relaxed);
  }

  for (auto &br : runs) {
    r.barrier_waves += br.waves;
    if (br.trap && !r.trap)
      r.trap = br.trap; // lowest block index wins, deterministically
  }
  r.buffers = collect_buffers(p, binding_count);
  return r;
}

} // namespace gpuir::detail
