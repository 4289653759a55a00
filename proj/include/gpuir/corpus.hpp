// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#ifndef GPUIR_CORPUS_HPP
#define GPUIR_CORPUS_HPP

#include <string>
#include <vector>

#include "gpuir/interp.hpp"

namespace gpuir {

/// One kernel manifest: key/value lines, '#' comments.
///
///   source: vecadd.ll
///   kernel: vecadd
///   grid: 1,1,1
///   block: 3,1,1
///   buffers: vecadd.buf        (optional when expect: unsupported)
///   features: baseline, atomic
///   expect: supported | unsupported
struct CorpusEntry {
  std::string manifest_path;
  std::string name; // manifest stem
  std::string source;
  std::string kernel;
  DispatchConfig cfg;
  std::string buffers_path;
  std::vector<std::string> features;
  bool expect_supported = true;
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
};

CorpusEntry parse_manifest(const std::string &path, std::string_view text);

struct CorpusRow {
  CorpusEntry entry;
  bool translate_ok = false;
  bool diff_equal = false;
  bool pass = false;
  std::string note;
};

struct CorpusRunResult {
  std::vector<CorpusRow> rows; // manifest order (sorted by file name)
  bool all_pass = true;
};

/// Runs every *.manifest under dir: expect=supported entries must translate
/// and pass the differential check; expect=unsupported entries must fail
/// translation with unsupported builtins (and nothing worse). Entries run
/// concurrently; the table is assembled in manifest order.
CorpusRunResult run_corpus(const std::string &dir);

/// Fixed-width support-matrix table.
std::string corpus_table(const CorpusRunResult &r);

} // namespace gpuir

#endif // GPUIR_CORPUS_HPP
