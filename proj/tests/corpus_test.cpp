// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>

#include "gpuir/corpus.hpp"
#include "support/fixtures.hpp"

using namespace gpuir;
using namespace gpuir::testing;

TEST_SUITE("corpus") {
  TEST_CASE("manifests parse") {
    CorpusEntry e = parse_manifest("x/vecadd.manifest",
                                   "source: vecadd.ll\n"
                                   "kernel: vecadd\n"
                                   "grid: 1,1,1\n"
                                   "block: 3,1,1\n"
                                   "buffers: vecadd.buf\n"
                                   "features: baseline, atomic\n"
                                   "expect: supported\n");
    REQUIRE(e.ok());
    CHECK(e.name == "vecadd");
    CHECK(e.kernel == "vecadd");
    CHECK(e.cfg.block[0] == 3);
    CHECK(e.features == std::vector<std::string>{"baseline", "atomic"});
    CHECK(e.expect_supported);
  }

  TEST_CASE("manifest errors accumulate") {
    CorpusEntry e = parse_manifest("x/bad.manifest",
                                   "kernel: k\n"
                                   "grid: a,b\n"
                                   "expect: maybe\n");
    CHECK(!e.ok());
    CHECK(e.errors.size() >= 3); // bad grid, bad expect, missing source
  }

  TEST_CASE("unsupported entries may omit dispatch and buffers") {
    CorpusEntry e = parse_manifest("x/t.manifest", "source: t.ll\n"
                                                   "kernel: t\n"
                                                   "expect: unsupported\n");
    CHECK(e.ok());
  }

  TEST_CASE("the shipped corpus passes end to end") {
    CorpusRunResult r = run_corpus(corpus_dir());
    REQUIRE(r.rows.size() == 9);
    for (const auto &row : r.rows)
      CHECK_MESSAGE(row.pass, row.entry.name, ": ", row.note);
    CHECK(r.all_pass);

    int supported = 0, unsupported = 0;
    for (const auto &row : r.rows)
      (row.entry.expect_supported ? supported : unsupported)++;
    CHECK(supported == 7);
    CHECK(unsupported == 2);

    std::string table = corpus_table(r);
    CHECK(table.find("vecadd") != std::string::npos);
    CHECK(table.find("texture_sample") != std::string::npos);
  }

  TEST_CASE("an empty directory yields an empty passing table") {
    auto dir = std::filesystem::temp_directory_path() / "gpuir_empty_corpus";
    std::filesystem::create_directories(dir);
    CorpusRunResult r = run_corpus(dir.string());
    CHECK(r.rows.empty());
    CHECK(r.all_pass);
  }
}
