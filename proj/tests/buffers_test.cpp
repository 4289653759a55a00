// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "gpuir/buffers.hpp"

using namespace gpuir;

TEST_SUITE("buffers") {
  TEST_CASE("bindings parse with comments and mixed types") {
    auto r = parse_buffer_file("# inputs\n"
                               "a:i32:1,-2,3\n"
                               "\n"
                               "big:i64:4294967296,-1\n"
                               "x:f32:1.5,-0.25\n"
                               "y:f64:0.1\n");
    REQUIRE(r.ok());
    REQUIRE(r.bindings.size() == 4);
    CHECK(r.bindings[0].i32_at(1) == -2);
    CHECK(r.bindings[1].i64_at(0) == 4294967296LL);
    CHECK(r.bindings[2].f32_at(0) == 1.5f);
    CHECK(r.bindings[3].f64_at(0) == 0.1);
  }

  TEST_CASE("hex floats and special values are accepted") {
    auto r = parse_buffer_file("h:f64:0x1.8p3,inf,-inf,nan\n"
                               "g:f32:0x1p-1\n");
    REQUIRE(r.ok());
    CHECK(r.bindings[0].f64_at(0) == 12.0);
    CHECK(std::isinf(r.bindings[0].f64_at(1)));
    CHECK(std::isnan(r.bindings[0].f64_at(3)));
    CHECK(r.bindings[1].f32_at(0) == 0.5f);
  }

  TEST_CASE("errors carry line numbers and leave other lines intact") {
    auto r = parse_buffer_file("a:i32:1\n"
                               "b:q77:1\n"
                               "c:i32:one\n"
                               "d:i32\n");
    CHECK(r.bindings.size() == 1);
    REQUIRE(r.errors.size() == 3);
    CHECK(r.errors[0].find("line 2") != std::string::npos);
    CHECK(r.errors[1].find("line 3") != std::string::npos);
    CHECK(r.errors[2].find("line 4") != std::string::npos);
  }

  TEST_CASE("print emits shortest round-trip decimals") {
    auto r = parse_buffer_file("x:f32:0.1,1\n"
                               "y:f64:0.30000000000000004\n"
                               "n:i32:-7\n");
    REQUIRE(r.ok());
    std::string text = print_buffers(r.bindings);
    CHECK(text == "x:f32:0.1,1\n"
                  "y:f64:0.30000000000000004\n"
                  "n:i32:-7\n");
  }

  TEST_CASE("round trip preserves bits") {
    const char *text = "x:f32:0.1,3.4028235e38,-0\n"
                       "y:f64:0.1,1e308\n"
                       "i:i64:-9223372036854775808,9223372036854775807\n";
    auto first = parse_buffer_file(text);
    REQUIRE(first.ok());
    auto second = parse_buffer_file(print_buffers(first.bindings));
    REQUIRE(second.ok());
    for (size_t b = 0; b < first.bindings.size(); ++b)
      CHECK(first.bindings[b].values == second.bindings[b].values);
  }
}
