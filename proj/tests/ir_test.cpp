// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "gpuir/verify.hpp"
#include "support/fixtures.hpp"

using namespace gpuir;
using namespace gpuir::testing;

TEST_SUITE("ir/verify") {
  TEST_CASE("well-formed vecadd module verifies cleanly") {
    Module m = vecadd_module();
    CHECK(verify_module(m).empty());
  }

  TEST_CASE("missing terminator is diagnosed with its block") {
    Module m = empty_nvvm();
    Function f = void_fn("k");
    f.blocks.push_back({"entry", {add_i32("x", Value::int_const(1, i32()),
                                          Value::int_const(2, i32()))}});
    m.functions.push_back(std::move(f));

    auto diags = verify_module(m);
    REQUIRE(!diags.empty());
    bool found = false;
    for (const auto &d : diags)
      found = found || d.message.find("lacks a terminator") !=
                           std::string::npos;
    CHECK(found);
  }

  TEST_CASE("duplicate register id is an SSA diagnostic") {
    Module m = empty_nvvm();
    Function f = void_fn("k");
    BasicBlock b{"entry", {}};
    b.insts.push_back(add_i32("x", Value::int_const(1, i32()),
                              Value::int_const(2, i32())));
    b.insts.push_back(add_i32("x", Value::int_const(3, i32()),
                              Value::int_const(4, i32())));
    b.insts.push_back(ret_void());
    f.blocks.push_back(std::move(b));
    m.functions.push_back(std::move(f));

    auto diags = verify_module(m);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].message == "duplicate register %x");
    CHECK(diags[0].function == "k");
  }

  TEST_CASE("use before definition is rejected") {
    Module m = empty_nvvm();
    Function f = void_fn("k");
    BasicBlock b{"entry", {}};
    b.insts.push_back(add_i32("x", Value::reg("y", i32()),
                              Value::int_const(1, i32())));
    b.insts.push_back(add_i32("y", Value::int_const(1, i32()),
                              Value::int_const(1, i32())));
    b.insts.push_back(ret_void());
    f.blocks.push_back(std::move(b));
    m.functions.push_back(std::move(f));

    auto diags = verify_module(m);
    REQUIRE(!diags.empty());
    CHECK(diags[0].message.find("%y") != std::string::npos);
  }

  TEST_CASE("duplicate kernel annotation is diagnosed") {
    Module m = vecadd_module();
    auto ids = *m.find_named_metadata("nvvm.annotations");
    ids.push_back(ids.front());
    m.set_named_metadata("nvvm.annotations", std::move(ids));

    auto diags = verify_module(m);
    REQUIRE(!diags.empty());
    CHECK(diags[0].message.find("more than once") != std::string::npos);
  }

  TEST_CASE("kernel flag must match annotations") {
    Module m = vecadd_module();
    m.find_function("vecadd")->is_kernel = false;
    CHECK(!verify_module(m).empty());
  }

  TEST_CASE("atomicrmw operand widths must match the pointee") {
    Module m = empty_nvvm();
    Function f = void_fn("k");
    f.params.push_back({"p", i32p(), {}});
    BasicBlock b{"entry", {}};
    Instruction a;
    a.op = Opcode::atomicrmw;
    a.result = "old";
    a.rmw = AtomicOp::add;
    a.type = i64();
    a.operands = {Value::reg("p", i32p()), Value::int_const(1, i64())};
    b.insts.push_back(std::move(a));
    b.insts.push_back(ret_void());
    f.blocks.push_back(std::move(b));
    m.functions.push_back(std::move(f));

    auto diags = verify_module(m);
    REQUIRE(!diags.empty());
    CHECK(diags[0].message.find("atomicrmw") != std::string::npos);
  }

  TEST_CASE("opencl kernels need per-parameter metadata") {
    Module m;
    m.target_triple = kSpirTriple;
    m.dialect = Dialect::OpenCL;
    Function f = void_fn("k");
    f.is_kernel = true;
    f.cconv = CallConv::spir_kernel;
    f.params.push_back({"a", i32p(AddressSpace::Private), {}});
    f.blocks.push_back({"entry", {ret_void()}});
    m.functions.push_back(std::move(f));

    auto diags = verify_module(m);
    REQUIRE(diags.size() >= 2); // both kernel_arg_* kinds missing
    CHECK(diags[0].message.find("kernel_arg") != std::string::npos);
  }
}

TEST_SUITE("ir/kernels_of") {
  TEST_CASE("vecadd yields one kernel") {
    Module m = vecadd_module();
    KernelsResult r = kernels_of(m);
    REQUIRE(r.errors.empty());
    REQUIRE(r.kernels.size() == 1);
    CHECK(r.kernels[0]->name == "vecadd");
  }

  TEST_CASE("no annotations yields no kernels") {
    Module m = empty_nvvm();
    Function f = void_fn("helper");
    f.blocks.push_back({"entry", {ret_void()}});
    m.functions.push_back(std::move(f));
    CHECK(kernels_of(m).kernels.empty());
  }

  TEST_CASE("two kernels come back in annotation order") {
    Module m = empty_nvvm();
    for (const char *name : {"second", "first"}) {
      Function f = void_fn(name);
      f.blocks.push_back({"entry", {ret_void()}});
      m.functions.push_back(std::move(f));
    }
    annotate_kernel(m, "second");
    annotate_kernel(m, "first");
    REQUIRE(verify_module(m).empty());

    KernelsResult r = kernels_of(m);
    REQUIRE(r.kernels.size() == 2);
    CHECK(r.kernels[0]->name == "second");
    CHECK(r.kernels[1]->name == "first");

    // Stability: same module, same list.
    KernelsResult r2 = kernels_of(m);
    REQUIRE(r2.kernels.size() == 2);
    CHECK(r2.kernels[0] == r.kernels[0]);
    CHECK(r2.kernels[1] == r.kernels[1]);
  }

  TEST_CASE("annotation naming an unknown function is an error") {
    Module m = vecadd_module();
    // Point the annotation at a function that does not exist.
    auto ids = *m.find_named_metadata("nvvm.annotations");
    MetadataNode n = *m.find_node(ids[0]);
    n.elems[0].str = "ghost";
    std::string id = m.add_node(std::move(n));
    m.set_named_metadata("nvvm.annotations", {id});

    KernelsResult r = kernels_of(m);
    CHECK(r.kernels.empty());
    REQUIRE(!r.errors.empty());
    CHECK(r.errors[0].message.find("ghost") != std::string::npos);
  }
}
