// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#ifndef GPUIR_TESTS_FIXTURES_HPP
#define GPUIR_TESTS_FIXTURES_HPP

#include <fstream>
#include <sstream>
#include <string>

#include "gpuir/ir.hpp"
#include "gpuir/parse.hpp"

namespace gpuir::testing {

inline std::string repo_root() { return GPUIR_REPO_ROOT; }
inline std::string corpus_dir() { return repo_root() + "/corpus"; }

inline std::string read_file_or_empty(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The vecadd module every pipeline stage gets exercised on.
inline const char *kVecAddNvvm = R"(; vector add: c[i] = a[i] + b[i]
target triple = "nvptx64-nvidia-cuda"

define dso_local void @vecadd(i32* nocapture readonly %a, i32* nocapture readonly %b, i32* nocapture %c) {
entry:
  %tid = call i32 @llvm.nvvm.read.ptx.sreg.tid.x()
  %idx = sext i32 %tid to i64
  %pa = getelementptr inbounds i32, i32* %a, i64 %idx
  %va = load i32, i32* %pa, align 4
  %pb = getelementptr inbounds i32, i32* %b, i64 %idx
  %vb = load i32, i32* %pb, align 4
  %sum = add nsw i32 %va, %vb
  %pc = getelementptr inbounds i32, i32* %c, i64 %idx
  store i32 %sum, i32* %pc, align 4
  ret void
}

declare i32 @llvm.nvvm.read.ptx.sreg.tid.x()

!nvvm.annotations = !{!3}

!3 = !{void (i32*, i32*, i32*)* @vecadd, !"kernel", i32 1}
)";

inline Module parse_or_die(const std::string &text) {
  ParseResult r = parse_module(text);
  if (!r.ok()) {
    std::string all = "parse failed:";
    for (const auto &e : r.errors)
      all += "\n  " + e.to_string();
    throw std::runtime_error(all);
  }
  return std::move(*r.module);
}

inline Module vecadd_module() { return parse_or_die(kVecAddNvvm); }

// ---- small programmatic IR builders (for deliberately broken modules) ----

inline TypeRef i32() { return Type::int_ty(32); }
inline TypeRef i64() { return Type::int_ty(64); }
inline TypeRef i32p(AddressSpace s = AddressSpace::Private) {
  return Type::pointer_to(Type::int_ty(32), s);
}

inline Instruction ret_void() {
  Instruction i;
  i.op = Opcode::ret;
  i.type = Type::void_ty();
  return i;
}

inline Instruction add_i32(std::string result, Value a, Value b) {
  Instruction i;
  i.op = Opcode::add;
  i.result = std::move(result);
  i.type = i32();
  i.operands = {std::move(a), std::move(b)};
  return i;
}

inline Function void_fn(std::string name) {
  Function f;
  f.name = std::move(name);
  f.ret = Type::void_ty();
  return f;
}

inline Module empty_nvvm() {
  Module m;
  m.target_triple = kNvvmTriple;
  m.dialect = Dialect::NVVM;
  return m;
}

// Marks fn as an NVVM kernel via an annotation node.
inline void annotate_kernel(Module &m, const std::string &fn) {
  const Function *f = m.find_function(fn);
  MetadataNode n;
  n.elems = {
      MetadataElem::func_elem(fn, Type::pointer_to(f->function_type())),
      MetadataElem::str_elem("kernel"),
      MetadataElem::int_elem(1),
  };
  std::string id = m.add_node(std::move(n));
  auto *ids = m.find_named_metadata("nvvm.annotations");
  std::vector<std::string> list = ids ? *ids : std::vector<std::string>{};
  list.push_back(id);
  m.set_named_metadata("nvvm.annotations", std::move(list));
  m.find_function(fn)->is_kernel = true;
}

} // namespace gpuir::testing

#endif // GPUIR_TESTS_FIXTURES_HPP
