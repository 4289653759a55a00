// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#include "gpuir/translate.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace gpuir {

namespace {

TypeRef builtin_vec_type() { return Type::vector_of(Type::int_ty(64), 3); }

TypeRef builtin_var_ptr_type() {
  return Type::pointer_to(builtin_vec_type(), AddressSpace::Constant);
}

// Source-level spelling of an IR type for kernel_arg_type metadata.
std::string source_type_name(const TypeRef &t) {
  switch (t->kind) {
  case Type::Kind::Int:
    switch (t->bits) {
    case 1:
      return "bool";
    case 8:
      return "char";
    case 16:
      return "short";
    case 32:
      return "int";
    case 64:
      return "long";
    }
    return "int";
  case Type::Kind::Float:
    return t->bits == 32 ? "float" : "double";
  case Type::Kind::Vector:
    return source_type_name(t->elem) + std::to_string(t->count);
  case Type::Kind::Pointer:
    return source_type_name(t->elem) + "*";
  default:
    return type_text(t);
  }
}

} // namespace

InstructionClass classify_instruction(const Instruction &inst) {
  if (inst.op == Opcode::atomicrmw)
    return InstructionClass::device_dependent;
  if (inst.op == Opcode::call && find_builtin(inst.callee))
    return InstructionClass::device_dependent;
  return InstructionClass::device_independent;
}

int TranslationReport::total_rewrites() const {
  int n = rewritten_atomics;
  for (const auto &[kind, count] : rewritten_calls)
    n += count;
  return n;
}

std::string TranslationReport::summary() const {
  std::ostringstream os;
  os << "rewritten calls:";
  if (rewritten_calls.empty() && rewritten_atomics == 0)
    os << " none";
  for (const auto &[kind, count] : rewritten_calls)
    os << " " << builtin_kind_text(kind) << "=" << count;
  if (rewritten_atomics)
    os << " atomic=" << rewritten_atomics;
  os << "\n";
  if (!dropped_metadata.empty()) {
    os << "dropped metadata:";
    for (const auto &n : dropped_metadata)
      os << " " << n;
    os << "\n";
  }
  if (!added_metadata.empty()) {
    os << "added metadata:";
    for (const auto &n : added_metadata)
      os << " " << n;
    os << "\n";
  }
  if (!unsupported.empty()) {
    os << "unsupported builtins:\n";
    for (const auto &u : unsupported)
      os << "  @" << u.function << "#" << u.inst_index << ": " << u.callee
         << "\n";
  }
  return os.str();
}

std::optional<Diagnostic> rewrite_triple(Module &m) {
  if (m.target_triple != kNvvmTriple)
    return Diagnostic{"", "", -1,
                      "cannot rewrite triple \"" + m.target_triple +
                          "\"; expected \"" + std::string(kNvvmTriple) + "\""};
  m.target_triple = kSpirTriple;
  return std::nullopt;
}

namespace {

// Drop metadata nodes that are no longer referenced from named metadata or
// function attachments.
void collect_garbage_nodes(Module &m) {
  std::set<std::string> live;
  std::function<void(const std::string &)> mark = [&](const std::string &id) {
    if (!live.insert(id).second)
      return;
    if (const MetadataNode *n = m.find_node(id))
      for (const auto &e : n->elems)
        if (e.kind == MetadataElem::Kind::NodeRef)
          mark(e.str);
  };
  for (const auto &[name, ids] : m.named_metadata)
    for (const auto &id : ids)
      mark(id);
  for (const auto &f : m.functions)
    for (const auto &[kind, id] : f.metadata)
      mark(id);
  std::erase_if(m.metadata_nodes,
                [&](const auto &kv) { return !live.count(kv.first); });
}

} // namespace

std::optional<Diagnostic> transform_metadata(Module &m,
                                             TranslationReport &report) {
  KernelsResult kr = kernels_of(m);
  if (!kr.errors.empty())
    return kr.errors.front();

  std::vector<std::string> kernel_names;
  for (const Function *k : kr.kernels) {
    if (k->is_declaration())
      return Diagnostic{k->name, "", -1,
                        "nvvm.annotations names declaration-only function @" +
                            k->name};
    kernel_names.push_back(k->name);
  }

  for (const auto &name : kernel_names) {
    Function *f = m.find_function(name);
    f->is_kernel = true;
    MetadataNode spaces, types;
    for (const auto &p : f->params) {
      // Kernel pointer arguments always reference global memory.
      spaces.elems.push_back(
          MetadataElem::int_elem(p.type->is_pointer() ? 1 : 0));
      types.elems.push_back(MetadataElem::str_elem(source_type_name(p.type)));
    }
    f->metadata["kernel_arg_addr_space"] = m.add_node(std::move(spaces));
    f->metadata["kernel_arg_type"] = m.add_node(std::move(types));
    report.added_metadata.push_back("kernel_arg_addr_space@" + name);
    report.added_metadata.push_back("kernel_arg_type@" + name);
  }

  m.remove_named_metadata("nvvm.annotations");

  // Device-independent named metadata passes through; NVVM-specific and
  // unrecognized names are dropped and reported.
  static const std::set<std::string> kCopied = {"llvm.ident"};
  std::vector<std::string> dropped;
  std::erase_if(m.named_metadata, [&](const auto &kv) {
    if (kCopied.count(kv.first))
      return false;
    dropped.push_back(kv.first);
    return true;
  });
  for (auto &n : dropped)
    report.dropped_metadata.push_back(std::move(n));

  collect_garbage_nodes(m);
  return std::nullopt;
}

namespace {

Instruction make_index_load(const std::string &result, SpirvVariable var) {
  Instruction ld;
  ld.op = Opcode::load;
  ld.result = result;
  ld.type = builtin_vec_type();
  ld.operands = {
      Value::global_ref(spirv_variable_name(var), builtin_var_ptr_type())};
  return ld;
}

} // namespace

std::optional<std::vector<Instruction>>
map_index_builtin(const Instruction &call) {
  if (call.op != Opcode::call || !call.has_result())
    return std::nullopt;
  const BuiltinMapping *bm = find_builtin(call.callee);
  if (!bm || !bm->kind.is_index_query())
    return std::nullopt;
  if (!call.operands.empty() || !call.type || !call.type->is_int(32))
    return std::nullopt;

  std::string base = call.result;
  Instruction ld = make_index_load(base + ".wi", bm->spirv_variable);

  Instruction ex;
  ex.op = Opcode::extractelement;
  ex.result = base + ".lane";
  ex.type = Type::int_ty(64);
  ex.operands = {Value::reg(ld.result, ld.type),
                 Value::int_const(bm->kind.dim, Type::int_ty(32))};

  Instruction tr;
  tr.op = Opcode::trunc;
  tr.result = base; // keeps every existing use valid
  tr.type = Type::int_ty(32);
  tr.operands = {Value::reg(ex.result, ex.type)};

  return std::vector<Instruction>{std::move(ld), std::move(ex), std::move(tr)};
}

std::optional<Instruction> map_barrier(const Instruction &call) {
  if (call.op != Opcode::call || call.callee != "llvm.nvvm.barrier0")
    return std::nullopt;
  if (!call.operands.empty() || call.has_result())
    return std::nullopt;
  Instruction b;
  b.op = Opcode::call;
  b.callee = "barrier";
  b.type = Type::void_ty();
  b.operands = {Value::int_const(kBarrierBothFences, Type::int_ty(32))};
  return b;
}

std::optional<Instruction> map_atomic(const Instruction &inst) {
  if (inst.op != Opcode::atomicrmw || inst.operands.size() != 2)
    return std::nullopt;
  const TypeRef &pt = inst.operands[0].type;
  // The catalog only covers the int32 prototype.
  if (!pt->is_pointer() || !pt->elem->is_int(32) ||
      !inst.operands[1].type->is_int(32))
    return std::nullopt;
  Instruction c;
  c.op = Opcode::call;
  c.result = inst.result;
  c.callee = atomic_callee(inst.rmw);
  c.type = Type::int_ty(32);
  c.operands = inst.operands;
  return c;
}

namespace {

struct NeededDeclaration {
  TypeRef ret;
  std::vector<TypeRef> params;
  CallConv cconv = CallConv::none;
};

class NvvmToSpirv {
public:
  explicit NvvmToSpirv(const Module &src) : src_(src) {}

  TranslateResult run() {
    TranslateResult r;
    if (src_.dialect != Dialect::NVVM) {
      r.errors.push_back(
          {"", "", -1, "translate_nvvm_to_spirv requires an NVVM module"});
      return r;
    }
    auto diags = verify_module(src_);
    if (!diags.empty()) {
      r.errors = std::move(diags);
      return r;
    }

    Module m = src_;
    if (auto err = rewrite_triple(m)) {
      r.errors.push_back(*err);
      return r;
    }
    if (auto err = transform_metadata(m, r.report)) {
      r.errors.push_back(*err);
      return r;
    }

    for (auto &f : m.functions) {
      f.dso_local = false; // host-linkage detail with no SPIR-V counterpart
      if (f.is_declaration())
        continue;
      rewrite_function(m, f, r.report);
    }

    if (r.report.failed())
      return r; // never emit a module for a failed translation

    strip_llvm_declarations(m);
    add_builtin_globals(m);
    add_declarations(m);
    m.dialect = Dialect::SPIRV;

    auto out_diags = verify_module(m);
    if (!out_diags.empty()) {
      r.errors = std::move(out_diags);
      return r;
    }
    r.module = std::move(m);
    return r;
  }

private:
  const Module &src_;
  std::set<SpirvVariable> used_vars_;
  std::map<std::string, NeededDeclaration> needed_decls_;
  std::set<std::string> conflicting_decls_;

  bool record_decl(const std::string &name, NeededDeclaration d) {
    auto it = needed_decls_.find(name);
    if (it == needed_decls_.end()) {
      needed_decls_.emplace(name, std::move(d));
      return true;
    }
    const NeededDeclaration &prev = it->second;
    if (!type_equal(prev.ret, d.ret) || prev.params.size() != d.params.size())
      return false;
    for (size_t i = 0; i < d.params.size(); ++i)
      if (!type_equal(prev.params[i], d.params[i]))
        return false;
    return true;
  }

  void rewrite_function(Module &m, Function &f, TranslationReport &report) {
    std::set<std::string> taken;
    for (const auto &p : f.params)
      taken.insert(p.name);
    for (const auto &b : f.blocks)
      for (const auto &inst : b.insts)
        if (inst.has_result())
          taken.insert(inst.result);

    auto unique_name = [&](std::string base) {
      std::string name = base;
      int n = 0;
      while (taken.count(name))
        name = base + std::to_string(n++);
      taken.insert(name);
      return name;
    };

    int linear_index = 0;
    for (auto &b : f.blocks) {
      std::vector<Instruction> out;
      out.reserve(b.insts.size());
      for (auto &inst : b.insts) {
        int idx = linear_index++;
        if (classify_instruction(inst) ==
            InstructionClass::device_independent) {
          if (inst.op == Opcode::call && !find_builtin(inst.callee)) {
            const Function *callee = m.find_function(inst.callee);
            if (callee && callee->is_declaration()) {
              // External code the target cannot provide.
              report.unsupported.push_back({f.name, idx, inst.callee});
              continue;
            }
          }
          out.push_back(inst);
          continue;
        }

        if (inst.op == Opcode::atomicrmw) {
          auto c = map_atomic(inst);
          if (!c) {
            report.unsupported.push_back(
                {f.name, idx,
                 std::string("atomicrmw ") + atomic_op_text(inst.rmw) + " (" +
                     type_text(inst.operands.empty()
                                   ? nullptr
                                   : inst.operands[1].type) +
                     " payload)"});
            continue;
          }
          NeededDeclaration d;
          d.ret = c->type;
          d.params = {c->operands[0].type, c->operands[1].type};
          if (!record_decl(c->callee, std::move(d))) {
            report.unsupported.push_back(
                {f.name, idx,
                 c->callee + " (conflicting operand address spaces)"});
            continue;
          }
          report.rewritten_atomics++;
          out.push_back(std::move(*c));
          continue;
        }

        const BuiltinMapping *bm = find_builtin(inst.callee);
        if (bm->kind.is_index_query()) {
          auto seq = map_index_builtin(inst);
          if (!seq) {
            report.unsupported.push_back({f.name, idx, inst.callee});
            continue;
          }
          // The intermediates carry derived names; keep them unique.
          (*seq)[0].result = unique_name((*seq)[0].result);
          (*seq)[1].operands[0].name = (*seq)[0].result;
          (*seq)[1].result = unique_name((*seq)[1].result);
          (*seq)[2].operands[0].name = (*seq)[1].result;
          used_vars_.insert(bm->spirv_variable);
          report.rewritten_calls[bm->kind.kind]++;
          for (auto &i : *seq)
            out.push_back(std::move(i));
          continue;
        }

        if (bm->kind.kind == BuiltinKind::Kind::barrier) {
          auto barrier = map_barrier(inst);
          if (!barrier) {
            report.unsupported.push_back({f.name, idx, inst.callee});
            continue;
          }
          NeededDeclaration d;
          d.ret = Type::void_ty();
          d.params = {Type::int_ty(32)};
          record_decl("barrier", std::move(d));
          report.rewritten_calls[bm->kind.kind]++;
          out.push_back(std::move(*barrier));
          continue;
        }

        // Math rows: rename to the width-specific OpenCL builtin.
        {
          TypeRef fty = Type::float_ty(bm->float_bits);
          size_t arity = bm->kind.kind == BuiltinKind::Kind::fma ? 3 : 1;
          bool shape_ok = inst.operands.size() == arity &&
                          type_equal(inst.type, fty);
          for (const auto &op : inst.operands)
            shape_ok = shape_ok && type_equal(op.type, fty);
          if (!shape_ok || !inst.has_result()) {
            report.unsupported.push_back({f.name, idx, inst.callee});
            continue;
          }
          Instruction c = inst;
          c.callee = mangled_math_callee(bm->kind.kind, bm->float_bits);
          NeededDeclaration d;
          d.ret = fty;
          d.params.assign(arity, fty);
          d.cconv = CallConv::spir_func;
          record_decl(c.callee, std::move(d));
          report.rewritten_calls[bm->kind.kind]++;
          out.push_back(std::move(c));
        }
      }
      b.insts = std::move(out);
    }
  }

  static void strip_llvm_declarations(Module &m) {
    std::erase_if(m.functions, [](const Function &f) {
      return f.is_declaration() && f.name.rfind("llvm.", 0) == 0;
    });
  }

  void add_builtin_globals(Module &m) {
    for (SpirvVariable v :
         {SpirvVariable::LocalInvocationId, SpirvVariable::WorkgroupId,
          SpirvVariable::WorkgroupSize, SpirvVariable::NumWorkgroups}) {
      if (!used_vars_.count(v))
        continue;
      GlobalVariable g;
      g.name = spirv_variable_name(v);
      g.type = builtin_vec_type();
      g.space = AddressSpace::Constant;
      g.init = GlobalVariable::Init::External;
      m.globals.push_back(std::move(g));
    }
  }

  void add_declarations(Module &m) {
    for (const auto &[name, d] : needed_decls_) {
      Function f;
      f.name = name;
      f.ret = d.ret;
      f.cconv = d.cconv;
      for (size_t i = 0; i < d.params.size(); ++i)
        f.params.push_back({std::to_string(i), d.params[i], {}});
      m.functions.push_back(std::move(f));
    }
  }
};

} // namespace

TranslateResult translate_nvvm_to_spirv(const Module &m) {
  return NvvmToSpirv(m).run();
}

namespace {

class SpirvToOpenCL {
public:
  explicit SpirvToOpenCL(const Module &src) : src_(src) {}

  LowerResult run() {
    LowerResult r;
    if (src_.dialect != Dialect::SPIRV) {
      r.errors.push_back(
          {"", "", -1, "lower_spirv_to_opencl requires a SPIRV module"});
      return r;
    }

    Module m = src_;
    for (auto &f : m.functions) {
      if (f.is_declaration())
        continue;
      lower_function(f, r.errors);
    }
    if (!r.errors.empty())
      return r;

    rewrite_declarations(m);
    std::erase_if(m.globals, [](const GlobalVariable &g) {
      return spirv_variable_from_name(g.name).has_value();
    });
    for (auto &f : m.functions)
      if (f.is_kernel)
        f.cconv = CallConv::spir_kernel;
    m.dialect = Dialect::OpenCL;

    auto diags = verify_module(m);
    if (!diags.empty()) {
      r.errors = std::move(diags);
      return r;
    }
    r.module = std::move(m);
    return r;
  }

private:
  const Module &src_;
  std::set<BuiltinKind::Kind> used_queries_;

  static std::optional<SpirvVariable> builtin_load_source(
      const Instruction &inst) {
    if (inst.op != Opcode::load || inst.operands.size() != 1 ||
        inst.operands[0].kind != Value::Kind::GlobalRef)
      return std::nullopt;
    return spirv_variable_from_name(inst.operands[0].name);
  }

  static BuiltinKind::Kind query_of(SpirvVariable v) {
    switch (v) {
    case SpirvVariable::LocalInvocationId:
      return BuiltinKind::Kind::thread_index;
    case SpirvVariable::WorkgroupId:
      return BuiltinKind::Kind::group_index;
    case SpirvVariable::WorkgroupSize:
      return BuiltinKind::Kind::group_size;
    default:
      return BuiltinKind::Kind::num_groups;
    }
  }

  void lower_function(Function &f, std::vector<Diagnostic> &errors) {
    // Registers holding whole builtin-variable vectors, and the query each
    // one answers.
    std::map<std::string, SpirvVariable> vector_regs;
    for (const auto &b : f.blocks)
      for (const auto &inst : b.insts)
        if (auto v = builtin_load_source(inst))
          vector_regs[inst.result] = *v;

    // Every other appearance of the builtin variable or of a loaded vector
    // must be a constant-lane extractelement.
    for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
      const auto &b = f.blocks[bi];
      for (size_t i = 0; i < b.insts.size(); ++i) {
        const Instruction &inst = b.insts[i];
        if (builtin_load_source(inst))
          continue;
        for (const auto &op : inst.operands) {
          bool vec_use = op.is_reg() && vector_regs.count(op.name);
          bool var_use = op.kind == Value::Kind::GlobalRef &&
                         spirv_variable_from_name(op.name).has_value();
          if (!vec_use && !var_use)
            continue;
          bool ok = inst.op == Opcode::extractelement && vec_use &&
                    &op == &inst.operands[0] &&
                    inst.operands[1].is_const_int();
          if (!ok)
            errors.push_back(
                {f.name, b.label, int(i),
                 "builtin variable escapes as a plain value (only "
                 "constant-lane extractelement is lowerable)"});
        }
      }
    }
    if (!errors.empty())
      return;

    for (auto &b : f.blocks) {
      std::vector<Instruction> out;
      out.reserve(b.insts.size());
      for (auto &inst : b.insts) {
        if (builtin_load_source(inst))
          continue; // folded into the get_* call at each extract site
        if (inst.op == Opcode::extractelement && inst.operands[0].is_reg() &&
            vector_regs.count(inst.operands[0].name)) {
          BuiltinKind::Kind q = query_of(vector_regs[inst.operands[0].name]);
          used_queries_.insert(q);
          Instruction call;
          call.op = Opcode::call;
          call.result = inst.result; // downstream uses stay valid
          call.type = Type::int_ty(64);
          call.callee = mangled_index_callee(q);
          call.operands = {Value::int_const(inst.operands[1].as_signed(),
                                            Type::int_ty(32))};
          out.push_back(std::move(call));
          continue;
        }
        if (inst.op == Opcode::call && inst.callee == "barrier") {
          Instruction c = inst;
          c.callee = kBarrierMangled;
          out.push_back(std::move(c));
          continue;
        }
        out.push_back(inst);
      }
      b.insts = std::move(out);
    }
  }

  void rewrite_declarations(Module &m) {
    for (auto &f : m.functions) {
      if (!f.is_declaration())
        continue;
      if (f.name == "barrier")
        f.name = kBarrierMangled;
      if (f.name.rfind("_Z", 0) == 0)
        f.cconv = CallConv::spir_func;
    }
    for (BuiltinKind::Kind q :
         {BuiltinKind::Kind::thread_index, BuiltinKind::Kind::group_index,
          BuiltinKind::Kind::group_size, BuiltinKind::Kind::num_groups}) {
      if (!used_queries_.count(q))
        continue;
      Function f;
      f.name = mangled_index_callee(q);
      f.ret = Type::int_ty(64);
      f.params.push_back({"0", Type::int_ty(32), {}});
      f.cconv = CallConv::spir_func;
      m.functions.push_back(std::move(f));
    }
  }
};

} // namespace

LowerResult lower_spirv_to_opencl(const Module &m) {
  return SpirvToOpenCL(m).run();
}

TranslateResult translate(const Module &m) {
  TranslateResult r = translate_nvvm_to_spirv(m);
  if (!r.ok())
    return r;
  LowerResult low = lower_spirv_to_opencl(*r.module);
  if (!low.ok()) {
    r.module.reset();
    r.errors = std::move(low.errors);
    return r;
  }
  r.module = std::move(low.module);
  return r;
}

} // namespace gpuir
