// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#ifndef GPUIR_TESTS_GENERATORS_HPP
#define GPUIR_TESTS_GENERATORS_HPP

#include <cmath>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "gpuir/interp.hpp"
#include "gpuir/ir.hpp"

namespace gpuir::testing {

class Rng {
public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t bits() { return eng_(); }
  int range(int lo, int hi) { // inclusive
    return lo + int(eng_() % uint64_t(hi - lo + 1));
  }
  bool chance(int percent) { return range(1, 100) <= percent; }
  template <typename T> const T &pick(const std::vector<T> &v) {
    return v[size_t(eng_() % v.size())];
  }

private:
  std::mt19937_64 eng_;
};

// ---------------------------------------------------------------------
// Random well-formed modules for the parse/print round-trip property.
// ---------------------------------------------------------------------

class ModuleGenerator {
public:
  explicit ModuleGenerator(uint64_t seed, bool nvvm_only = false)
      : rng_(seed), nvvm_only_(nvvm_only) {}

  Module generate() {
    Module m;
    bool opencl = !nvvm_only_ && rng_.chance(30);
    m.dialect = opencl ? Dialect::OpenCL : Dialect::NVVM;
    m.target_triple = opencl ? kSpirTriple : kNvvmTriple;

    int nglobals = rng_.range(0, 2);
    for (int i = 0; i < nglobals; ++i)
      add_global(m, i);

    int ndecls = rng_.range(0, 2);
    for (int i = 0; i < ndecls; ++i)
      add_declaration(m, i);

    int nfuncs = rng_.range(1, 2);
    for (int i = 0; i < nfuncs; ++i)
      add_definition(m, i, opencl);

    if (!opencl && rng_.chance(40))
      add_extra_metadata(m);
    return m;
  }

private:
  Rng rng_;
  bool nvvm_only_ = false;

  TypeRef scalar_type() {
    switch (rng_.range(0, 3)) {
    case 0:
      return Type::int_ty(32);
    case 1:
      return Type::int_ty(64);
    case 2:
      return Type::float_ty(32);
    default:
      return Type::float_ty(64);
    }
  }

  Value const_of(const TypeRef &t) {
    if (t->is_int())
      return Value::int_const(int64_t(rng_.bits()), t);
    double v;
    switch (rng_.range(0, 5)) {
    case 0:
      v = 0.5;
      break;
    case 1:
      v = -2.25;
      break;
    case 2:
      v = 0.1;
      break;
    case 3:
      v = double(rng_.range(-1000, 1000));
      break;
    case 4:
      v = 3.14159e10;
      break;
    default:
      v = -7.5e-3;
      break;
    }
    return Value::float_const(v, t);
  }

  void add_global(Module &m, int i) {
    GlobalVariable g;
    g.name = "g" + std::to_string(i);
    if (rng_.chance(40)) {
      g.space = AddressSpace::Local;
      g.internal = true;
      g.type = Type::array_of(scalar_type(), rng_.range(1, 64));
      g.init = GlobalVariable::Init::Zero;
    } else {
      g.space = rng_.chance(25) ? AddressSpace::Constant
                                : AddressSpace::Global;
      g.type = scalar_type();
      if (rng_.chance(50)) {
        g.init = GlobalVariable::Init::Scalar;
        g.init_val = const_of(g.type);
      } else {
        g.init = GlobalVariable::Init::Zero;
      }
    }
    m.globals.push_back(std::move(g));
  }

  void add_declaration(Module &m, int i) {
    Function f;
    f.name = "ext" + std::to_string(i);
    f.ret = rng_.chance(30) ? Type::void_ty() : scalar_type();
    int nparams = rng_.range(0, 3);
    for (int p = 0; p < nparams; ++p) {
      TypeRef t = rng_.chance(30) ? Type::pointer_to(scalar_type())
                                  : scalar_type();
      f.params.push_back({std::to_string(p), t, {}});
    }
    m.functions.push_back(std::move(f));
  }

  std::vector<std::string> random_param_attrs() {
    std::vector<std::string> attrs;
    if (rng_.chance(30))
      attrs.push_back("nocapture");
    if (rng_.chance(20))
      attrs.push_back("readonly");
    if (rng_.chance(10))
      attrs.push_back("align " + std::to_string(1 << rng_.range(2, 4)));
    return attrs;
  }

  struct Pools {
    std::vector<std::pair<std::string, TypeRef>> ints32, ints64, f32s, f64s,
        i1s, ptrs;
    int counter = 0;

    void add(const std::string &name, const TypeRef &t) {
      if (t->is_int(1))
        i1s.push_back({name, t});
      else if (t->is_int(32))
        ints32.push_back({name, t});
      else if (t->is_int(64))
        ints64.push_back({name, t});
      else if (t->is_float() && t->bits == 32)
        f32s.push_back({name, t});
      else if (t->is_float() && t->bits == 64)
        f64s.push_back({name, t});
      else if (t->is_pointer() && t->elem->is_scalar())
        ptrs.push_back({name, t});
    }

    std::string fresh() { return "v" + std::to_string(counter++); }
  };

  Value operand_of(Pools &pools, const TypeRef &t) {
    auto from = [&](std::vector<std::pair<std::string, TypeRef>> &pool)
        -> std::optional<Value> {
      if (pool.empty() || rng_.chance(35))
        return std::nullopt;
      const auto &[name, ty] = rng_.pick(pool);
      return Value::reg(name, ty);
    };
    if (t->is_int(32))
      if (auto v = from(pools.ints32))
        return *v;
    if (t->is_int(64))
      if (auto v = from(pools.ints64))
        return *v;
    if (t->is_float() && t->bits == 32)
      if (auto v = from(pools.f32s))
        return *v;
    if (t->is_float() && t->bits == 64)
      if (auto v = from(pools.f64s))
        return *v;
    return const_of(t);
  }

  // Appends one random type-correct instruction; may be a no-op for some
  // menu rolls when no operands fit.
  void random_instruction(Pools &pools,
                          std::vector<Instruction> &out) {
    switch (rng_.range(0, 9)) {
    case 0:
    case 1: { // integer binop
      TypeRef t = rng_.chance(60) ? Type::int_ty(32) : Type::int_ty(64);
      Instruction inst;
      inst.op = rng_.pick(std::vector<Opcode>{
          Opcode::add, Opcode::sub, Opcode::mul, Opcode::and_, Opcode::or_,
          Opcode::xor_, Opcode::shl, Opcode::lshr, Opcode::ashr});
      if (inst.op == Opcode::add || inst.op == Opcode::sub ||
          inst.op == Opcode::mul) {
        inst.nsw = rng_.chance(40);
        inst.nuw = rng_.chance(15);
      }
      inst.type = t;
      inst.result = pools.fresh();
      Value a = operand_of(pools, t);
      Value b = (inst.op == Opcode::shl || inst.op == Opcode::lshr ||
                 inst.op == Opcode::ashr)
                    ? Value::int_const(rng_.range(0, t->bits - 1), t)
                    : operand_of(pools, t);
      inst.operands = {a, b};
      pools.add(inst.result, t);
      out.push_back(std::move(inst));
      return;
    }
    case 2: { // float binop
      TypeRef t = rng_.chance(50) ? Type::float_ty(32) : Type::float_ty(64);
      Instruction inst;
      inst.op = rng_.pick(std::vector<Opcode>{Opcode::fadd, Opcode::fsub,
                                              Opcode::fmul, Opcode::fdiv});
      inst.type = t;
      inst.result = pools.fresh();
      inst.operands = {operand_of(pools, t), operand_of(pools, t)};
      pools.add(inst.result, t);
      out.push_back(std::move(inst));
      return;
    }
    case 3: { // comparison
      Instruction inst;
      if (rng_.chance(60)) {
        TypeRef t = rng_.chance(60) ? Type::int_ty(32) : Type::int_ty(64);
        inst.op = Opcode::icmp;
        inst.ipred = ICmpPred(rng_.range(0, 9));
        inst.operands = {operand_of(pools, t), operand_of(pools, t)};
      } else {
        TypeRef t = rng_.chance(50) ? Type::float_ty(32) : Type::float_ty(64);
        inst.op = Opcode::fcmp;
        inst.fpred = FCmpPred(rng_.range(0, 13));
        inst.operands = {operand_of(pools, t), operand_of(pools, t)};
      }
      inst.type = Type::int_ty(1);
      inst.result = pools.fresh();
      pools.add(inst.result, inst.type);
      out.push_back(std::move(inst));
      return;
    }
    case 4: { // select
      if (pools.i1s.empty())
        return;
      TypeRef t = scalar_type();
      Instruction inst;
      inst.op = Opcode::select;
      inst.type = t;
      inst.result = pools.fresh();
      const auto &[cname, cty] = rng_.pick(pools.i1s);
      inst.operands = {Value::reg(cname, cty), operand_of(pools, t),
                       operand_of(pools, t)};
      pools.add(inst.result, t);
      out.push_back(std::move(inst));
      return;
    }
    case 5: { // cast
      Instruction inst;
      inst.result = pools.fresh();
      switch (rng_.range(0, 4)) {
      case 0:
        inst.op = rng_.chance(50) ? Opcode::sext : Opcode::zext;
        inst.type = Type::int_ty(64);
        inst.operands = {operand_of(pools, Type::int_ty(32))};
        break;
      case 1:
        inst.op = Opcode::trunc;
        inst.type = Type::int_ty(32);
        inst.operands = {operand_of(pools, Type::int_ty(64))};
        break;
      case 2:
        inst.op = Opcode::sitofp;
        inst.type = Type::float_ty(64);
        inst.operands = {operand_of(pools, Type::int_ty(32))};
        break;
      case 3:
        inst.op = Opcode::fptosi;
        inst.type = Type::int_ty(32);
        inst.operands = {operand_of(pools, Type::float_ty(32))};
        break;
      default:
        inst.op = Opcode::bitcast;
        inst.type = Type::float_ty(32);
        inst.operands = {operand_of(pools, Type::int_ty(32))};
        break;
      }
      pools.add(inst.result, inst.type);
      out.push_back(std::move(inst));
      return;
    }
    case 6: { // getelementptr + load
      if (pools.ptrs.empty())
        return;
      const auto &[pname, pty] = rng_.pick(pools.ptrs);
      Instruction gep;
      gep.op = Opcode::getelementptr;
      gep.inbounds = rng_.chance(60);
      gep.pointee = pty->elem;
      gep.result = pools.fresh();
      gep.type = Type::pointer_to(pty->elem, pty->addr_space);
      gep.operands = {Value::reg(pname, pty),
                      operand_of(pools, Type::int_ty(64))};
      Instruction ld;
      ld.op = Opcode::load;
      ld.type = pty->elem;
      ld.result = pools.fresh();
      ld.operands = {Value::reg(gep.result, gep.type)};
      if (rng_.chance(60))
        ld.align = pty->elem->store_size();
      pools.add(ld.result, ld.type);
      out.push_back(std::move(gep));
      out.push_back(std::move(ld));
      return;
    }
    case 7: { // store through a parameter pointer
      if (pools.ptrs.empty())
        return;
      const auto &[pname, pty] = rng_.pick(pools.ptrs);
      Instruction st;
      st.op = Opcode::store;
      st.type = pty->elem;
      st.is_volatile = rng_.chance(10);
      st.operands = {operand_of(pools, pty->elem), Value::reg(pname, pty)};
      if (rng_.chance(60))
        st.align = pty->elem->store_size();
      out.push_back(std::move(st));
      return;
    }
    case 8: { // alloca + store + load
      TypeRef t = scalar_type();
      Instruction al;
      al.op = Opcode::alloca;
      al.pointee = t;
      al.type = Type::pointer_to(t);
      al.result = pools.fresh();
      al.align = t->store_size();
      Instruction st;
      st.op = Opcode::store;
      st.type = t;
      st.operands = {operand_of(pools, t), Value::reg(al.result, al.type)};
      Instruction ld;
      ld.op = Opcode::load;
      ld.type = t;
      ld.result = pools.fresh();
      ld.operands = {Value::reg(al.result, al.type)};
      pools.add(ld.result, t);
      out.push_back(std::move(al));
      out.push_back(std::move(st));
      out.push_back(std::move(ld));
      return;
    }
    default: { // integer binop fallback
      TypeRef t = Type::int_ty(32);
      Instruction inst;
      inst.op = Opcode::add;
      inst.type = t;
      inst.result = pools.fresh();
      inst.operands = {operand_of(pools, t), operand_of(pools, t)};
      pools.add(inst.result, t);
      out.push_back(std::move(inst));
      return;
    }
    }
  }

  void add_definition(Module &m, int i, bool opencl) {
    Function f;
    f.name = "fn" + std::to_string(i);
    f.ret = Type::void_ty();
    f.dso_local = !opencl && rng_.chance(50);
    bool kernel = rng_.chance(70);
    if (opencl && kernel)
      f.cconv = CallConv::spir_kernel;

    Pools pools;
    int nparams = rng_.range(0, 4);
    for (int p = 0; p < nparams; ++p) {
      TypeRef t;
      if (rng_.chance(50))
        t = Type::pointer_to(scalar_type(),
                             kernel && rng_.chance(50)
                                 ? AddressSpace::Global
                                 : AddressSpace::Private);
      else
        t = scalar_type();
      Param prm{"p" + std::to_string(p), t, random_param_attrs()};
      pools.add(prm.name, t);
      f.params.push_back(std::move(prm));
    }

    std::vector<Instruction> entry;
    int n = rng_.range(1, 12);
    for (int k = 0; k < n; ++k)
      random_instruction(pools, entry);

    if (rng_.chance(35) && !pools.i1s.empty()) {
      // Diamond with a phi at the join over entry-defined values.
      TypeRef t = Type::int_ty(32);
      Value a = operand_of(pools, t);
      Value b = operand_of(pools, t);
      const auto &[cname, cty] = rng_.pick(pools.i1s);
      Instruction br;
      br.op = Opcode::br;
      br.operands = {Value::reg(cname, cty)};
      br.labels = {"left", "right"};
      entry.push_back(std::move(br));
      f.blocks.push_back({"entry", std::move(entry)});

      std::vector<Instruction> left, right;
      random_instruction(pools, left);
      Instruction jl;
      jl.op = Opcode::br;
      jl.labels = {"join"};
      left.push_back(jl);
      if (left.size() < 2) {
        left.clear();
        left.push_back(jl);
      }
      right.push_back(jl); // right: immediate jump
      f.blocks.push_back({"left", std::move(left)});
      f.blocks.push_back({"right", std::move(right)});

      std::vector<Instruction> join;
      Instruction phi;
      phi.op = Opcode::phi;
      phi.type = t;
      phi.result = pools.fresh();
      phi.operands = {a, b};
      phi.labels = {"left", "right"};
      join.push_back(std::move(phi));
      Instruction rv;
      rv.op = Opcode::ret;
      rv.type = Type::void_ty();
      join.push_back(std::move(rv));
      f.blocks.push_back({"join", std::move(join)});
    } else {
      Instruction rv;
      rv.op = Opcode::ret;
      rv.type = Type::void_ty();
      entry.push_back(std::move(rv));
      f.blocks.push_back({"entry", std::move(entry)});
    }

    f.is_kernel = kernel;
    m.functions.push_back(std::move(f));
    Function &placed = m.functions.back();

    if (kernel && !opencl) {
      MetadataNode n;
      n.elems = {MetadataElem::func_elem(
                     placed.name, Type::pointer_to(placed.function_type())),
                 MetadataElem::str_elem("kernel"), MetadataElem::int_elem(1)};
      std::string id = m.add_node(std::move(n));
      auto *ids = m.find_named_metadata("nvvm.annotations");
      std::vector<std::string> list = ids ? *ids : std::vector<std::string>{};
      list.push_back(id);
      m.set_named_metadata("nvvm.annotations", std::move(list));
    }
    if (kernel && opencl) {
      MetadataNode spaces, types;
      for (const auto &p : placed.params) {
        spaces.elems.push_back(
            MetadataElem::int_elem(p.type->is_pointer() ? 1 : 0));
        types.elems.push_back(MetadataElem::str_elem("int"));
      }
      placed.metadata["kernel_arg_addr_space"] = m.add_node(std::move(spaces));
      placed.metadata["kernel_arg_type"] = m.add_node(std::move(types));
    }
  }

  void add_extra_metadata(Module &m) {
    MetadataNode inner;
    inner.elems = {MetadataElem::str_elem("generated"),
                   MetadataElem::int_elem(rng_.range(0, 99))};
    std::string inner_id = m.add_node(std::move(inner));
    MetadataNode outer;
    outer.elems = {MetadataElem::node_elem(inner_id),
                   MetadataElem::int_elem(rng_.range(0, 9))};
    std::string outer_id = m.add_node(std::move(outer));
    m.set_named_metadata(rng_.chance(50) ? "llvm.ident" : "vendor.notes",
                         {outer_id});
  }
};

inline Module random_module(uint64_t seed) {
  return ModuleGenerator(seed).generate();
}

// ---------------------------------------------------------------------
// Device-independent modules for the passthrough property: NVVM dialect,
// no calls, no atomics.
// ---------------------------------------------------------------------

Module random_passthrough_module(uint64_t seed);

// ---------------------------------------------------------------------
// Elementwise kernels plus an independent reference evaluator.
// ---------------------------------------------------------------------

struct EwOp {
  enum class Kind {
    add, sub, mul, and_, or_, xor_, shl, lshr, ashr, // int
    fadd, fsub, fmul, fdiv, sqrt, fabs, fma,         // float
    select_lt,                                       // via icmp/fcmp
    imm,
  };
  Kind kind;
  int lhs = 0, rhs = 0, third = 0;
  int shift = 0;
  uint64_t imm = 0; // bit pattern at the kernel's element width
};

struct EwKernel {
  Module module;
  std::string name = "ew";
  TypeRef elem;            // i32, f32 or f64
  std::vector<EwOp> ops;   // slots 0 = a[i], 1 = b[i], then one per op
  int result_slot = 0;

  // Replays the op list on one element pair with the interpreter's exact
  // scalar semantics; this path shares no code with the interpreter.
  uint64_t reference_eval(uint64_t a_bits, uint64_t b_bits) const;
};

EwKernel random_elementwise_kernel(uint64_t seed);

// Kernel indexing out[gid + extent] for the bounds-safety property.
Module oob_probe_module(uint64_t seed, int extent);

} // namespace gpuir::testing

#endif // GPUIR_TESTS_GENERATORS_HPP
