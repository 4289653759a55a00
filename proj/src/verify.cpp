// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#include "gpuir/verify.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace gpuir {

std::string Diagnostic::to_string() const {
  std::string s;
  if (!function.empty()) {
    s += "@" + function;
    if (!block.empty())
      s += ":" + block;
    if (inst_index >= 0)
      s += "#" + std::to_string(inst_index);
    s += ": ";
  }
  return s + message;
}

namespace {

class Verifier {
public:
  explicit Verifier(const Module &m) : m_(m) {}

  std::vector<Diagnostic> run() {
    check_module_shape();
    check_metadata();
    for (const auto &f : m_.functions)
      check_function(f);
    check_dialect_invariants();
    return std::move(diags_);
  }

private:
  const Module &m_;
  std::vector<Diagnostic> diags_;

  void module_error(std::string msg) {
    diags_.push_back({"", "", -1, std::move(msg)});
  }

  void fn_error(const Function &f, std::string msg) {
    diags_.push_back({f.name, "", -1, std::move(msg)});
  }

  void inst_error(const Function &f, const BasicBlock &b, int idx,
                  std::string msg) {
    diags_.push_back({f.name, b.label, idx, std::move(msg)});
  }

  // ---- types ---------------------------------------------------------

  bool valid_type(const TypeRef &t, bool allow_void = false) {
    if (!t)
      return false;
    switch (t->kind) {
    case Type::Kind::Void:
      return allow_void;
    case Type::Kind::Int:
      return t->bits == 1 || t->bits == 8 || t->bits == 16 || t->bits == 32 ||
             t->bits == 64;
    case Type::Kind::Float:
      return t->bits == 32 || t->bits == 64;
    case Type::Kind::Pointer:
      return t->elem && !t->elem->is_void() && valid_type(t->elem);
    case Type::Kind::Vector:
      return t->count >= 2 && t->count <= 4 && t->elem &&
             t->elem->is_scalar() && valid_type(t->elem);
    case Type::Kind::Array:
      return t->count >= 1 && t->elem &&
             (t->elem->is_scalar() || t->elem->is_vector()) &&
             valid_type(t->elem);
    case Type::Kind::Function: {
      if (!valid_type(t->elem, /*allow_void=*/true))
        return false;
      return std::all_of(t->params.begin(), t->params.end(),
                         [&](const TypeRef &p) { return valid_type(p); });
    }
    }
    return false;
  }

  static bool is_int_or_int_vector(const TypeRef &t) {
    return t && (t->is_int() || (t->is_vector() && t->elem->is_int()));
  }

  static bool is_float_or_float_vector(const TypeRef &t) {
    return t && (t->is_float() || (t->is_vector() && t->elem->is_float()));
  }

  // ---- module shape ---------------------------------------------------

  void check_module_shape() {
    std::set<std::string> names;
    for (const auto &g : m_.globals) {
      if (!names.insert(g.name).second)
        module_error("duplicate global @" + g.name);
      if (!valid_type(g.type) || g.type->is_function() || g.type->is_void())
        module_error("global @" + g.name + " has invalid type " +
                     type_text(g.type));
      if (g.init == GlobalVariable::Init::Scalar &&
          !type_equal(g.init_val.type, g.type))
        module_error("global @" + g.name + " initializer type mismatch");
    }
    for (const auto &f : m_.functions) {
      if (!names.insert(f.name).second)
        module_error("duplicate symbol @" + f.name);
    }
  }

  // ---- metadata -------------------------------------------------------

  void check_metadata() {
    std::set<std::string> seen_names;
    for (const auto &[name, ids] : m_.named_metadata) {
      if (!seen_names.insert(name).second)
        module_error("duplicate named metadata !" + name);
      for (const auto &id : ids)
        if (!m_.find_node(id))
          module_error("named metadata !" + name +
                       " references unknown node !" + id);
    }
    for (const auto &f : m_.functions) {
      for (const auto &[kind, id] : f.metadata)
        if (!m_.find_node(id))
          fn_error(f, "attached metadata !" + kind +
                          " references unknown node !" + id);
    }
    for (const auto &[id, node] : m_.metadata_nodes) {
      for (const auto &e : node.elems) {
        if (e.kind == MetadataElem::Kind::NodeRef && !m_.find_node(e.str))
          module_error("metadata node !" + id + " references unknown node !" +
                       e.str);
        if (e.kind == MetadataElem::Kind::FuncRef) {
          const Function *fn = m_.find_function(e.str);
          if (!fn) {
            module_error("metadata node !" + id +
                         " references unknown function @" + e.str);
          } else if (e.func_type &&
                     !type_equal(e.func_type,
                                 Type::pointer_to(fn->function_type()))) {
            module_error("metadata node !" + id + " function reference @" +
                         e.str + " has mismatched type");
          }
        }
      }
    }
    check_metadata_acyclic();
  }

  void check_metadata_acyclic() {
    enum State { White, Grey, Black };
    std::map<std::string, State> state;
    bool cyclic = false;
    std::function<void(const std::string &)> visit =
        [&](const std::string &id) {
          auto &st = state[id];
          if (st == Grey) {
            cyclic = true;
            return;
          }
          if (st == Black)
            return;
          st = Grey;
          if (const MetadataNode *n = m_.find_node(id))
            for (const auto &e : n->elems)
              if (e.kind == MetadataElem::Kind::NodeRef)
                visit(e.str);
          state[id] = Black;
        };
    for (const auto &[id, node] : m_.metadata_nodes)
      visit(id);
    if (cyclic)
      module_error("metadata graph contains a cycle");
  }

  // ---- functions ------------------------------------------------------

  void check_function(const Function &f) {
    if (!valid_type(f.ret, /*allow_void=*/true))
      fn_error(f, "invalid return type");
    if (f.is_kernel && !f.ret->is_void())
      fn_error(f, "kernel does not return void");
    std::set<std::string> regs;
    for (const auto &p : f.params) {
      if (!valid_type(p.type))
        fn_error(f, "parameter %" + p.name + " has invalid type");
      if (!p.name.empty() && !regs.insert(p.name).second)
        fn_error(f, "duplicate register %" + p.name);
      if (f.is_kernel && p.type->is_pointer() && p.type->elem->is_function())
        fn_error(f, "kernel parameter %" + p.name +
                        " is a function pointer");
    }
    if (f.is_declaration())
      return;

    std::set<std::string> labels;
    for (const auto &b : f.blocks) {
      if (!labels.insert(b.label).second)
        fn_error(f, "duplicate block label " + b.label);
      if (b.insts.empty()) {
        fn_error(f, "block " + b.label + " is empty");
        continue;
      }
      for (size_t i = 0; i < b.insts.size(); ++i) {
        bool last = i + 1 == b.insts.size();
        if (is_terminator(b.insts[i].op) != last) {
          inst_error(f, b, int(i),
                     last ? "block " + b.label + " lacks a terminator"
                          : "terminator in the middle of block " + b.label);
        }
      }
    }

    // Register definitions must be unique across params and results.
    struct Def {
      int block;
      int index;
      TypeRef type;
    };
    std::unordered_map<std::string, Def> defs;
    for (const auto &p : f.params)
      defs[p.name] = {-1, -1, p.type};
    for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
      const auto &b = f.blocks[bi];
      for (size_t i = 0; i < b.insts.size(); ++i) {
        const Instruction &inst = b.insts[i];
        if (inst.has_result()) {
          if (defs.count(inst.result))
            inst_error(f, b, int(i), "duplicate register %" + inst.result);
          else
            defs[inst.result] = {int(bi), int(i), inst.type};
        }
      }
    }

    check_dataflow(f, defs);

    for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
      const auto &b = f.blocks[bi];
      for (size_t i = 0; i < b.insts.size(); ++i)
        check_instruction(f, b, int(i), b.insts[i]);
    }
  }

  template <typename DefMap>
  void check_dataflow(const Function &f, const DefMap &defs) {
    size_t nblocks = f.blocks.size();
    std::map<std::string, int> block_index;
    for (size_t i = 0; i < nblocks; ++i)
      block_index[f.blocks[i].label] = int(i);

    std::vector<std::vector<int>> preds(nblocks);
    for (size_t bi = 0; bi < nblocks; ++bi) {
      if (f.blocks[bi].insts.empty())
        continue;
      const Instruction &term = f.blocks[bi].insts.back();
      if (term.op == Opcode::br)
        for (const auto &l : term.labels) {
          auto it = block_index.find(l);
          if (it != block_index.end())
            preds[it->second].push_back(int(bi));
        }
    }

    // Reachability plus iterative dominator sets over reverse post order.
    std::vector<bool> reachable(nblocks, false);
    std::vector<int> rpo;
    {
      std::vector<int> state(nblocks, 0);
      std::function<void(int)> dfs = [&](int b) {
        if (state[b])
          return;
        state[b] = 1;
        reachable[b] = true;
        const auto &insts = f.blocks[b].insts;
        if (!insts.empty() && insts.back().op == Opcode::br)
          for (const auto &l : insts.back().labels) {
            auto it = block_index.find(l);
            if (it != block_index.end())
              dfs(it->second);
          }
        rpo.push_back(b);
      };
      if (nblocks)
        dfs(0);
      std::reverse(rpo.begin(), rpo.end());
    }

    std::vector<std::vector<bool>> dom(nblocks,
                                       std::vector<bool>(nblocks, true));
    if (nblocks) {
      dom[0].assign(nblocks, false);
      dom[0][0] = true;
      bool changed = true;
      while (changed) {
        changed = false;
        for (int b : rpo) {
          if (b == 0)
            continue;
          std::vector<bool> nd(nblocks, true);
          bool any = false;
          for (int p : preds[b]) {
            if (!reachable[p])
              continue;
            any = true;
            for (size_t k = 0; k < nblocks; ++k)
              nd[k] = nd[k] && dom[p][k];
          }
          if (!any)
            nd.assign(nblocks, false);
          nd[b] = true;
          if (nd != dom[b]) {
            dom[b] = std::move(nd);
            changed = true;
          }
        }
      }
    }

    auto dominates = [&](int def_block, int def_index, int use_block,
                         int use_index) {
      if (def_block == -1)
        return true; // parameter
      if (def_block == use_block)
        return def_index < use_index;
      return bool(dom[use_block][def_block]);
    };

    for (size_t bi = 0; bi < nblocks; ++bi) {
      const auto &b = f.blocks[bi];
      if (!reachable[bi])
        continue;
      for (size_t i = 0; i < b.insts.size(); ++i) {
        const Instruction &inst = b.insts[i];
        for (size_t oi = 0; oi < inst.operands.size(); ++oi) {
          const Value &v = inst.operands[oi];
          if (!v.is_reg())
            continue;
          auto it = defs.find(v.name);
          if (it == defs.end()) {
            inst_error(f, b, int(i), "use of undefined register %" + v.name);
            continue;
          }
          const auto &d = it->second;
          if (inst.op == Opcode::phi) {
            // The incoming value must dominate the end of its source block.
            if (oi < inst.labels.size()) {
              auto lit = block_index.find(inst.labels[oi]);
              if (lit != block_index.end() && d.block != -1 &&
                  !(d.block == lit->second ||
                    (reachable[lit->second] && dom[lit->second][d.block])))
                inst_error(f, b, int(i),
                           "phi incoming %" + v.name +
                               " does not dominate predecessor " +
                               inst.labels[oi]);
            }
            continue;
          }
          if (!dominates(d.block, d.index, int(bi), int(i)))
            inst_error(f, b, int(i),
                       "register %" + v.name + " does not dominate its use");
          if (!type_equal(v.type, d.type))
            inst_error(f, b, int(i),
                       "register %" + v.name + " used at type " +
                           type_text(v.type) + " but defined as " +
                           type_text(d.type));
        }
      }
    }

    // Branch targets and phi incoming lists.
    for (size_t bi = 0; bi < nblocks; ++bi) {
      const auto &b = f.blocks[bi];
      for (size_t i = 0; i < b.insts.size(); ++i) {
        const Instruction &inst = b.insts[i];
        if (inst.op == Opcode::br) {
          for (const auto &l : inst.labels)
            if (!block_index.count(l))
              inst_error(f, b, int(i), "branch to unknown block " + l);
        } else if (inst.op == Opcode::phi) {
          std::set<std::string> incoming(inst.labels.begin(),
                                         inst.labels.end());
          if (incoming.size() != inst.labels.size())
            inst_error(f, b, int(i), "phi lists a predecessor twice");
          std::set<std::string> expect;
          for (int p : preds[bi])
            expect.insert(f.blocks[p].label);
          if (incoming != expect)
            inst_error(f, b, int(i),
                       "phi incoming blocks do not match predecessors");
        }
      }
    }
  }

  void check_instruction(const Function &f, const BasicBlock &b, int idx,
                         const Instruction &inst) {
    auto err = [&](std::string msg) { inst_error(f, b, idx, std::move(msg)); };
    auto operand_count = [&](size_t n) {
      if (inst.operands.size() != n) {
        err(std::string(opcode_text(inst.op)) + " expects " +
            std::to_string(n) + " operands");
        return false;
      }
      return true;
    };

    for (const auto &v : inst.operands) {
      if (!v.type || !valid_type(v.type, v.type && v.type->is_void())) {
        err("operand with invalid type");
        return;
      }
      if (v.kind == Value::Kind::GlobalRef) {
        const GlobalVariable *g = m_.find_global(v.name);
        if (!g) {
          err("reference to unknown global @" + v.name);
          return;
        }
        if (!type_equal(v.type, Type::pointer_to(g->type, g->space)))
          err("global @" + v.name + " referenced at wrong type");
      }
    }

    bool value_op = true;
    switch (inst.op) {
    case Opcode::add:
    case Opcode::sub:
    case Opcode::mul:
    case Opcode::sdiv:
    case Opcode::udiv:
    case Opcode::and_:
    case Opcode::or_:
    case Opcode::xor_:
    case Opcode::shl:
    case Opcode::lshr:
    case Opcode::ashr:
      if (!is_int_or_int_vector(inst.type))
        err(std::string(opcode_text(inst.op)) + " requires integer type");
      if (operand_count(2))
        for (const auto &v : inst.operands)
          if (!type_equal(v.type, inst.type))
            err("operand type mismatch");
      break;
    case Opcode::fadd:
    case Opcode::fsub:
    case Opcode::fmul:
    case Opcode::fdiv:
      if (!is_float_or_float_vector(inst.type))
        err(std::string(opcode_text(inst.op)) + " requires float type");
      if (operand_count(2))
        for (const auto &v : inst.operands)
          if (!type_equal(v.type, inst.type))
            err("operand type mismatch");
      break;
    case Opcode::icmp:
      if (operand_count(2)) {
        if (!inst.operands[0].type->is_int())
          err("icmp requires integer operands");
        if (!type_equal(inst.operands[0].type, inst.operands[1].type))
          err("icmp operand type mismatch");
      }
      if (!inst.type->is_int(1))
        err("icmp result must be i1");
      break;
    case Opcode::fcmp:
      if (operand_count(2)) {
        if (!inst.operands[0].type->is_float())
          err("fcmp requires float operands");
        if (!type_equal(inst.operands[0].type, inst.operands[1].type))
          err("fcmp operand type mismatch");
      }
      if (!inst.type->is_int(1))
        err("fcmp result must be i1");
      break;
    case Opcode::load:
      if (operand_count(1)) {
        const TypeRef &pt = inst.operands[0].type;
        if (!pt->is_pointer() || !type_equal(pt->elem, inst.type))
          err("load pointer/result type mismatch");
      }
      if (!inst.type->is_scalar() && !inst.type->is_vector())
        err("load of non-scalar type");
      break;
    case Opcode::store:
      value_op = false;
      if (operand_count(2)) {
        const TypeRef &vt = inst.operands[0].type;
        const TypeRef &pt = inst.operands[1].type;
        if (!type_equal(vt, inst.type))
          err("store value type mismatch");
        if (!pt->is_pointer() || !type_equal(pt->elem, vt))
          err("store pointer type mismatch");
        if (!vt->is_scalar() && !vt->is_vector())
          err("store of non-scalar type");
      }
      break;
    case Opcode::getelementptr: {
      if (inst.operands.size() < 2 || inst.operands.size() > 3) {
        err("getelementptr expects one or two indices");
        break;
      }
      const TypeRef &base = inst.operands[0].type;
      if (!base->is_pointer() || !type_equal(base->elem, inst.pointee)) {
        err("getelementptr base type mismatch");
        break;
      }
      for (size_t i = 1; i < inst.operands.size(); ++i) {
        const TypeRef &it = inst.operands[i].type;
        if (!it->is_int() || (it->bits != 32 && it->bits != 64))
          err("getelementptr index must be i32 or i64");
      }
      TypeRef elem = inst.pointee;
      if (inst.operands.size() == 3) {
        if (!elem->is_array()) {
          err("two-index getelementptr requires an array source type");
          break;
        }
        elem = elem->elem;
      }
      if (!type_equal(inst.type, Type::pointer_to(elem, base->addr_space)))
        err("getelementptr result type mismatch");
      break;
    }
    case Opcode::call: {
      const Function *callee = m_.find_function(inst.callee);
      if (!callee) {
        err("call to unknown function @" + inst.callee);
        break;
      }
      if (!type_equal(callee->ret, inst.type))
        err("call result type does not match @" + inst.callee);
      if (inst.operands.size() != callee->params.size()) {
        err("call argument count does not match @" + inst.callee);
        break;
      }
      for (size_t i = 0; i < inst.operands.size(); ++i)
        if (!type_equal(inst.operands[i].type, callee->params[i].type))
          err("call argument " + std::to_string(i) + " type mismatch");
      if (inst.type->is_void())
        value_op = false;
      break;
    }
    case Opcode::atomicrmw:
      if (operand_count(2)) {
        const TypeRef &pt = inst.operands[0].type;
        if (!pt->is_pointer() || !pt->elem->is_int())
          err("atomicrmw requires a pointer-to-integer operand");
        else if (!type_equal(pt->elem, inst.operands[1].type))
          err("atomicrmw operand width does not match pointee");
        if (!type_equal(inst.type, inst.operands[1].type))
          err("atomicrmw result type mismatch");
      }
      break;
    case Opcode::select:
      if (operand_count(3)) {
        if (!inst.operands[0].type->is_int(1))
          err("select condition must be i1");
        if (!type_equal(inst.operands[1].type, inst.type) ||
            !type_equal(inst.operands[2].type, inst.type))
          err("select operand type mismatch");
      }
      break;
    case Opcode::phi:
      if (inst.operands.empty() || inst.operands.size() != inst.labels.size())
        err("phi operand/label count mismatch");
      for (const auto &v : inst.operands)
        if (!type_equal(v.type, inst.type))
          err("phi operand type mismatch");
      break;
    case Opcode::br:
      value_op = false;
      if (inst.labels.size() == 1) {
        if (!inst.operands.empty())
          err("unconditional br takes no operands");
      } else if (inst.labels.size() == 2) {
        if (!operand_count(1))
          break;
        if (!inst.operands[0].type->is_int(1))
          err("br condition must be i1");
      } else {
        err("br expects one or two labels");
      }
      break;
    case Opcode::ret:
      value_op = false;
      if (f.ret->is_void()) {
        if (!inst.operands.empty())
          err("ret with a value in a void function");
      } else if (!operand_count(1)) {
        break;
      } else if (!type_equal(inst.operands[0].type, f.ret)) {
        err("ret value type mismatch");
      }
      break;
    case Opcode::sext:
    case Opcode::zext:
      if (operand_count(1)) {
        if (!inst.operands[0].type->is_int() || !inst.type->is_int() ||
            inst.operands[0].type->bits >= inst.type->bits)
          err("extension must widen an integer");
      }
      break;
    case Opcode::trunc:
      if (operand_count(1)) {
        if (!inst.operands[0].type->is_int() || !inst.type->is_int() ||
            inst.operands[0].type->bits <= inst.type->bits)
          err("trunc must narrow an integer");
      }
      break;
    case Opcode::fptosi:
      if (operand_count(1)) {
        if (!inst.operands[0].type->is_float() || !inst.type->is_int())
          err("fptosi requires float operand and integer result");
      }
      break;
    case Opcode::sitofp:
      if (operand_count(1)) {
        if (!inst.operands[0].type->is_int() || !inst.type->is_float())
          err("sitofp requires integer operand and float result");
      }
      break;
    case Opcode::bitcast:
      if (operand_count(1)) {
        const TypeRef &st = inst.operands[0].type;
        bool ptrs = st->is_pointer() && inst.type->is_pointer();
        bool bits = st->is_scalar() && inst.type->is_scalar() &&
                    st->store_size() == inst.type->store_size();
        if (!ptrs && !bits)
          err("bitcast between incompatible types");
      }
      break;
    case Opcode::extractelement:
      if (operand_count(2)) {
        const TypeRef &vt = inst.operands[0].type;
        if (!vt->is_vector() || !type_equal(vt->elem, inst.type))
          err("extractelement type mismatch");
        if (!inst.operands[1].type->is_int())
          err("extractelement index must be an integer");
      }
      break;
    case Opcode::alloca:
      if (!inst.pointee ||
          !(inst.pointee->is_scalar() || inst.pointee->is_vector() ||
            inst.pointee->is_array()))
        err("alloca of invalid type");
      else if (!type_equal(inst.type, Type::pointer_to(inst.pointee)))
        err("alloca result must be a private pointer to the allocated type");
      break;
    }

    if (value_op && inst.type && !inst.type->is_void() &&
        !inst.has_result() && inst.op != Opcode::store &&
        inst.op != Opcode::br && inst.op != Opcode::ret)
      err("value-producing instruction without a result register");
    if (!value_op && inst.has_result())
      err("result register on an instruction that produces no value");
  }

  // ---- dialect invariants ----------------------------------------------

  struct KernelAnnotation {
    std::string function;
    bool valid = false;
  };

  std::vector<std::string> annotated_kernels() {
    std::vector<std::string> out;
    const auto *ids = m_.find_named_metadata("nvvm.annotations");
    if (!ids)
      return out;
    for (const auto &id : *ids) {
      const MetadataNode *n = m_.find_node(id);
      if (!n || n->elems.size() < 2)
        continue;
      if (n->elems[0].kind == MetadataElem::Kind::FuncRef &&
          n->elems[1].kind == MetadataElem::Kind::Str &&
          n->elems[1].str == "kernel")
        out.push_back(n->elems[0].str);
    }
    return out;
  }

  void check_dialect_invariants() {
    if (m_.dialect == Dialect::NVVM) {
      if (m_.target_triple != kNvvmTriple)
        module_error(std::string("NVVM module requires triple \"") +
                     kNvvmTriple + "\", found \"" + m_.target_triple + "\"");
      auto annotated = annotated_kernels();
      std::set<std::string> seen;
      for (const auto &name : annotated)
        if (!seen.insert(name).second)
          module_error("nvvm.annotations marks @" + name +
                       " as kernel more than once");
      for (const auto &f : m_.functions) {
        bool marked = seen.count(f.name) > 0;
        if (f.is_kernel != marked)
          module_error("@" + f.name + (marked
                           ? " is annotated as kernel but not flagged"
                           : " is flagged as kernel but not annotated"));
      }
    } else {
      // SPIRV and OpenCL record kernels through attached metadata.
      for (const auto &f : m_.functions) {
        if (!f.is_kernel)
          continue;
        for (const char *kind : {"kernel_arg_addr_space", "kernel_arg_type"}) {
          auto it = f.metadata.find(kind);
          if (it == f.metadata.end()) {
            fn_error(f, std::string("kernel lacks !") + kind + " metadata");
            continue;
          }
          const MetadataNode *n = m_.find_node(it->second);
          if (n && n->elems.size() != f.params.size())
            fn_error(f, std::string("!") + kind + " has " +
                            std::to_string(n->elems.size()) +
                            " entries for " +
                            std::to_string(f.params.size()) + " parameters");
        }
      }
    }
  }
};

} // namespace

std::vector<Diagnostic> verify_module(const Module &m) {
  return Verifier(m).run();
}

KernelsResult kernels_of(const Module &m) {
  KernelsResult r;
  if (m.dialect == Dialect::NVVM) {
    const auto *ids = m.find_named_metadata("nvvm.annotations");
    if (!ids)
      return r;
    for (const auto &id : *ids) {
      const MetadataNode *n = m.find_node(id);
      if (!n || n->elems.size() < 2)
        continue;
      if (n->elems[0].kind != MetadataElem::Kind::FuncRef ||
          n->elems[1].kind != MetadataElem::Kind::Str ||
          n->elems[1].str != "kernel")
        continue;
      const Function *f = m.find_function(n->elems[0].str);
      if (!f)
        r.errors.push_back({"", "", -1,
                            "nvvm.annotations references unknown function @" +
                                n->elems[0].str});
      else
        r.kernels.push_back(f);
    }
    return r;
  }
  for (const auto &f : m.functions)
    if (f.is_kernel)
      r.kernels.push_back(&f);
  return r;
}

} // namespace gpuir
