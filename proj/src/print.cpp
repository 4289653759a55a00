// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#include "gpuir/print.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace gpuir {

namespace {

std::string float_text(const Value &v) {
  double d = v.as_float();
  if (std::isfinite(d)) {
    char buf[64];
    std::to_chars_result r;
    if (v.type->bits == 32)
      r = std::to_chars(buf, buf + sizeof buf, float(d));
    else
      r = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, r.ptr);
  }
  // Non-finite values print as raw bit patterns.
  char buf[32];
  if (v.type->bits == 32)
    std::snprintf(buf, sizeof buf, "0x%08llX",
                  (unsigned long long)(v.bits & 0xffffffffull));
  else
    std::snprintf(buf, sizeof buf, "0x%016llX", (unsigned long long)v.bits);
  return buf;
}

std::string value_text(const Value &v) {
  switch (v.kind) {
  case Value::Kind::Register:
    return "%" + v.name;
  case Value::Kind::GlobalRef:
    return "@" + v.name;
  case Value::Kind::IntConst:
    return std::to_string(v.as_signed());
  case Value::Kind::FloatConst:
    return float_text(v);
  case Value::Kind::Undef:
    return "undef";
  }
  return "?";
}

std::string typed_value_text(const Value &v) {
  return type_text(v.type) + " " + value_text(v);
}

std::string instruction_text(const Instruction &inst, const Module *m) {
  std::string s;
  if (inst.has_result())
    s += "%" + inst.result + " = ";
  s += opcode_text(inst.op);

  auto align_suffix = [&]() {
    if (inst.align)
      s += ", align " + std::to_string(inst.align);
  };

  switch (inst.op) {
  case Opcode::add:
  case Opcode::sub:
  case Opcode::mul:
    if (inst.nuw)
      s += " nuw";
    if (inst.nsw)
      s += " nsw";
    [[fallthrough]];
  case Opcode::sdiv:
  case Opcode::udiv:
  case Opcode::and_:
  case Opcode::or_:
  case Opcode::xor_:
  case Opcode::shl:
  case Opcode::lshr:
  case Opcode::ashr:
  case Opcode::fadd:
  case Opcode::fsub:
  case Opcode::fmul:
  case Opcode::fdiv:
    s += " " + type_text(inst.type) + " " + value_text(inst.operands[0]) +
         ", " + value_text(inst.operands[1]);
    break;
  case Opcode::icmp:
    s += std::string(" ") + icmp_text(inst.ipred) + " " +
         typed_value_text(inst.operands[0]) + ", " +
         value_text(inst.operands[1]);
    break;
  case Opcode::fcmp:
    s += std::string(" ") + fcmp_text(inst.fpred) + " " +
         typed_value_text(inst.operands[0]) + ", " +
         value_text(inst.operands[1]);
    break;
  case Opcode::load:
    if (inst.is_volatile)
      s += " volatile";
    s += " " + type_text(inst.type) + ", " +
         typed_value_text(inst.operands[0]);
    align_suffix();
    break;
  case Opcode::store:
    if (inst.is_volatile)
      s += " volatile";
    s += " " + typed_value_text(inst.operands[0]) + ", " +
         typed_value_text(inst.operands[1]);
    align_suffix();
    break;
  case Opcode::getelementptr: {
    if (inst.inbounds)
      s += " inbounds";
    s += " " + type_text(inst.pointee);
    for (const auto &op : inst.operands)
      s += ", " + typed_value_text(op);
    break;
  }
  case Opcode::call: {
    if (m) {
      const Function *callee = m->find_function(inst.callee);
      if (callee && callee->cconv == CallConv::spir_func)
        s += " spir_func";
    }
    s += " " + type_text(inst.type) + " @" + inst.callee + "(";
    for (size_t i = 0; i < inst.operands.size(); ++i) {
      if (i)
        s += ", ";
      s += typed_value_text(inst.operands[i]);
    }
    s += ")";
    break;
  }
  case Opcode::atomicrmw:
    if (inst.is_volatile)
      s += " volatile";
    s += std::string(" ") + atomic_op_text(inst.rmw) + " " +
         typed_value_text(inst.operands[0]) + ", " +
         typed_value_text(inst.operands[1]) + " seq_cst";
    break;
  case Opcode::select:
    s += " " + typed_value_text(inst.operands[0]) + ", " +
         typed_value_text(inst.operands[1]) + ", " +
         typed_value_text(inst.operands[2]);
    break;
  case Opcode::phi: {
    s += " " + type_text(inst.type) + " ";
    for (size_t i = 0; i < inst.operands.size(); ++i) {
      if (i)
        s += ", ";
      s += "[ " + value_text(inst.operands[i]) + ", %" + inst.labels[i] +
           " ]";
    }
    break;
  }
  case Opcode::br:
    if (inst.labels.size() == 1) {
      s += " label %" + inst.labels[0];
    } else {
      s += " " + typed_value_text(inst.operands[0]) + ", label %" +
           inst.labels[0] + ", label %" + inst.labels[1];
    }
    break;
  case Opcode::ret:
    if (inst.operands.empty())
      s += " void";
    else
      s += " " + typed_value_text(inst.operands[0]);
    break;
  case Opcode::sext:
  case Opcode::zext:
  case Opcode::trunc:
  case Opcode::fptosi:
  case Opcode::sitofp:
  case Opcode::bitcast:
    s += " " + typed_value_text(inst.operands[0]) + " to " +
         type_text(inst.type);
    break;
  case Opcode::extractelement:
    s += " " + typed_value_text(inst.operands[0]) + ", " +
         typed_value_text(inst.operands[1]);
    break;
  case Opcode::alloca:
    s += " " + type_text(inst.pointee);
    align_suffix();
    break;
  }
  return s;
}

// Dense renumbering in order of first textual appearance: function-attached
// references first, then named metadata lists, then references discovered
// inside node bodies.
class MetadataNumbering {
public:
  explicit MetadataNumbering(const Module &m) : m_(m) {
    for (const auto &f : m.functions)
      for (const auto &[kind, id] : f.metadata)
        assign(id);
    for (const auto &[name, ids] : m.named_metadata)
      for (const auto &id : ids)
        assign(id);
    // Chase node-internal references breadth-first in assigned order.
    for (size_t i = 0; i < order_.size(); ++i) {
      const MetadataNode *n = m.find_node(order_[i]);
      if (!n)
        continue;
      for (const auto &e : n->elems)
        if (e.kind == MetadataElem::Kind::NodeRef)
          assign(e.str);
    }
  }

  std::string number(const std::string &id) const {
    auto it = map_.find(id);
    return it == map_.end() ? id : std::to_string(it->second);
  }

  const std::vector<std::string> &order() const { return order_; }

private:
  void assign(const std::string &id) {
    if (map_.emplace(id, int(order_.size())).second)
      order_.push_back(id);
  }

  const Module &m_;
  std::map<std::string, int> map_;
  std::vector<std::string> order_;
};

std::string metadata_elem_text(const MetadataElem &e,
                               const MetadataNumbering &num) {
  switch (e.kind) {
  case MetadataElem::Kind::Str: {
    std::string s = "!\"";
    for (char c : e.str) {
      if (c == '"' || c == '\\' || unsigned(c) < 0x20) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "\\%02X", unsigned(c) & 0xff);
        s += buf;
      } else {
        s += c;
      }
    }
    return s + "\"";
  }
  case MetadataElem::Kind::Int:
    return "i32 " + std::to_string(e.num);
  case MetadataElem::Kind::FuncRef:
    return type_text(e.func_type) + " @" + e.str;
  case MetadataElem::Kind::NodeRef:
    return "!" + num.number(e.str);
  }
  return "";
}

std::string global_text(const GlobalVariable &g) {
  std::string s = "@" + g.name + " = ";
  if (g.init == GlobalVariable::Init::External)
    s += "external ";
  if (g.internal)
    s += "internal ";
  if (g.space != AddressSpace::Global)
    s += "addrspace(" + std::to_string(int(g.space)) + ") ";
  s += "global " + type_text(g.type);
  switch (g.init) {
  case GlobalVariable::Init::External:
    break;
  case GlobalVariable::Init::Zero:
    s += " zeroinitializer";
    break;
  case GlobalVariable::Init::Scalar:
    s += " " + value_text(g.init_val);
    break;
  }
  return s;
}

std::string signature_text(const Function &f, const MetadataNumbering *num) {
  std::string s;
  s += f.is_declaration() ? "declare" : "define";
  if (f.dso_local)
    s += " dso_local";
  if (f.cconv == CallConv::spir_kernel)
    s += " spir_kernel";
  else if (f.cconv == CallConv::spir_func)
    s += " spir_func";
  s += " " + type_text(f.ret) + " @" + f.name + "(";
  for (size_t i = 0; i < f.params.size(); ++i) {
    if (i)
      s += ", ";
    const Param &p = f.params[i];
    s += type_text(p.type);
    for (const auto &a : p.attrs)
      s += " " + a;
    if (!f.is_declaration())
      s += " %" + p.name;
  }
  s += ")";
  if (!f.is_declaration() && num)
    for (const auto &[kind, id] : f.metadata)
      s += " !" + kind + " !" + num->number(id);
  return s;
}

std::string print_ll(const Module &m) {
  MetadataNumbering num(m);
  std::string out = "target triple = \"" + m.target_triple + "\"\n";

  if (!m.globals.empty()) {
    out += "\n";
    for (const auto &g : m.globals)
      out += global_text(g) + "\n";
  }

  for (const auto &f : m.functions) {
    out += "\n";
    if (f.is_declaration()) {
      out += signature_text(f, nullptr) + "\n";
      continue;
    }
    out += signature_text(f, &num) + " {\n";
    for (const auto &b : f.blocks) {
      out += b.label + ":\n";
      for (const auto &inst : b.insts)
        out += "  " + instruction_text(inst, &m) + "\n";
    }
    out += "}\n";
  }

  if (!m.named_metadata.empty()) {
    out += "\n";
    for (const auto &[name, ids] : m.named_metadata) {
      out += "!" + name + " = !{";
      for (size_t i = 0; i < ids.size(); ++i) {
        if (i)
          out += ", ";
        out += "!" + num.number(ids[i]);
      }
      out += "}\n";
    }
  }

  if (!num.order().empty()) {
    out += "\n";
    for (size_t i = 0; i < num.order().size(); ++i) {
      const MetadataNode *n = m.find_node(num.order()[i]);
      out += "!" + std::to_string(i) + " = !{";
      if (n) {
        for (size_t j = 0; j < n->elems.size(); ++j) {
          if (j)
            out += ", ";
          out += metadata_elem_text(n->elems[j], num);
        }
      }
      out += "}\n";
    }
  }
  return out;
}

std::string print_spirv_dump(const Module &m) {
  MetadataNumbering num(m);
  std::string out;
  out += "; spirv-dialect dump (not reparseable)\n";
  out += "; target triple: " + m.target_triple + "\n";
  if (!m.globals.empty()) {
    out += "\n; module globals\n";
    for (const auto &g : m.globals)
      out += "; " + global_text(g) + "\n";
  }
  for (const auto &f : m.functions) {
    out += "\n";
    if (f.is_declaration()) {
      out += "; " + signature_text(f, nullptr) + "\n";
      continue;
    }
    out += (f.is_kernel ? "kernel " : "func ") + type_text(f.ret) + " @" +
           f.name + "(";
    for (size_t i = 0; i < f.params.size(); ++i) {
      if (i)
        out += ", ";
      out += type_text(f.params[i].type) + " %" + f.params[i].name;
    }
    out += ")\n";
    for (const auto &[kind, id] : f.metadata) {
      const MetadataNode *n = m.find_node(id);
      out += ";   !" + kind + " = {";
      if (n)
        for (size_t j = 0; j < n->elems.size(); ++j) {
          if (j)
            out += ", ";
          out += metadata_elem_text(n->elems[j], num);
        }
      out += "}\n";
    }
    for (const auto &b : f.blocks) {
      out += b.label + ":\n";
      for (const auto &inst : b.insts)
        out += "  " + instruction_text(inst, &m) + "\n";
    }
  }
  return out;
}

} // namespace

std::string print_module(const Module &m) {
  if (m.dialect == Dialect::SPIRV)
    return print_spirv_dump(m);
  return print_ll(m);
}

std::string print_instruction(const Instruction &inst, const Module *m) {
  return instruction_text(inst, m);
}

std::string print_typed_value(const Value &v) { return typed_value_text(v); }

} // namespace gpuir
