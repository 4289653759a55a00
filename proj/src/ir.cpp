// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#include "gpuir/ir.hpp"

#include <bit>
#include <cassert>
#include <cstring>
#include <unordered_map>

namespace gpuir {

namespace {

TypeRef make(Type t) { return std::make_shared<const Type>(std::move(t)); }

uint64_t mask_to_width(uint64_t v, int bits) {
  return bits >= 64 ? v : (v & ((uint64_t{1} << bits) - 1));
}

} // namespace

TypeRef Type::void_ty() {
  static TypeRef t = make(Type{});
  return t;
}

TypeRef Type::int_ty(int bits) {
  assert(bits == 1 || bits == 8 || bits == 16 || bits == 32 || bits == 64);
  Type t;
  t.kind = Kind::Int;
  t.bits = bits;
  return make(std::move(t));
}

TypeRef Type::float_ty(int bits) {
  assert(bits == 32 || bits == 64);
  Type t;
  t.kind = Kind::Float;
  t.bits = bits;
  return make(std::move(t));
}

TypeRef Type::pointer_to(TypeRef pointee, AddressSpace space) {
  Type t;
  t.kind = Kind::Pointer;
  t.elem = std::move(pointee);
  t.addr_space = space;
  return make(std::move(t));
}

TypeRef Type::vector_of(TypeRef elem, int lanes) {
  Type t;
  t.kind = Kind::Vector;
  t.elem = std::move(elem);
  t.count = lanes;
  return make(std::move(t));
}

TypeRef Type::array_of(TypeRef elem, int count) {
  Type t;
  t.kind = Kind::Array;
  t.elem = std::move(elem);
  t.count = count;
  return make(std::move(t));
}

TypeRef Type::function_ty(TypeRef ret, std::vector<TypeRef> params) {
  Type t;
  t.kind = Kind::Function;
  t.elem = std::move(ret);
  t.params = std::move(params);
  return make(std::move(t));
}

int Type::store_size() const {
  switch (kind) {
  case Kind::Void:
  case Kind::Function:
    return 0;
  case Kind::Int:
    return bits <= 8 ? 1 : bits / 8;
  case Kind::Float:
    return bits / 8;
  case Kind::Pointer:
    return 8;
  case Kind::Vector:
  case Kind::Array:
    return count * (elem ? elem->store_size() : 0);
  }
  return 0;
}

bool type_equal(const TypeRef &a, const TypeRef &b) {
  if (a == b)
    return true;
  if (!a || !b)
    return false;
  if (a->kind != b->kind)
    return false;
  switch (a->kind) {
  case Type::Kind::Void:
    return true;
  case Type::Kind::Int:
  case Type::Kind::Float:
    return a->bits == b->bits;
  case Type::Kind::Pointer:
    return a->addr_space == b->addr_space && type_equal(a->elem, b->elem);
  case Type::Kind::Vector:
  case Type::Kind::Array:
    return a->count == b->count && type_equal(a->elem, b->elem);
  case Type::Kind::Function: {
    if (!type_equal(a->elem, b->elem) || a->params.size() != b->params.size())
      return false;
    for (size_t i = 0; i < a->params.size(); ++i)
      if (!type_equal(a->params[i], b->params[i]))
        return false;
    return true;
  }
  }
  return false;
}

std::string type_text(const TypeRef &t) {
  if (!t)
    return "<null>";
  switch (t->kind) {
  case Type::Kind::Void:
    return "void";
  case Type::Kind::Int:
    return "i" + std::to_string(t->bits);
  case Type::Kind::Float:
    return t->bits == 32 ? "float" : "double";
  case Type::Kind::Pointer: {
    std::string s = type_text(t->elem);
    if (t->addr_space != AddressSpace::Private)
      s += " addrspace(" + std::to_string(int(t->addr_space)) + ")";
    return s + "*";
  }
  case Type::Kind::Vector:
    return "<" + std::to_string(t->count) + " x " + type_text(t->elem) + ">";
  case Type::Kind::Array:
    return "[" + std::to_string(t->count) + " x " + type_text(t->elem) + "]";
  case Type::Kind::Function: {
    std::string s = type_text(t->elem) + " (";
    for (size_t i = 0; i < t->params.size(); ++i) {
      if (i)
        s += ", ";
      s += type_text(t->params[i]);
    }
    return s + ")";
  }
  }
  return "<bad>";
}

Value Value::reg(std::string name, TypeRef type) {
  Value v;
  v.kind = Kind::Register;
  v.name = std::move(name);
  v.type = std::move(type);
  return v;
}

Value Value::int_const(int64_t x, TypeRef type) {
  Value v;
  v.kind = Kind::IntConst;
  v.type = std::move(type);
  v.bits = mask_to_width(uint64_t(x), v.type->bits);
  return v;
}

Value Value::float_const(double x, TypeRef type) {
  Value v;
  v.kind = Kind::FloatConst;
  v.type = std::move(type);
  if (v.type->bits == 32) {
    float f = float(x);
    uint32_t u;
    std::memcpy(&u, &f, 4);
    v.bits = u;
  } else {
    std::memcpy(&v.bits, &x, 8);
  }
  return v;
}

Value Value::global_ref(std::string name, TypeRef type) {
  Value v;
  v.kind = Kind::GlobalRef;
  v.name = std::move(name);
  v.type = std::move(type);
  return v;
}

Value Value::undef(TypeRef type) {
  Value v;
  v.kind = Kind::Undef;
  v.type = std::move(type);
  return v;
}

int64_t Value::as_signed() const {
  assert(kind == Kind::IntConst);
  int w = type->bits;
  if (w >= 64)
    return int64_t(bits);
  uint64_t sign = uint64_t{1} << (w - 1);
  return int64_t((bits ^ sign)) - int64_t(sign);
}

double Value::as_float() const {
  assert(kind == Kind::FloatConst);
  if (type->bits == 32) {
    uint32_t u = uint32_t(bits);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
  }
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

bool operator==(const Value &a, const Value &b) {
  if (a.kind != b.kind || !type_equal(a.type, b.type))
    return false;
  switch (a.kind) {
  case Value::Kind::Register:
  case Value::Kind::GlobalRef:
    return a.name == b.name;
  case Value::Kind::IntConst:
  case Value::Kind::FloatConst:
    return a.bits == b.bits;
  case Value::Kind::Undef:
    return true;
  }
  return false;
}

namespace {

struct OpcodeName {
  Opcode op;
  const char *text;
};

constexpr OpcodeName kOpcodeNames[] = {
    {Opcode::add, "add"},
    {Opcode::sub, "sub"},
    {Opcode::mul, "mul"},
    {Opcode::sdiv, "sdiv"},
    {Opcode::udiv, "udiv"},
    {Opcode::and_, "and"},
    {Opcode::or_, "or"},
    {Opcode::xor_, "xor"},
    {Opcode::shl, "shl"},
    {Opcode::lshr, "lshr"},
    {Opcode::ashr, "ashr"},
    {Opcode::fadd, "fadd"},
    {Opcode::fsub, "fsub"},
    {Opcode::fmul, "fmul"},
    {Opcode::fdiv, "fdiv"},
    {Opcode::icmp, "icmp"},
    {Opcode::fcmp, "fcmp"},
    {Opcode::load, "load"},
    {Opcode::store, "store"},
    {Opcode::getelementptr, "getelementptr"},
    {Opcode::call, "call"},
    {Opcode::atomicrmw, "atomicrmw"},
    {Opcode::select, "select"},
    {Opcode::phi, "phi"},
    {Opcode::br, "br"},
    {Opcode::ret, "ret"},
    {Opcode::sext, "sext"},
    {Opcode::zext, "zext"},
    {Opcode::trunc, "trunc"},
    {Opcode::fptosi, "fptosi"},
    {Opcode::sitofp, "sitofp"},
    {Opcode::bitcast, "bitcast"},
    {Opcode::extractelement, "extractelement"},
    {Opcode::alloca, "alloca"},
};

constexpr const char *kICmpNames[] = {"eq",  "ne",  "slt", "sle", "sgt",
                                      "sge", "ult", "ule", "ugt", "uge"};
constexpr const char *kFCmpNames[] = {"oeq", "ogt", "oge", "olt", "ole",
                                      "one", "ord", "ueq", "ugt", "uge",
                                      "ult", "ule", "une", "uno"};
constexpr const char *kAtomicNames[] = {"add", "sub",  "xchg", "and", "or",
                                        "xor", "min",  "max",  "umin", "umax"};

} // namespace

const char *opcode_text(Opcode op) {
  for (const auto &e : kOpcodeNames)
    if (e.op == op)
      return e.text;
  return "?";
}

const char *icmp_text(ICmpPred p) { return kICmpNames[int(p)]; }
const char *fcmp_text(FCmpPred p) { return kFCmpNames[int(p)]; }
const char *atomic_op_text(AtomicOp op) { return kAtomicNames[int(op)]; }

std::optional<Opcode> opcode_from_text(const std::string &s) {
  for (const auto &e : kOpcodeNames)
    if (s == e.text)
      return e.op;
  return std::nullopt;
}

std::optional<ICmpPred> icmp_from_text(const std::string &s) {
  for (int i = 0; i < int(std::size(kICmpNames)); ++i)
    if (s == kICmpNames[i])
      return ICmpPred(i);
  return std::nullopt;
}

std::optional<FCmpPred> fcmp_from_text(const std::string &s) {
  for (int i = 0; i < int(std::size(kFCmpNames)); ++i)
    if (s == kFCmpNames[i])
      return FCmpPred(i);
  return std::nullopt;
}

std::optional<AtomicOp> atomic_op_from_text(const std::string &s) {
  for (int i = 0; i < int(std::size(kAtomicNames)); ++i)
    if (s == kAtomicNames[i])
      return AtomicOp(i);
  return std::nullopt;
}

bool is_terminator(Opcode op) { return op == Opcode::br || op == Opcode::ret; }

bool operator==(const Instruction &a, const Instruction &b) {
  if (a.op != b.op || a.result != b.result || !type_equal(a.type, b.type))
    return false;
  if (a.operands != b.operands || a.labels != b.labels)
    return false;
  if (a.callee != b.callee)
    return false;
  if (a.op == Opcode::icmp && a.ipred != b.ipred)
    return false;
  if (a.op == Opcode::fcmp && a.fpred != b.fpred)
    return false;
  if (a.op == Opcode::atomicrmw && a.rmw != b.rmw)
    return false;
  if (!type_equal(a.pointee, b.pointee))
    return false;
  return a.align == b.align && a.is_volatile == b.is_volatile &&
         a.inbounds == b.inbounds && a.nsw == b.nsw && a.nuw == b.nuw;
}

MetadataElem MetadataElem::str_elem(std::string s) {
  MetadataElem e;
  e.kind = Kind::Str;
  e.str = std::move(s);
  return e;
}

MetadataElem MetadataElem::int_elem(int64_t v) {
  MetadataElem e;
  e.kind = Kind::Int;
  e.num = v;
  return e;
}

MetadataElem MetadataElem::func_elem(std::string fn, TypeRef fn_ptr_type) {
  MetadataElem e;
  e.kind = Kind::FuncRef;
  e.str = std::move(fn);
  e.func_type = std::move(fn_ptr_type);
  return e;
}

MetadataElem MetadataElem::node_elem(std::string id) {
  MetadataElem e;
  e.kind = Kind::NodeRef;
  e.str = std::move(id);
  return e;
}

TypeRef Function::function_type() const {
  std::vector<TypeRef> ps;
  ps.reserve(params.size());
  for (const auto &p : params)
    ps.push_back(p.type);
  return Type::function_ty(ret, std::move(ps));
}

const BasicBlock *Function::find_block(const std::string &label) const {
  for (const auto &b : blocks)
    if (b.label == label)
      return &b;
  return nullptr;
}

const char *dialect_text(Dialect d) {
  switch (d) {
  case Dialect::NVVM:
    return "nvvm";
  case Dialect::SPIRV:
    return "spirv";
  case Dialect::OpenCL:
    return "opencl";
  }
  return "?";
}

Function *Module::find_function(const std::string &name) {
  for (auto &f : functions)
    if (f.name == name)
      return &f;
  return nullptr;
}

const Function *Module::find_function(const std::string &name) const {
  for (const auto &f : functions)
    if (f.name == name)
      return &f;
  return nullptr;
}

const GlobalVariable *Module::find_global(const std::string &name) const {
  for (const auto &g : globals)
    if (g.name == name)
      return &g;
  return nullptr;
}

const MetadataNode *Module::find_node(const std::string &id) const {
  auto it = metadata_nodes.find(id);
  return it == metadata_nodes.end() ? nullptr : &it->second;
}

const std::vector<std::string> *
Module::find_named_metadata(const std::string &name) const {
  for (const auto &[n, ids] : named_metadata)
    if (n == name)
      return &ids;
  return nullptr;
}

std::string Module::add_node(MetadataNode node) {
  // Fresh numeric id not already in use.
  size_t n = metadata_nodes.size();
  std::string id = std::to_string(n);
  while (metadata_nodes.count(id))
    id = std::to_string(++n);
  node.id = id;
  metadata_nodes.emplace(id, std::move(node));
  return id;
}

void Module::set_named_metadata(const std::string &name,
                                std::vector<std::string> ids) {
  for (auto &[n, v] : named_metadata) {
    if (n == name) {
      v = std::move(ids);
      return;
    }
  }
  named_metadata.emplace_back(name, std::move(ids));
}

void Module::remove_named_metadata(const std::string &name) {
  std::erase_if(named_metadata,
                [&](const auto &kv) { return kv.first == name; });
}

namespace {

// Metadata nodes are compared by content: node ids are renumbered freely by
// the printer, so equality must chase references. Verify rejects cyclic
// metadata, but guard with a depth cap anyway.
bool nodes_equal(const Module &ma, const std::string &ida, const Module &mb,
                 const std::string &idb, int depth) {
  if (depth > 64)
    return false;
  const MetadataNode *na = ma.find_node(ida);
  const MetadataNode *nb = mb.find_node(idb);
  if (!na || !nb)
    return na == nb;
  if (na->elems.size() != nb->elems.size())
    return false;
  for (size_t i = 0; i < na->elems.size(); ++i) {
    const MetadataElem &ea = na->elems[i];
    const MetadataElem &eb = nb->elems[i];
    if (ea.kind != eb.kind)
      return false;
    switch (ea.kind) {
    case MetadataElem::Kind::Str:
      if (ea.str != eb.str)
        return false;
      break;
    case MetadataElem::Kind::Int:
      if (ea.num != eb.num)
        return false;
      break;
    case MetadataElem::Kind::FuncRef:
      if (ea.str != eb.str || !type_equal(ea.func_type, eb.func_type))
        return false;
      break;
    case MetadataElem::Kind::NodeRef:
      if (!nodes_equal(ma, ea.str, mb, eb.str, depth + 1))
        return false;
      break;
    }
  }
  return true;
}

bool globals_equal(const GlobalVariable &a, const GlobalVariable &b) {
  return a.name == b.name && type_equal(a.type, b.type) &&
         a.space == b.space && a.init == b.init && a.internal == b.internal &&
         (a.init != GlobalVariable::Init::Scalar || a.init_val == b.init_val);
}

bool functions_equal(const Module &ma, const Function &a, const Module &mb,
                     const Function &b) {
  if (a.name != b.name || !type_equal(a.ret, b.ret) ||
      a.is_kernel != b.is_kernel || a.dso_local != b.dso_local ||
      a.cconv != b.cconv)
    return false;
  if (a.params.size() != b.params.size())
    return false;
  for (size_t i = 0; i < a.params.size(); ++i) {
    const Param &pa = a.params[i];
    const Param &pb = b.params[i];
    if (pa.name != pb.name || !type_equal(pa.type, pb.type) ||
        pa.attrs != pb.attrs)
      return false;
  }
  if (a.blocks.size() != b.blocks.size())
    return false;
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    if (a.blocks[i].label != b.blocks[i].label ||
        a.blocks[i].insts != b.blocks[i].insts)
      return false;
  }
  if (a.metadata.size() != b.metadata.size())
    return false;
  for (auto ita = a.metadata.begin(), itb = b.metadata.begin();
       ita != a.metadata.end(); ++ita, ++itb) {
    if (ita->first != itb->first ||
        !nodes_equal(ma, ita->second, mb, itb->second, 0))
      return false;
  }
  return true;
}

} // namespace

bool modules_equal(const Module &a, const Module &b) {
  if (a.target_triple != b.target_triple || a.dialect != b.dialect)
    return false;
  if (a.globals.size() != b.globals.size() ||
      a.functions.size() != b.functions.size() ||
      a.named_metadata.size() != b.named_metadata.size())
    return false;
  for (size_t i = 0; i < a.globals.size(); ++i)
    if (!globals_equal(a.globals[i], b.globals[i]))
      return false;
  for (size_t i = 0; i < a.functions.size(); ++i)
    if (!functions_equal(a, a.functions[i], b, b.functions[i]))
      return false;
  for (size_t i = 0; i < a.named_metadata.size(); ++i) {
    const auto &[na, idsa] = a.named_metadata[i];
    const auto &[nb, idsb] = b.named_metadata[i];
    if (na != nb || idsa.size() != idsb.size())
      return false;
    for (size_t j = 0; j < idsa.size(); ++j)
      if (!nodes_equal(a, idsa[j], b, idsb[j], 0))
        return false;
  }
  return true;
}

} // namespace gpuir
