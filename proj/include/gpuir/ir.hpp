// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#ifndef GPUIR_IR_HPP
#define GPUIR_IR_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gpuir {

// SPIR address-space numbering. NVVM generic pointers parse as Private (0);
// kernel pointer arguments are understood to reference global memory and are
// annotated as such during translation, not retyped.
enum class AddressSpace : int {
  Private = 0,
  Global = 1,
  Constant = 2,
  Local = 3,
};

class Type;
using TypeRef = std::shared_ptr<const Type>;

/// Immutable structural type node. Compare with type_equal(); never by
/// pointer identity.
class Type {
public:
  enum class Kind {
    Void,
    Int,      // bits in {1,8,16,32,64}
    Float,    // bits in {32,64}
    Pointer,  // elem + addr_space
    Vector,   // elem + count, count in {2,3,4}
    Array,    // elem + count; only as global-variable / GEP source types
    Function, // elem = return type, params
  };

  Kind kind = Kind::Void;
  int bits = 0;
  TypeRef elem;
  AddressSpace addr_space = AddressSpace::Private;
  int count = 0;
  std::vector<TypeRef> params;

  static TypeRef void_ty();
  static TypeRef int_ty(int bits);
  static TypeRef float_ty(int bits);
  static TypeRef pointer_to(TypeRef pointee,
                            AddressSpace space = AddressSpace::Private);
  static TypeRef vector_of(TypeRef elem, int lanes);
  static TypeRef array_of(TypeRef elem, int count);
  static TypeRef function_ty(TypeRef ret, std::vector<TypeRef> params);

  bool is_void() const { return kind == Kind::Void; }
  bool is_int() const { return kind == Kind::Int; }
  bool is_int(int w) const { return kind == Kind::Int && bits == w; }
  bool is_float() const { return kind == Kind::Float; }
  bool is_pointer() const { return kind == Kind::Pointer; }
  bool is_vector() const { return kind == Kind::Vector; }
  bool is_array() const { return kind == Kind::Array; }
  bool is_function() const { return kind == Kind::Function; }
  bool is_scalar() const { return is_int() || is_float(); }

  // Byte size of a stored value. Vectors and arrays are packed; i1 occupies
  // one byte. Void/function types have no size.
  int store_size() const;
};

bool type_equal(const TypeRef &a, const TypeRef &b);

/// Canonical textual spelling, e.g. "i32", "float addrspace(3)*", "<3 x i64>".
std::string type_text(const TypeRef &t);

/// SSA operand: register, literal constant, global reference or undef.
struct Value {
  enum class Kind { Register, IntConst, FloatConst, GlobalRef, Undef };

  Kind kind = Kind::Undef;
  std::string name; // Register / GlobalRef
  TypeRef type;
  uint64_t bits = 0; // IntConst: value masked to width; FloatConst: raw bits

  static Value reg(std::string name, TypeRef type);
  static Value int_const(int64_t v, TypeRef type);
  static Value float_const(double v, TypeRef type);
  static Value global_ref(std::string name, TypeRef type);
  static Value undef(TypeRef type);

  bool is_reg() const { return kind == Kind::Register; }
  bool is_const_int() const { return kind == Kind::IntConst; }

  /// IntConst interpreted as signed at its bit width.
  int64_t as_signed() const;
  /// FloatConst as the IEEE value of its type.
  double as_float() const;
};

bool operator==(const Value &a, const Value &b);
inline bool operator!=(const Value &a, const Value &b) { return !(a == b); }

enum class Opcode {
  add, sub, mul, sdiv, udiv,
  and_, or_, xor_, shl, lshr, ashr,
  fadd, fsub, fmul, fdiv,
  icmp, fcmp,
  load, store, getelementptr,
  call, atomicrmw,
  select, phi,
  br, ret,
  sext, zext, trunc, fptosi, sitofp, bitcast,
  extractelement, alloca,
};

enum class ICmpPred { eq, ne, slt, sle, sgt, sge, ult, ule, ugt, uge };
enum class FCmpPred {
  oeq, ogt, oge, olt, ole, one, ord,
  ueq, ugt, uge, ult, ule, une, uno,
};
enum class AtomicOp { add, sub, xchg, and_, or_, xor_, min, max, umin, umax };

const char *opcode_text(Opcode op);
const char *icmp_text(ICmpPred p);
const char *fcmp_text(FCmpPred p);
const char *atomic_op_text(AtomicOp op);

std::optional<Opcode> opcode_from_text(const std::string &s);
std::optional<ICmpPred> icmp_from_text(const std::string &s);
std::optional<FCmpPred> fcmp_from_text(const std::string &s);
std::optional<AtomicOp> atomic_op_from_text(const std::string &s);

bool is_terminator(Opcode op);

/// One SSA operation. Operand layout by opcode:
///   binops/casts: value operands; `type` is the result type
///   icmp/fcmp:    two operands, `type` = i1
///   load:         {ptr}; `type` = loaded type
///   store:        {value, ptr}; `type` = stored type, no result
///   getelementptr:{base, idx...}; `pointee` = source element type
///   call:         args in operands, `callee` set, `type` = return type
///   atomicrmw:    {ptr, operand}; `rmw` set; result = old value
///   br:           unconditional labels={dest}; conditional operands={cond},
///                 labels={true,false}
///   phi:          operands = incoming values, labels = incoming blocks
///   extractelement: {vector, lane index}
///   alloca:       `pointee` = allocated type, result is Private pointer
struct Instruction {
  Opcode op = Opcode::ret;
  std::string result; // empty when the op produces no value
  TypeRef type;
  std::vector<Value> operands;
  std::string callee;
  ICmpPred ipred = ICmpPred::eq;
  FCmpPred fpred = FCmpPred::oeq;
  AtomicOp rmw = AtomicOp::add;
  std::vector<std::string> labels;
  TypeRef pointee;
  uint32_t align = 0;
  bool is_volatile = false;
  bool inbounds = false;
  bool nsw = false;
  bool nuw = false;

  bool has_result() const { return !result.empty(); }
};

bool operator==(const Instruction &a, const Instruction &b);
inline bool operator!=(const Instruction &a, const Instruction &b) {
  return !(a == b);
}

struct BasicBlock {
  std::string label;
  std::vector<Instruction> insts;
};

struct Param {
  std::string name;
  TypeRef type;
  // Opaque attribute strings ("nocapture", "readonly", "align 4"); parsed
  // and reprinted verbatim, no semantic effect.
  std::vector<std::string> attrs;
};

enum class CallConv { none, spir_func, spir_kernel };

struct Function {
  std::string name;
  TypeRef ret;
  std::vector<Param> params;
  std::vector<BasicBlock> blocks; // empty => declaration
  bool is_kernel = false;
  bool dso_local = false;
  CallConv cconv = CallConv::none;
  // Attached metadata, kind -> node id (e.g. "kernel_arg_type" -> "6").
  std::map<std::string, std::string> metadata;

  bool is_declaration() const { return blocks.empty(); }
  TypeRef function_type() const;
  const BasicBlock *find_block(const std::string &label) const;
};

struct MetadataElem {
  enum class Kind { Str, Int, FuncRef, NodeRef };
  Kind kind = Kind::Int;
  std::string str;      // Str text / FuncRef function name / NodeRef node id
  int64_t num = 0;      // Int
  TypeRef func_type;    // FuncRef: pointer-to-function type

  static MetadataElem str_elem(std::string s);
  static MetadataElem int_elem(int64_t v);
  static MetadataElem func_elem(std::string fn, TypeRef fn_ptr_type);
  static MetadataElem node_elem(std::string id);
};

struct MetadataNode {
  std::string id;
  std::vector<MetadataElem> elems;
};

struct GlobalVariable {
  enum class Init { External, Zero, Scalar };

  std::string name;
  TypeRef type; // allocated type (scalar, vector or array)
  AddressSpace space = AddressSpace::Global;
  Init init = Init::Zero;
  Value init_val; // Init::Scalar
  bool internal = false;
};

enum class Dialect { NVVM, SPIRV, OpenCL };

const char *dialect_text(Dialect d);

inline constexpr const char *kNvvmTriple = "nvptx64-nvidia-cuda";
inline constexpr const char *kSpirTriple = "spir64-unknown-unknown";

/// A parsed compilation unit. Immutable after construction except through
/// pass application; safe to share read-only across threads.
struct Module {
  std::string target_triple;
  Dialect dialect = Dialect::NVVM;
  std::vector<GlobalVariable> globals;
  std::vector<Function> functions;
  // Insertion-ordered named metadata (e.g. "nvvm.annotations" -> node ids).
  std::vector<std::pair<std::string, std::vector<std::string>>> named_metadata;
  std::map<std::string, MetadataNode> metadata_nodes;

  Function *find_function(const std::string &name);
  const Function *find_function(const std::string &name) const;
  const GlobalVariable *find_global(const std::string &name) const;
  const MetadataNode *find_node(const std::string &id) const;
  const std::vector<std::string> *
  find_named_metadata(const std::string &name) const;

  /// Inserts a node under a fresh id and returns the id.
  std::string add_node(MetadataNode node);

  void set_named_metadata(const std::string &name,
                          std::vector<std::string> ids);
  void remove_named_metadata(const std::string &name);
};

/// Deep structural equality; metadata graphs are compared by content, not by
/// node id.
bool modules_equal(const Module &a, const Module &b);

} // namespace gpuir

#endif // GPUIR_IR_HPP
