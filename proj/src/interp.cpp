// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#include "gpuir/interp.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <sstream>

#include "gpuir/verify.hpp"
#include "interp_internal.hpp"

namespace gpuir {

using namespace detail;

// ---------- public helpers ----------

BufferBinding BufferBinding::of_i32(std::string name,
                                    std::vector<int32_t> vals) {
  BufferBinding b;
  b.arg_name = std::move(name);
  b.elem_type = Type::int_ty(32);
  b.values.reserve(vals.size());
  for (int32_t v : vals)
    b.values.push_back(uint32_t(v));
  return b;
}

BufferBinding BufferBinding::of_i64(std::string name,
                                    std::vector<int64_t> vals) {
  BufferBinding b;
  b.arg_name = std::move(name);
  b.elem_type = Type::int_ty(64);
  for (int64_t v : vals)
    b.values.push_back(uint64_t(v));
  return b;
}

BufferBinding BufferBinding::of_f32(std::string name, std::vector<float> vals) {
  BufferBinding b;
  b.arg_name = std::move(name);
  b.elem_type = Type::float_ty(32);
  for (float v : vals) {
    uint32_t u;
    std::memcpy(&u, &v, 4);
    b.values.push_back(u);
  }
  return b;
}

BufferBinding BufferBinding::of_f64(std::string name,
                                    std::vector<double> vals) {
  BufferBinding b;
  b.arg_name = std::move(name);
  b.elem_type = Type::float_ty(64);
  for (double v : vals) {
    uint64_t u;
    std::memcpy(&u, &v, 8);
    b.values.push_back(u);
  }
  return b;
}

float BufferBinding::f32_at(size_t i) const {
  uint32_t u = uint32_t(values[i]);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

double BufferBinding::f64_at(size_t i) const {
  double d;
  uint64_t u = values[i];
  std::memcpy(&d, &u, 8);
  return d;
}

const char *trap_kind_text(TrapInfo::Kind k) {
  switch (k) {
  case TrapInfo::Kind::oob:
    return "oob";
  case TrapInfo::Kind::div_by_zero:
    return "div_by_zero";
  case TrapInfo::Kind::barrier_divergence:
    return "barrier_divergence";
  case TrapInfo::Kind::unresolved_callee:
    return "unresolved_callee";
  case TrapInfo::Kind::step_limit:
    return "step_limit";
  }
  return "?";
}

std::string TrapInfo::to_string() const {
  std::ostringstream os;
  os << "trap " << trap_kind_text(kind) << " at block (" << block[0] << ","
     << block[1] << "," << block[2] << ") thread (" << thread[0] << ","
     << thread[1] << "," << thread[2] << ")";
  if (!function.empty()) {
    os << " in @" << function;
    if (!block_label.empty())
      os << ":" << block_label << "#" << inst_index;
  }
  if (!detail.empty())
    os << ": " << detail;
  return os.str();
}

std::string DiffOutcome::to_string() const {
  switch (kind) {
  case Kind::equal:
    return "equal";
  case Kind::mismatch:
    return "mismatch at " + buffer + "[" + std::to_string(index) +
           "]: src bits 0x" +
           [](uint64_t v) {
             char b[20];
             std::snprintf(b, sizeof b, "%016llx", (unsigned long long)v);
             return std::string(b);
           }(src_bits) +
           " dst bits 0x" +
           [](uint64_t v) {
             char b[20];
             std::snprintf(b, sizeof b, "%016llx", (unsigned long long)v);
             return std::string(b);
           }(dst_bits);
  case Kind::src_trap:
    return "source " + (trap ? trap->to_string() : std::string("trap"));
  case Kind::dst_trap:
    return "translated " + (trap ? trap->to_string() : std::string("trap"));
  case Kind::setup_error:
    return "setup error: " + error;
  }
  return "?";
}

namespace detail {

// ---------- runtime values ----------

uint64_t mask_width(uint64_t v, int w) {
  return w >= 64 ? v : (v & ((uint64_t{1} << w) - 1));
}

RtVal RtVal::make_int(uint64_t v, int w) {
  RtVal r;
  r.tag = Tag::intv;
  r.width = uint8_t(w);
  r.bits = mask_width(v, w);
  return r;
}

RtVal RtVal::make_f32(float f) {
  RtVal r;
  r.tag = Tag::f32;
  uint32_t u;
  std::memcpy(&u, &f, 4);
  r.bits = u;
  return r;
}

RtVal RtVal::make_f64(double d) {
  RtVal r;
  r.tag = Tag::f64;
  std::memcpy(&r.bits, &d, 8);
  return r;
}

RtVal RtVal::make_ptr(MemPtr p) {
  RtVal r;
  r.tag = Tag::ptr;
  r.ptr = p;
  return r;
}

float RtVal::as_f32() const {
  uint32_t u = uint32_t(bits);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

double RtVal::as_f64() const {
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

int64_t RtVal::as_signed() const {
  if (width >= 64)
    return int64_t(bits);
  uint64_t sign = uint64_t{1} << (width - 1);
  return int64_t(bits ^ sign) - int64_t(sign);
}

void MemObject::allocate(size_t n, bool zero) {
  count = n;
  cells = std::make_unique<std::atomic<uint64_t>[]>(n);
  if (zero)
    for (size_t i = 0; i < n; ++i)
      cells[i].store(0, std::memory_order_relaxed);
}

namespace {

struct ScalarInfo {
  ScalarKind kind;
  int width;
  int size;
};

ScalarInfo scalar_info(const TypeRef &t) {
  if (t->is_float())
    return t->bits == 32 ? ScalarInfo{ScalarKind::F32, 32, 4}
                         : ScalarInfo{ScalarKind::F64, 64, 8};
  int w = t->bits;
  return {ScalarKind::Int, w, w <= 8 ? 1 : w / 8};
}

// Flattens arrays/vectors to (scalar elem, scalar count).
std::pair<ScalarInfo, size_t> flatten_type(const TypeRef &t) {
  if (t->is_scalar())
    return {scalar_info(t), 1};
  if (t->is_vector())
    return {scalar_info(t->elem), size_t(t->count)};
  if (t->is_array()) {
    auto [info, n] = flatten_type(t->elem);
    return {info, n * size_t(t->count)};
  }
  return {{ScalarKind::Int, 32, 4}, 1};
}

} // namespace

MemObject make_object_for(const TypeRef &elem_type, size_t count,
                          std::string name) {
  MemObject o;
  ScalarInfo si = scalar_info(elem_type);
  o.elem = si.kind;
  o.elem_width = si.width;
  o.elem_size = si.size;
  o.name = std::move(name);
  o.allocate(count);
  return o;
}

// ---------- preparation ----------

namespace {

class PrepareContext {
public:
  PrepareContext(const Module &m, Prepared &out) : m_(m), p_(out) {}

  std::optional<std::string> run(const std::string &kernel,
                                 const DispatchConfig &cfg,
                                 const std::vector<BufferBinding> &bindings) {
    p_.module = &m_;
    p_.dialect = m_.dialect;
    p_.cfg = cfg;

    if (cfg.block[0] < 1 || cfg.block[1] < 1 || cfg.block[2] < 1)
      return "block dims must be positive";
    if (cfg.grid[0] < 1 || cfg.grid[1] < 1 || cfg.grid[2] < 1)
      return "grid dims must be positive";
    if (cfg.threads_per_block() > kMaxThreadsPerBlock)
      return "threads per block exceed " + std::to_string(kMaxThreadsPerBlock);
    if (cfg.blocks_total() > kMaxBlocks)
      return "total blocks exceed " + std::to_string(kMaxBlocks);

    auto diags = verify_module(m_);
    if (!diags.empty())
      return "module failed verification: " + diags.front().to_string();

    KernelsResult kr = kernels_of(m_);
    const Function *entry = nullptr;
    for (const Function *k : kr.kernels)
      if (k->name == kernel)
        entry = k;
    if (!entry)
      return "no kernel named @" + kernel;

    // Launch-global objects: bindings first (binding order), then module
    // globals in global/constant space.
    std::set<std::string> binding_names;
    for (const auto &b : bindings) {
      if (!binding_names.insert(b.arg_name).second)
        return "duplicate binding for argument " + b.arg_name;
      bool is_param = false;
      for (const auto &prm : entry->params)
        is_param = is_param || prm.name == b.arg_name;
      if (!is_param)
        return "binding names unknown argument " + b.arg_name;
      if (!b.elem_type || !b.elem_type->is_scalar())
        return "binding " + b.arg_name + " must have a scalar element type";
      MemObject o = make_object_for(b.elem_type, b.values.size(), b.arg_name);
      for (size_t i = 0; i < b.values.size(); ++i)
        o.set(i, mask_width(b.values[i], o.elem_width));
      p_.globals.push_back(std::move(o));
    }

    for (const auto &g : m_.globals) {
      if (m_.dialect == Dialect::SPIRV &&
          spirv_variable_from_name(g.name).has_value())
        continue; // answered directly, never materialized
      auto [si, n] = flatten_type(g.type);
      if (g.space == AddressSpace::Local) {
        local_index_[g.name] = int(p_.locals.size());
        p_.locals.push_back({si.kind, si.width, n, g.name});
        continue;
      }
      MemObject o;
      o.elem = si.kind;
      o.elem_width = si.width;
      o.elem_size = si.size;
      o.name = g.name;
      o.read_only = g.space == AddressSpace::Constant;
      o.allocate(n);
      if (g.init == GlobalVariable::Init::Scalar)
        o.set(0, mask_width(g.init_val.bits, si.width));
      global_index_[g.name] = int(p_.globals.size());
      p_.globals.push_back(std::move(o));
    }

    // Entry arguments.
    for (const auto &prm : entry->params) {
      int bidx = -1;
      for (size_t i = 0; i < bindings.size(); ++i)
        if (bindings[i].arg_name == prm.name)
          bidx = int(i);
      if (prm.type->is_pointer()) {
        if (bidx < 0)
          return "missing binding for argument " + prm.name;
        const TypeRef &pointee = prm.type->elem;
        TypeRef elem_scalar =
            pointee->is_vector() ? pointee->elem : pointee;
        if (!elem_scalar->is_scalar() ||
            !type_equal(elem_scalar, bindings[bidx].elem_type))
          return "binding " + prm.name + " element type " +
                 type_text(bindings[bidx].elem_type) +
                 " does not match parameter pointee " + type_text(pointee);
        p_.scalar_args.push_back(
            RtVal::make_ptr(MemPtr{0, int32_t(bidx), 0}));
      } else if (prm.type->is_scalar()) {
        if (bidx < 0)
          return "missing binding for argument " + prm.name;
        const BufferBinding &b = bindings[bidx];
        if (!type_equal(b.elem_type, prm.type) || b.values.size() != 1)
          return "scalar argument " + prm.name +
                 " needs a one-element binding of type " +
                 type_text(prm.type);
        ScalarInfo si = scalar_info(prm.type);
        RtVal v;
        if (si.kind == ScalarKind::Int)
          v = RtVal::make_int(b.values[0], si.width);
        else if (si.kind == ScalarKind::F32) {
          v.tag = RtVal::Tag::f32;
          v.bits = b.values[0] & 0xffffffffull;
        } else {
          v.tag = RtVal::Tag::f64;
          v.bits = b.values[0];
        }
        p_.scalar_args.push_back(v);
      } else {
        return "unsupported by-value argument type " + type_text(prm.type);
      }
    }

    // Prepare every defined function.
    for (const auto &f : m_.functions) {
      if (f.is_declaration())
        continue;
      p_.func_index[f.name] = int(p_.funcs.size());
      p_.funcs.push_back({});
    }
    for (const auto &f : m_.functions) {
      if (f.is_declaration())
        continue;
      if (auto err = prepare_function(f, p_.funcs[p_.func_index[f.name]]))
        return err;
    }
    p_.entry = p_.func_index[entry->name];
    return std::nullopt;
  }

private:
  const Module &m_;
  Prepared &p_;
  std::map<std::string, int> global_index_;
  std::map<std::string, int> local_index_;

  RtVal imm_zero_of(const TypeRef &t) {
    if (t->is_vector()) {
      RtVal r;
      r.tag = RtVal::Tag::vec;
      r.width = uint8_t(t->count);
      ScalarInfo si = scalar_info(t->elem);
      r.elem = si.kind;
      r.elem_width = uint8_t(si.width);
      return r;
    }
    if (t->is_float())
      return t->bits == 32 ? RtVal::make_f32(0.f) : RtVal::make_f64(0.0);
    if (t->is_pointer())
      return RtVal::make_ptr(MemPtr{0, -1, 0});
    return RtVal::make_int(0, t->bits ? t->bits : 32);
  }

  std::optional<std::string> make_operand(const Value &v,
                                          const std::map<std::string, int> &slots,
                                          POperand &out) {
    switch (v.kind) {
    case Value::Kind::Register: {
      auto it = slots.find(v.name);
      if (it == slots.end())
        return "internal: unmapped register %" + v.name;
      out.kind = POperand::Kind::Slot;
      out.slot = it->second;
      return std::nullopt;
    }
    case Value::Kind::IntConst:
      out.kind = POperand::Kind::Imm;
      out.imm = RtVal::make_int(v.bits, v.type->bits);
      return std::nullopt;
    case Value::Kind::FloatConst:
      out.kind = POperand::Kind::Imm;
      out.imm.tag = v.type->bits == 32 ? RtVal::Tag::f32 : RtVal::Tag::f64;
      out.imm.bits = v.bits;
      return std::nullopt;
    case Value::Kind::Undef:
      out.kind = POperand::Kind::Imm;
      out.imm = imm_zero_of(v.type);
      return std::nullopt;
    case Value::Kind::GlobalRef: {
      if (m_.dialect == Dialect::SPIRV) {
        if (auto var = spirv_variable_from_name(v.name)) {
          out.kind = POperand::Kind::BuiltinVar;
          out.var = *var;
          return std::nullopt;
        }
      }
      if (auto it = global_index_.find(v.name); it != global_index_.end()) {
        out.kind = POperand::Kind::Imm;
        out.imm = RtVal::make_ptr(MemPtr{0, int32_t(it->second), 0});
        return std::nullopt;
      }
      if (auto it = local_index_.find(v.name); it != local_index_.end()) {
        out.kind = POperand::Kind::Imm;
        out.imm = RtVal::make_ptr(MemPtr{1, int32_t(it->second), 0});
        return std::nullopt;
      }
      return "internal: unmapped global @" + v.name;
    }
    }
    return "internal: bad operand";
  }

  void fill_access_info(PInst &pi, const TypeRef &t) {
    if (t->is_vector()) {
      ScalarInfo si = scalar_info(t->elem);
      pi.access_kind = si.kind;
      pi.access_width = si.width;
      pi.access_size = si.size;
      pi.access_lanes = t->count;
    } else {
      ScalarInfo si = scalar_info(t);
      pi.access_kind = si.kind;
      pi.access_width = si.width;
      pi.access_size = si.size;
      pi.access_lanes = 0;
    }
  }

  BuiltinQuery resolve_builtin(const Instruction &inst) {
    BuiltinQuery q;
    const std::string &callee = inst.callee;
    int result_width =
        inst.type && inst.type->is_int() ? inst.type->bits : 32;

    auto index_query = [&](BuiltinKind::Kind kind, int dim) {
      q.op = BuiltinQuery::Op::index;
      q.kind = kind;
      q.dim = dim;
      q.width = result_width;
    };

    if (m_.dialect == Dialect::NVVM) {
      const BuiltinMapping *bm = find_builtin(callee);
      if (!bm)
        return q;
      if (bm->kind.is_index_query()) {
        index_query(bm->kind.kind, bm->kind.dim);
      } else if (bm->kind.kind == BuiltinKind::Kind::barrier) {
        q.op = BuiltinQuery::Op::barrier;
      } else {
        q.op = BuiltinQuery::Op::math;
        q.kind = bm->kind.kind;
        q.float_bits = bm->float_bits;
      }
      return q;
    }

    // SPIRV and OpenCL dialects share barrier/atomic/math callees; OpenCL
    // additionally answers the get_* queries (dim comes from the argument).
    if (callee == "barrier" || callee == kBarrierMangled) {
      q.op = BuiltinQuery::Op::barrier;
      return q;
    }
    if (auto aop = atomic_op_from_callee(callee)) {
      q.op = BuiltinQuery::Op::atomic;
      q.rmw = *aop;
      return q;
    }
    int operand_bits = !inst.operands.empty() && inst.operands[0].type &&
                               inst.operands[0].type->is_float()
                           ? inst.operands[0].type->bits
                           : 0;
    for (BuiltinKind::Kind mk : {BuiltinKind::Kind::sqrt,
                                 BuiltinKind::Kind::fabs,
                                 BuiltinKind::Kind::fma}) {
      for (int bits : {32, 64}) {
        if (callee == mangled_math_callee(mk, bits)) {
          q.op = BuiltinQuery::Op::math;
          q.kind = mk;
          q.float_bits = bits;
          return q;
        }
      }
      if ((mk == BuiltinKind::Kind::sqrt && callee == "sqrt") ||
          (mk == BuiltinKind::Kind::fabs && callee == "fabs") ||
          (mk == BuiltinKind::Kind::fma && callee == "fma")) {
        if (operand_bits) {
          q.op = BuiltinQuery::Op::math;
          q.kind = mk;
          q.float_bits = operand_bits;
          return q;
        }
      }
    }
    if (m_.dialect == Dialect::OpenCL) {
      struct Row {
        BuiltinKind::Kind kind;
        const char *plain;
      };
      const Row rows[] = {
          {BuiltinKind::Kind::thread_index, "get_local_id"},
          {BuiltinKind::Kind::group_index, "get_group_id"},
          {BuiltinKind::Kind::group_size, "get_local_size"},
          {BuiltinKind::Kind::num_groups, "get_num_groups"},
      };
      for (const auto &row : rows)
        if (callee == row.plain || callee == mangled_index_callee(row.kind)) {
          index_query(row.kind, -1); // dim comes from the argument
          return q;
        }
    }
    return q;
  }

  std::optional<std::string> prepare_function(const Function &f, PFunc &pf) {
    pf.src = &f;
    std::map<std::string, int> slots;
    for (const auto &prm : f.params)
      slots[prm.name] = int(slots.size());
    for (const auto &b : f.blocks)
      for (const auto &inst : b.insts)
        if (inst.has_result() && !slots.count(inst.result))
          slots[inst.result] = int(slots.size());
    pf.nregs = int(slots.size());

    std::map<std::string, int> block_ids;
    for (size_t i = 0; i < f.blocks.size(); ++i)
      block_ids[f.blocks[i].label] = int(i);

    for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
      const BasicBlock &b = f.blocks[bi];
      PBlock pb;
      pb.label = b.label;
      for (size_t i = 0; i < b.insts.size(); ++i) {
        const Instruction &inst = b.insts[i];
        PInst pi;
        pi.op = inst.op;
        pi.src_block = int(bi);
        pi.src_index = int(i);
        if (inst.has_result())
          pi.result = slots[inst.result];
        pi.ipred = inst.ipred;
        pi.fpred = inst.fpred;
        pi.rmw = inst.rmw;

        if (inst.op == Opcode::phi) {
          for (size_t k = 0; k < inst.operands.size(); ++k) {
            POperand op;
            if (auto err = make_operand(inst.operands[k], slots, op))
              return err;
            pi.phi_in.emplace_back(block_ids[inst.labels[k]], op);
          }
          pi.width = inst.type->is_int() ? inst.type->bits : 0;
          pb.phi_count++;
          pb.insts.push_back(std::move(pi));
          continue;
        }

        pi.ops.reserve(inst.operands.size());
        for (const auto &v : inst.operands) {
          POperand op;
          if (auto err = make_operand(v, slots, op))
            return err;
          pi.ops.push_back(op);
        }

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
        case Opcode::fadd:
        case Opcode::fsub:
        case Opcode::fmul:
        case Opcode::fdiv:
          if (inst.type->is_vector()) {
            ScalarInfo si = scalar_info(inst.type->elem);
            pi.lanes = inst.type->count;
            pi.lane_kind = si.kind;
            pi.lane_width = si.width;
          } else if (inst.type->is_int()) {
            pi.width = inst.type->bits;
          } else {
            pi.float_bits = inst.type->bits;
          }
          break;
        case Opcode::icmp:
          pi.width = inst.operands[0].type->bits;
          break;
        case Opcode::fcmp:
          pi.float_bits = inst.operands[0].type->bits;
          break;
        case Opcode::load:
          fill_access_info(pi, inst.type);
          break;
        case Opcode::store:
          fill_access_info(pi, inst.type);
          break;
        case Opcode::getelementptr:
          pi.gep_scale0 = inst.pointee->store_size();
          pi.gep_scale1 =
              inst.pointee->is_array() ? inst.pointee->elem->store_size() : 0;
          break;
        case Opcode::call: {
          const Function *callee = m_.find_function(inst.callee);
          if (callee && !callee->is_declaration()) {
            pi.user_callee = p_.func_index.at(inst.callee);
          } else {
            pi.builtin = resolve_builtin(inst);
            if (pi.builtin.op == BuiltinQuery::Op::none) {
              pi.user_callee = -2; // unresolved: trap if executed
              p_.unresolved_names.push_back(inst.callee);
              pi.width = int(p_.unresolved_names.size()) - 1;
            }
          }
          break;
        }
        case Opcode::atomicrmw:
          pi.width = inst.operands[1].type->bits;
          break;
        case Opcode::br:
          pi.target0 = block_ids[inst.labels[0]];
          if (inst.labels.size() == 2)
            pi.target1 = block_ids[inst.labels[1]];
          break;
        case Opcode::sext:
        case Opcode::zext:
        case Opcode::trunc:
          pi.width = inst.type->bits;
          pi.float_bits = inst.operands[0].type->bits; // source width
          break;
        case Opcode::fptosi:
          pi.width = inst.type->bits;
          pi.float_bits = inst.operands[0].type->bits;
          break;
        case Opcode::sitofp:
          pi.width = inst.operands[0].type->bits;
          pi.float_bits = inst.type->bits;
          break;
        case Opcode::bitcast: {
          ScalarInfo si = scalar_info(
              inst.type->is_pointer() ? Type::int_ty(64) : inst.type);
          pi.width = si.width;
          pi.access_kind = si.kind;
          pi.float_bits = inst.type->is_pointer() ? -1 : 0;
          break;
        }
        case Opcode::extractelement: {
          ScalarInfo si = scalar_info(inst.type);
          pi.access_kind = si.kind;
          pi.access_width = si.width;
          break;
        }
        case Opcode::alloca: {
          auto [si, n] = flatten_type(inst.pointee);
          pi.access_kind = si.kind;
          pi.access_width = si.width;
          pi.access_size = si.size;
          pi.width = int(n);
          break;
        }
        case Opcode::select:
        case Opcode::ret:
          break;
        default:
          break;
        }
        pb.insts.push_back(std::move(pi));
      }
      pf.blocks.push_back(std::move(pb));
    }
    return std::nullopt;
  }
};

} // namespace

std::optional<std::string>
prepare_launch(const Module &m, const std::string &kernel,
               const DispatchConfig &cfg,
               const std::vector<BufferBinding> &bindings, Prepared &out) {
  PrepareContext ctx(m, out);
  return ctx.run(kernel, cfg, bindings);
}

// ---------- execution ----------

namespace {

class BlockExec {
public:
  BlockExec(const Prepared &p, std::vector<MemObject> &globals,
            const std::array<int, 3> &block_coords)
      : p_(p), globals_(globals), ctaid_(block_coords) {
    for (const auto &lt : p.locals) {
      MemObject o;
      o.elem = lt.elem;
      o.elem_width = lt.elem_width;
      o.elem_size = lt.elem_width <= 8 ? 1 : lt.elem_width / 8;
      o.name = lt.name;
      o.allocate(lt.count); // zero-initialized per block
      locals_.push_back(std::move(o));
    }
    const auto &b = p.cfg.block;
    threads_.resize(size_t(p.cfg.threads_per_block()));
    for (int z = 0; z < b[2]; ++z)
      for (int y = 0; y < b[1]; ++y)
        for (int x = 0; x < b[0]; ++x) {
          int lin = x + b[0] * (y + b[1] * z);
          ThreadCtx &t = threads_[size_t(lin)];
          t.tid = {x, y, z};
          t.ctaid = ctaid_;
          t.linear_id = lin;
          Frame fr;
          fr.fn = &p.funcs[p.entry];
          fr.regs.resize(size_t(fr.fn->nregs));
          for (size_t i = 0; i < p.scalar_args.size(); ++i)
            fr.regs[i] = p.scalar_args[i];
          t.stack.push_back(std::move(fr));
        }
  }

  BlockRun run(const Schedule &sched) {
    if (sched.mode == Schedule::Mode::canonical)
      run_canonical();
    else
      run_seeded(sched.seed);
    BlockRun r;
    r.waves = waves_;
    r.trap = trap_;
    return r;
  }

private:
  const Prepared &p_;
  std::vector<MemObject> &globals_;
  std::array<int, 3> ctaid_;
  std::vector<MemObject> locals_;
  std::vector<ThreadCtx> threads_;
  long long waves_ = 0;
  std::optional<TrapInfo> trap_;
  long long budget_ = 1LL << 28;

  using Status = ThreadCtx::Status;

  void run_canonical() {
    while (true) {
      for (auto &t : threads_) {
        while (t.status == Status::runnable) {
          step(t);
          if (trap_)
            return;
        }
      }
      if (!sync_point())
        return;
    }
  }

  void run_seeded(uint64_t seed) {
    std::mt19937_64 rng(seed ^
                        (0x9E3779B97F4A7C15ull *
                         (uint64_t(ctaid_[0]) + 0x100 * ctaid_[1] +
                          0x10000 * ctaid_[2] + 1)));
    std::vector<size_t> runnable;
    while (true) {
      runnable.clear();
      for (size_t i = 0; i < threads_.size(); ++i)
        if (threads_[i].status == Status::runnable)
          runnable.push_back(i);
      if (runnable.empty()) {
        if (!sync_point())
          return;
        continue;
      }
      size_t pick = runnable[rng() % runnable.size()];
      step(threads_[pick]);
      if (trap_)
        return;
    }
  }

  // All threads are blocked or finished: release a barrier wave or detect
  // divergence. Returns false when the block is finished (or trapped).
  bool sync_point() {
    bool any_barrier = false, any_done = false;
    for (const auto &t : threads_) {
      any_barrier |= t.status == Status::at_barrier;
      any_done |= t.status == Status::done;
    }
    if (!any_barrier)
      return false; // all done
    if (any_done) {
      for (const auto &t : threads_) {
        if (t.status == Status::at_barrier) {
          TrapInfo ti = trap_at(t, nullptr);
          ti.kind = TrapInfo::Kind::barrier_divergence;
          ti.detail = "some threads returned before reaching the barrier";
          trap_ = ti;
          return false;
        }
      }
    }
    ++waves_;
    for (auto &t : threads_)
      if (t.status == Status::at_barrier)
        t.status = Status::runnable;
    return true;
  }

  TrapInfo trap_at(const ThreadCtx &t, const PInst *pi) const {
    TrapInfo ti;
    ti.block = ctaid_;
    ti.thread = t.tid;
    if (!t.stack.empty()) {
      const Frame &fr = t.stack.back();
      ti.function = fr.fn->src->name;
      if (pi) {
        ti.block_label = fr.fn->blocks[size_t(pi->src_block)].label;
        ti.inst_index = pi->src_index;
      } else if (fr.block < int(fr.fn->blocks.size())) {
        ti.block_label = fr.fn->blocks[size_t(fr.block)].label;
      }
    }
    return ti;
  }

  void trap(ThreadCtx &t, const PInst &pi, TrapInfo::Kind kind,
            std::string detail) {
    TrapInfo ti = trap_at(t, &pi);
    ti.kind = kind;
    ti.detail = std::move(detail);
    trap_ = ti;
    t.status = Status::trapped;
  }

  const RtVal &fetch(const POperand &op, const Frame &fr) const {
    return op.kind == POperand::Kind::Slot ? fr.regs[size_t(op.slot)]
                                           : op.imm;
  }

  MemObject *resolve(const MemPtr &p, ThreadCtx &t) {
    switch (p.seg) {
    case 0:
      return p.obj >= 0 && p.obj < int(globals_.size())
                 ? &globals_[size_t(p.obj)]
                 : nullptr;
    case 1:
      return p.obj >= 0 && p.obj < int(locals_.size())
                 ? &locals_[size_t(p.obj)]
                 : nullptr;
    default:
      return p.obj >= 0 && p.obj < int(t.privates.size())
                 ? &t.privates[size_t(p.obj)]
                 : nullptr;
    }
  }

  // Bounds/shape check; returns the starting cell index or -1 after
  // trapping.
  int64_t check_access(ThreadCtx &t, const PInst &pi, const MemObject *obj,
                       const MemPtr &mp, bool writing) {
    int n = pi.access_lanes ? pi.access_lanes : 1;
    if (!obj) {
      trap(t, pi, TrapInfo::Kind::oob, "dangling pointer");
      return -1;
    }
    if (writing && obj->read_only) {
      trap(t, pi, TrapInfo::Kind::oob,
           "write to read-only memory @" + obj->name);
      return -1;
    }
    if (pi.access_size != obj->elem_size) {
      trap(t, pi, TrapInfo::Kind::oob,
           "access element size " + std::to_string(pi.access_size) +
               " does not match @" + obj->name + " element size " +
               std::to_string(obj->elem_size));
      return -1;
    }
    if (mp.off < 0 || mp.off % obj->elem_size != 0) {
      trap(t, pi, TrapInfo::Kind::oob,
           "misaligned or negative offset " + std::to_string(mp.off) +
               " into @" + obj->name);
      return -1;
    }
    int64_t idx = mp.off / obj->elem_size;
    if (idx + n > int64_t(obj->count)) {
      trap(t, pi, TrapInfo::Kind::oob,
           "index " + std::to_string(idx) + "+" + std::to_string(n) +
               " exceeds @" + obj->name + " extent " +
               std::to_string(obj->count));
      return -1;
    }
    return idx;
  }

  int64_t index_query_value(const ThreadCtx &t, BuiltinKind::Kind kind,
                            int dim) const {
    if (dim < 0 || dim > 2)
      return 0; // out-of-range queries answer 0, like get_local_id
    switch (kind) {
    case BuiltinKind::Kind::thread_index:
      return t.tid[size_t(dim)];
    case BuiltinKind::Kind::group_index:
      return t.ctaid[size_t(dim)];
    case BuiltinKind::Kind::group_size:
      return p_.cfg.block[size_t(dim)];
    case BuiltinKind::Kind::num_groups:
      return p_.cfg.grid[size_t(dim)];
    default:
      return 0;
    }
  }

  RtVal builtin_vector(const ThreadCtx &t, SpirvVariable var) const {
    RtVal r;
    r.tag = RtVal::Tag::vec;
    r.width = 3;
    r.elem = ScalarKind::Int;
    r.elem_width = 64;
    BuiltinKind::Kind kind;
    switch (var) {
    case SpirvVariable::LocalInvocationId:
      kind = BuiltinKind::Kind::thread_index;
      break;
    case SpirvVariable::WorkgroupId:
      kind = BuiltinKind::Kind::group_index;
      break;
    case SpirvVariable::WorkgroupSize:
      kind = BuiltinKind::Kind::group_size;
      break;
    default:
      kind = BuiltinKind::Kind::num_groups;
      break;
    }
    for (int d = 0; d < 3; ++d)
      r.lanes[size_t(d)] = uint64_t(index_query_value(t, kind, d));
    return r;
  }

  uint64_t atomic_apply(AtomicOp op, uint64_t a, uint64_t b, int w) const {
    auto sext = [w](uint64_t v) {
      if (w >= 64)
        return int64_t(v);
      uint64_t sign = uint64_t{1} << (w - 1);
      return int64_t(v ^ sign) - int64_t(sign);
    };
    switch (op) {
    case AtomicOp::add:
      return a + b;
    case AtomicOp::sub:
      return a - b;
    case AtomicOp::xchg:
      return b;
    case AtomicOp::and_:
      return a & b;
    case AtomicOp::or_:
      return a | b;
    case AtomicOp::xor_:
      return a ^ b;
    case AtomicOp::min:
      return sext(a) <= sext(b) ? a : b;
    case AtomicOp::max:
      return sext(a) >= sext(b) ? a : b;
    case AtomicOp::umin:
      return a <= b ? a : b;
    case AtomicOp::umax:
      return a >= b ? a : b;
    }
    return a;
  }

  // One indivisible read-modify-write returning the old value.
  uint64_t atomic_rmw(MemObject *obj, int64_t idx, AtomicOp op, uint64_t v,
                      int w) {
    std::atomic<uint64_t> &cell = obj->cells[size_t(idx)];
    uint64_t old = cell.load(std::memory_order_seq_cst);
    while (true) {
      uint64_t next = mask_width(atomic_apply(op, old, v, w), w);
      if (cell.compare_exchange_weak(old, next, std::memory_order_seq_cst))
        return old;
    }
  }

  void enter_block(Frame &fr, int target) {
    const PBlock &pb = fr.fn->blocks[size_t(target)];
    if (pb.phi_count > 0) {
      // All incoming values are read before any phi result is written.
      std::vector<RtVal> incoming(size_t(pb.phi_count));
      for (int i = 0; i < pb.phi_count; ++i) {
        const PInst &phi = pb.insts[size_t(i)];
        for (const auto &[pred, op] : phi.phi_in)
          if (pred == fr.block)
            incoming[size_t(i)] = fetch(op, fr);
      }
      for (int i = 0; i < pb.phi_count; ++i)
        fr.regs[size_t(pb.insts[size_t(i)].result)] = incoming[size_t(i)];
    }
    fr.block = target;
    fr.inst = pb.phi_count;
  }

  void step(ThreadCtx &t) {
    if (--budget_ < 0) {
      TrapInfo ti = trap_at(t, nullptr);
      ti.kind = TrapInfo::Kind::step_limit;
      ti.detail = "per-block step budget exhausted";
      trap_ = ti;
      t.status = Status::trapped;
      return;
    }
    Frame &fr = t.stack.back();
    const PBlock &pb = fr.fn->blocks[size_t(fr.block)];
    const PInst &pi = pb.insts[size_t(fr.inst)];

    switch (pi.op) {
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
    case Opcode::fadd:
    case Opcode::fsub:
    case Opcode::fmul:
    case Opcode::fdiv: {
      const RtVal &a = fetch(pi.ops[0], fr);
      const RtVal &b = fetch(pi.ops[1], fr);
      RtVal out;
      if (pi.lanes) {
        out.tag = RtVal::Tag::vec;
        out.width = uint8_t(pi.lanes);
        out.elem = pi.lane_kind;
        out.elem_width = uint8_t(pi.lane_width);
        for (int l = 0; l < pi.lanes; ++l) {
          uint64_t lv;
          if (!lane_binop(t, pi, a.lanes[size_t(l)], b.lanes[size_t(l)], lv))
            return;
          out.lanes[size_t(l)] = lv;
        }
      } else {
        uint64_t v;
        if (!scalar_binop(t, pi, a, b, v))
          return;
        out = pi.float_bits == 32   ? RtVal{RtVal::Tag::f32, 0,
                                          ScalarKind::Int, 0, v, {}, {}}
              : pi.float_bits == 64 ? RtVal{RtVal::Tag::f64, 0,
                                          ScalarKind::Int, 0, v, {}, {}}
                                    : RtVal::make_int(v, pi.width);
      }
      fr.regs[size_t(pi.result)] = out;
      fr.inst++;
      return;
    }
    case Opcode::icmp: {
      const RtVal &a = fetch(pi.ops[0], fr);
      const RtVal &b = fetch(pi.ops[1], fr);
      bool r = eval_icmp(pi.ipred, a, b, pi.width);
      fr.regs[size_t(pi.result)] = RtVal::make_int(r ? 1 : 0, 1);
      fr.inst++;
      return;
    }
    case Opcode::fcmp: {
      const RtVal &a = fetch(pi.ops[0], fr);
      const RtVal &b = fetch(pi.ops[1], fr);
      bool r = pi.float_bits == 32
                   ? eval_fcmp<float>(pi.fpred, a.as_f32(), b.as_f32())
                   : eval_fcmp<double>(pi.fpred, a.as_f64(), b.as_f64());
      fr.regs[size_t(pi.result)] = RtVal::make_int(r ? 1 : 0, 1);
      fr.inst++;
      return;
    }
    case Opcode::load: {
      if (pi.ops[0].kind == POperand::Kind::BuiltinVar) {
        fr.regs[size_t(pi.result)] = builtin_vector(t, pi.ops[0].var);
        fr.inst++;
        return;
      }
      const RtVal &pv = fetch(pi.ops[0], fr);
      MemObject *obj = resolve(pv.ptr, t);
      int64_t idx = check_access(t, pi, obj, pv.ptr, /*writing=*/false);
      if (idx < 0)
        return;
      RtVal out;
      if (pi.access_lanes) {
        out.tag = RtVal::Tag::vec;
        out.width = uint8_t(pi.access_lanes);
        out.elem = pi.access_kind;
        out.elem_width = uint8_t(pi.access_width);
        for (int l = 0; l < pi.access_lanes; ++l)
          out.lanes[size_t(l)] = obj->get(size_t(idx + l));
      } else if (pi.access_kind == ScalarKind::F32) {
        out.tag = RtVal::Tag::f32;
        out.bits = obj->get(size_t(idx)) & 0xffffffffull;
      } else if (pi.access_kind == ScalarKind::F64) {
        out.tag = RtVal::Tag::f64;
        out.bits = obj->get(size_t(idx));
      } else {
        out = RtVal::make_int(obj->get(size_t(idx)), pi.access_width);
      }
      fr.regs[size_t(pi.result)] = out;
      fr.inst++;
      return;
    }
    case Opcode::store: {
      const RtVal &v = fetch(pi.ops[0], fr);
      const RtVal &pv = fetch(pi.ops[1], fr);
      MemObject *obj = resolve(pv.ptr, t);
      int64_t idx = check_access(t, pi, obj, pv.ptr, /*writing=*/true);
      if (idx < 0)
        return;
      if (pi.access_lanes) {
        for (int l = 0; l < pi.access_lanes; ++l)
          obj->set(size_t(idx + l), v.lanes[size_t(l)]);
      } else {
        obj->set(size_t(idx),
                 pi.access_kind == ScalarKind::Int
                     ? mask_width(v.bits, pi.access_width)
                     : v.bits);
      }
      fr.inst++;
      return;
    }
    case Opcode::getelementptr: {
      const RtVal &base = fetch(pi.ops[0], fr);
      MemPtr mp = base.ptr;
      const RtVal &i0 = fetch(pi.ops[1], fr);
      mp.off += i0.as_signed() * pi.gep_scale0;
      if (pi.ops.size() == 3) {
        const RtVal &i1 = fetch(pi.ops[2], fr);
        mp.off += i1.as_signed() * pi.gep_scale1;
      }
      fr.regs[size_t(pi.result)] = RtVal::make_ptr(mp);
      fr.inst++;
      return;
    }
    case Opcode::call:
      exec_call(t, fr, pi);
      return;
    case Opcode::atomicrmw: {
      const RtVal &pv = fetch(pi.ops[0], fr);
      const RtVal &v = fetch(pi.ops[1], fr);
      MemObject *obj = resolve(pv.ptr, t);
      PInst shim = pi; // access info for the check
      shim.access_size = pi.width <= 8 ? 1 : pi.width / 8;
      shim.access_lanes = 0;
      int64_t idx = check_access(t, shim, obj, pv.ptr, /*writing=*/true);
      if (idx < 0)
        return;
      uint64_t old = atomic_rmw(obj, idx, pi.rmw, v.bits, pi.width);
      if (pi.result >= 0)
        fr.regs[size_t(pi.result)] = RtVal::make_int(old, pi.width);
      fr.inst++;
      return;
    }
    case Opcode::select: {
      const RtVal &c = fetch(pi.ops[0], fr);
      fr.regs[size_t(pi.result)] =
          c.bits & 1 ? fetch(pi.ops[1], fr) : fetch(pi.ops[2], fr);
      fr.inst++;
      return;
    }
    case Opcode::br: {
      int target = pi.target0;
      if (pi.target1 >= 0) {
        const RtVal &c = fetch(pi.ops[0], fr);
        target = (c.bits & 1) ? pi.target0 : pi.target1;
      }
      enter_block(fr, target);
      return;
    }
    case Opcode::ret: {
      RtVal rv;
      bool has_rv = !pi.ops.empty();
      if (has_rv)
        rv = fetch(pi.ops[0], fr);
      int ret_slot = fr.ret_slot;
      t.stack.pop_back();
      if (t.stack.empty()) {
        t.status = Status::done;
        return;
      }
      if (has_rv && ret_slot >= 0)
        t.stack.back().regs[size_t(ret_slot)] = rv;
      return;
    }
    case Opcode::sext: {
      const RtVal &a = fetch(pi.ops[0], fr);
      int64_t sv = a.as_signed();
      fr.regs[size_t(pi.result)] = RtVal::make_int(uint64_t(sv), pi.width);
      fr.inst++;
      return;
    }
    case Opcode::zext:
    case Opcode::trunc: {
      const RtVal &a = fetch(pi.ops[0], fr);
      fr.regs[size_t(pi.result)] = RtVal::make_int(a.bits, pi.width);
      fr.inst++;
      return;
    }
    case Opcode::fptosi: {
      const RtVal &a = fetch(pi.ops[0], fr);
      double d = pi.float_bits == 32 ? double(a.as_f32()) : a.as_f64();
      int64_t v;
      if (std::isnan(d)) {
        v = 0;
      } else {
        // Clamp to the destination range; conversions never trap. Both
        // bounds are exact powers of two, so the comparisons are safe even
        // where the extreme integers themselves are not representable.
        int w = pi.width;
        double bound = std::ldexp(1.0, w - 1); // 2^(w-1)
        int64_t min_v = w >= 64 ? std::numeric_limits<int64_t>::min()
                                : -(int64_t{1} << (w - 1));
        int64_t max_v = w >= 64 ? std::numeric_limits<int64_t>::max()
                                : (int64_t{1} << (w - 1)) - 1;
        d = std::trunc(d);
        v = d < -bound ? min_v : d >= bound ? max_v : int64_t(d);
      }
      fr.regs[size_t(pi.result)] = RtVal::make_int(uint64_t(v), pi.width);
      fr.inst++;
      return;
    }
    case Opcode::sitofp: {
      const RtVal &a = fetch(pi.ops[0], fr);
      int64_t sv = a.as_signed();
      fr.regs[size_t(pi.result)] = pi.float_bits == 32
                                       ? RtVal::make_f32(float(sv))
                                       : RtVal::make_f64(double(sv));
      fr.inst++;
      return;
    }
    case Opcode::bitcast: {
      const RtVal &a = fetch(pi.ops[0], fr);
      RtVal out;
      if (pi.float_bits == -1) { // pointer-to-pointer
        out = a;
      } else if (pi.access_kind == ScalarKind::F32) {
        out.tag = RtVal::Tag::f32;
        out.bits = a.bits & 0xffffffffull;
      } else if (pi.access_kind == ScalarKind::F64) {
        out.tag = RtVal::Tag::f64;
        out.bits = a.bits;
      } else {
        out = RtVal::make_int(a.bits, pi.width);
      }
      fr.regs[size_t(pi.result)] = out;
      fr.inst++;
      return;
    }
    case Opcode::extractelement: {
      const RtVal &v = fetch(pi.ops[0], fr);
      const RtVal &iv = fetch(pi.ops[1], fr);
      int64_t lane = iv.as_signed();
      if (lane < 0 || lane >= int64_t(v.width)) {
        trap(t, pi, TrapInfo::Kind::oob,
             "vector lane " + std::to_string(lane) + " out of range");
        return;
      }
      uint64_t bits = v.lanes[size_t(lane)];
      RtVal out;
      if (pi.access_kind == ScalarKind::F32) {
        out.tag = RtVal::Tag::f32;
        out.bits = bits & 0xffffffffull;
      } else if (pi.access_kind == ScalarKind::F64) {
        out.tag = RtVal::Tag::f64;
        out.bits = bits;
      } else {
        out = RtVal::make_int(bits, pi.access_width);
      }
      fr.regs[size_t(pi.result)] = out;
      fr.inst++;
      return;
    }
    case Opcode::alloca: {
      MemObject o;
      o.elem = pi.access_kind;
      o.elem_width = pi.access_width;
      o.elem_size = pi.access_size;
      o.name = "alloca";
      o.allocate(size_t(pi.width));
      t.privates.push_back(std::move(o));
      fr.regs[size_t(pi.result)] = RtVal::make_ptr(
          MemPtr{2, int32_t(t.privates.size() - 1), 0});
      fr.inst++;
      return;
    }
    default:
      trap(t, pi, TrapInfo::Kind::unresolved_callee, "unhandled opcode");
      return;
    }
  }

  void exec_call(ThreadCtx &t, Frame &fr, const PInst &pi) {
    if (pi.user_callee >= 0) {
      if (t.stack.size() >= 64) {
        trap(t, pi, TrapInfo::Kind::step_limit, "call depth exceeded");
        return;
      }
      Frame nf;
      nf.fn = &p_.funcs[size_t(pi.user_callee)];
      nf.regs.resize(size_t(nf.fn->nregs));
      for (size_t i = 0; i < pi.ops.size(); ++i)
        nf.regs[i] = fetch(pi.ops[i], fr);
      nf.ret_slot = pi.result;
      fr.inst++; // resume past the call
      t.stack.push_back(std::move(nf));
      return;
    }
    if (pi.user_callee == -2) {
      std::string name = size_t(pi.width) < p_.unresolved_names.size()
                             ? p_.unresolved_names[size_t(pi.width)]
                             : "?";
      trap(t, pi, TrapInfo::Kind::unresolved_callee,
           "@" + name + " is not a builtin of the " +
               std::string(dialect_text(p_.dialect)) + " dialect");
      return;
    }

    switch (pi.builtin.op) {
    case BuiltinQuery::Op::index: {
      int dim = pi.builtin.dim;
      if (dim < 0) {
        const RtVal &dv = fetch(pi.ops[0], fr);
        dim = int(dv.as_signed());
      }
      int64_t v = index_query_value(t, pi.builtin.kind, dim);
      fr.regs[size_t(pi.result)] =
          RtVal::make_int(uint64_t(v), pi.builtin.width);
      fr.inst++;
      return;
    }
    case BuiltinQuery::Op::barrier:
      t.barriers_executed++;
      fr.inst++; // resume after release
      t.status = Status::at_barrier;
      return;
    case BuiltinQuery::Op::math: {
      RtVal out;
      if (pi.builtin.float_bits == 32) {
        float a = fetch(pi.ops[0], fr).as_f32();
        float r;
        switch (pi.builtin.kind) {
        case BuiltinKind::Kind::sqrt:
          r = std::sqrt(a);
          break;
        case BuiltinKind::Kind::fabs:
          r = std::fabs(a);
          break;
        default:
          r = std::fma(a, fetch(pi.ops[1], fr).as_f32(),
                       fetch(pi.ops[2], fr).as_f32());
          break;
        }
        out = RtVal::make_f32(r);
      } else {
        double a = fetch(pi.ops[0], fr).as_f64();
        double r;
        switch (pi.builtin.kind) {
        case BuiltinKind::Kind::sqrt:
          r = std::sqrt(a);
          break;
        case BuiltinKind::Kind::fabs:
          r = std::fabs(a);
          break;
        default:
          r = std::fma(a, fetch(pi.ops[1], fr).as_f64(),
                       fetch(pi.ops[2], fr).as_f64());
          break;
        }
        out = RtVal::make_f64(r);
      }
      fr.regs[size_t(pi.result)] = out;
      fr.inst++;
      return;
    }
    case BuiltinQuery::Op::atomic: {
      const RtVal &pv = fetch(pi.ops[0], fr);
      const RtVal &v = fetch(pi.ops[1], fr);
      MemObject *obj = resolve(pv.ptr, t);
      PInst shim = pi;
      shim.access_size = 4; // atomic_* builtins carry the i32 prototype
      shim.access_lanes = 0;
      int64_t idx = check_access(t, shim, obj, pv.ptr, /*writing=*/true);
      if (idx < 0)
        return;
      uint64_t old = atomic_rmw(obj, idx, pi.builtin.rmw, v.bits, 32);
      if (pi.result >= 0)
        fr.regs[size_t(pi.result)] = RtVal::make_int(old, 32);
      fr.inst++;
      return;
    }
    case BuiltinQuery::Op::none:
      trap(t, pi, TrapInfo::Kind::unresolved_callee, "unresolvable call");
      return;
    }
  }

  bool scalar_binop(ThreadCtx &t, const PInst &pi, const RtVal &a,
                    const RtVal &b, uint64_t &out) {
    if (pi.float_bits == 32) {
      float x = a.as_f32(), y = b.as_f32(), r = 0;
      switch (pi.op) {
      case Opcode::fadd:
        r = x + y;
        break;
      case Opcode::fsub:
        r = x - y;
        break;
      case Opcode::fmul:
        r = x * y;
        break;
      default:
        r = x / y;
        break;
      }
      uint32_t u;
      std::memcpy(&u, &r, 4);
      out = u;
      return true;
    }
    if (pi.float_bits == 64) {
      double x = a.as_f64(), y = b.as_f64(), r = 0;
      switch (pi.op) {
      case Opcode::fadd:
        r = x + y;
        break;
      case Opcode::fsub:
        r = x - y;
        break;
      case Opcode::fmul:
        r = x * y;
        break;
      default:
        r = x / y;
        break;
      }
      std::memcpy(&out, &r, 8);
      return true;
    }
    return int_binop(t, pi, a.bits, b.bits, pi.width, out);
  }

  bool lane_binop(ThreadCtx &t, const PInst &pi, uint64_t a, uint64_t b,
                  uint64_t &out) {
    if (pi.lane_kind == ScalarKind::F32) {
      float x, y;
      uint32_t ua = uint32_t(a), ub = uint32_t(b);
      std::memcpy(&x, &ua, 4);
      std::memcpy(&y, &ub, 4);
      float r = 0;
      switch (pi.op) {
      case Opcode::fadd:
        r = x + y;
        break;
      case Opcode::fsub:
        r = x - y;
        break;
      case Opcode::fmul:
        r = x * y;
        break;
      case Opcode::fdiv:
        r = x / y;
        break;
      default:
        return int_binop(t, pi, a, b, pi.lane_width, out);
      }
      uint32_t u;
      std::memcpy(&u, &r, 4);
      out = u;
      return true;
    }
    if (pi.lane_kind == ScalarKind::F64) {
      double x, y;
      std::memcpy(&x, &a, 8);
      std::memcpy(&y, &b, 8);
      double r = 0;
      switch (pi.op) {
      case Opcode::fadd:
        r = x + y;
        break;
      case Opcode::fsub:
        r = x - y;
        break;
      case Opcode::fmul:
        r = x * y;
        break;
      case Opcode::fdiv:
        r = x / y;
        break;
      default:
        return int_binop(t, pi, a, b, pi.lane_width, out);
      }
      std::memcpy(&out, &r, 8);
      return true;
    }
    return int_binop(t, pi, a, b, pi.lane_width, out);
  }

  bool int_binop(ThreadCtx &t, const PInst &pi, uint64_t a, uint64_t b, int w,
                 uint64_t &out) {
    auto sext = [w](uint64_t v) {
      if (w >= 64)
        return int64_t(v);
      uint64_t sign = uint64_t{1} << (w - 1);
      return int64_t(v ^ sign) - int64_t(sign);
    };
    switch (pi.op) {
    case Opcode::add:
      out = mask_width(a + b, w);
      return true;
    case Opcode::sub:
      out = mask_width(a - b, w);
      return true;
    case Opcode::mul:
      out = mask_width(a * b, w);
      return true;
    case Opcode::sdiv: {
      if (b == 0) {
        trap(t, pi, TrapInfo::Kind::div_by_zero, "sdiv by zero");
        return false;
      }
      int64_t sa = sext(a), sb = sext(b);
      if (sb == -1 && sa == std::numeric_limits<int64_t>::min()) {
        trap(t, pi, TrapInfo::Kind::div_by_zero, "sdiv overflow");
        return false;
      }
      if (w < 64 && sb == -1 && sa == -(int64_t{1} << (w - 1))) {
        trap(t, pi, TrapInfo::Kind::div_by_zero, "sdiv overflow");
        return false;
      }
      out = mask_width(uint64_t(sa / sb), w);
      return true;
    }
    case Opcode::udiv:
      if (b == 0) {
        trap(t, pi, TrapInfo::Kind::div_by_zero, "udiv by zero");
        return false;
      }
      out = mask_width(a / b, w);
      return true;
    case Opcode::and_:
      out = a & b;
      return true;
    case Opcode::or_:
      out = a | b;
      return true;
    case Opcode::xor_:
      out = a ^ b;
      return true;
    case Opcode::shl:
      out = b >= uint64_t(w) ? 0 : mask_width(a << b, w);
      return true;
    case Opcode::lshr:
      out = b >= uint64_t(w) ? 0 : (a >> b);
      return true;
    case Opcode::ashr: {
      int64_t sa = sext(a);
      out = b >= uint64_t(w) ? mask_width(uint64_t(sa < 0 ? -1 : 0), w)
                             : mask_width(uint64_t(sa >> b), w);
      return true;
    }
    default:
      trap(t, pi, TrapInfo::Kind::unresolved_callee, "bad int op");
      return false;
    }
  }

  bool eval_icmp(ICmpPred p, const RtVal &a, const RtVal &b, int w) const {
    auto sext = [w](uint64_t v) {
      if (w >= 64)
        return int64_t(v);
      uint64_t sign = uint64_t{1} << (w - 1);
      return int64_t(v ^ sign) - int64_t(sign);
    };
    uint64_t ua = a.bits, ub = b.bits;
    int64_t sa = sext(ua), sb = sext(ub);
    switch (p) {
    case ICmpPred::eq:
      return ua == ub;
    case ICmpPred::ne:
      return ua != ub;
    case ICmpPred::slt:
      return sa < sb;
    case ICmpPred::sle:
      return sa <= sb;
    case ICmpPred::sgt:
      return sa > sb;
    case ICmpPred::sge:
      return sa >= sb;
    case ICmpPred::ult:
      return ua < ub;
    case ICmpPred::ule:
      return ua <= ub;
    case ICmpPred::ugt:
      return ua > ub;
    case ICmpPred::uge:
      return ua >= ub;
    }
    return false;
  }

  template <typename F> bool eval_fcmp(FCmpPred p, F x, F y) const {
    bool uno = std::isnan(x) || std::isnan(y);
    switch (p) {
    case FCmpPred::oeq:
      return !uno && x == y;
    case FCmpPred::ogt:
      return !uno && x > y;
    case FCmpPred::oge:
      return !uno && x >= y;
    case FCmpPred::olt:
      return !uno && x < y;
    case FCmpPred::ole:
      return !uno && x <= y;
    case FCmpPred::one:
      return !uno && x != y;
    case FCmpPred::ord:
      return !uno;
    case FCmpPred::ueq:
      return uno || x == y;
    case FCmpPred::ugt:
      return uno || x > y;
    case FCmpPred::uge:
      return uno || x >= y;
    case FCmpPred::ult:
      return uno || x < y;
    case FCmpPred::ule:
      return uno || x <= y;
    case FCmpPred::une:
      return uno || x != y;
    case FCmpPred::uno:
      return uno;
    }
    return false;
  }
};

} // namespace

BlockRun run_block(const Prepared &p, std::vector<MemObject> &globals,
                   const std::array<int, 3> &block_coords,
                   const Schedule &sched) {
  BlockExec exec(p, globals, block_coords);
  return exec.run(sched);
}

std::vector<BufferBinding> collect_buffers(const Prepared &p,
                                           size_t binding_count) {
  std::vector<BufferBinding> out;
  for (size_t i = 0; i < binding_count && i < p.globals.size(); ++i) {
    const MemObject &o = p.globals[i];
    BufferBinding b;
    b.arg_name = o.name;
    if (o.elem == ScalarKind::F32)
      b.elem_type = Type::float_ty(32);
    else if (o.elem == ScalarKind::F64)
      b.elem_type = Type::float_ty(64);
    else
      b.elem_type = Type::int_ty(o.elem_width);
    b.values.reserve(o.count);
    for (size_t k = 0; k < o.count; ++k)
      b.values.push_back(o.get(k));
    out.push_back(std::move(b));
  }
  return out;
}

LaunchResult run_blocks_serial(Prepared &p, const Schedule &sched,
                               size_t binding_count) {
  LaunchResult r;
  const auto &g = p.cfg.grid;
  for (int z = 0; z < g[2] && !r.trap; ++z)
    for (int y = 0; y < g[1] && !r.trap; ++y)
      for (int x = 0; x < g[0] && !r.trap; ++x) {
        BlockRun br = run_block(p, p.globals, {x, y, z}, sched);
        r.barrier_waves += br.waves;
        if (br.trap)
          r.trap = br.trap;
      }
  r.buffers = collect_buffers(p, binding_count);
  return r;
}

} // namespace detail

// ---------- public entry points ----------

LaunchOutcome launch(const Module &m, const std::string &kernel,
                     const DispatchConfig &cfg,
                     const std::vector<BufferBinding> &bindings,
                     const Schedule &sched, Engine engine) {
  LaunchOutcome out;
  Prepared p;
  if (auto err = prepare_launch(m, kernel, cfg, bindings, p)) {
    out.setup_error = err;
    return out;
  }
  if (engine == Engine::openmp && sched.mode == Schedule::Mode::canonical)
    out.result = run_blocks_openmp(p, bindings.size());
  else
    out.result = run_blocks_serial(p, sched, bindings.size());
  return out;
}

DiffOutcome differential_check(const Module &src, const Module &dst,
                               const std::string &kernel,
                               const DispatchConfig &cfg,
                               const std::vector<BufferBinding> &bindings) {
  DiffOutcome d;
  LaunchOutcome a = launch(src, kernel, cfg, bindings);
  if (!a.launched()) {
    d.kind = DiffOutcome::Kind::setup_error;
    d.error = *a.setup_error;
    return d;
  }
  if (a.result.trap) {
    d.kind = DiffOutcome::Kind::src_trap;
    d.trap = a.result.trap;
    return d;
  }
  LaunchOutcome b = launch(dst, kernel, cfg, bindings);
  if (!b.launched()) {
    d.kind = DiffOutcome::Kind::setup_error;
    d.error = *b.setup_error;
    return d;
  }
  if (b.result.trap) {
    d.kind = DiffOutcome::Kind::dst_trap;
    d.trap = b.result.trap;
    return d;
  }
  for (size_t i = 0; i < a.result.buffers.size(); ++i) {
    const auto &ba = a.result.buffers[i];
    const auto &bb = b.result.buffers[i];
    for (size_t k = 0; k < ba.values.size(); ++k) {
      if (ba.values[k] != bb.values[k]) {
        d.kind = DiffOutcome::Kind::mismatch;
        d.buffer = ba.arg_name;
        d.index = k;
        d.src_bits = ba.values[k];
        d.dst_bits = bb.values[k];
        return d;
      }
    }
  }
  d.kind = DiffOutcome::Kind::equal;
  return d;
}

} // namespace gpuir
