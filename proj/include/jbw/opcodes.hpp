#pragma once

#include <optional>
#include <set>
#include <span>
#include <variant>
#include <vector>

#include "jbw/common.hpp"
#include "jbw/constant_pool.hpp"
#include "jbw/descriptors.hpp"
#include "jbw/interning.hpp"
#include "jbw/jtypes.hpp"

namespace jbw {

// Typed literal pushed by the constant opcodes (ldc family, iconst_n, ...).
struct ConstVal {
  // Null / Int / Long / Float / Double / Str / Cls
  struct Null {
    friend bool operator==(Null, Null) { return true; }
  };
  std::variant<Null, i4, i8, float, double, std::string, ObjectType> v;

  bool is_null() const { return std::holds_alternative<Null>(v); }
  JvmType type() const {
    switch (v.index()) {
      case 1:
        return JvmType::Int;
      case 2:
        return JvmType::Long;
      case 3:
        return JvmType::Float;
      case 4:
        return JvmType::Double;
      default:
        return JvmType::Object;
    }
  }
  friend bool operator==(const ConstVal& a, const ConstVal& b) = default;
};

enum class ArithOp : u1 { Add, Sub, Mul, Div, Rem, Neg, Shl, Shr, UShr, And, Or, Xor };
enum class CmpKind : u1 { LCmp, FCmpL, FCmpG, DCmpL, DCmpG };
enum class ConvTarget : u1 { Int, Long, Float, Double, Byte, Char, Short };
enum class IfCond : u1 {
  Eq0, Ne0, Lt0, Ge0, Gt0, Le0,            // int against zero
  ICmpEq, ICmpNe, ICmpLt, ICmpGe, ICmpGt, ICmpLe,  // int against int
  ACmpEq, ACmpNe,                          // reference equality
  Null, NonNull,                           // reference against null
};
enum class InvokeKind : u1 { Virtual, Interface, Special, Static };

// Instruction families. Variants of one JVM instruction that differ only in
// operand type or immediate width collapse into one family carrying the type
// as a field; wide forms renormalize into the same family.
namespace op {

struct Nop {
  friend bool operator==(const Nop&, const Nop&) = default;
};
struct Const {
  ConstVal value;
  friend bool operator==(const Const&, const Const&) = default;
};
struct Load {
  JvmType type;
  u2 index;
  friend bool operator==(const Load&, const Load&) = default;
};
struct Store {
  JvmType type;
  u2 index;
  friend bool operator==(const Store&, const Store&) = default;
};
struct IInc {
  u2 index;
  i2 delta;
  friend bool operator==(const IInc&, const IInc&) = default;
};
struct ArrayLoad {
  JvmArrayType type;
  friend bool operator==(const ArrayLoad&, const ArrayLoad&) = default;
};
struct ArrayStore {
  JvmArrayType type;
  friend bool operator==(const ArrayStore&, const ArrayStore&) = default;
};
struct ArrayLength {
  friend bool operator==(const ArrayLength&, const ArrayLength&) = default;
};
struct Pop {
  friend bool operator==(const Pop&, const Pop&) = default;
};
struct Pop2 {
  friend bool operator==(const Pop2&, const Pop2&) = default;
};
struct Dup {
  friend bool operator==(const Dup&, const Dup&) = default;
};
struct DupX1 {
  friend bool operator==(const DupX1&, const DupX1&) = default;
};
struct DupX2 {
  friend bool operator==(const DupX2&, const DupX2&) = default;
};
struct Dup2 {
  friend bool operator==(const Dup2&, const Dup2&) = default;
};
struct Dup2X1 {
  friend bool operator==(const Dup2X1&, const Dup2X1&) = default;
};
struct Dup2X2 {
  friend bool operator==(const Dup2X2&, const Dup2X2&) = default;
};
struct Swap {
  friend bool operator==(const Swap&, const Swap&) = default;
};
struct Arith {
  ArithOp op;
  JvmBasicType type;
  friend bool operator==(const Arith&, const Arith&) = default;
};
struct Conv {
  JvmBasicType from;
  ConvTarget to;
  friend bool operator==(const Conv&, const Conv&) = default;
};
struct Cmp {
  CmpKind kind;
  friend bool operator==(const Cmp&, const Cmp&) = default;
};
struct If {
  IfCond cond;
  u4 target;
  friend bool operator==(const If&, const If&) = default;
};
struct Goto {
  u4 target;
  friend bool operator==(const Goto&, const Goto&) = default;
};
struct Jsr {
  u4 target;
  friend bool operator==(const Jsr&, const Jsr&) = default;
};
struct Ret {
  u2 index;
  friend bool operator==(const Ret&, const Ret&) = default;
};
struct TableSwitch {
  u4 default_target;
  i4 low = 0, high = -1;
  std::vector<u4> targets;
  friend bool operator==(const TableSwitch&, const TableSwitch&) = default;
};
struct LookupSwitch {
  u4 default_target;
  std::vector<std::pair<i4, u4>> pairs;
  friend bool operator==(const LookupSwitch&, const LookupSwitch&) = default;
};
struct Return {
  std::optional<JvmType> type;  // nullopt = void
  friend bool operator==(const Return&, const Return&) = default;
};
struct FieldOp {
  bool is_static;
  bool is_put;
  ClassNameId owner;
  FieldSigId sig;
  friend bool operator==(const FieldOp&, const FieldOp&) = default;
};
struct Invoke {
  InvokeKind kind;
  ObjectType owner;  // array receivers are legal for invokevirtual
  MethodSigId sig;
  friend bool operator==(const Invoke&, const Invoke&) = default;
};
struct New {
  ClassNameId cls;
  friend bool operator==(const New&, const New&) = default;
};
struct NewArray {
  ObjectType array_type;  // the array type being created
  u1 dims;                // dimension counts popped from the stack
  friend bool operator==(const NewArray&, const NewArray&) = default;
};
struct Throw {
  friend bool operator==(const Throw&, const Throw&) = default;
};
struct CheckCast {
  ObjectType type;
  friend bool operator==(const CheckCast&, const CheckCast&) = default;
};
struct InstanceOf {
  ObjectType type;
  friend bool operator==(const InstanceOf&, const InstanceOf&) = default;
};
struct MonitorEnter {
  friend bool operator==(const MonitorEnter&, const MonitorEnter&) = default;
};
struct MonitorExit {
  friend bool operator==(const MonitorExit&, const MonitorExit&) = default;
};

}  // namespace op

using Instr = std::variant<op::Nop, op::Const, op::Load, op::Store, op::IInc, op::ArrayLoad,
                           op::ArrayStore, op::ArrayLength, op::Pop, op::Pop2, op::Dup, op::DupX1,
                           op::DupX2, op::Dup2, op::Dup2X1, op::Dup2X2, op::Swap, op::Arith,
                           op::Conv, op::Cmp, op::If, op::Goto, op::Jsr, op::Ret, op::TableSwitch,
                           op::LookupSwitch, op::Return, op::FieldOp, op::Invoke, op::New,
                           op::NewArray, op::Throw, op::CheckCast, op::InstanceOf,
                           op::MonitorEnter, op::MonitorExit>;

template <class T>
const T* instr_as(const Instr& i) {
  return std::get_if<T>(&i);
}
template <class T>
bool instr_is(const Instr& i) {
  return std::holds_alternative<T>(i);
}

struct PcInstr {
  u4 pc = 0;
  u4 byte_len = 0;  // 0 for synthesized instructions (no original encoding)
  Instr instr;

  friend bool operator==(const PcInstr& a, const PcInstr& b) {
    return a.pc == b.pc && a.instr == b.instr;  // byte_len is an encoding hint
  }
};

// Branch targets of one instruction (jumps only; not fallthrough).
inline std::vector<u4> branch_targets(const Instr& in) {
  std::vector<u4> out;
  if (auto* i = instr_as<op::If>(in)) out.push_back(i->target);
  if (auto* g = instr_as<op::Goto>(in)) out.push_back(g->target);
  if (auto* j = instr_as<op::Jsr>(in)) out.push_back(j->target);
  if (auto* t = instr_as<op::TableSwitch>(in)) {
    out.push_back(t->default_target);
    out.insert(out.end(), t->targets.begin(), t->targets.end());
  }
  if (auto* l = instr_as<op::LookupSwitch>(in)) {
    out.push_back(l->default_target);
    for (auto& [k, tgt] : l->pairs) out.push_back(tgt);
  }
  return out;
}

inline bool falls_through(const Instr& in) {
  return !(instr_is<op::Goto>(in) || instr_is<op::TableSwitch>(in) ||
           instr_is<op::LookupSwitch>(in) || instr_is<op::Return>(in) ||
           instr_is<op::Throw>(in) || instr_is<op::Ret>(in));
}

namespace decode_detail {

inline JvmType load_store_type(int group) {
  switch (group) {
    case 0:
      return JvmType::Int;
    case 1:
      return JvmType::Long;
    case 2:
      return JvmType::Float;
    case 3:
      return JvmType::Double;
    default:
      return JvmType::Object;
  }
}

inline JvmArrayType array_type_for(int offset) {
  // order of the typed array opcodes: i l f d a b c s
  switch (offset) {
    case 0:
      return JvmArrayType::Int;
    case 1:
      return JvmArrayType::Long;
    case 2:
      return JvmArrayType::Float;
    case 3:
      return JvmArrayType::Double;
    case 4:
      return JvmArrayType::Object;
    case 5:
      return JvmArrayType::ByteBool;
    case 6:
      return JvmArrayType::Char;
    default:
      return JvmArrayType::Short;
  }
}

inline JvmBasicType arith_type(int offset) {
  switch (offset) {
    case 0:
      return JvmBasicType::Int;
    case 1:
      return JvmBasicType::Long;
    case 2:
      return JvmBasicType::Float;
    default:
      return JvmBasicType::Double;
  }
}

inline ConstVal ldc_value(const ConstantPool& cp, u2 idx, InternPool& pool, bool wide2) {
  const CpEntry& e = cp.raw(idx);
  switch (e.tag) {
    case CpTag::Integer:
      if (wide2) break;
      return ConstVal{e.int_value};
    case CpTag::Float:
      if (wide2) break;
      return ConstVal{e.float_value};
    case CpTag::String:
      if (wide2) break;
      return ConstVal{cp.utf8(e.index_a)};
    case CpTag::Class:
      if (wide2) break;
      return ConstVal{parse_class_entry(cp.class_internal(idx), pool)};
    case CpTag::Long:
      if (!wide2) break;
      return ConstVal{e.long_value};
    case CpTag::Double:
      if (!wide2) break;
      return ConstVal{e.double_value};
    default:
      break;
  }
  throw ParseError("ldc refers to unsupported constant tag " +
                       std::to_string(static_cast<int>(e.tag)),
                   0);
}

inline op::FieldOp field_op(const ConstantPool& cp, u2 idx, InternPool& pool, bool is_static,
                            bool is_put) {
  const CpEntry& ref = cp.at(idx, CpTag::Fieldref);
  auto [name, desc] = cp.name_and_type(ref.index_b);
  ObjectType owner = parse_class_entry(cp.class_internal(ref.index_a), pool);
  if (!owner.is_class()) throw ParseError("field owner cannot be an array type", 0);
  FieldSig sig{*name, parse_field_descriptor(*desc, pool)};
  return op::FieldOp{is_static, is_put, owner.class_name(), pool.field_sig(sig)};
}

inline op::Invoke invoke_op(const ConstantPool& cp, u2 idx, InternPool& pool, InvokeKind kind) {
  CpTag expect = kind == InvokeKind::Interface ? CpTag::InterfaceMethodref : CpTag::Methodref;
  const CpEntry& ref = cp.at(idx, expect);
  auto [name, desc] = cp.name_and_type(ref.index_b);
  ObjectType owner = parse_class_entry(cp.class_internal(ref.index_a), pool);
  MethodSig sig = parse_method_descriptor(*name, *desc, pool);
  return op::Invoke{kind, owner, pool.method_sig(sig)};
}

}  // namespace decode_detail

// Decodes a code array into the factorized instruction list. Every branch
// target is validated to land on a decoded instruction boundary.
inline std::vector<PcInstr> decode_code(std::span<const u1> code, const ConstantPool& cp,
                                        InternPool& pool) {
  using namespace decode_detail;
  std::vector<PcInstr> out;
  std::set<u4> starts;
  ByteReader r(code);

  while (!r.at_end()) {
    u4 pc = static_cast<u4>(r.offset());
    starts.insert(pc);
    u1 b;
    try {
      b = r.read_u1();
    } catch (const ParseError&) {
      throw DecodeError("truncated opcode", pc);
    }
    Instr instr;
    try {
      if (b == 0x00) {
        instr = op::Nop{};
      } else if (b == 0x01) {
        instr = op::Const{ConstVal{ConstVal::Null{}}};
      } else if (b >= 0x02 && b <= 0x08) {
        instr = op::Const{ConstVal{static_cast<i4>(b) - 3}};
      } else if (b <= 0x0a) {
        instr = op::Const{ConstVal{static_cast<i8>(b - 0x09)}};
      } else if (b <= 0x0d) {
        instr = op::Const{ConstVal{static_cast<float>(b - 0x0b)}};
      } else if (b <= 0x0f) {
        instr = op::Const{ConstVal{static_cast<double>(b - 0x0e)}};
      } else if (b == 0x10) {
        instr = op::Const{ConstVal{static_cast<i4>(r.read_i1())}};
      } else if (b == 0x11) {
        instr = op::Const{ConstVal{static_cast<i4>(r.read_i2())}};
      } else if (b == 0x12) {
        instr = op::Const{ldc_value(cp, r.read_u1(), pool, false)};
      } else if (b == 0x13) {
        instr = op::Const{ldc_value(cp, r.read_u2(), pool, false)};
      } else if (b == 0x14) {
        instr = op::Const{ldc_value(cp, r.read_u2(), pool, true)};
      } else if (b >= 0x15 && b <= 0x19) {
        instr = op::Load{load_store_type(b - 0x15), r.read_u1()};
      } else if (b >= 0x1a && b <= 0x2d) {
        instr = op::Load{load_store_type((b - 0x1a) / 4), static_cast<u2>((b - 0x1a) % 4)};
      } else if (b >= 0x2e && b <= 0x35) {
        instr = op::ArrayLoad{array_type_for(b - 0x2e)};
      } else if (b >= 0x36 && b <= 0x3a) {
        instr = op::Store{load_store_type(b - 0x36), r.read_u1()};
      } else if (b >= 0x3b && b <= 0x4e) {
        instr = op::Store{load_store_type((b - 0x3b) / 4), static_cast<u2>((b - 0x3b) % 4)};
      } else if (b >= 0x4f && b <= 0x56) {
        instr = op::ArrayStore{array_type_for(b - 0x4f)};
      } else if (b == 0x57) {
        instr = op::Pop{};
      } else if (b == 0x58) {
        instr = op::Pop2{};
      } else if (b == 0x59) {
        instr = op::Dup{};
      } else if (b == 0x5a) {
        instr = op::DupX1{};
      } else if (b == 0x5b) {
        instr = op::DupX2{};
      } else if (b == 0x5c) {
        instr = op::Dup2{};
      } else if (b == 0x5d) {
        instr = op::Dup2X1{};
      } else if (b == 0x5e) {
        instr = op::Dup2X2{};
      } else if (b == 0x5f) {
        instr = op::Swap{};
      } else if (b >= 0x60 && b <= 0x73) {
        static const ArithOp ops[] = {ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div,
                                      ArithOp::Rem};
        instr = op::Arith{ops[(b - 0x60) / 4], arith_type((b - 0x60) % 4)};
      } else if (b >= 0x74 && b <= 0x77) {
        instr = op::Arith{ArithOp::Neg, arith_type(b - 0x74)};
      } else if (b >= 0x78 && b <= 0x7d) {
        static const ArithOp ops[] = {ArithOp::Shl, ArithOp::Shr, ArithOp::UShr};
        instr = op::Arith{ops[(b - 0x78) / 2],
                          (b - 0x78) % 2 ? JvmBasicType::Long : JvmBasicType::Int};
      } else if (b >= 0x7e && b <= 0x83) {
        static const ArithOp ops[] = {ArithOp::And, ArithOp::Or, ArithOp::Xor};
        instr = op::Arith{ops[(b - 0x7e) / 2],
                          (b - 0x7e) % 2 ? JvmBasicType::Long : JvmBasicType::Int};
      } else if (b == 0x84) {
        u2 idx = r.read_u1();
        instr = op::IInc{idx, static_cast<i2>(r.read_i1())};
      } else if (b >= 0x85 && b <= 0x90) {
        static const JvmBasicType from[] = {JvmBasicType::Int, JvmBasicType::Long,
                                            JvmBasicType::Float, JvmBasicType::Double};
        static const ConvTarget to[4][3] = {
            {ConvTarget::Long, ConvTarget::Float, ConvTarget::Double},
            {ConvTarget::Int, ConvTarget::Float, ConvTarget::Double},
            {ConvTarget::Int, ConvTarget::Long, ConvTarget::Double},
            {ConvTarget::Int, ConvTarget::Long, ConvTarget::Float}};
        instr = op::Conv{from[(b - 0x85) / 3], to[(b - 0x85) / 3][(b - 0x85) % 3]};
      } else if (b >= 0x91 && b <= 0x93) {
        static const ConvTarget to[] = {ConvTarget::Byte, ConvTarget::Char, ConvTarget::Short};
        instr = op::Conv{JvmBasicType::Int, to[b - 0x91]};
      } else if (b >= 0x94 && b <= 0x98) {
        static const CmpKind kinds[] = {CmpKind::LCmp, CmpKind::FCmpL, CmpKind::FCmpG,
                                        CmpKind::DCmpL, CmpKind::DCmpG};
        instr = op::Cmp{kinds[b - 0x94]};
      } else if (b >= 0x99 && b <= 0xa6) {
        static const IfCond conds[] = {IfCond::Eq0, IfCond::Ne0, IfCond::Lt0, IfCond::Ge0,
                                       IfCond::Gt0, IfCond::Le0, IfCond::ICmpEq, IfCond::ICmpNe,
                                       IfCond::ICmpLt, IfCond::ICmpGe, IfCond::ICmpGt,
                                       IfCond::ICmpLe, IfCond::ACmpEq, IfCond::ACmpNe};
        i2 off = r.read_i2();
        instr = op::If{conds[b - 0x99], static_cast<u4>(pc + off)};
      } else if (b == 0xa7) {
        instr = op::Goto{static_cast<u4>(pc + r.read_i2())};
      } else if (b == 0xa8) {
        instr = op::Jsr{static_cast<u4>(pc + r.read_i2())};
      } else if (b == 0xa9) {
        instr = op::Ret{r.read_u1()};
      } else if (b == 0xaa) {
        r.skip((4 - ((pc + 1) % 4)) % 4);
        op::TableSwitch t;
        t.default_target = static_cast<u4>(pc + r.read_i4());
        t.low = r.read_i4();
        t.high = r.read_i4();
        if (t.high < t.low) throw DecodeError("tableswitch high < low", pc);
        if (static_cast<i8>(t.high) - t.low >= 1 << 20)
          throw DecodeError("tableswitch too large", pc);
        for (i8 i = t.low; i <= t.high; ++i)
          t.targets.push_back(static_cast<u4>(pc + r.read_i4()));
        instr = std::move(t);
      } else if (b == 0xab) {
        r.skip((4 - ((pc + 1) % 4)) % 4);
        op::LookupSwitch l;
        l.default_target = static_cast<u4>(pc + r.read_i4());
        i4 n = r.read_i4();
        if (n < 0) throw DecodeError("lookupswitch negative pair count", pc);
        for (i4 i = 0; i < n; ++i) {
          i4 key = r.read_i4();
          l.pairs.emplace_back(key, static_cast<u4>(pc + r.read_i4()));
        }
        instr = std::move(l);
      } else if (b >= 0xac && b <= 0xb0) {
        instr = op::Return{load_store_type(b - 0xac)};
      } else if (b == 0xb1) {
        instr = op::Return{std::nullopt};
      } else if (b >= 0xb2 && b <= 0xb5) {
        instr = field_op(cp, r.read_u2(), pool, /*is_static=*/b <= 0xb3,
                         /*is_put=*/(b == 0xb3 || b == 0xb5));
      } else if (b == 0xb6) {
        instr = invoke_op(cp, r.read_u2(), pool, InvokeKind::Virtual);
      } else if (b == 0xb7) {
        instr = invoke_op(cp, r.read_u2(), pool, InvokeKind::Special);
      } else if (b == 0xb8) {
        instr = invoke_op(cp, r.read_u2(), pool, InvokeKind::Static);
      } else if (b == 0xb9) {
        op::Invoke inv = invoke_op(cp, r.read_u2(), pool, InvokeKind::Interface);
        r.read_u1();  // historical count operand
        if (r.read_u1() != 0) throw DecodeError("invokeinterface fourth byte must be zero", pc);
        instr = inv;
      } else if (b == 0xba) {
        throw DecodeError("invokedynamic is not part of the supported instruction set", pc);
      } else if (b == 0xbb) {
        ObjectType t = parse_class_entry(cp.class_internal(r.read_u2()), pool);
        if (!t.is_class()) throw DecodeError("new of an array type", pc);
        instr = op::New{t.class_name()};
      } else if (b == 0xbc) {
        static const JavaBasicType prim[] = {JavaBasicType::Bool, JavaBasicType::Char,
                                             JavaBasicType::Float, JavaBasicType::Double,
                                             JavaBasicType::Byte, JavaBasicType::Short,
                                             JavaBasicType::Int, JavaBasicType::Long};
        u1 atype = r.read_u1();
        if (atype < 4 || atype > 11) throw DecodeError("bad newarray element type", pc);
        instr = op::NewArray{ObjectType::array(prim[atype - 4]), 1};
      } else if (b == 0xbd) {
        ObjectType elem = parse_class_entry(cp.class_internal(r.read_u2()), pool);
        instr = op::NewArray{ObjectType::array(ValueType(elem)), 1};
      } else if (b == 0xbe) {
        instr = op::ArrayLength{};
      } else if (b == 0xbf) {
        instr = op::Throw{};
      } else if (b == 0xc0) {
        instr = op::CheckCast{parse_class_entry(cp.class_internal(r.read_u2()), pool)};
      } else if (b == 0xc1) {
        instr = op::InstanceOf{parse_class_entry(cp.class_internal(r.read_u2()), pool)};
      } else if (b == 0xc2) {
        instr = op::MonitorEnter{};
      } else if (b == 0xc3) {
        instr = op::MonitorExit{};
      } else if (b == 0xc4) {
        u1 w = r.read_u1();
        if (w >= 0x15 && w <= 0x19) {
          instr = op::Load{load_store_type(w - 0x15), r.read_u2()};
        } else if (w >= 0x36 && w <= 0x3a) {
          instr = op::Store{load_store_type(w - 0x36), r.read_u2()};
        } else if (w == 0x84) {
          u2 idx = r.read_u2();
          instr = op::IInc{idx, r.read_i2()};
        } else if (w == 0xa9) {
          instr = op::Ret{r.read_u2()};
        } else {
          throw DecodeError("bad wide prefix target " + std::to_string(w), pc);
        }
      } else if (b == 0xc5) {
        ObjectType t = parse_class_entry(cp.class_internal(r.read_u2()), pool);
        u1 dims = r.read_u1();
        if (dims == 0) throw DecodeError("multianewarray with zero dimensions", pc);
        if (!t.is_array() || t.dims() < dims)
          throw DecodeError("multianewarray type has fewer dimensions than operand", pc);
        instr = op::NewArray{t, dims};
      } else if (b == 0xc6) {
        instr = op::If{IfCond::Null, static_cast<u4>(pc + r.read_i2())};
      } else if (b == 0xc7) {
        instr = op::If{IfCond::NonNull, static_cast<u4>(pc + r.read_i2())};
      } else if (b == 0xc8) {
        instr = op::Goto{static_cast<u4>(pc + r.read_i4())};
      } else if (b == 0xc9) {
        instr = op::Jsr{static_cast<u4>(pc + r.read_i4())};
      } else {
        throw DecodeError("unknown opcode byte " + std::to_string(b), pc);
      }
    } catch (const ParseError& e) {
      throw DecodeError(e.what(), pc);
    }
    out.push_back(PcInstr{pc, static_cast<u4>(r.offset() - pc), std::move(instr)});
  }

  for (const auto& pi : out)
    for (u4 t : branch_targets(pi.instr))
      if (!starts.contains(t))
        throw DecodeError("branch target " + std::to_string(t) + " is not an instruction start",
                          pi.pc);
  return out;
}

}  // namespace jbw
