#pragma once

#include <map>

#include "jbw/opcodes.hpp"

namespace jbw {

// Encoding of instruction lists back to code arrays. Instructions decoded
// from real bytes carry their original byte_len and are re-encoded in a form
// of exactly that width, so pcs never move and pc-relative data in opaque
// attributes stays valid. Synthesized instructions (byte_len == 0) take the
// shortest canonical form.
namespace encode_detail {

inline u1 load_group(JvmType t) {
  switch (t) {
    case JvmType::Int:
      return 0;
    case JvmType::Long:
      return 1;
    case JvmType::Float:
      return 2;
    case JvmType::Double:
      return 3;
    case JvmType::Object:
      return 4;
  }
  return 0;
}

inline u1 array_group(JvmArrayType t) {
  switch (t) {
    case JvmArrayType::Int:
      return 0;
    case JvmArrayType::Long:
      return 1;
    case JvmArrayType::Float:
      return 2;
    case JvmArrayType::Double:
      return 3;
    case JvmArrayType::Object:
      return 4;
    case JvmArrayType::ByteBool:
      return 5;
    case JvmArrayType::Char:
      return 6;
    case JvmArrayType::Short:
      return 7;
  }
  return 0;
}

inline u1 arith_group(JvmBasicType t) { return static_cast<u1>(t); }

inline u4 const_len(const ConstVal& v, u4 want) {
  if (want != 0) return want;
  if (v.is_null()) return 1;
  if (auto* i = std::get_if<i4>(&v.v)) {
    if (*i >= -1 && *i <= 5) return 1;
    if (*i >= -128 && *i <= 127) return 2;
    if (*i >= -32768 && *i <= 32767) return 3;
    return 3;  // ldc_w
  }
  if (auto* l = std::get_if<i8>(&v.v)) return (*l == 0 || *l == 1) ? 1 : 3;
  if (auto* f = std::get_if<float>(&v.v)) return (*f == 0.0f || *f == 1.0f || *f == 2.0f) ? 1 : 3;
  if (auto* d = std::get_if<double>(&v.v)) return (*d == 0.0 || *d == 1.0) ? 1 : 3;
  return 3;  // string/class via ldc_w
}

inline u4 switch_pad(u4 pc) { return (4 - ((pc + 1) % 4)) % 4; }

}  // namespace encode_detail

// Length the instruction will occupy when encoded at `pc` (honours byte_len
// when present).
inline u4 encoded_length(const PcInstr& pi, u4 pc) {
  using namespace encode_detail;
  if (pi.byte_len != 0 && !instr_is<op::TableSwitch>(pi.instr) &&
      !instr_is<op::LookupSwitch>(pi.instr))
    return pi.byte_len;
  const Instr& in = pi.instr;
  if (auto* c = instr_as<op::Const>(in)) return const_len(c->value, pi.byte_len);
  if (auto* l = instr_as<op::Load>(in)) return l->index <= 3 ? 1 : (l->index <= 255 ? 2 : 4);
  if (auto* s = instr_as<op::Store>(in)) return s->index <= 3 ? 1 : (s->index <= 255 ? 2 : 4);
  if (auto* i = instr_as<op::IInc>(in))
    return (i->index <= 255 && i->delta >= -128 && i->delta <= 127) ? 3 : 6;
  if (instr_is<op::If>(in)) return 3;
  if (instr_is<op::Goto>(in) || instr_is<op::Jsr>(in)) return 3;
  if (auto* r = instr_as<op::Ret>(in)) return r->index <= 255 ? 2 : 4;
  if (auto* t = instr_as<op::TableSwitch>(in))
    return 1 + switch_pad(pc) + 12 + 4 * static_cast<u4>(t->targets.size());
  if (auto* l = instr_as<op::LookupSwitch>(in))
    return 1 + switch_pad(pc) + 8 + 8 * static_cast<u4>(l->pairs.size());
  if (instr_is<op::FieldOp>(in) || instr_is<op::New>(in) || instr_is<op::CheckCast>(in) ||
      instr_is<op::InstanceOf>(in))
    return 3;
  if (auto* v = instr_as<op::Invoke>(in)) return v->kind == InvokeKind::Interface ? 5 : 3;
  if (auto* n = instr_as<op::NewArray>(in)) {
    if (n->dims == 1 && n->array_type.dims() == 1 && n->array_type.element().is_basic()) return 2;
    if (n->dims == 1 && n->array_type.dims() >= 1 && n->array_type.element().is_object()) return 3;
    return 4;
  }
  return 1;
}

// Rebuilds pcs for a synthesized instruction sequence. Branch targets are
// interpreted as the *old* pcs found in the input list and remapped to the
// new layout. Switch padding makes lengths pc-dependent, so iterate to a
// fixpoint.
inline std::vector<PcInstr> relayout_code(std::vector<PcInstr> instrs) {
  std::vector<u4> new_pcs(instrs.size(), 0);
  for (int round = 0; round < 8; ++round) {
    bool changed = false;
    u4 pc = 0;
    for (std::size_t i = 0; i < instrs.size(); ++i) {
      if (new_pcs[i] != pc) {
        new_pcs[i] = pc;
        changed = true;
      }
      pc += encoded_length(instrs[i], pc);
    }
    if (!changed) break;
  }
  std::map<u4, u4> remap;
  for (std::size_t i = 0; i < instrs.size(); ++i) remap[instrs[i].pc] = new_pcs[i];
  auto fix = [&](u4 t) {
    auto it = remap.find(t);
    if (it == remap.end()) throw EncodeError("branch target lost during relayout");
    return it->second;
  };
  for (std::size_t i = 0; i < instrs.size(); ++i) {
    Instr& in = instrs[i].instr;
    if (auto* f = std::get_if<op::If>(&in)) f->target = fix(f->target);
    if (auto* g = std::get_if<op::Goto>(&in)) g->target = fix(g->target);
    if (auto* j = std::get_if<op::Jsr>(&in)) j->target = fix(j->target);
    if (auto* t = std::get_if<op::TableSwitch>(&in)) {
      t->default_target = fix(t->default_target);
      for (auto& tgt : t->targets) tgt = fix(tgt);
    }
    if (auto* l = std::get_if<op::LookupSwitch>(&in)) {
      l->default_target = fix(l->default_target);
      for (auto& [k, tgt] : l->pairs) tgt = fix(tgt);
    }
    instrs[i].pc = new_pcs[i];
    instrs[i].byte_len = 0;
  }
  return instrs;
}

// Serializes instructions into a code array using the given pool builder for
// constant references. Instruction pcs must already be laid out consistently
// (as produced by decode_code or relayout_code).
inline std::vector<u1> encode_code(const std::vector<PcInstr>& instrs, CpBuilder& cp,
                                   const InternPool& pool) {
  using namespace encode_detail;
  ByteWriter w;

  auto branch16 = [&](u4 pc, u4 target) {
    i8 off = static_cast<i8>(target) - pc;
    if (off < -32768 || off > 32767)
      throw EncodeError("branch offset out of 16-bit range at pc " + std::to_string(pc));
    w.write_i2(static_cast<i2>(off));
  };

  for (const auto& pi : instrs) {
    u4 pc = pi.pc;
    if (w.size() != pc)
      throw EncodeError("instruction layout mismatch at pc " + std::to_string(pc) +
                        " (writer at " + std::to_string(w.size()) + ")");
    u4 len = encoded_length(pi, pc);
    const Instr& in = pi.instr;

    if (instr_is<op::Nop>(in)) {
      w.write_u1(0x00);
    } else if (auto* c = instr_as<op::Const>(in)) {
      const ConstVal& v = c->value;
      if (v.is_null()) {
        w.write_u1(0x01);
      } else if (auto* i = std::get_if<i4>(&v.v)) {
        if (len == 1) {
          w.write_u1(static_cast<u1>(0x03 + *i));
        } else if (len == 2 && *i >= -128 && *i <= 127) {
          w.write_u1(0x10);
          w.write_i1(static_cast<i1>(*i));
        } else if (len == 3 && *i >= -32768 && *i <= 32767) {
          w.write_u1(0x11);
          w.write_i2(static_cast<i2>(*i));
        } else {
          u2 idx = cp.add_integer(*i);
          if (len == 2) {
            if (idx > 255) throw EncodeError("ldc index exceeds original 1-byte form");
            w.write_u1(0x12);
            w.write_u1(static_cast<u1>(idx));
          } else {
            w.write_u1(0x13);
            w.write_u2(idx);
          }
        }
      } else if (auto* l = std::get_if<i8>(&v.v)) {
        if (len == 1) {
          w.write_u1(static_cast<u1>(0x09 + *l));
        } else {
          w.write_u1(0x14);
          w.write_u2(cp.add_long(*l));
        }
      } else if (auto* f = std::get_if<float>(&v.v)) {
        if (len == 1) {
          w.write_u1(static_cast<u1>(0x0b + static_cast<int>(*f)));
        } else {
          u2 idx = cp.add_float(*f);
          if (len == 2) {
            if (idx > 255) throw EncodeError("ldc index exceeds original 1-byte form");
            w.write_u1(0x12);
            w.write_u1(static_cast<u1>(idx));
          } else {
            w.write_u1(0x13);
            w.write_u2(idx);
          }
        }
      } else if (auto* d = std::get_if<double>(&v.v)) {
        if (len == 1) {
          w.write_u1(static_cast<u1>(0x0e + static_cast<int>(*d)));
        } else {
          w.write_u1(0x14);
          w.write_u2(cp.add_double(*d));
        }
      } else if (auto* s = std::get_if<std::string>(&v.v)) {
        u2 idx = cp.add_string(*s);
        if (len == 2) {
          if (idx > 255) throw EncodeError("ldc index exceeds original 1-byte form");
          w.write_u1(0x12);
          w.write_u1(static_cast<u1>(idx));
        } else {
          w.write_u1(0x13);
          w.write_u2(idx);
        }
      } else {
        const ObjectType& t = std::get<ObjectType>(v.v);
        u2 idx = cp.add_class(print_class_entry(t, pool));
        if (len == 2) {
          if (idx > 255) throw EncodeError("ldc index exceeds original 1-byte form");
          w.write_u1(0x12);
          w.write_u1(static_cast<u1>(idx));
        } else {
          w.write_u1(0x13);
          w.write_u2(idx);
        }
      }
    } else if (auto* l = instr_as<op::Load>(in)) {
      if (len == 1) {
        w.write_u1(static_cast<u1>(0x1a + 4 * load_group(l->type) + l->index));
      } else if (len == 2) {
        w.write_u1(static_cast<u1>(0x15 + load_group(l->type)));
        w.write_u1(static_cast<u1>(l->index));
      } else {
        w.write_u1(0xc4);
        w.write_u1(static_cast<u1>(0x15 + load_group(l->type)));
        w.write_u2(l->index);
      }
    } else if (auto* s = instr_as<op::Store>(in)) {
      if (len == 1) {
        w.write_u1(static_cast<u1>(0x3b + 4 * load_group(s->type) + s->index));
      } else if (len == 2) {
        w.write_u1(static_cast<u1>(0x36 + load_group(s->type)));
        w.write_u1(static_cast<u1>(s->index));
      } else {
        w.write_u1(0xc4);
        w.write_u1(static_cast<u1>(0x36 + load_group(s->type)));
        w.write_u2(s->index);
      }
    } else if (auto* i = instr_as<op::IInc>(in)) {
      if (len == 3) {
        w.write_u1(0x84);
        w.write_u1(static_cast<u1>(i->index));
        w.write_i1(static_cast<i1>(i->delta));
      } else {
        w.write_u1(0xc4);
        w.write_u1(0x84);
        w.write_u2(i->index);
        w.write_i2(i->delta);
      }
    } else if (auto* a = instr_as<op::ArrayLoad>(in)) {
      w.write_u1(static_cast<u1>(0x2e + array_group(a->type)));
    } else if (auto* a = instr_as<op::ArrayStore>(in)) {
      w.write_u1(static_cast<u1>(0x4f + array_group(a->type)));
    } else if (instr_is<op::ArrayLength>(in)) {
      w.write_u1(0xbe);
    } else if (instr_is<op::Pop>(in)) {
      w.write_u1(0x57);
    } else if (instr_is<op::Pop2>(in)) {
      w.write_u1(0x58);
    } else if (instr_is<op::Dup>(in)) {
      w.write_u1(0x59);
    } else if (instr_is<op::DupX1>(in)) {
      w.write_u1(0x5a);
    } else if (instr_is<op::DupX2>(in)) {
      w.write_u1(0x5b);
    } else if (instr_is<op::Dup2>(in)) {
      w.write_u1(0x5c);
    } else if (instr_is<op::Dup2X1>(in)) {
      w.write_u1(0x5d);
    } else if (instr_is<op::Dup2X2>(in)) {
      w.write_u1(0x5e);
    } else if (instr_is<op::Swap>(in)) {
      w.write_u1(0x5f);
    } else if (auto* ar = instr_as<op::Arith>(in)) {
      u1 g = arith_group(ar->type);
      switch (ar->op) {
        case ArithOp::Add:
          w.write_u1(static_cast<u1>(0x60 + g));
          break;
        case ArithOp::Sub:
          w.write_u1(static_cast<u1>(0x64 + g));
          break;
        case ArithOp::Mul:
          w.write_u1(static_cast<u1>(0x68 + g));
          break;
        case ArithOp::Div:
          w.write_u1(static_cast<u1>(0x6c + g));
          break;
        case ArithOp::Rem:
          w.write_u1(static_cast<u1>(0x70 + g));
          break;
        case ArithOp::Neg:
          w.write_u1(static_cast<u1>(0x74 + g));
          break;
        case ArithOp::Shl:
          w.write_u1(static_cast<u1>(0x78 + g));
          break;
        case ArithOp::Shr:
          w.write_u1(static_cast<u1>(0x7a + g));
          break;
        case ArithOp::UShr:
          w.write_u1(static_cast<u1>(0x7c + g));
          break;
        case ArithOp::And:
          w.write_u1(static_cast<u1>(0x7e + g));
          break;
        case ArithOp::Or:
          w.write_u1(static_cast<u1>(0x80 + g));
          break;
        case ArithOp::Xor:
          w.write_u1(static_cast<u1>(0x82 + g));
          break;
      }
    } else if (auto* cv = instr_as<op::Conv>(in)) {
      if (cv->from == JvmBasicType::Int && cv->to == ConvTarget::Byte) {
        w.write_u1(0x91);
      } else if (cv->from == JvmBasicType::Int && cv->to == ConvTarget::Char) {
        w.write_u1(0x92);
      } else if (cv->from == JvmBasicType::Int && cv->to == ConvTarget::Short) {
        w.write_u1(0x93);
      } else {
        static const ConvTarget to[4][3] = {
            {ConvTarget::Long, ConvTarget::Float, ConvTarget::Double},
            {ConvTarget::Int, ConvTarget::Float, ConvTarget::Double},
            {ConvTarget::Int, ConvTarget::Long, ConvTarget::Double},
            {ConvTarget::Int, ConvTarget::Long, ConvTarget::Float}};
        u1 row = static_cast<u1>(cv->from);
        for (u1 col = 0; col < 3; ++col)
          if (to[row][col] == cv->to) w.write_u1(static_cast<u1>(0x85 + row * 3 + col));
      }
    } else if (auto* cm = instr_as<op::Cmp>(in)) {
      w.write_u1(static_cast<u1>(0x94 + static_cast<u1>(cm->kind)));
    } else if (auto* f = instr_as<op::If>(in)) {
      if (f->cond == IfCond::Null) {
        w.write_u1(0xc6);
      } else if (f->cond == IfCond::NonNull) {
        w.write_u1(0xc7);
      } else {
        w.write_u1(static_cast<u1>(0x99 + static_cast<u1>(f->cond)));
      }
      branch16(pc, f->target);
    } else if (auto* g = instr_as<op::Goto>(in)) {
      if (len == 3) {
        w.write_u1(0xa7);
        branch16(pc, g->target);
      } else {
        w.write_u1(0xc8);
        w.write_i4(static_cast<i4>(static_cast<i8>(g->target) - pc));
      }
    } else if (auto* j = instr_as<op::Jsr>(in)) {
      if (len == 3) {
        w.write_u1(0xa8);
        branch16(pc, j->target);
      } else {
        w.write_u1(0xc9);
        w.write_i4(static_cast<i4>(static_cast<i8>(j->target) - pc));
      }
    } else if (auto* r = instr_as<op::Ret>(in)) {
      if (len == 2) {
        w.write_u1(0xa9);
        w.write_u1(static_cast<u1>(r->index));
      } else {
        w.write_u1(0xc4);
        w.write_u1(0xa9);
        w.write_u2(r->index);
      }
    } else if (auto* t = instr_as<op::TableSwitch>(in)) {
      w.write_u1(0xaa);
      for (u4 p = 0; p < switch_pad(pc); ++p) w.write_u1(0);
      w.write_i4(static_cast<i4>(static_cast<i8>(t->default_target) - pc));
      w.write_i4(t->low);
      w.write_i4(t->high);
      for (u4 tgt : t->targets) w.write_i4(static_cast<i4>(static_cast<i8>(tgt) - pc));
    } else if (auto* ls = instr_as<op::LookupSwitch>(in)) {
      w.write_u1(0xab);
      for (u4 p = 0; p < switch_pad(pc); ++p) w.write_u1(0);
      w.write_i4(static_cast<i4>(static_cast<i8>(ls->default_target) - pc));
      w.write_i4(static_cast<i4>(ls->pairs.size()));
      for (auto& [k, tgt] : ls->pairs) {
        w.write_i4(k);
        w.write_i4(static_cast<i4>(static_cast<i8>(tgt) - pc));
      }
    } else if (auto* rt = instr_as<op::Return>(in)) {
      if (!rt->type) {
        w.write_u1(0xb1);
      } else {
        w.write_u1(static_cast<u1>(0xac + load_group(*rt->type)));
      }
    } else if (auto* fo = instr_as<op::FieldOp>(in)) {
      u1 b = fo->is_static ? (fo->is_put ? 0xb3 : 0xb2) : (fo->is_put ? 0xb5 : 0xb4);
      const FieldSig& sig = pool.field_sig_of(fo->sig);
      w.write_u1(b);
      w.write_u2(cp.add_fieldref(internal_name(pool.class_name_of(fo->owner)), sig.name,
                                 print_field_descriptor(sig.type, pool)));
    } else if (auto* iv = instr_as<op::Invoke>(in)) {
      const MethodSig& sig = pool.method_sig_of(iv->sig);
      std::string owner = print_class_entry(iv->owner, pool);
      std::string desc = print_method_descriptor(sig, pool);
      switch (iv->kind) {
        case InvokeKind::Virtual:
          w.write_u1(0xb6);
          w.write_u2(cp.add_methodref(owner, sig.name, desc));
          break;
        case InvokeKind::Special:
          w.write_u1(0xb7);
          w.write_u2(cp.add_methodref(owner, sig.name, desc));
          break;
        case InvokeKind::Static:
          w.write_u1(0xb8);
          w.write_u2(cp.add_methodref(owner, sig.name, desc));
          break;
        case InvokeKind::Interface: {
          w.write_u1(0xb9);
          w.write_u2(cp.add_interface_methodref(owner, sig.name, desc));
          u4 slots = 1;
          for (const auto& p : sig.params) slots += is_category2(p.computational()) ? 2 : 1;
          w.write_u1(static_cast<u1>(slots));
          w.write_u1(0);
          break;
        }
      }
    } else if (auto* n = instr_as<op::New>(in)) {
      w.write_u1(0xbb);
      w.write_u2(cp.add_class(internal_name(pool.class_name_of(n->cls))));
    } else if (auto* na = instr_as<op::NewArray>(in)) {
      if (len == 2) {
        static const JavaBasicType prim[] = {JavaBasicType::Bool, JavaBasicType::Char,
                                             JavaBasicType::Float, JavaBasicType::Double,
                                             JavaBasicType::Byte, JavaBasicType::Short,
                                             JavaBasicType::Int, JavaBasicType::Long};
        u1 atype = 0;
        for (u1 k = 0; k < 8; ++k)
          if (ValueType(prim[k]) == na->array_type.element()) atype = static_cast<u1>(k + 4);
        w.write_u1(0xbc);
        w.write_u1(atype);
      } else if (len == 3) {
        w.write_u1(0xbd);
        const ValueType& elem = na->array_type.element();
        w.write_u2(cp.add_class(print_class_entry(elem.object(), pool)));
      } else {
        w.write_u1(0xc5);
        w.write_u2(cp.add_class(print_class_entry(na->array_type, pool)));
        w.write_u1(na->dims);
      }
    } else if (instr_is<op::Throw>(in)) {
      w.write_u1(0xbf);
    } else if (auto* cc = instr_as<op::CheckCast>(in)) {
      w.write_u1(0xc0);
      w.write_u2(cp.add_class(print_class_entry(cc->type, pool)));
    } else if (auto* io = instr_as<op::InstanceOf>(in)) {
      w.write_u1(0xc1);
      w.write_u2(cp.add_class(print_class_entry(io->type, pool)));
    } else if (instr_is<op::MonitorEnter>(in)) {
      w.write_u1(0xc2);
    } else if (instr_is<op::MonitorExit>(in)) {
      w.write_u1(0xc3);
    } else {
      throw EncodeError("unhandled instruction in encoder");
    }

    if (w.size() != pc + len)
      throw EncodeError("encoded width mismatch at pc " + std::to_string(pc) + ": wrote " +
                        std::to_string(w.size() - pc) + ", expected " + std::to_string(len));
  }
  if (w.size() > 0xffff) throw EncodeError("code exceeds 65535 bytes");
  return w.take();
}

}  // namespace jbw
