#pragma once

#include <sstream>

#include "jbw/classfile.hpp"
#include "jbw/output_text.hpp"

namespace jbw {

struct JasminResult {
  std::string text;
  std::vector<std::string> warnings;  // dropped attributes, unrepresentable bits
};

namespace jasmin_detail {

inline std::string access_words(u2 access, bool is_class) {
  std::string out;
  if (access & acc::kPublic) out += "public ";
  if (access & acc::kPrivate) out += "private ";
  if (access & acc::kProtected) out += "protected ";
  if (access & acc::kStatic) out += "static ";
  if (access & acc::kFinal) out += "final ";
  if (access & acc::kAbstract && !is_class) out += "abstract ";
  if (access & acc::kNative) out += "native ";
  if (!out.empty()) out.pop_back();
  return out;
}

inline std::string float_literal(float f) {
  std::ostringstream os;
  os.precision(9);
  os << f;
  std::string s = os.str();
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
  return s;
}
inline std::string double_literal(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  std::string s = os.str();
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
  return s;
}

// one instruction in Jasmin syntax; branch targets become labels L<pc>
inline void emit_instr(std::ostringstream& os, const Instr& in, const InternPool& pool,
                       std::vector<std::string>& warnings) {
  auto slashed = [&](ClassNameId id) { return internal_name(pool.class_name_of(id)); };
  auto cls_entry = [&](const ObjectType& t) { return print_class_entry(t, pool); };

  if (auto* c = instr_as<op::Const>(in)) {
    const ConstVal& v = c->value;
    if (v.is_null())
      os << "aconst_null";
    else if (auto* i = std::get_if<i4>(&v.v))
      os << "ldc " << *i;
    else if (auto* l = std::get_if<i8>(&v.v))
      os << "ldc2_w " << *l;
    else if (auto* f = std::get_if<float>(&v.v))
      os << "ldc " << float_literal(*f);
    else if (auto* d = std::get_if<double>(&v.v))
      os << "ldc2_w " << double_literal(*d);
    else if (auto* s = std::get_if<std::string>(&v.v))
      os << "ldc \"" << *s << "\"";
    else
      os << "ldc " << cls_entry(std::get<ObjectType>(v.v));
    return;
  }
  if (auto* l = instr_as<op::Load>(in)) {
    os << text_detail::type_prefix(l->type) << "load " << l->index;
    return;
  }
  if (auto* s = instr_as<op::Store>(in)) {
    os << text_detail::type_prefix(s->type) << "store " << s->index;
    return;
  }
  if (auto* i = instr_as<op::IInc>(in)) {
    os << "iinc " << i->index << " " << i->delta;
    return;
  }
  if (auto* f = instr_as<op::If>(in)) {
    os << text_detail::if_name(f->cond) << " L" << f->target;
    return;
  }
  if (auto* g = instr_as<op::Goto>(in)) {
    os << "goto L" << g->target;
    return;
  }
  if (auto* j = instr_as<op::Jsr>(in)) {
    os << "jsr L" << j->target;
    return;
  }
  if (auto* r = instr_as<op::Ret>(in)) {
    os << "ret " << r->index;
    return;
  }
  if (auto* ts = instr_as<op::TableSwitch>(in)) {
    os << "tableswitch " << ts->low << "\n";
    for (u4 t : ts->targets) os << "      L" << t << "\n";
    os << "      default : L" << ts->default_target;
    return;
  }
  if (auto* ls = instr_as<op::LookupSwitch>(in)) {
    os << "lookupswitch\n";
    for (const auto& [k, t] : ls->pairs) os << "      " << k << " : L" << t << "\n";
    os << "      default : L" << ls->default_target;
    return;
  }
  if (auto* fo = instr_as<op::FieldOp>(in)) {
    const FieldSig& sig = pool.field_sig_of(fo->sig);
    os << (fo->is_static ? (fo->is_put ? "putstatic" : "getstatic")
                         : (fo->is_put ? "putfield" : "getfield"));
    os << " " << slashed(fo->owner) << "/" << sig.name << " "
       << print_field_descriptor(sig.type, pool);
    return;
  }
  if (auto* iv = instr_as<op::Invoke>(in)) {
    const MethodSig& sig = pool.method_sig_of(iv->sig);
    std::string ref = cls_entry(iv->owner) + "/" + sig.name + print_method_descriptor(sig, pool);
    switch (iv->kind) {
      case InvokeKind::Virtual:
        os << "invokevirtual " << ref;
        return;
      case InvokeKind::Special:
        os << "invokespecial " << ref;
        return;
      case InvokeKind::Static:
        os << "invokestatic " << ref;
        return;
      case InvokeKind::Interface: {
        u4 slots = 1;
        for (const auto& p : sig.params) slots += is_category2(p.computational()) ? 2 : 1;
        os << "invokeinterface " << ref << " " << slots;
        return;
      }
    }
  }
  if (auto* n = instr_as<op::New>(in)) {
    os << "new " << slashed(n->cls);
    return;
  }
  if (auto* na = instr_as<op::NewArray>(in)) {
    if (na->dims == 1 && na->array_type.dims() == 1 && na->array_type.element().is_basic()) {
      os << "newarray " << java_type_name(na->array_type.element(), pool);
    } else if (na->dims == 1) {
      os << "anewarray " << cls_entry(na->array_type.element().object());
    } else {
      os << "multianewarray " << cls_entry(na->array_type) << " "
         << static_cast<int>(na->dims);
    }
    return;
  }
  if (auto* cc = instr_as<op::CheckCast>(in)) {
    os << "checkcast " << cls_entry(cc->type);
    return;
  }
  if (auto* io = instr_as<op::InstanceOf>(in)) {
    os << "instanceof " << cls_entry(io->type);
    return;
  }
  // the remaining opcodes carry no operands; the shared mnemonic matches
  // the Jasmin spelling
  os << instr_text(in, pool);
  (void)warnings;
}

}  // namespace jasmin_detail

// Jasmin-compatible assembly of one class. Opaque attributes cannot be
// expressed in Jasmin syntax and are dropped with a warning each.
inline JasminResult emit_jasmin(const ClassFile& cf) {
  using namespace jasmin_detail;
  const InternPool& pool = *cf.names;
  JasminResult res;
  std::ostringstream os;

  auto warn_attrs = [&](const std::vector<AttributeRaw>& attrs, const std::string& where) {
    for (const auto& a : attrs)
      res.warnings.push_back("dropped attribute " + a.name + " on " + where);
  };

  u2 cls_access = cf.access & static_cast<u2>(~(acc::kSuper | acc::kInterface));
  if (cf.is_interface) cls_access &= static_cast<u2>(~acc::kAbstract);
  std::string words = access_words(cls_access, true);
  if (cf.is_interface)
    os << ".interface " << (words.empty() ? "" : words + " ")
       << internal_name(pool.class_name_of(cf.this_class)) << "\n";
  else
    os << ".class " << (words.empty() ? "" : words + " ")
       << internal_name(pool.class_name_of(cf.this_class)) << "\n";
  os << ".super "
     << (cf.super_class ? internal_name(pool.class_name_of(*cf.super_class))
                        : "java/lang/Object")
     << "\n";
  for (auto i : cf.interfaces)
    os << ".implements " << internal_name(pool.class_name_of(i)) << "\n";
  warn_attrs(cf.attributes, "class");

  for (const auto& f : cf.fields) {
    const FieldSig& sig = pool.field_sig_of(f.sig);
    os << ".field " << access_words(f.access, false) << " " << sig.name << " "
       << print_field_descriptor(sig.type, pool);
    if (f.constant_value) {
      if (auto* i = std::get_if<i4>(&f.constant_value->v))
        os << " = " << *i;
      else if (auto* l = std::get_if<i8>(&f.constant_value->v))
        os << " = " << *l;
      else if (auto* fl = std::get_if<float>(&f.constant_value->v))
        os << " = " << float_literal(*fl);
      else if (auto* d = std::get_if<double>(&f.constant_value->v))
        os << " = " << double_literal(*d);
      else if (auto* s = std::get_if<std::string>(&f.constant_value->v))
        os << " = \"" << *s << "\"";
    }
    os << "\n";
    warn_attrs(f.attributes, "field " + sig.name);
  }

  for (const auto& m : cf.methods) {
    const MethodSig& sig = pool.method_sig_of(m.sig);
    os << "\n.method " << access_words(m.access, false) << " " << sig.name
       << print_method_descriptor(sig, pool) << "\n";
    if (!m.declared_exceptions.empty())
      for (auto e : m.declared_exceptions)
        os << "  .throws " << internal_name(pool.class_name_of(e)) << "\n";
    if (m.body) {
      const MethodBody& body = *m.body;
      os << "  .limit stack " << body.max_stack << "\n";
      os << "  .limit locals " << body.max_locals << "\n";
      std::set<u4> label_pcs;
      for (const PcInstr& pi : body.instructions())
        for (u4 t : branch_targets(pi.instr)) label_pcs.insert(t);
      for (const auto& h : body.handlers) {
        label_pcs.insert(h.start_pc);
        label_pcs.insert(h.end_pc);
        label_pcs.insert(h.handler_pc);
      }
      for (const auto& h : body.handlers) {
        os << "  .catch "
           << (h.catch_type ? internal_name(pool.class_name_of(*h.catch_type)) : "all")
           << " from L" << h.start_pc << " to L" << h.end_pc << " using L" << h.handler_pc
           << "\n";
      }
      u4 end_pc = 0;
      for (const PcInstr& pi : body.instructions()) {
        if (label_pcs.count(pi.pc)) os << "L" << pi.pc << ":\n";
        std::ostringstream line;
        emit_instr(line, pi.instr, pool, res.warnings);
        os << "    " << line.str() << "\n";
        end_pc = pi.pc + (pi.byte_len ? pi.byte_len : 1);
      }
      if (label_pcs.count(end_pc)) os << "L" << end_pc << ":\n";
      warn_attrs(body.attributes, "code of " + sig.name);
    }
    warn_attrs(m.attributes, "method " + sig.name);
    os << ".end method\n";
  }
  res.text = os.str();
  return res;
}

}  // namespace jbw
