#pragma once

#include <sstream>

#include "jbw/classfile.hpp"
#include "jbw/ir.hpp"

namespace jbw {

// Per-program-point notes displayed along with listings (analysis results,
// debug remarks). Keys that never match an emitted point are counted, not
// fatal.
struct AnnotationMap {
  // (class id, method sig id, pc or IR index) -> notes
  std::map<std::tuple<u4, u4, u4>, std::vector<std::string>> notes;

  const std::vector<std::string>* at(ClassNameId cls, MethodSigId sig, u4 pc) const {
    auto it = notes.find({cls.value, sig.value, pc});
    return it == notes.end() ? nullptr : &it->second;
  }
};

namespace text_detail {

inline const char* arith_name(ArithOp op) {
  switch (op) {
    case ArithOp::Add:
      return "add";
    case ArithOp::Sub:
      return "sub";
    case ArithOp::Mul:
      return "mul";
    case ArithOp::Div:
      return "div";
    case ArithOp::Rem:
      return "rem";
    case ArithOp::Neg:
      return "neg";
    case ArithOp::Shl:
      return "shl";
    case ArithOp::Shr:
      return "shr";
    case ArithOp::UShr:
      return "ushr";
    case ArithOp::And:
      return "and";
    case ArithOp::Or:
      return "or";
    case ArithOp::Xor:
      return "xor";
  }
  return "?";
}

inline char type_prefix(JvmType t) {
  switch (t) {
    case JvmType::Int:
      return 'i';
    case JvmType::Long:
      return 'l';
    case JvmType::Float:
      return 'f';
    case JvmType::Double:
      return 'd';
    case JvmType::Object:
      return 'a';
  }
  return '?';
}

inline char type_prefix(JvmBasicType t) { return type_prefix(to_jvm_type(t)); }

inline std::string array_prefix(JvmArrayType t) {
  switch (t) {
    case JvmArrayType::Int:
      return "ia";
    case JvmArrayType::Long:
      return "la";
    case JvmArrayType::Float:
      return "fa";
    case JvmArrayType::Double:
      return "da";
    case JvmArrayType::Object:
      return "aa";
    case JvmArrayType::ByteBool:
      return "ba";
    case JvmArrayType::Char:
      return "ca";
    case JvmArrayType::Short:
      return "sa";
  }
  return "?a";
}

inline std::string if_name(IfCond c) {
  switch (c) {
    case IfCond::Eq0:
      return "ifeq";
    case IfCond::Ne0:
      return "ifne";
    case IfCond::Lt0:
      return "iflt";
    case IfCond::Ge0:
      return "ifge";
    case IfCond::Gt0:
      return "ifgt";
    case IfCond::Le0:
      return "ifle";
    case IfCond::ICmpEq:
      return "if_icmpeq";
    case IfCond::ICmpNe:
      return "if_icmpne";
    case IfCond::ICmpLt:
      return "if_icmplt";
    case IfCond::ICmpGe:
      return "if_icmpge";
    case IfCond::ICmpGt:
      return "if_icmpgt";
    case IfCond::ICmpLe:
      return "if_icmple";
    case IfCond::ACmpEq:
      return "if_acmpeq";
    case IfCond::ACmpNe:
      return "if_acmpne";
    case IfCond::Null:
      return "ifnull";
    case IfCond::NonNull:
      return "ifnonnull";
  }
  return "?";
}

inline std::string float_text(float f) {
  std::ostringstream os;
  os << f << "f";
  return os.str();
}
inline std::string double_text(double d) {
  std::ostringstream os;
  os << d << "d";
  return os.str();
}

}  // namespace text_detail

// javap-style mnemonic for one decoded instruction.
inline std::string instr_text(const Instr& in, const InternPool& pool) {
  using namespace text_detail;
  std::ostringstream os;
  if (instr_is<op::Nop>(in)) {
    os << "nop";
  } else if (auto* c = instr_as<op::Const>(in)) {
    const ConstVal& v = c->value;
    if (v.is_null()) {
      os << "aconst_null";
    } else if (auto* i = std::get_if<i4>(&v.v)) {
      if (*i >= -1 && *i <= 5)
        os << "iconst_" << (*i < 0 ? "m1" : std::to_string(*i));
      else if (*i >= -128 && *i <= 127)
        os << "bipush " << *i;
      else if (*i >= -32768 && *i <= 32767)
        os << "sipush " << *i;
      else
        os << "ldc " << *i;
    } else if (auto* l = std::get_if<i8>(&v.v)) {
      if (*l == 0 || *l == 1)
        os << "lconst_" << *l;
      else
        os << "ldc2_w " << *l << "L";
    } else if (auto* f = std::get_if<float>(&v.v)) {
      if (*f == 0.0f || *f == 1.0f || *f == 2.0f)
        os << "fconst_" << static_cast<int>(*f);
      else
        os << "ldc " << float_text(*f);
    } else if (auto* d = std::get_if<double>(&v.v)) {
      if (*d == 0.0 || *d == 1.0)
        os << "dconst_" << static_cast<int>(*d);
      else
        os << "ldc2_w " << double_text(*d);
    } else if (auto* s = std::get_if<std::string>(&v.v)) {
      os << "ldc \"" << *s << "\"";
    } else {
      os << "ldc " << java_type_name(std::get<ObjectType>(v.v), pool) << ".class";
    }
  } else if (auto* l = instr_as<op::Load>(in)) {
    os << type_prefix(l->type) << "load";
    os << (l->index <= 3 ? "_" : " ") << l->index;
  } else if (auto* s = instr_as<op::Store>(in)) {
    os << type_prefix(s->type) << "store";
    os << (s->index <= 3 ? "_" : " ") << s->index;
  } else if (auto* i = instr_as<op::IInc>(in)) {
    os << "iinc " << i->index << ", " << i->delta;
  } else if (auto* al = instr_as<op::ArrayLoad>(in)) {
    os << array_prefix(al->type) << "load";
  } else if (auto* as = instr_as<op::ArrayStore>(in)) {
    os << array_prefix(as->type) << "store";
  } else if (instr_is<op::ArrayLength>(in)) {
    os << "arraylength";
  } else if (instr_is<op::Pop>(in)) {
    os << "pop";
  } else if (instr_is<op::Pop2>(in)) {
    os << "pop2";
  } else if (instr_is<op::Dup>(in)) {
    os << "dup";
  } else if (instr_is<op::DupX1>(in)) {
    os << "dup_x1";
  } else if (instr_is<op::DupX2>(in)) {
    os << "dup_x2";
  } else if (instr_is<op::Dup2>(in)) {
    os << "dup2";
  } else if (instr_is<op::Dup2X1>(in)) {
    os << "dup2_x1";
  } else if (instr_is<op::Dup2X2>(in)) {
    os << "dup2_x2";
  } else if (instr_is<op::Swap>(in)) {
    os << "swap";
  } else if (auto* ar = instr_as<op::Arith>(in)) {
    os << type_prefix(ar->type) << arith_name(ar->op);
  } else if (auto* cv = instr_as<op::Conv>(in)) {
    static const char* names[] = {"i", "l", "f", "d", "b", "c", "s"};
    os << type_prefix(cv->from) << "2" << names[static_cast<int>(cv->to)];
  } else if (auto* cm = instr_as<op::Cmp>(in)) {
    static const char* names[] = {"lcmp", "fcmpl", "fcmpg", "dcmpl", "dcmpg"};
    os << names[static_cast<int>(cm->kind)];
  } else if (auto* f = instr_as<op::If>(in)) {
    os << if_name(f->cond) << " " << f->target;
  } else if (auto* g = instr_as<op::Goto>(in)) {
    os << "goto " << g->target;
  } else if (auto* j = instr_as<op::Jsr>(in)) {
    os << "jsr " << j->target;
  } else if (auto* r = instr_as<op::Ret>(in)) {
    os << "ret " << r->index;
  } else if (auto* ts = instr_as<op::TableSwitch>(in)) {
    os << "tableswitch {";
    for (std::size_t k = 0; k < ts->targets.size(); ++k)
      os << " " << (ts->low + static_cast<i4>(k)) << ": " << ts->targets[k] << ";";
    os << " default: " << ts->default_target << " }";
  } else if (auto* ls = instr_as<op::LookupSwitch>(in)) {
    os << "lookupswitch {";
    for (const auto& [k, t] : ls->pairs) os << " " << k << ": " << t << ";";
    os << " default: " << ls->default_target << " }";
  } else if (auto* rt = instr_as<op::Return>(in)) {
    if (rt->type)
      os << type_prefix(*rt->type) << "return";
    else
      os << "return";
  } else if (auto* fo = instr_as<op::FieldOp>(in)) {
    const FieldSig& sig = pool.field_sig_of(fo->sig);
    os << (fo->is_static ? (fo->is_put ? "putstatic" : "getstatic")
                         : (fo->is_put ? "putfield" : "getfield"));
    os << " " << pool.class_name_of(fo->owner) << "." << sig.name << " : "
       << print_field_descriptor(sig.type, pool);
  } else if (auto* iv = instr_as<op::Invoke>(in)) {
    static const char* kinds[] = {"invokevirtual", "invokeinterface", "invokespecial",
                                  "invokestatic"};
    const MethodSig& sig = pool.method_sig_of(iv->sig);
    os << kinds[static_cast<int>(iv->kind)] << " " << java_type_name(iv->owner, pool) << "."
       << sig.name << print_method_descriptor(sig, pool);
  } else if (auto* n = instr_as<op::New>(in)) {
    os << "new " << pool.class_name_of(n->cls);
  } else if (auto* na = instr_as<op::NewArray>(in)) {
    if (na->dims == 1 && na->array_type.dims() == 1 && na->array_type.element().is_basic())
      os << "newarray " << java_type_name(na->array_type.element(), pool);
    else if (na->dims == 1)
      os << "anewarray " << java_type_name(na->array_type.element(), pool);
    else
      os << "multianewarray " << java_type_name(na->array_type, pool) << " dims "
         << static_cast<int>(na->dims);
  } else if (instr_is<op::Throw>(in)) {
    os << "athrow";
  } else if (auto* cc = instr_as<op::CheckCast>(in)) {
    os << "checkcast " << java_type_name(cc->type, pool);
  } else if (auto* io = instr_as<op::InstanceOf>(in)) {
    os << "instanceof " << java_type_name(io->type, pool);
  } else if (instr_is<op::MonitorEnter>(in)) {
    os << "monitorenter";
  } else if (instr_is<op::MonitorExit>(in)) {
    os << "monitorexit";
  }
  return os.str();
}

// --- IR pretty printing -------------------------------------------------------

namespace text_detail {

inline std::string var_text(const IrMethod& m, VarId v) {
  const IrVarInfo& info = m.vars[v];
  switch (info.type) {
    case JvmType::Int:
      return info.name + ":I";
    case JvmType::Float:
      return info.name + ":F";
    case JvmType::Long:
      return info.name + ":L";
    case JvmType::Double:
      return info.name + ":D";
    case JvmType::Object:
      return info.name;
  }
  return info.name;
}

inline const char* binop_text(BinOpKind k) {
  switch (k) {
    case BinOpKind::Add:
      return "+";
    case BinOpKind::Sub:
      return "-";
    case BinOpKind::Mul:
      return "*";
    case BinOpKind::Div:
      return "/";
    case BinOpKind::Rem:
      return "%";
    case BinOpKind::Shl:
      return "<<";
    case BinOpKind::Shr:
      return ">>";
    case BinOpKind::UShr:
      return ">>>";
    case BinOpKind::And:
      return "&";
    case BinOpKind::Or:
      return "|";
    case BinOpKind::Xor:
      return "^";
    case BinOpKind::Cmp:
      return "cmp";
  }
  return "?";
}

inline const char* cond_text(CondOp c) {
  switch (c) {
    case CondOp::Eq:
      return "==";
    case CondOp::Ne:
      return "!=";
    case CondOp::Lt:
      return "<";
    case CondOp::Ge:
      return ">=";
    case CondOp::Gt:
      return ">";
    case CondOp::Le:
      return "<=";
  }
  return "?";
}

}  // namespace text_detail

inline std::string expr_text(const Expr& e, const IrMethod& m, const InternPool& pool) {
  using namespace text_detail;
  const ExprNode& n = e.node();
  switch (n.kind) {
    case ExprNode::Kind::Const: {
      const ConstVal& v = n.cval;
      if (v.is_null()) return "null";
      if (auto* i = std::get_if<i4>(&v.v)) return std::to_string(*i);
      if (auto* l = std::get_if<i8>(&v.v)) return std::to_string(*l) + "L";
      if (auto* f = std::get_if<float>(&v.v)) return float_text(*f);
      if (auto* d = std::get_if<double>(&v.v)) return double_text(*d);
      if (auto* s = std::get_if<std::string>(&v.v)) return "\"" + *s + "\"";
      return java_type_name(std::get<ObjectType>(v.v), pool) + ".class";
    }
    case ExprNode::Kind::Var:
      return var_text(m, n.var);
    case ExprNode::Kind::Unop: {
      std::string a = expr_text(e.child_a(), m, pool);
      if (e.child_a().height() > 0) a = "(" + a + ")";
      switch (n.un) {
        case UnOpKind::Neg:
          return "-" + a;
        case UnOpKind::Conv: {
          static const char* names[] = {"int", "long", "float", "double", "byte", "char",
                                        "short"};
          return std::string("(") + names[static_cast<int>(n.conv_to)] + ")" + a;
        }
        case UnOpKind::ArrayLength:
          return a + ".length";
        case UnOpKind::InstanceOf:
          return a + " instanceof " + java_type_name(*n.type_arg, pool);
      }
      return "?";
    }
    case ExprNode::Kind::Binop: {
      std::string a = expr_text(e.child_a(), m, pool);
      std::string b = expr_text(e.child_b(), m, pool);
      if (e.child_a().height() > 0) a = "(" + a + ")";
      if (e.child_b().height() > 0) b = "(" + b + ")";
      if (n.bin == BinOpKind::Cmp) {
        static const char* names[] = {"lcmp", "fcmpl", "fcmpg", "dcmpl", "dcmpg"};
        return std::string(names[static_cast<int>(n.cmp)]) + "(" + a + ", " + b + ")";
      }
      return a + " " + text_detail::binop_text(n.bin) + " " + b;
    }
  }
  return "?";
}

inline std::string ir_instr_text(const IrInstr& ins, const IrMethod& m, const InternPool& pool) {
  using namespace text_detail;
  auto ex = [&](const Expr& e) { return expr_text(e, m, pool); };
  auto args_text = [&](const std::vector<Expr>& args) {
    std::string out;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) out += ", ";
      out += ex(args[i]);
    }
    return out;
  };
  std::ostringstream os;
  if (ir_is<ir::Nop>(ins)) {
    os << "nop";
  } else if (auto* a = ir_as<ir::Assign>(ins)) {
    os << var_text(m, a->dst) << " := " << ex(a->value);
  } else if (auto* fw = ir_as<ir::FieldWrite>(ins)) {
    os << ex(fw->target) << "." << pool.field_sig_of(fw->sig).name << " := " << ex(fw->value);
  } else if (auto* sw = ir_as<ir::StaticWrite>(ins)) {
    os << pool.class_name_of(sw->owner) << "." << pool.field_sig_of(sw->sig).name
       << " := " << ex(sw->value);
  } else if (auto* fr = ir_as<ir::FieldRead>(ins)) {
    os << var_text(m, fr->dst) << " := " << ex(fr->target) << "."
       << pool.field_sig_of(fr->sig).name;
  } else if (auto* sr = ir_as<ir::StaticRead>(ins)) {
    os << var_text(m, sr->dst) << " := " << pool.class_name_of(sr->owner) << "."
       << pool.field_sig_of(sr->sig).name;
  } else if (auto* aw = ir_as<ir::ArrayWrite>(ins)) {
    os << ex(aw->array) << "[" << ex(aw->index) << "] := " << ex(aw->value);
  } else if (auto* ard = ir_as<ir::ArrayRead>(ins)) {
    os << var_text(m, ard->dst) << " := " << ex(ard->array) << "[" << ex(ard->index) << "]";
  } else if (auto* no = ir_as<ir::NewObject>(ins)) {
    os << var_text(m, no->dst) << " := new " << pool.class_name_of(no->cls) << "("
       << args_text(no->args) << ")";
  } else if (auto* na = ir_as<ir::NewArr>(ins)) {
    os << var_text(m, na->dst) << " := newarray "
       << java_type_name(na->array_type, pool) << "[" << args_text(na->dims) << "]";
  } else if (auto* iv = ir_as<ir::InvokeIr>(ins)) {
    if (iv->dst) os << var_text(m, *iv->dst) << " := ";
    if (iv->receiver)
      os << ex(*iv->receiver) << ".";
    else
      os << java_type_name(iv->owner, pool) << ".";
    os << pool.method_sig_of(iv->sig).name << "(" << args_text(iv->args) << ")";
  } else if (auto* mi = ir_as<ir::MayInit>(ins)) {
    os << "mayinit " << pool.class_name_of(mi->cls);
  } else if (auto* ck = ir_as<ir::CheckIr>(ins)) {
    const Check& c = ck->check;
    switch (c.kind) {
      case CheckKind::NotZero:
        os << "notzero " << ex(c.a);
        break;
      case CheckKind::NotNull:
        os << "notnull " << ex(c.a);
        break;
      case CheckKind::Bounds:
        os << "boundscheck " << ex(c.a) << "[" << ex(*c.b) << "]";
        break;
      case CheckKind::NotNegative:
        os << "notnegative " << ex(c.a);
        break;
      case CheckKind::ArrayStore:
        os << "arraystorecheck " << ex(c.a) << " <- " << ex(*c.b);
        break;
      case CheckKind::CheckCast:
        os << "checkcast " << ex(c.a) << " as " << java_type_name(*c.cast_type, pool);
        break;
    }
  } else if (auto* g = ir_as<ir::GotoIr>(ins)) {
    os << "goto " << g->target;
  } else if (auto* br = ir_as<ir::IfIr>(ins)) {
    os << "if (" << ex(br->left) << " " << cond_text(br->op) << " " << ex(br->right)
       << ") goto " << br->target;
  } else if (auto* sw2 = ir_as<ir::SwitchIr>(ins)) {
    os << "switch (" << ex(sw2->selector) << ") {";
    for (const auto& [k, t] : sw2->cases) os << " " << k << ": " << t << ";";
    os << " default: " << sw2->default_target << " }";
  } else if (auto* rt = ir_as<ir::ReturnIr>(ins)) {
    os << "return";
    if (rt->value) os << " " << ex(*rt->value);
  } else if (auto* th = ir_as<ir::ThrowIr>(ins)) {
    os << "throw " << ex(th->value);
  } else if (auto* me = ir_as<ir::MonEnter>(ins)) {
    os << "monitorenter " << ex(me->value);
  } else if (auto* mx = ir_as<ir::MonExit>(ins)) {
    os << "monitorexit " << ex(mx->value);
  }
  return os.str();
}

// --- listings -----------------------------------------------------------------

namespace text_detail {

inline std::string flags_text(u2 access, bool method) {
  std::string out;
  if (access & acc::kPublic) out += "public ";
  if (access & acc::kPrivate) out += "private ";
  if (access & acc::kProtected) out += "protected ";
  if (access & acc::kStatic) out += "static ";
  if (access & acc::kFinal) out += "final ";
  if (method && (access & acc::kAbstract)) out += "abstract ";
  if (method && (access & acc::kNative)) out += "native ";
  return out;
}

}  // namespace text_detail

// javap-like text of a whole class; bodies decode on demand.
inline std::string emit_text(const ClassFile& cf, const AnnotationMap* notes = nullptr) {
  const InternPool& pool = *cf.names;
  std::ostringstream os;
  os << text_detail::flags_text(cf.access & ~acc::kSuper, false);
  os << (cf.is_interface ? "interface " : "class ") << pool.class_name_of(cf.this_class);
  if (cf.super_class && pool.class_name_of(*cf.super_class) != "java.lang.Object")
    os << " extends " << pool.class_name_of(*cf.super_class);
  if (!cf.interfaces.empty()) {
    os << (cf.is_interface ? " extends " : " implements ");
    for (std::size_t i = 0; i < cf.interfaces.size(); ++i) {
      if (i) os << ", ";
      os << pool.class_name_of(cf.interfaces[i]);
    }
  }
  os << " {\n";
  for (const auto& f : cf.fields) {
    const FieldSig& sig = pool.field_sig_of(f.sig);
    os << "  " << text_detail::flags_text(f.access, false) << java_type_name(sig.type, pool)
       << " " << sig.name << ";\n";
  }
  for (const auto& mth : cf.methods) {
    const MethodSig& sig = pool.method_sig_of(mth.sig);
    os << "\n  " << text_detail::flags_text(mth.access, true);
    os << (sig.ret ? java_type_name(*sig.ret, pool) : "void") << " " << sig.name << "(";
    for (std::size_t i = 0; i < sig.params.size(); ++i) {
      if (i) os << ", ";
      os << java_type_name(sig.params[i], pool);
    }
    os << ");\n";
    if (!mth.body) continue;
    os << "    Code (stack=" << mth.body->max_stack << ", locals=" << mth.body->max_locals
       << "):\n";
    for (const PcInstr& pi : mth.body->instructions()) {
      os << "      " << pi.pc << ": " << instr_text(pi.instr, pool) << "\n";
      if (notes)
        if (const auto* ns = notes->at(cf.this_class, mth.sig, pi.pc))
          for (const auto& note : *ns) os << "        ; " << note << "\n";
    }
    for (const auto& h : mth.body->handlers) {
      os << "      catch";
      if (h.catch_type) os << " " << pool.class_name_of(*h.catch_type);
      os << " [" << h.start_pc << ", " << h.end_pc << ") -> " << h.handler_pc << "\n";
    }
  }
  os << "}\n";
  return os.str();
}

// IR listing of one method.
inline std::string emit_text(const IrMethod& m, const InternPool& pool,
                             const AnnotationMap* notes = nullptr) {
  std::ostringstream os;
  const MethodSig& sig = pool.method_sig_of(m.sig);
  os << pool.class_name_of(m.owner) << "." << sig.name
     << print_method_descriptor(sig, pool) << " {\n";
  for (u4 i = 0; i < m.body.size(); ++i) {
    os << "  " << i << ": " << ir_instr_text(m.body[i].ins, m, pool) << "\n";
    if (notes)
      if (const auto* ns = notes->at(m.owner, m.sig, i))
        for (const auto& note : *ns) os << "     ; " << note << "\n";
  }
  for (const auto& h : m.handlers) {
    os << "  catch";
    if (h.catch_type) os << " " << pool.class_name_of(*h.catch_type);
    os << " [" << h.start << ", " << h.end << ") -> " << h.handler << " binds "
       << m.vars[h.exc_var].name << "\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace jbw
