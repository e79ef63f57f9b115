#pragma once

// IR interpreter (EvalMachine::run_ir). Checks throw; everything downstream
// of a passed check must be fault-free, so a fault there raises EvalError
// instead of a Java exception -- that is the transformation bug detector.

#include "jbw/eval.hpp"

namespace jbw {

inline EvalMachine::Inner EvalMachine::run_ir(const ClassNode& node, const MethodInfo& info,
                                              const std::vector<Value>& args, int depth) {
  using namespace eval_detail;
  if (!node.file) return unsupported_inner("stub class has no code");
  const IrMethod& m = ir_of(node, info);

  std::vector<std::optional<Value>> vars(m.vars.size());
  {
    // bind arguments to the local-origin variables of the matching slot/type
    std::size_t slot = 0;
    for (const Value& a : args) {
      JvmType want = a.kind == Value::Kind::Int      ? JvmType::Int
                     : a.kind == Value::Kind::Long   ? JvmType::Long
                     : a.kind == Value::Kind::Float  ? JvmType::Float
                     : a.kind == Value::Kind::Double ? JvmType::Double
                                                     : JvmType::Object;
      for (VarId v = 0; v < m.vars.size(); ++v)
        if (m.vars[v].origin == VarOrigin::Local && m.vars[v].a == slot &&
            m.vars[v].type == want)
          vars[v] = a;
      slot += a.is_cat2() ? 2 : 1;
    }
  }

  std::size_t idx = 0;
  std::optional<Inner> escaped;

  auto raise = [&](u4 exc_ref) -> bool {
    auto covers = [&](const IrMethod::Handler& h) { return idx >= h.start && idx < h.end; };
    std::ptrdiff_t hi = find_handler(m.handlers, covers, exc_ref);
    if (hi < 0) {
      escaped = Inner::exception(exc_ref);
      return false;
    }
    const auto& h = m.handlers[static_cast<std::size_t>(hi)];
    vars[h.exc_var] = Value::of_ref(exc_ref);
    idx = h.handler;
    return true;
  };

  std::function<Value(const Expr&)> ev = [&](const Expr& e) -> Value {
    const ExprNode& n = e.node();
    switch (n.kind) {
      case ExprNode::Kind::Const: {
        const ConstVal& v = n.cval;
        if (v.is_null()) return Value::null();
        if (auto* i = std::get_if<i4>(&v.v)) return Value::of_int(*i);
        if (auto* l = std::get_if<i8>(&v.v)) return Value::of_long(*l);
        if (auto* f = std::get_if<float>(&v.v)) return Value::of_float(*f);
        if (auto* d = std::get_if<double>(&v.v)) return Value::of_double(*d);
        if (auto* s = std::get_if<std::string>(&v.v)) return Value::of_ref(intern_string(*s));
        return Value::of_ref(intern_class_const(std::get<ObjectType>(v.v)));
      }
      case ExprNode::Kind::Var: {
        if (!vars[n.var])
          throw EvalError("IR reads unassigned variable " + m.vars[n.var].name);
        return *vars[n.var];
      }
      case ExprNode::Kind::Unop: {
        Value a = ev(e.child_a());
        switch (n.un) {
          case UnOpKind::Neg: {
            bool dz = false;
            return arith(ArithOp::Neg, basic_of(e.type()), a, a, dz);
          }
          case UnOpKind::Conv:
            return convert(n.conv_from, n.conv_to, a);
          case UnOpKind::ArrayLength:
            if (a.ref == 0) throw EvalError("IR arraylength on null slipped past its check");
            return Value::of_int(static_cast<i4>(heap_.at(a.ref).elements.size()));
          case UnOpKind::InstanceOf:
            return Value::of_int(
                a.ref != 0 && subtype(heap_.at(a.ref).type, *n.type_arg) ? 1 : 0);
        }
        throw EvalError("bad unop");
      }
      case ExprNode::Kind::Binop: {
        Value a = ev(e.child_a());
        Value b = ev(e.child_b());
        if (n.bin == BinOpKind::Cmp) return Value::of_int(compare(n.cmp, a, b));
        static const ArithOp ops[] = {ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div,
                                      ArithOp::Rem, ArithOp::Shl, ArithOp::Shr, ArithOp::UShr,
                                      ArithOp::And, ArithOp::Or, ArithOp::Xor};
        bool dz = false;
        Value r = arith(ops[static_cast<int>(n.bin)], n.bin_type, a, b, dz);
        if (dz) throw EvalError("IR division faulted past its notzero check");
        return r;
      }
    }
    throw EvalError("bad expression");
  };

  auto resolve_field_key = [&](ClassNameId owner, FieldSigId sig) {
    const ClassNode& d = resolve_field(h_, *h_.load(owner), sig);
    return std::pair<u4, u4>(d.name.value, sig.value);
  };

  while (true) {
    if (idx >= m.body.size()) throw EvalError("fell off the IR body");
    if (!spend()) {
      Inner r;
      r.kind = Inner::Kind::Budget;
      return r;
    }
    const IrInstr& ins = m.body[idx].ins;
    u4 pc = m.body[idx].pc;
    bool jumped = false;

    try {
      if (ir_is<ir::Nop>(ins)) {
      } else if (auto* a = ir_as<ir::Assign>(ins)) {
        vars[a->dst] = ev(a->value);
      } else if (auto* fw = ir_as<ir::FieldWrite>(ins)) {
        Value target = ev(fw->target);
        Value value = ev(fw->value);
        if (target.ref == 0) throw EvalError("IR field write on null slipped past its check");
        heap_.at(target.ref).fields[resolve_field_key(fw->owner, fw->sig)] = value;
      } else if (auto* sw = ir_as<ir::StaticWrite>(ins)) {
        statics_[resolve_field_key(sw->owner, sw->sig)] = ev(sw->value);
      } else if (auto* fr = ir_as<ir::FieldRead>(ins)) {
        Value target = ev(fr->target);
        if (target.ref == 0) throw EvalError("IR field read on null slipped past its check");
        auto key = resolve_field_key(fr->owner, fr->sig);
        HeapObject& obj = heap_.at(target.ref);
        if (!obj.fields.count(key))
          obj.fields[key] = default_value(pool_.field_sig_of(fr->sig).type);
        vars[fr->dst] = obj.fields.at(key);
      } else if (auto* sr = ir_as<ir::StaticRead>(ins)) {
        auto key = resolve_field_key(sr->owner, sr->sig);
        if (!statics_.count(key))
          statics_[key] = default_value(pool_.field_sig_of(sr->sig).type);
        vars[sr->dst] = statics_.at(key);
      } else if (auto* aw = ir_as<ir::ArrayWrite>(ins)) {
        Value array = ev(aw->array);
        Value index = ev(aw->index);
        Value value = ev(aw->value);
        if (array.ref == 0) throw EvalError("IR array write on null slipped past its check");
        HeapObject& arr = heap_.at(array.ref);
        if (index.i < 0 || static_cast<std::size_t>(index.i) >= arr.elements.size())
          throw EvalError("IR array write out of bounds slipped past its check");
        if (aw->type == JvmArrayType::Object && value.ref != 0 &&
            !subtype(heap_.at(value.ref).type, arr.type.element().object()))
          throw EvalError("IR array store violation slipped past its check");
        arr.elements[static_cast<std::size_t>(index.i)] = value;
      } else if (auto* ard = ir_as<ir::ArrayRead>(ins)) {
        Value array = ev(ard->array);
        Value index = ev(ard->index);
        if (array.ref == 0) throw EvalError("IR array read on null slipped past its check");
        HeapObject& arr = heap_.at(array.ref);
        if (index.i < 0 || static_cast<std::size_t>(index.i) >= arr.elements.size())
          throw EvalError("IR array read out of bounds slipped past its check");
        vars[ard->dst] = arr.elements[static_cast<std::size_t>(index.i)];
      } else if (auto* no = ir_as<ir::NewObject>(ins)) {
        if (auto r = ensure_initialized(no->cls, depth)) {
          if (r->kind == Inner::Kind::Exc) {
            if (!raise(r->exc_ref)) return *escaped;
            jumped = true;
          } else {
            return *r;
          }
        }
        if (!jumped) {
          std::vector<Value> call_args{Value()};
          for (const Expr& a : no->args) call_args.push_back(ev(a));
          u4 ref = alloc_object(no->cls);
          call_args[0] = Value::of_ref(ref);
          const ClassNode* target = h_.load(no->cls);
          const ClassNode::Method* ctor = target->declared_method(no->ctor);
          if (!ctor) return unsupported_inner("constructor not declared");
          edges_.push_back({node.name, info.sig, pc, target->name, no->ctor});
          Inner r = call(*target, *ctor, call_args, depth + 1);
          if (r.kind == Inner::Kind::Ret) {
            vars[no->dst] = Value::of_ref(ref);
          } else if (r.kind == Inner::Kind::Exc) {
            if (!raise(r.exc_ref)) return *escaped;
            jumped = true;
          } else {
            return r;
          }
        }
      } else if (auto* na = ir_as<ir::NewArr>(ins)) {
        std::vector<i4> dims;
        for (const Expr& d : na->dims) dims.push_back(ev(d).i);
        for (i4 d : dims)
          if (d < 0) throw EvalError("IR negative array size slipped past its check");
        std::function<u4(const ObjectType&, std::size_t)> build =
            [&](const ObjectType& t, std::size_t level) -> u4 {
          u4 r = alloc_array(t, dims[level]);
          if (level + 1 < dims.size()) {
            const ObjectType& sub = t.element().object();
            for (i4 e = 0; e < dims[level]; ++e)
              heap_.at(r).elements[static_cast<std::size_t>(e)] =
                  Value::of_ref(build(sub, level + 1));
          }
          return r;
        };
        vars[na->dst] = Value::of_ref(build(na->array_type, 0));
      } else if (auto* iv = ir_as<ir::InvokeIr>(ins)) {
        std::vector<Value> call_args;
        Value recv;
        if (iv->receiver) {
          recv = ev(*iv->receiver);
          if (recv.ref == 0) throw EvalError("IR invoke on null slipped past its check");
          call_args.push_back(recv);
        }
        for (const Expr& a : iv->args) call_args.push_back(ev(a));
        std::optional<ResolvedCall> rc;
        try {
          rc = resolve_call(iv->owner, iv->sig, iv->kind, &node, recv.ref);
        } catch (const ResolutionError& e) {
          return unsupported_inner(e.what());
        }
        if (!rc) return unsupported_inner("no concrete implementation at runtime");
        if (iv->kind == InvokeKind::Static)
          if (auto r = ensure_initialized(rc->node->name, depth)) {
            if (r->kind == Inner::Kind::Exc) {
              if (!raise(r->exc_ref)) return *escaped;
              jumped = true;
            } else {
              return *r;
            }
          }
        if (!jumped) {
          edges_.push_back({node.name, info.sig, pc, rc->node->name, iv->sig});
          Inner r = call(*rc->node, *rc->method, call_args, depth + 1);
          if (r.kind == Inner::Kind::Ret) {
            if (iv->dst) vars[*iv->dst] = *r.ret;
          } else if (r.kind == Inner::Kind::Exc) {
            if (!raise(r.exc_ref)) return *escaped;
            jumped = true;
          } else {
            return r;
          }
        }
      } else if (auto* mi = ir_as<ir::MayInit>(ins)) {
        if (auto r = ensure_initialized(mi->cls, depth)) {
          if (r->kind == Inner::Kind::Exc) {
            if (!raise(r->exc_ref)) return *escaped;
            jumped = true;
          } else {
            return *r;
          }
        }
      } else if (auto* ck = ir_as<ir::CheckIr>(ins)) {
        const Check& c = ck->check;
        bool violated = false;
        switch (c.kind) {
          case CheckKind::NotZero: {
            Value v = ev(c.a);
            violated = v.kind == Value::Kind::Long ? v.l == 0 : v.i == 0;
            break;
          }
          case CheckKind::NotNull:
            violated = ev(c.a).ref == 0;
            break;
          case CheckKind::Bounds: {
            Value arr = ev(c.a);
            Value index = ev(*c.b);
            if (arr.ref == 0) throw EvalError("bounds check on null array");
            violated = index.i < 0 ||
                       static_cast<std::size_t>(index.i) >= heap_.at(arr.ref).elements.size();
            break;
          }
          case CheckKind::NotNegative:
            violated = ev(c.a).i < 0;
            break;
          case CheckKind::ArrayStore: {
            Value arr = ev(c.a);
            Value val = ev(*c.b);
            if (arr.ref == 0) throw EvalError("arraystore check on null array");
            violated = val.ref != 0 && !subtype(heap_.at(val.ref).type,
                                                heap_.at(arr.ref).type.element().object());
            break;
          }
          case CheckKind::CheckCast: {
            Value v = ev(c.a);
            violated = v.ref != 0 && !subtype(heap_.at(v.ref).type, *c.cast_type);
            break;
          }
        }
        if (violated) {
          if (!raise(throw_new(check_exception_name(c.kind)))) return *escaped;
          jumped = true;
        }
      } else if (auto* g = ir_as<ir::GotoIr>(ins)) {
        idx = g->target;
        jumped = true;
      } else if (auto* br = ir_as<ir::IfIr>(ins)) {
        Value a = ev(br->left), b = ev(br->right);
        bool taken;
        if (a.kind == Value::Kind::Ref || b.kind == Value::Kind::Ref) {
          if (br->op == CondOp::Eq)
            taken = a.ref == b.ref;
          else if (br->op == CondOp::Ne)
            taken = a.ref != b.ref;
          else
            throw EvalError("ordered comparison of references");
        } else {
          i8 x = a.kind == Value::Kind::Long ? a.l : a.i;
          i8 y = b.kind == Value::Kind::Long ? b.l : b.i;
          switch (br->op) {
            case CondOp::Eq:
              taken = x == y;
              break;
            case CondOp::Ne:
              taken = x != y;
              break;
            case CondOp::Lt:
              taken = x < y;
              break;
            case CondOp::Ge:
              taken = x >= y;
              break;
            case CondOp::Gt:
              taken = x > y;
              break;
            default:
              taken = x <= y;
              break;
          }
        }
        if (taken) {
          idx = br->target;
          jumped = true;
        }
      } else if (auto* sw2 = ir_as<ir::SwitchIr>(ins)) {
        i4 v = ev(sw2->selector).i;
        u4 target = sw2->default_target;
        for (const auto& [k, t] : sw2->cases)
          if (k == v) target = t;
        idx = target;
        jumped = true;
      } else if (auto* rt = ir_as<ir::ReturnIr>(ins)) {
        if (!rt->value) return Inner::returned(std::nullopt);
        return Inner::returned(ev(*rt->value));
      } else if (auto* th = ir_as<ir::ThrowIr>(ins)) {
        Value e = ev(th->value);
        if (e.ref == 0) throw EvalError("IR throw of null slipped past its check");
        if (!raise(e.ref)) return *escaped;
        jumped = true;
      } else if (auto* me = ir_as<ir::MonEnter>(ins)) {
        if (ev(me->value).ref == 0)
          throw EvalError("IR monitorenter on null slipped past its check");
      } else if (auto* mx = ir_as<ir::MonExit>(ins)) {
        if (ev(mx->value).ref == 0)
          throw EvalError("IR monitorexit on null slipped past its check");
      } else {
        return unsupported_inner("unsupported IR instruction at runtime");
      }
    } catch (const ResolutionError& e) {
      return unsupported_inner(e.what());
    }

    if (!jumped) ++idx;
  }
}

}  // namespace jbw
