#pragma once

// Small-step bytecode interpreter (EvalMachine::run_bytecode). Runs the raw
// instruction stream including jsr/ret, so differential runs against the IR
// exercise subroutine inlining as well.

#include "jbw/eval.hpp"

namespace jbw {

inline EvalMachine::Inner EvalMachine::run_bytecode(const ClassNode& node,
                                                    const MethodInfo& info,
                                                    const std::vector<Value>& args, int depth) {
  using namespace eval_detail;
  const MethodBody& body = *info.body;
  const std::vector<PcInstr>& code = body.instructions();
  std::map<u4, std::size_t> at;
  for (std::size_t i = 0; i < code.size(); ++i) at[code[i].pc] = i;

  std::vector<Value> locals(body.max_locals);
  {
    std::size_t slot = 0;
    for (const Value& a : args) {
      locals.at(slot++) = a;
      if (a.is_cat2()) ++slot;
    }
  }
  std::vector<Value> stack;
  std::size_t idx = 0;

  auto jump_to = [&](u4 pc) {
    auto it = at.find(pc);
    if (it == at.end()) throw EvalError("jump to a non-instruction pc");
    idx = it->second;
  };

  // raise: route through this frame's handlers, else escape
  std::optional<Inner> escaped;
  auto raise = [&](u4 exc_ref) -> bool {
    u4 pc = code[idx].pc;
    auto covers = [&](const ExceptionHandler& h) { return pc >= h.start_pc && pc < h.end_pc; };
    std::ptrdiff_t hi = find_handler(body.handlers, covers, exc_ref);
    if (hi < 0) {
      escaped = Inner::exception(exc_ref);
      return false;
    }
    stack.clear();
    stack.push_back(Value::of_ref(exc_ref));
    jump_to(body.handlers[static_cast<std::size_t>(hi)].handler_pc);
    return true;
  };
  auto raise_new = [&](const char* cls) { return raise(throw_new(cls)); };

  auto pop = [&]() {
    if (stack.empty()) throw EvalError("operand stack underflow at runtime");
    Value v = stack.back();
    stack.pop_back();
    return v;
  };

  while (true) {
    if (idx >= code.size()) throw EvalError("fell off the code");
    if (!spend()) {
      Inner r;
      r.kind = Inner::Kind::Budget;
      return r;
    }
    const PcInstr& pi = code[idx];
    const Instr& in = pi.instr;
    u4 pc = pi.pc;
    bool jumped = false;

    if (instr_is<op::Nop>(in)) {
    } else if (auto* c = instr_as<op::Const>(in)) {
      const ConstVal& v = c->value;
      if (v.is_null())
        stack.push_back(Value::null());
      else if (auto* i = std::get_if<i4>(&v.v))
        stack.push_back(Value::of_int(*i));
      else if (auto* l = std::get_if<i8>(&v.v))
        stack.push_back(Value::of_long(*l));
      else if (auto* f = std::get_if<float>(&v.v))
        stack.push_back(Value::of_float(*f));
      else if (auto* d = std::get_if<double>(&v.v))
        stack.push_back(Value::of_double(*d));
      else if (auto* s = std::get_if<std::string>(&v.v))
        stack.push_back(Value::of_ref(intern_string(*s)));
      else
        stack.push_back(Value::of_ref(intern_class_const(std::get<ObjectType>(v.v))));
    } else if (auto* l = instr_as<op::Load>(in)) {
      stack.push_back(locals.at(l->index));
    } else if (auto* s = instr_as<op::Store>(in)) {
      locals.at(s->index) = pop();
    } else if (auto* i = instr_as<op::IInc>(in)) {
      locals.at(i->index) = Value::of_int(jvm_iadd(locals.at(i->index).i, i->delta));
    } else if (auto* al = instr_as<op::ArrayLoad>(in)) {
      Value index = pop(), aref = pop();
      if (aref.ref == 0) {
        if (!raise_new("java.lang.NullPointerException")) return *escaped;
        jumped = true;
      } else {
        HeapObject& arr = heap_.at(aref.ref);
        if (index.i < 0 || static_cast<std::size_t>(index.i) >= arr.elements.size()) {
          if (!raise_new("java.lang.ArrayIndexOutOfBoundsException")) return *escaped;
          jumped = true;
        } else {
          (void)al;
          stack.push_back(arr.elements[static_cast<std::size_t>(index.i)]);
        }
      }
    } else if (auto* as = instr_as<op::ArrayStore>(in)) {
      Value value = pop(), index = pop(), aref = pop();
      if (aref.ref == 0) {
        if (!raise_new("java.lang.NullPointerException")) return *escaped;
        jumped = true;
      } else {
        HeapObject& arr = heap_.at(aref.ref);
        if (index.i < 0 || static_cast<std::size_t>(index.i) >= arr.elements.size()) {
          if (!raise_new("java.lang.ArrayIndexOutOfBoundsException")) return *escaped;
          jumped = true;
        } else if (as->type == JvmArrayType::Object && value.ref != 0 &&
                   !subtype(heap_.at(value.ref).type,
                            heap_.at(aref.ref).type.element().object())) {
          if (!raise_new("java.lang.ArrayStoreException")) return *escaped;
          jumped = true;
        } else {
          arr.elements[static_cast<std::size_t>(index.i)] = value;
        }
      }
    } else if (instr_is<op::ArrayLength>(in)) {
      Value aref = pop();
      if (aref.ref == 0) {
        if (!raise_new("java.lang.NullPointerException")) return *escaped;
        jumped = true;
      } else {
        stack.push_back(Value::of_int(static_cast<i4>(heap_.at(aref.ref).elements.size())));
      }
    } else if (is_stack_shuffle(in)) {
      apply_stack_shuffle(in, stack, [](const Value& v) { return v.is_cat2(); }, pc);
    } else if (auto* ar = instr_as<op::Arith>(in)) {
      Value b = Value::of_int(0), a;
      if (ar->op == ArithOp::Neg) {
        a = pop();
      } else {
        b = pop();
        a = pop();
      }
      bool div_zero = false;
      Value r = arith(ar->op, ar->type, a, b, div_zero);
      if (div_zero) {
        if (!raise_new("java.lang.ArithmeticException")) return *escaped;
        jumped = true;
      } else {
        stack.push_back(r);
      }
    } else if (auto* cv = instr_as<op::Conv>(in)) {
      stack.push_back(convert(cv->from, cv->to, pop()));
    } else if (auto* cm = instr_as<op::Cmp>(in)) {
      Value b = pop(), a = pop();
      stack.push_back(Value::of_int(compare(cm->kind, a, b)));
    } else if (auto* f = instr_as<op::If>(in)) {
      bool taken = false;
      if (f->cond >= IfCond::ICmpEq && f->cond <= IfCond::ICmpLe) {
        Value b = pop(), a = pop();
        switch (f->cond) {
          case IfCond::ICmpEq:
            taken = a.i == b.i;
            break;
          case IfCond::ICmpNe:
            taken = a.i != b.i;
            break;
          case IfCond::ICmpLt:
            taken = a.i < b.i;
            break;
          case IfCond::ICmpGe:
            taken = a.i >= b.i;
            break;
          case IfCond::ICmpGt:
            taken = a.i > b.i;
            break;
          default:
            taken = a.i <= b.i;
            break;
        }
      } else if (f->cond == IfCond::ACmpEq || f->cond == IfCond::ACmpNe) {
        Value b = pop(), a = pop();
        taken = (a.ref == b.ref) == (f->cond == IfCond::ACmpEq);
      } else if (f->cond == IfCond::Null || f->cond == IfCond::NonNull) {
        Value a = pop();
        taken = (a.ref == 0) == (f->cond == IfCond::Null);
      } else {
        Value a = pop();
        switch (f->cond) {
          case IfCond::Eq0:
            taken = a.i == 0;
            break;
          case IfCond::Ne0:
            taken = a.i != 0;
            break;
          case IfCond::Lt0:
            taken = a.i < 0;
            break;
          case IfCond::Ge0:
            taken = a.i >= 0;
            break;
          case IfCond::Gt0:
            taken = a.i > 0;
            break;
          default:
            taken = a.i <= 0;
            break;
        }
      }
      if (taken) {
        jump_to(f->target);
        jumped = true;
      }
    } else if (auto* g = instr_as<op::Goto>(in)) {
      jump_to(g->target);
      jumped = true;
    } else if (auto* j = instr_as<op::Jsr>(in)) {
      stack.push_back(Value::of_int(static_cast<i4>(code[idx + 1].pc)));
      jump_to(j->target);
      jumped = true;
    } else if (auto* r = instr_as<op::Ret>(in)) {
      jump_to(static_cast<u4>(locals.at(r->index).i));
      jumped = true;
    } else if (auto* ts = instr_as<op::TableSwitch>(in)) {
      i4 v = pop().i;
      if (v >= ts->low && v <= ts->high)
        jump_to(ts->targets[static_cast<std::size_t>(v - ts->low)]);
      else
        jump_to(ts->default_target);
      jumped = true;
    } else if (auto* ls = instr_as<op::LookupSwitch>(in)) {
      i4 v = pop().i;
      u4 target = ls->default_target;
      for (const auto& [k, t] : ls->pairs)
        if (k == v) target = t;
      jump_to(target);
      jumped = true;
    } else if (auto* rt = instr_as<op::Return>(in)) {
      if (!rt->type) return Inner::returned(std::nullopt);
      return Inner::returned(pop());
    } else if (auto* fo = instr_as<op::FieldOp>(in)) {
      const ClassNode* declared;
      try {
        declared = &resolve_field(h_, *h_.load(fo->owner), fo->sig);
      } catch (const ResolutionError& e) {
        return unsupported_inner(e.what());
      }
      auto key = std::pair<u4, u4>(declared->name.value, fo->sig.value);
      if (fo->is_static) {
        if (auto r = ensure_initialized(declared->name, depth)) {
          if (r->kind == Inner::Kind::Exc) {
            if (!raise(r->exc_ref)) return *escaped;
            jumped = true;
          } else {
            return *r;
          }
        }
        if (!jumped) {
          if (fo->is_put) {
            statics_[key] = pop();
          } else {
            auto it = statics_.find(key);
            if (it == statics_.end())
              statics_[key] = default_value(pool_.field_sig_of(fo->sig).type);
            stack.push_back(statics_.at(key));
          }
        }
      } else {
        Value value;
        if (fo->is_put) value = pop();
        Value target = pop();
        if (target.ref == 0) {
          if (!raise_new("java.lang.NullPointerException")) return *escaped;
          jumped = true;
        } else if (fo->is_put) {
          heap_.at(target.ref).fields[key] = value;
        } else {
          HeapObject& obj = heap_.at(target.ref);
          auto it = obj.fields.find(key);
          if (it == obj.fields.end())
            obj.fields[key] = default_value(pool_.field_sig_of(fo->sig).type);
          stack.push_back(obj.fields.at(key));
        }
      }
    } else if (auto* iv = instr_as<op::Invoke>(in)) {
      const MethodSig& msig = pool_.method_sig_of(iv->sig);
      std::vector<Value> call_args(msig.params.size());
      for (std::size_t k = msig.params.size(); k-- > 0;) call_args[k] = pop();
      Value recv;
      if (iv->kind != InvokeKind::Static) {
        recv = pop();
        if (recv.ref == 0) {
          if (!raise_new("java.lang.NullPointerException")) return *escaped;
          jumped = true;
        } else {
          call_args.insert(call_args.begin(), recv);
        }
      }
      if (!jumped) {
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
            if (msig.ret) stack.push_back(*r.ret);
          } else if (r.kind == Inner::Kind::Exc) {
            if (!raise(r.exc_ref)) return *escaped;
            jumped = true;
          } else {
            return r;
          }
        }
      }
    } else if (auto* n = instr_as<op::New>(in)) {
      if (auto r = ensure_initialized(n->cls, depth)) {
        if (r->kind == Inner::Kind::Exc) {
          if (!raise(r->exc_ref)) return *escaped;
          jumped = true;
        } else {
          return *r;
        }
      }
      if (!jumped) stack.push_back(Value::of_ref(alloc_object(n->cls)));
    } else if (auto* na = instr_as<op::NewArray>(in)) {
      std::vector<i4> dims(na->dims);
      for (std::size_t k = na->dims; k-- > 0;) dims[k] = pop().i;
      bool neg = false;
      for (i4 d : dims)
        if (d < 0) neg = true;
      if (neg) {
        if (!raise_new("java.lang.NegativeArraySizeException")) return *escaped;
        jumped = true;
      } else {
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
        stack.push_back(Value::of_ref(build(na->array_type, 0)));
      }
    } else if (instr_is<op::Throw>(in)) {
      Value e = pop();
      if (e.ref == 0) {
        if (!raise_new("java.lang.NullPointerException")) return *escaped;
      } else {
        if (!raise(e.ref)) return *escaped;
      }
      jumped = true;
    } else if (auto* cc = instr_as<op::CheckCast>(in)) {
      Value v = pop();
      if (v.ref != 0 && !subtype(heap_.at(v.ref).type, cc->type)) {
        if (!raise_new("java.lang.ClassCastException")) return *escaped;
        jumped = true;
      } else {
        stack.push_back(v);
      }
    } else if (auto* io = instr_as<op::InstanceOf>(in)) {
      Value v = pop();
      stack.push_back(Value::of_int(
          v.ref != 0 && subtype(heap_.at(v.ref).type, io->type) ? 1 : 0));
    } else if (instr_is<op::MonitorEnter>(in) || instr_is<op::MonitorExit>(in)) {
      Value v = pop();
      if (v.ref == 0) {
        if (!raise_new("java.lang.NullPointerException")) return *escaped;
        jumped = true;
      }
    } else {
      return unsupported_inner("unsupported opcode at runtime");
    }

    if (!jumped) ++idx;
  }
}

}  // namespace jbw
