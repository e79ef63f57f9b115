#pragma once

#include <set>

#include "jbw/ir.hpp"

namespace jbw {

// Flat per-slot type domain. Unset doubles as "unusable": a local is typed
// only where every incoming path agrees, which is exactly what the untyped
// opcodes require anyway. Second marks the high half of a long/double.
enum class SlotTy : u1 { Unset, I, F, L, D, Ref, Second, Top };

inline SlotTy slot_of(JvmType t) {
  switch (t) {
    case JvmType::Int:
      return SlotTy::I;
    case JvmType::Float:
      return SlotTy::F;
    case JvmType::Long:
      return SlotTy::L;
    case JvmType::Double:
      return SlotTy::D;
    case JvmType::Object:
      return SlotTy::Ref;
  }
  return SlotTy::Top;
}

struct TypeState {
  std::vector<SlotTy> locals;
  std::vector<JvmType> stack;  // one entry per logical value (cat2 = one entry)

  friend bool operator==(const TypeState&, const TypeState&) = default;
};

struct TypingResult {
  std::map<u4, TypeState> entry;  // reachable pcs only
  std::set<u4> jump_targets;      // includes handler pcs
  u4 max_visits = 0;              // per-pc visit bound actually observed

  const TypeState* at(u4 pc) const {
    auto it = entry.find(pc);
    return it == entry.end() ? nullptr : &it->second;
  }
};

// Generic pop/dup/swap semantics over logical stack elements, shared by the
// typing pass (elements = JvmType) and the transformer (symbolic elements).
// `cat2` tells whether an element occupies two slots.
template <class E, class Cat2>
void apply_stack_shuffle(const Instr& in, std::vector<E>& st, Cat2 cat2, u4 pc) {
  auto underflow = [&] { throw TransformError("operand stack underflow", pc); };
  auto need = [&](std::size_t n) {
    if (st.size() < n) underflow();
  };
  auto top_is2 = [&](std::size_t depth) { return cat2(st[st.size() - 1 - depth]); };

  if (instr_is<op::Pop>(in)) {
    need(1);
    if (top_is2(0)) throw TransformError("pop on a category-2 value", pc);
    st.pop_back();
  } else if (instr_is<op::Pop2>(in)) {
    need(1);
    if (top_is2(0)) {
      st.pop_back();
    } else {
      need(2);
      if (top_is2(1)) throw TransformError("pop2 splits a category-2 value", pc);
      st.pop_back();
      st.pop_back();
    }
  } else if (instr_is<op::Dup>(in)) {
    need(1);
    if (top_is2(0)) throw TransformError("dup on a category-2 value", pc);
    st.push_back(st.back());
  } else if (instr_is<op::DupX1>(in)) {
    need(2);
    if (top_is2(0) || top_is2(1)) throw TransformError("dup_x1 on category-2 values", pc);
    E a = st.back();
    st.insert(st.end() - 2, a);
  } else if (instr_is<op::DupX2>(in)) {
    need(2);
    if (top_is2(0)) throw TransformError("dup_x2 with category-2 on top", pc);
    E a = st.back();
    if (top_is2(1)) {
      st.insert(st.end() - 2, a);  // form 2: [b2 a] -> [a b2 a]
    } else {
      need(3);
      if (top_is2(2)) throw TransformError("dup_x2 splits a category-2 value", pc);
      st.insert(st.end() - 3, a);
    }
  } else if (instr_is<op::Dup2>(in)) {
    need(1);
    if (top_is2(0)) {
      st.push_back(st.back());
    } else {
      need(2);
      if (top_is2(1)) throw TransformError("dup2 splits a category-2 value", pc);
      E a = st[st.size() - 1], b = st[st.size() - 2];
      st.push_back(b);
      st.push_back(a);
    }
  } else if (instr_is<op::Dup2X1>(in)) {
    need(2);
    if (top_is2(0)) {
      if (top_is2(1)) throw TransformError("dup2_x1 needs category-1 below", pc);
      E a = st.back();
      st.insert(st.end() - 2, a);  // [b1 a2] -> [a2 b1 a2]
    } else {
      need(3);
      if (top_is2(1) || top_is2(2)) throw TransformError("dup2_x1 splits a category-2 value", pc);
      E a = st[st.size() - 1], b = st[st.size() - 2];
      st.insert(st.end() - 3, {b, a});
    }
  } else if (instr_is<op::Dup2X2>(in)) {
    need(2);
    if (top_is2(0)) {
      E a = st.back();
      if (top_is2(1)) {
        st.insert(st.end() - 2, a);  // [b2 a2] -> [a2 b2 a2]
      } else {
        need(3);
        if (top_is2(2)) throw TransformError("dup2_x2 splits a category-2 value", pc);
        st.insert(st.end() - 3, a);  // [c1 b1 a2] -> [a2 c1 b1 a2]
      }
    } else {
      need(3);
      E a = st[st.size() - 1], b = st[st.size() - 2];
      if (top_is2(2)) {
        st.insert(st.end() - 3, {b, a});  // [c2 b1 a1] -> [b1 a1 c2 b1 a1]
      } else {
        need(4);
        if (top_is2(3)) throw TransformError("dup2_x2 splits a category-2 value", pc);
        st.insert(st.end() - 4, {b, a});
      }
    }
  } else if (instr_is<op::Swap>(in)) {
    need(2);
    if (top_is2(0) || top_is2(1)) throw TransformError("swap on category-2 values", pc);
    std::swap(st[st.size() - 1], st[st.size() - 2]);
  }
}

inline bool is_stack_shuffle(const Instr& in) {
  return instr_is<op::Pop>(in) || instr_is<op::Pop2>(in) || instr_is<op::Dup>(in) ||
         instr_is<op::DupX1>(in) || instr_is<op::DupX2>(in) || instr_is<op::Dup2>(in) ||
         instr_is<op::Dup2X1>(in) || instr_is<op::Dup2X2>(in) || instr_is<op::Swap>(in);
}

namespace typing_detail {

inline void set_local(std::vector<SlotTy>& locals, u4 index, SlotTy ty, bool cat2, u4 pc) {
  if (index + (cat2 ? 1u : 0u) >= locals.size())
    throw TransformError("local index " + std::to_string(index) + " out of range", pc);
  // overwriting either half of a wide value invalidates it
  if (index > 0 && (locals[index - 1] == SlotTy::L || locals[index - 1] == SlotTy::D))
    locals[index - 1] = SlotTy::Top;
  locals[index] = ty;
  if (cat2) {
    if (index + 2 < locals.size() && locals[index + 1] == SlotTy::L)
      locals[index + 2] = SlotTy::Top;
    if (index + 2 < locals.size() && locals[index + 1] == SlotTy::D)
      locals[index + 2] = SlotTy::Top;
    locals[index + 1] = SlotTy::Second;
  }
}

inline void check_local(const std::vector<SlotTy>& locals, u4 index, JvmType t, u4 pc) {
  if (index >= locals.size())
    throw TransformError("local index " + std::to_string(index) + " out of range", pc);
  SlotTy want = slot_of(t);
  if (locals[index] != want)
    throw TransformError("local " + std::to_string(index) + " holds a different type (clash)",
                         pc);
  if (is_category2(t)) {
    if (index + 1 >= locals.size() || locals[index + 1] != SlotTy::Second)
      throw TransformError("wide local " + std::to_string(index) + " is split", pc);
  }
}

inline JvmType pop_ty(std::vector<JvmType>& st, JvmType want, u4 pc) {
  if (st.empty()) throw TransformError("operand stack underflow", pc);
  JvmType got = st.back();
  st.pop_back();
  if (got != want)
    throw TransformError("operand type clash on the stack", pc);
  return got;
}

inline JvmType pop_any(std::vector<JvmType>& st, u4 pc) {
  if (st.empty()) throw TransformError("operand stack underflow", pc);
  JvmType got = st.back();
  st.pop_back();
  return got;
}

}  // namespace typing_detail

// Entry locals for a method: receiver (unless static), then parameters with
// their two-slot layout.
inline std::vector<SlotTy> entry_locals(const MethodSig& sig, bool is_static, u2 max_locals) {
  std::vector<SlotTy> locals(max_locals, SlotTy::Unset);
  std::size_t slot = 0;
  if (!is_static) locals.at(slot++) = SlotTy::Ref;
  for (const auto& p : sig.params) {
    JvmType t = p.computational();
    locals.at(slot++) = slot_of(t);
    if (is_category2(t)) locals.at(slot++) = SlotTy::Second;
  }
  return locals;
}

// Assigns each reachable pc an entry state over the flat domain. One forward
// sweep ordered by a pc worklist: forward joins are complete before their pc
// is visited; a backward edge must agree on the stack exactly and may only
// demote dead locals to Top. No fixpoint iteration happens and every
// reachable pc is visited exactly once.
inline TypingResult infer_types(const std::vector<PcInstr>& code,
                                const std::vector<ExceptionHandler>& handlers,
                                const MethodSig& sig, bool is_static, u2 max_locals,
                                const InternPool& pool) {
  using namespace typing_detail;
  TypingResult res;
  if (code.empty()) return res;

  std::map<u4, std::size_t> index_of;
  for (std::size_t i = 0; i < code.size(); ++i) index_of[code[i].pc] = i;
  for (const auto& pi : code) {
    if (instr_is<op::Jsr>(pi.instr) || instr_is<op::Ret>(pi.instr))
      throw TransformError("subroutines must be inlined before typing", pi.pc);
    for (u4 t : branch_targets(pi.instr)) res.jump_targets.insert(t);
  }
  for (const auto& h : handlers) res.jump_targets.insert(h.handler_pc);

  std::map<u4, u4> visits;
  std::set<u4> pending;
  auto propagate = [&](u4 from_pc, u4 to_pc, TypeState state, bool handler_edge) {
    auto it = res.entry.find(to_pc);
    if (it == res.entry.end()) {
      res.entry.emplace(to_pc, std::move(state));
      pending.insert(to_pc);
      return;
    }
    TypeState& have = it->second;
    if (have.stack.size() != state.stack.size())
      throw TransformError("stack height mismatch at join point " + std::to_string(to_pc),
                           from_pc);
    for (std::size_t k = 0; k < state.stack.size(); ++k)
      if (have.stack[k] != state.stack[k])
        throw TransformError("stack type clash at join point " + std::to_string(to_pc),
                             from_pc);
    for (std::size_t k = 0; k < state.locals.size(); ++k)
      if (have.locals[k] != state.locals[k]) have.locals[k] = SlotTy::Top;
    (void)handler_edge;
  };

  auto handler_exc_state = [&](const TypeState& at, u4) {
    TypeState hs;
    hs.locals = at.locals;
    hs.stack = {JvmType::Object};
    return hs;
  };

  TypeState start;
  start.locals = entry_locals(sig, is_static, max_locals);
  res.entry.emplace(code.front().pc, start);
  pending.insert(code.front().pc);

  while (!pending.empty()) {
    u4 pc = *pending.begin();
    pending.erase(pending.begin());
    auto idx_it = index_of.find(pc);
    if (idx_it == index_of.end())
      throw TransformError("control flows to a non-instruction pc", pc);
    std::size_t idx = idx_it->second;
    const Instr& in = code[idx].instr;
    TypeState st = res.entry.at(pc);
    res.max_visits = std::max(res.max_visits, ++visits[pc]);

    // handler edges: the protected instruction contributes its locals
    for (const auto& h : handlers)
      if (pc >= h.start_pc && pc < h.end_pc)
        propagate(pc, h.handler_pc, handler_exc_state(st, pc), true);

    auto& locals = st.locals;
    auto& stack = st.stack;

    if (auto* c = instr_as<op::Const>(in)) {
      stack.push_back(c->value.type());
    } else if (auto* l = instr_as<op::Load>(in)) {
      check_local(locals, l->index, l->type, pc);
      stack.push_back(l->type);
    } else if (auto* s = instr_as<op::Store>(in)) {
      pop_ty(stack, s->type, pc);
      set_local(locals, s->index, slot_of(s->type), is_category2(s->type), pc);
    } else if (auto* i = instr_as<op::IInc>(in)) {
      check_local(locals, i->index, JvmType::Int, pc);
    } else if (auto* al = instr_as<op::ArrayLoad>(in)) {
      pop_ty(stack, JvmType::Int, pc);
      pop_ty(stack, JvmType::Object, pc);
      stack.push_back(to_jvm_type(al->type));
    } else if (auto* as = instr_as<op::ArrayStore>(in)) {
      pop_ty(stack, to_jvm_type(as->type), pc);
      pop_ty(stack, JvmType::Int, pc);
      pop_ty(stack, JvmType::Object, pc);
    } else if (instr_is<op::ArrayLength>(in)) {
      pop_ty(stack, JvmType::Object, pc);
      stack.push_back(JvmType::Int);
    } else if (is_stack_shuffle(in)) {
      apply_stack_shuffle(in, stack, [](JvmType t) { return is_category2(t); }, pc);
    } else if (auto* ar = instr_as<op::Arith>(in)) {
      JvmType t = to_jvm_type(ar->type);
      if (ar->op == ArithOp::Neg) {
        pop_ty(stack, t, pc);
        stack.push_back(t);
      } else if (ar->op == ArithOp::Shl || ar->op == ArithOp::Shr || ar->op == ArithOp::UShr) {
        pop_ty(stack, JvmType::Int, pc);
        pop_ty(stack, t, pc);
        stack.push_back(t);
      } else {
        pop_ty(stack, t, pc);
        pop_ty(stack, t, pc);
        stack.push_back(t);
      }
    } else if (auto* cv = instr_as<op::Conv>(in)) {
      pop_ty(stack, to_jvm_type(cv->from), pc);
      switch (cv->to) {
        case ConvTarget::Long:
          stack.push_back(JvmType::Long);
          break;
        case ConvTarget::Float:
          stack.push_back(JvmType::Float);
          break;
        case ConvTarget::Double:
          stack.push_back(JvmType::Double);
          break;
        default:
          stack.push_back(JvmType::Int);
          break;
      }
    } else if (auto* cm = instr_as<op::Cmp>(in)) {
      JvmType t = cm->kind == CmpKind::LCmp
                      ? JvmType::Long
                      : (cm->kind <= CmpKind::FCmpG ? JvmType::Float : JvmType::Double);
      pop_ty(stack, t, pc);
      pop_ty(stack, t, pc);
      stack.push_back(JvmType::Int);
    } else if (auto* f = instr_as<op::If>(in)) {
      if (f->cond >= IfCond::ICmpEq && f->cond <= IfCond::ICmpLe) {
        pop_ty(stack, JvmType::Int, pc);
        pop_ty(stack, JvmType::Int, pc);
      } else if (f->cond == IfCond::ACmpEq || f->cond == IfCond::ACmpNe) {
        pop_ty(stack, JvmType::Object, pc);
        pop_ty(stack, JvmType::Object, pc);
      } else if (f->cond == IfCond::Null || f->cond == IfCond::NonNull) {
        pop_ty(stack, JvmType::Object, pc);
      } else {
        pop_ty(stack, JvmType::Int, pc);
      }
    } else if (instr_is<op::Goto>(in)) {
      // no stack effect
    } else if (instr_is<op::TableSwitch>(in) || instr_is<op::LookupSwitch>(in)) {
      pop_ty(stack, JvmType::Int, pc);
    } else if (auto* r = instr_as<op::Return>(in)) {
      if (r->type) pop_ty(stack, *r->type, pc);
    } else if (auto* fo = instr_as<op::FieldOp>(in)) {
      JvmType ft = pool.field_sig_of(fo->sig).type.computational();
      if (fo->is_put) pop_ty(stack, ft, pc);
      if (!fo->is_static) pop_ty(stack, JvmType::Object, pc);
      if (!fo->is_put) stack.push_back(ft);
    } else if (auto* iv = instr_as<op::Invoke>(in)) {
      const MethodSig& ms = pool.method_sig_of(iv->sig);
      for (auto it2 = ms.params.rbegin(); it2 != ms.params.rend(); ++it2)
        pop_ty(stack, it2->computational(), pc);
      if (iv->kind != InvokeKind::Static) pop_ty(stack, JvmType::Object, pc);
      if (ms.ret) stack.push_back(ms.ret->computational());
    } else if (instr_is<op::New>(in)) {
      stack.push_back(JvmType::Object);
    } else if (auto* na = instr_as<op::NewArray>(in)) {
      for (u1 d = 0; d < na->dims; ++d) pop_ty(stack, JvmType::Int, pc);
      stack.push_back(JvmType::Object);
    } else if (instr_is<op::Throw>(in)) {
      pop_ty(stack, JvmType::Object, pc);
    } else if (instr_is<op::CheckCast>(in)) {
      pop_ty(stack, JvmType::Object, pc);
      stack.push_back(JvmType::Object);
    } else if (instr_is<op::InstanceOf>(in)) {
      pop_ty(stack, JvmType::Object, pc);
      stack.push_back(JvmType::Int);
    } else if (instr_is<op::MonitorEnter>(in) || instr_is<op::MonitorExit>(in)) {
      pop_ty(stack, JvmType::Object, pc);
    } else if (instr_is<op::Nop>(in)) {
      // nothing
    } else {
      throw TransformError("unsupported instruction during typing", pc);
    }

    for (u4 t : branch_targets(in)) propagate(pc, t, st, false);
    if (falls_through(in)) {
      if (idx + 1 >= code.size())
        throw TransformError("control falls off the end of the code", pc);
      propagate(pc, code[idx + 1].pc, st, false);
    }
  }

  return res;
}

}  // namespace jbw
