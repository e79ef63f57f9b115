#pragma once

#include "jbw/ir_subroutines.hpp"
#include "jbw/ir_typing.hpp"

namespace jbw {

// Bytecode-to-IR transformation: a single generation sweep of symbolic
// execution over the typed code. The symbolic stack holds pure expressions
// (or uninitialized-allocation markers); at every jump target the stack is
// materialized into stack-save variables named by (target pc, depth), so the
// entry stack of a join point reads the same along every incoming edge.
namespace transform_detail {

struct SymElem {
  Expr expr;  // valid unless uninit
  bool uninit = false;
  ClassNameId cls{};
  u4 alloc_pc = 0;

  JvmType type() const { return uninit ? JvmType::Object : expr.type(); }
  bool same_alloc(const SymElem& o) const {
    return uninit && o.uninit && cls == o.cls && alloc_pc == o.alloc_pc;
  }
};

class Transformer {
 public:
  Transformer(ClassNameId owner, MethodSigId sig, u2 access, const std::vector<PcInstr>& code,
              const std::vector<ExceptionHandler>& handlers, const TypingResult& typing,
              InternPool& pool, u2 max_locals)
      : code_(code), handlers_(handlers), typing_(typing), pool_(pool) {
    m_.owner = owner;
    m_.sig = sig;
    m_.access = access;
    m_.bytecode_instr_count = static_cast<u4>(code.size());
    m_.bytecode_locals = max_locals;
  }

  IrMethod run() {
    std::optional<std::vector<SymElem>> cur;
    cur.emplace();  // the method entry starts with an empty operand stack
    for (std::size_t idx = 0; idx < code_.size(); ++idx) {
      const PcInstr& pi = code_[idx];
      pc_ = pi.pc;
      temp_ctr_ = 0;
      const TypeState* typed = typing_.at(pc_);
      if (!typed) {
        cur.reset();  // unreachable: emits nothing
        continue;
      }
      if (typing_.jump_targets.count(pc_)) {
        cur = canonical_stack(pc_, *typed);
      } else if (!cur) {
        throw TransformError("internal: reachable pc without a carried stack", pc_);
      }
      step(idx, pi.instr, *cur);
    }
    patch_labels();
    build_handlers();
    m_.passes_used = 1 /*target scan*/ + static_cast<int>(typing_.max_visits) + 1 /*this sweep*/;
    return std::move(m_);
  }

 private:
  // --- plumbing --------------------------------------------------------------

  void emit(IrInstr ins) { m_.body.push_back({pc_, std::move(ins)}); }

  VarId save_var(u4 target, u4 depth, JvmType t) {
    return vt_.get(m_, VarOrigin::StackSave, target, depth, t);
  }
  VarId local_var(u4 slot, JvmType t) { return vt_.get(m_, VarOrigin::Local, slot, 0, t); }
  VarId fresh_temp(JvmType t) { return vt_.get(m_, VarOrigin::Temp, pc_, temp_ctr_++, t); }

  std::vector<SymElem> canonical_stack(u4 target, const TypeState& ts) {
    std::vector<SymElem> st;
    for (u4 k = 0; k < ts.stack.size(); ++k) {
      VarId v = save_var(target, k, ts.stack[k]);
      st.push_back(SymElem{Expr::var(v, ts.stack[k])});
    }
    return st;
  }

  Expr use(const SymElem& e) const {
    if (e.uninit)
      throw TransformError("uninitialized object used before its constructor", pc_);
    return e.expr;
  }

  SymElem pop(std::vector<SymElem>& st) {
    if (st.empty()) throw TransformError("symbolic stack underflow", pc_);
    SymElem e = std::move(st.back());
    st.pop_back();
    return e;
  }
  Expr pop_expr(std::vector<SymElem>& st) { return use(pop(st)); }

  // Replaces stack expressions that mention a variable about to be
  // overwritten; the value read at push time must survive the write.
  template <class KillPred>
  void materialize(std::vector<SymElem>& st, KillPred killed) {
    for (auto& e : st) {
      if (e.uninit) continue;
      bool hit = false;
      e.expr.for_each_var([&](VarId v) { hit = hit || killed(v); });
      if (!hit) continue;
      if (e.expr.node().kind == ExprNode::Kind::Var) {
        // a bare variable read: copy it
      }
      VarId tmp = fresh_temp(e.expr.type());
      emit(ir::Assign{tmp, e.expr});
      e.expr = Expr::var(tmp, e.expr.type());
    }
  }

  void kill_local(std::vector<SymElem>& st, u4 slot, bool cat2) {
    materialize(st, [&](VarId v) {
      const IrVarInfo& info = m_.vars[v];
      if (info.origin != VarOrigin::Local) return false;
      if (info.a == slot) return true;
      if (cat2 && info.a == slot + 1) return true;
      // writing into the high half of a wide local kills it too
      if (info.a + 1 == slot && is_category2(info.type)) return true;
      return false;
    });
  }

  // Spills the symbolic stack for every restore-point successor. One
  // parallel-copy batch: sources touching any assigned save variable are
  // materialized first so later assignments never read a clobbered value.
  // `guard_exprs` (branch conditions, switch selectors) get the same
  // treatment in place.
  void flush_for(const std::vector<SymElem>& st, const std::vector<u4>& targets,
                 std::vector<Expr*> guard_exprs) {
    struct Slot {
      VarId dst;
      Expr src;
    };
    std::vector<Slot> batch;
    std::set<VarId> assigned;
    for (u4 t : targets) {
      const TypeState* ts = typing_.at(t);
      if (!ts) throw TransformError("internal: flush into untyped target", pc_);
      if (ts->stack.size() != st.size())
        throw TransformError("internal: stack height disagrees with typing", pc_);
      for (u4 k = 0; k < st.size(); ++k) {
        if (st[k].uninit)
          throw TransformError(
              "uninitialized allocation is live across a branch (unfoldable constructor)", pc_);
        VarId dst = save_var(t, k, ts->stack[k]);
        if (st[k].expr.is_var(dst)) continue;  // identity spill
        batch.push_back({dst, st[k].expr});
        assigned.insert(dst);
      }
    }
    auto mentions_assigned = [&](const Expr& e) {
      bool hit = false;
      e.for_each_var([&](VarId v) { hit = hit || assigned.count(v) != 0; });
      return hit;
    };
    for (auto& s : batch) {
      if (!mentions_assigned(s.src)) continue;
      VarId tmp = fresh_temp(s.src.type());
      emit(ir::Assign{tmp, s.src});
      s.src = Expr::var(tmp, s.src.type());
    }
    for (Expr* g : guard_exprs) {
      if (!mentions_assigned(*g)) continue;
      VarId tmp = fresh_temp(g->type());
      emit(ir::Assign{tmp, *g});
      *g = Expr::var(tmp, g->type());
    }
    for (const auto& s : batch) emit(ir::Assign{s.dst, s.src});
  }

  // restore-point successors of a conditional/fallthrough edge set
  std::vector<u4> restore_targets(std::initializer_list<u4> pcs) {
    std::vector<u4> out;
    for (u4 p : pcs)
      if (typing_.jump_targets.count(p) &&
          std::find(out.begin(), out.end(), p) == out.end())
        out.push_back(p);
    std::sort(out.begin(), out.end());
    return out;
  }

  void check(CheckKind kind, Expr a, std::optional<Expr> b = std::nullopt,
             std::optional<ObjectType> type = std::nullopt) {
    emit(ir::CheckIr{Check{kind, std::move(a), std::move(b), std::move(type)}});
  }

  // --- the transfer function --------------------------------------------------

  void step(std::size_t idx, const Instr& in, std::vector<SymElem>& st) {
    u4 next_pc = idx + 1 < code_.size() ? code_[idx + 1].pc : ~0u;
    bool fell_through = true;

    if (instr_is<op::Nop>(in)) {
      emit(ir::Nop{});
    } else if (auto* c = instr_as<op::Const>(in)) {
      st.push_back(SymElem{Expr::constant(c->value)});
    } else if (auto* l = instr_as<op::Load>(in)) {
      st.push_back(SymElem{Expr::var(local_var(l->index, l->type), l->type)});
    } else if (auto* s = instr_as<op::Store>(in)) {
      Expr e = pop_expr(st);
      kill_local(st, s->index, is_category2(s->type));
      emit(ir::Assign{local_var(s->index, s->type), std::move(e)});
    } else if (auto* i = instr_as<op::IInc>(in)) {
      kill_local(st, i->index, false);
      VarId v = local_var(i->index, JvmType::Int);
      emit(ir::Assign{v, Expr::binop(BinOpKind::Add, JvmBasicType::Int,
                                     Expr::var(v, JvmType::Int),
                                     Expr::constant(ConstVal{static_cast<i4>(i->delta)}))});
    } else if (auto* al = instr_as<op::ArrayLoad>(in)) {
      Expr index = pop_expr(st);
      Expr array = pop_expr(st);
      check(CheckKind::NotNull, array);
      check(CheckKind::Bounds, array, index);
      JvmType t = to_jvm_type(al->type);
      VarId dst = fresh_temp(t);
      emit(ir::ArrayRead{dst, std::move(array), std::move(index), al->type});
      st.push_back(SymElem{Expr::var(dst, t)});
    } else if (auto* as = instr_as<op::ArrayStore>(in)) {
      Expr value = pop_expr(st);
      Expr index = pop_expr(st);
      Expr array = pop_expr(st);
      check(CheckKind::NotNull, array);
      check(CheckKind::Bounds, array, index);
      if (as->type == JvmArrayType::Object) check(CheckKind::ArrayStore, array, value);
      emit(ir::ArrayWrite{std::move(array), std::move(index), std::move(value), as->type});
    } else if (instr_is<op::ArrayLength>(in)) {
      Expr array = pop_expr(st);
      check(CheckKind::NotNull, array);
      st.push_back(SymElem{Expr::array_length(std::move(array))});
    } else if (is_stack_shuffle(in)) {
      // pop discards its operand: an allocation marker consumed here would
      // never meet its constructor
      if (instr_is<op::Pop>(in) || instr_is<op::Pop2>(in)) {
        std::size_t depth = instr_is<op::Pop2>(in) && st.size() >= 2 &&
                                    !is_category2(st.back().type())
                                ? 2
                                : 1;
        for (std::size_t k = 0; k < depth && k < st.size(); ++k)
          if (st[st.size() - 1 - k].uninit)
            throw TransformError("uninitialized object discarded before its constructor", pc_);
      }
      apply_stack_shuffle(in, st, [](const SymElem& e) { return is_category2(e.type()); }, pc_);
    } else if (auto* ar = instr_as<op::Arith>(in)) {
      if (ar->op == ArithOp::Neg) {
        Expr e = pop_expr(st);
        st.push_back(SymElem{Expr::neg(std::move(e), ar->type)});
      } else {
        Expr rhs = pop_expr(st);
        Expr lhs = pop_expr(st);
        if ((ar->op == ArithOp::Div || ar->op == ArithOp::Rem) &&
            (ar->type == JvmBasicType::Int || ar->type == JvmBasicType::Long))
          check(CheckKind::NotZero, rhs);
        static const BinOpKind kinds[] = {BinOpKind::Add, BinOpKind::Sub, BinOpKind::Mul,
                                          BinOpKind::Div, BinOpKind::Rem, BinOpKind::Add /*neg*/,
                                          BinOpKind::Shl, BinOpKind::Shr, BinOpKind::UShr,
                                          BinOpKind::And, BinOpKind::Or, BinOpKind::Xor};
        st.push_back(SymElem{Expr::binop(kinds[static_cast<int>(ar->op)], ar->type,
                                         std::move(lhs), std::move(rhs))});
      }
    } else if (auto* cv = instr_as<op::Conv>(in)) {
      Expr e = pop_expr(st);
      st.push_back(SymElem{Expr::conv(std::move(e), cv->from, cv->to)});
    } else if (auto* cm = instr_as<op::Cmp>(in)) {
      Expr rhs = pop_expr(st);
      Expr lhs = pop_expr(st);
      st.push_back(SymElem{Expr::cmp(cm->kind, std::move(lhs), std::move(rhs))});
    } else if (auto* f = instr_as<op::If>(in)) {
      CondOp cop;
      Expr left, right;
      if (f->cond >= IfCond::ICmpEq && f->cond <= IfCond::ICmpLe) {
        right = pop_expr(st);
        left = pop_expr(st);
        cop = static_cast<CondOp>(static_cast<int>(f->cond) - static_cast<int>(IfCond::ICmpEq));
      } else if (f->cond == IfCond::ACmpEq || f->cond == IfCond::ACmpNe) {
        right = pop_expr(st);
        left = pop_expr(st);
        cop = f->cond == IfCond::ACmpEq ? CondOp::Eq : CondOp::Ne;
      } else if (f->cond == IfCond::Null || f->cond == IfCond::NonNull) {
        left = pop_expr(st);
        right = Expr::constant(ConstVal{ConstVal::Null{}});
        cop = f->cond == IfCond::Null ? CondOp::Eq : CondOp::Ne;
      } else {
        left = pop_expr(st);
        right = Expr::constant(ConstVal{static_cast<i4>(0)});
        cop = static_cast<CondOp>(static_cast<int>(f->cond));
      }
      auto targets = restore_targets({f->target, next_pc});
      flush_for(st, targets, {&left, &right});
      emit(ir::IfIr{cop, std::move(left), std::move(right), f->target});
      if (typing_.jump_targets.count(next_pc)) {
        // entry of the fallthrough is canonical; handled at the next pc
      } else if (!targets.empty()) {
        // keep carrying values through their just-written spill slots
        rebind_to_saves(st, targets.front());
      }
    } else if (auto* g = instr_as<op::Goto>(in)) {
      flush_for(st, {g->target}, {});
      emit(ir::GotoIr{g->target});
      fell_through = false;
    } else if (auto* ts = instr_as<op::TableSwitch>(in)) {
      Expr sel = pop_expr(st);
      std::vector<u4> succ{ts->default_target};
      succ.insert(succ.end(), ts->targets.begin(), ts->targets.end());
      std::sort(succ.begin(), succ.end());
      succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
      flush_for(st, succ, {&sel});
      ir::SwitchIr sw;
      sw.selector = std::move(sel);
      for (std::size_t k = 0; k < ts->targets.size(); ++k)
        sw.cases.emplace_back(ts->low + static_cast<i4>(k), ts->targets[k]);
      sw.default_target = ts->default_target;
      emit(std::move(sw));
      fell_through = false;
    } else if (auto* ls = instr_as<op::LookupSwitch>(in)) {
      Expr sel = pop_expr(st);
      std::vector<u4> succ{ls->default_target};
      for (auto& [k, t] : ls->pairs) succ.push_back(t);
      std::sort(succ.begin(), succ.end());
      succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
      flush_for(st, succ, {&sel});
      ir::SwitchIr sw;
      sw.selector = std::move(sel);
      for (auto& [k, t] : ls->pairs) sw.cases.emplace_back(k, t);
      sw.default_target = ls->default_target;
      emit(std::move(sw));
      fell_through = false;
    } else if (auto* r = instr_as<op::Return>(in)) {
      if (r->type)
        emit(ir::ReturnIr{pop_expr(st)});
      else
        emit(ir::ReturnIr{std::nullopt});
      fell_through = false;
    } else if (auto* fo = instr_as<op::FieldOp>(in)) {
      const FieldSig& fsig = pool_.field_sig_of(fo->sig);
      JvmType ft = fsig.type.computational();
      if (fo->is_static) {
        emit(ir::MayInit{fo->owner});
        if (fo->is_put) {
          Expr value = pop_expr(st);
          emit(ir::StaticWrite{fo->owner, fo->sig, std::move(value)});
        } else {
          VarId dst = fresh_temp(ft);
          emit(ir::StaticRead{dst, fo->owner, fo->sig});
          st.push_back(SymElem{Expr::var(dst, ft)});
        }
      } else {
        if (fo->is_put) {
          Expr value = pop_expr(st);
          Expr target = pop_expr(st);
          check(CheckKind::NotNull, target);
          emit(ir::FieldWrite{std::move(target), fo->owner, fo->sig, std::move(value)});
        } else {
          Expr target = pop_expr(st);
          check(CheckKind::NotNull, target);
          VarId dst = fresh_temp(ft);
          emit(ir::FieldRead{dst, std::move(target), fo->owner, fo->sig});
          st.push_back(SymElem{Expr::var(dst, ft)});
        }
      }
    } else if (auto* iv = instr_as<op::Invoke>(in)) {
      const MethodSig& msig = pool_.method_sig_of(iv->sig);
      std::vector<Expr> args(msig.params.size());
      for (std::size_t k = msig.params.size(); k-- > 0;) args[k] = pop_expr(st);
      if (iv->kind == InvokeKind::Static) {
        if (iv->owner.is_class()) emit(ir::MayInit{iv->owner.class_name()});
        push_invoke(st, *iv, msig, std::nullopt, std::move(args));
      } else {
        SymElem recv = pop(st);
        if (recv.uninit) {
          fold_constructor(st, *iv, msig, recv, std::move(args));
        } else {
          check(CheckKind::NotNull, recv.expr);
          push_invoke(st, *iv, msig, recv.expr, std::move(args));
        }
      }
    } else if (auto* n = instr_as<op::New>(in)) {
      emit(ir::MayInit{n->cls});
      st.push_back(SymElem{Expr(), true, n->cls, pc_});
    } else if (auto* na = instr_as<op::NewArray>(in)) {
      std::vector<Expr> dims(na->dims);
      for (std::size_t k = na->dims; k-- > 0;) dims[k] = pop_expr(st);
      for (const Expr& d : dims) check(CheckKind::NotNegative, d);
      VarId dst = fresh_temp(JvmType::Object);
      emit(ir::NewArr{dst, na->array_type, std::move(dims)});
      st.push_back(SymElem{Expr::var(dst, JvmType::Object)});
    } else if (instr_is<op::Throw>(in)) {
      Expr e = pop_expr(st);
      check(CheckKind::NotNull, e);
      emit(ir::ThrowIr{std::move(e)});
      fell_through = false;
    } else if (auto* cc = instr_as<op::CheckCast>(in)) {
      Expr e = pop_expr(st);
      check(CheckKind::CheckCast, e, std::nullopt, cc->type);
      st.push_back(SymElem{std::move(e)});
    } else if (auto* io = instr_as<op::InstanceOf>(in)) {
      Expr e = pop_expr(st);
      st.push_back(SymElem{Expr::instance_of(std::move(e), io->type)});
    } else if (instr_is<op::MonitorEnter>(in)) {
      Expr e = pop_expr(st);
      check(CheckKind::NotNull, e);
      emit(ir::MonEnter{std::move(e)});
    } else if (instr_is<op::MonitorExit>(in)) {
      Expr e = pop_expr(st);
      check(CheckKind::NotNull, e);
      emit(ir::MonExit{std::move(e)});
    } else {
      throw TransformError("jsr/ret reached the transformer", pc_);
    }

    // fallthrough into a restore point spills the carried stack
    if (fell_through && next_pc != ~0u && typing_.jump_targets.count(next_pc) &&
        !instr_is<op::If>(in))
      flush_for(st, {next_pc}, {});
  }

  void push_invoke(std::vector<SymElem>& st, const op::Invoke& iv, const MethodSig& msig,
                   std::optional<Expr> recv, std::vector<Expr> args) {
    std::optional<VarId> dst;
    if (msig.ret) dst = fresh_temp(msig.ret->computational());
    emit(ir::InvokeIr{dst, iv.kind, std::move(recv), iv.owner, iv.sig, std::move(args)});
    if (dst) st.push_back(SymElem{Expr::var(*dst, msig.ret->computational())});
  }

  // new C at pc p pushed an allocation marker; the matching
  // invokespecial C.<init> folds both into one NewObject and rebinds every
  // surviving copy of the marker to the result.
  void fold_constructor(std::vector<SymElem>& st, const op::Invoke& iv, const MethodSig& msig,
                        const SymElem& recv, std::vector<Expr> args) {
    if (msig.name != "<init>")
      throw TransformError("uninitialized object consumed by a non-constructor call", pc_);
    if (!iv.owner.is_class() || iv.owner.class_name() != recv.cls)
      throw TransformError("constructor class disagrees with the allocation", pc_);
    VarId dst = fresh_temp(JvmType::Object);
    emit(ir::NewObject{dst, recv.cls, iv.sig, std::move(args)});
    for (auto& e : st)
      if (e.same_alloc(recv)) e = SymElem{Expr::var(dst, JvmType::Object)};
  }

  // After a conditional's spill the fallthrough keeps flowing with the spill
  // variables themselves; the originals may be rewritten by later spills.
  void rebind_to_saves(std::vector<SymElem>& st, u4 target) {
    const TypeState* ts = typing_.at(target);
    for (u4 k = 0; k < st.size(); ++k)
      st[k] = SymElem{Expr::var(save_var(target, k, ts->stack[k]), ts->stack[k])};
  }

  // branch targets were recorded as bytecode pcs; rewrite them to IR indexes
  void patch_labels() {
    auto label_of = [&](u4 target_pc) -> u4 {
      // first instruction emitted at a pc >= target
      std::size_t lo = 0, hi = m_.body.size();
      while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (m_.body[mid].pc < target_pc)
          lo = mid + 1;
        else
          hi = mid;
      }
      if (lo == m_.body.size())
        throw TransformError("branch target beyond the generated body", target_pc);
      return static_cast<u4>(lo);
    };
    for (auto& ins : m_.body) {
      if (auto* g = std::get_if<ir::GotoIr>(&ins.ins)) g->target = label_of(g->target);
      if (auto* f = std::get_if<ir::IfIr>(&ins.ins)) f->target = label_of(f->target);
      if (auto* sw = std::get_if<ir::SwitchIr>(&ins.ins)) {
        sw->default_target = label_of(sw->default_target);
        for (auto& [k, t] : sw->cases) t = label_of(t);
      }
    }
  }

  void build_handlers() {
    auto index_at_or_after = [&](u4 pc) -> u4 {
      std::size_t lo = 0, hi = m_.body.size();
      while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (m_.body[mid].pc < pc)
          lo = mid + 1;
        else
          hi = mid;
      }
      return static_cast<u4>(lo);
    };
    for (const auto& h : handlers_) {
      if (!typing_.at(h.handler_pc)) continue;  // dead handler
      IrMethod::Handler ih;
      ih.start = index_at_or_after(h.start_pc);
      ih.end = index_at_or_after(h.end_pc);
      if (ih.start >= ih.end) continue;  // empty protected range
      ih.handler = index_at_or_after(h.handler_pc);
      ih.catch_type = h.catch_type;
      ih.exc_var = save_var(h.handler_pc, 0, JvmType::Object);
      m_.handlers.push_back(ih);
    }
  }

  const std::vector<PcInstr>& code_;
  const std::vector<ExceptionHandler>& handlers_;
  const TypingResult& typing_;
  InternPool& pool_;
  IrMethod m_;
  VarTable vt_;
  u4 pc_ = 0;
  u4 temp_ctr_ = 0;
};

}  // namespace transform_detail

// Raw transformation over already-inlined, typed code.
inline IrMethod transform_method(ClassNameId owner, MethodSigId sig, u2 access,
                                 const std::vector<PcInstr>& code,
                                 const std::vector<ExceptionHandler>& handlers,
                                 const TypingResult& typing, InternPool& pool, u2 max_locals) {
  transform_detail::Transformer t(owner, sig, access, code, handlers, typing, pool, max_locals);
  return t.run();
}

// Full pipeline for one parsed method: decode, inline subroutines, type, and
// transform.
inline IrMethod build_ir(const ClassFile& cf, const MethodInfo& method, InternPool& pool) {
  if (!method.body) throw TransformError("method has no code", 0);
  const MethodBody& body = *method.body;
  InlinedCode inlined = inline_subroutines(body.instructions(), body.handlers);
  const MethodSig& sig = pool.method_sig_of(method.sig);
  TypingResult typing = infer_types(inlined.code, inlined.handlers, sig, method.is_static(),
                                    body.max_locals, pool);
  return transform_method(cf.this_class, method.sig, method.access, inlined.code,
                          inlined.handlers, typing, pool, body.max_locals);
}

}  // namespace jbw
