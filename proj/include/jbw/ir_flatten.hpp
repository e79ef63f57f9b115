#pragma once

#include <functional>

#include "jbw/ir.hpp"

namespace jbw {

inline JvmBasicType basic_of(JvmType t) {
  switch (t) {
    case JvmType::Long:
      return JvmBasicType::Long;
    case JvmType::Float:
      return JvmBasicType::Float;
    case JvmType::Double:
      return JvmBasicType::Double;
    default:
      return JvmBasicType::Int;
  }
}

// Rewrites a method so that every expression held by an instruction has
// height at most one (the 3-address form). Extra temporaries are introduced
// in evaluation order; running the result is observably identical to
// running the input. Idempotent.
inline IrMethod flatten_3addr(const IrMethod& m) {
  IrMethod out;
  out.owner = m.owner;
  out.sig = m.sig;
  out.access = m.access;
  out.vars = m.vars;
  out.bytecode_instr_count = m.bytecode_instr_count;
  out.bytecode_locals = m.bytecode_locals;
  out.passes_used = m.passes_used;

  // continue temp numbering per pc after the transformer's own temps
  std::map<u4, u4> next_temp;
  for (const auto& v : m.vars)
    if (v.origin == VarOrigin::Temp) next_temp[v.a] = std::max(next_temp[v.a], v.b + 1);

  VarTable vt;
  vt.seed(out);

  u4 cur_pc = 0;
  std::vector<IrMethod::Ins> body;

  auto hoist = [&](Expr e) {
    u4 b = next_temp[cur_pc]++;
    VarId tmp = vt.get(out, VarOrigin::Temp, cur_pc, b, e.type());
    body.push_back({cur_pc, ir::Assign{tmp, e}});
    return Expr::var(tmp, e.type());
  };

  // reduce to height <= 1: children become atoms
  std::function<Expr(const Expr&)> flat = [&](const Expr& e) -> Expr {
    if (e.height() <= 1) return e;
    const ExprNode& n = e.node();
    if (n.kind == ExprNode::Kind::Unop) {
      Expr a = flat(e.child_a());
      if (a.height() >= 1) a = hoist(a);
      switch (n.un) {
        case UnOpKind::Neg:
          return Expr::neg(a, basic_of(e.type()));
        case UnOpKind::Conv:
          return Expr::conv(a, n.conv_from, n.conv_to);
        case UnOpKind::ArrayLength:
          return Expr::array_length(a);
        case UnOpKind::InstanceOf:
          return Expr::instance_of(a, *n.type_arg);
      }
    }
    Expr a = flat(e.child_a());
    Expr b = flat(e.child_b());
    if (a.height() >= 1) a = hoist(a);
    if (b.height() >= 1) b = hoist(b);
    if (n.bin == BinOpKind::Cmp) return Expr::cmp(n.cmp, a, b);
    return Expr::binop(n.bin, n.bin_type, a, b);
  };
  auto f1 = [&](Expr& e) { e = flat(e); };

  std::vector<u4> new_start(m.body.size() + 1, 0);
  for (std::size_t i = 0; i < m.body.size(); ++i) {
    new_start[i] = static_cast<u4>(body.size());
    cur_pc = m.body[i].pc;
    IrInstr ins = m.body[i].ins;

    if (auto* a = std::get_if<ir::Assign>(&ins)) f1(a->value);
    if (auto* fw = std::get_if<ir::FieldWrite>(&ins)) f1(fw->target), f1(fw->value);
    if (auto* sw = std::get_if<ir::StaticWrite>(&ins)) f1(sw->value);
    if (auto* fr = std::get_if<ir::FieldRead>(&ins)) f1(fr->target);
    if (auto* aw = std::get_if<ir::ArrayWrite>(&ins)) f1(aw->array), f1(aw->index), f1(aw->value);
    if (auto* ard = std::get_if<ir::ArrayRead>(&ins)) f1(ard->array), f1(ard->index);
    if (auto* no = std::get_if<ir::NewObject>(&ins))
      for (auto& e : no->args) f1(e);
    if (auto* na = std::get_if<ir::NewArr>(&ins))
      for (auto& e : na->dims) f1(e);
    if (auto* iv = std::get_if<ir::InvokeIr>(&ins)) {
      if (iv->receiver) f1(*iv->receiver);
      for (auto& e : iv->args) f1(e);
    }
    if (auto* ck = std::get_if<ir::CheckIr>(&ins)) {
      f1(ck->check.a);
      if (ck->check.b) f1(*ck->check.b);
    }
    if (auto* br = std::get_if<ir::IfIr>(&ins)) f1(br->left), f1(br->right);
    if (auto* sel = std::get_if<ir::SwitchIr>(&ins)) f1(sel->selector);
    if (auto* rt = std::get_if<ir::ReturnIr>(&ins)) {
      if (rt->value) f1(*rt->value);
    }
    if (auto* th = std::get_if<ir::ThrowIr>(&ins)) f1(th->value);
    if (auto* me = std::get_if<ir::MonEnter>(&ins)) f1(me->value);
    if (auto* mx = std::get_if<ir::MonExit>(&ins)) f1(mx->value);

    body.push_back({cur_pc, std::move(ins)});
  }
  new_start[m.body.size()] = static_cast<u4>(body.size());

  for (auto& ins : body) {
    if (auto* g = std::get_if<ir::GotoIr>(&ins.ins)) g->target = new_start[g->target];
    if (auto* f = std::get_if<ir::IfIr>(&ins.ins)) f->target = new_start[f->target];
    if (auto* sw = std::get_if<ir::SwitchIr>(&ins.ins)) {
      sw->default_target = new_start[sw->default_target];
      for (auto& [k, t] : sw->cases) t = new_start[t];
    }
  }
  out.body = std::move(body);
  for (const auto& h : m.handlers) {
    IrMethod::Handler nh = h;
    nh.start = new_start[h.start];
    nh.end = new_start[h.end];
    nh.handler = new_start[h.handler];
    out.handlers.push_back(nh);
  }
  return out;
}

}  // namespace jbw
