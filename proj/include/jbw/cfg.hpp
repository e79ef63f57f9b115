#pragma once

#include "jbw/ir.hpp"
#include "jbw/program.hpp"

namespace jbw {

// Intra-procedural control-flow graph. Nodes are instruction indexes plus a
// synthetic exit node collecting returns and uncaught throws; exceptional
// edges run from each potentially throwing instruction to every covering
// handler whose catch type is not provably disjoint from what can be thrown.
struct Cfg {
  u4 exit;  // == instruction count
  std::vector<std::vector<u4>> normal;
  std::vector<std::vector<u4>> exceptional;

  std::size_t node_count() const { return normal.size() + 1; }
};

namespace cfg_detail {

inline void add(std::vector<u4>& v, u4 t) {
  if (std::find(v.begin(), v.end(), t) == v.end()) v.push_back(t);
}

// whether a thrown class is caught by the handler type (unknown types are
// kept: not provably disjoint)
inline bool maybe_caught(Hierarchy* h, std::optional<ClassNameId> thrown,
                         std::optional<ClassNameId> catch_type) {
  if (!catch_type) return true;  // catch-all
  if (!thrown || !h) return true;
  const ClassNode* t = h->find(*thrown);
  const ClassNode* c = h->find(*catch_type);
  if (!t || !c) return true;
  return is_subclass_of(*t, *c);
}

inline bool definitely_caught(Hierarchy* h, std::optional<ClassNameId> thrown,
                              std::optional<ClassNameId> catch_type) {
  if (!catch_type) return true;
  if (!thrown || !h) return false;
  const ClassNode* t = h->find(*thrown);
  const ClassNode* c = h->find(*catch_type);
  if (!t || !c) return false;
  return is_subclass_of(*t, *c);
}

}  // namespace cfg_detail

// IR form.
inline Cfg intra_cfg(const IrMethod& m, Hierarchy* h = nullptr) {
  using namespace cfg_detail;
  Cfg g;
  g.exit = static_cast<u4>(m.body.size());
  g.normal.resize(m.body.size());
  g.exceptional.resize(m.body.size());

  auto pool_name = [&](const char* n) -> std::optional<ClassNameId> {
    if (!h) return std::nullopt;
    return h->pool().class_name(n);
  };

  for (u4 i = 0; i < m.body.size(); ++i) {
    const IrInstr& ins = m.body[i].ins;

    // normal successors
    if (auto* g2 = ir_as<ir::GotoIr>(ins)) {
      add(g.normal[i], g2->target);
    } else if (auto* f = ir_as<ir::IfIr>(ins)) {
      add(g.normal[i], f->target);
      add(g.normal[i], i + 1);
    } else if (auto* sw = ir_as<ir::SwitchIr>(ins)) {
      add(g.normal[i], sw->default_target);
      for (auto& [k, t] : sw->cases) add(g.normal[i], t);
    } else if (ir_is<ir::ReturnIr>(ins)) {
      add(g.normal[i], g.exit);
    } else if (ir_is<ir::ThrowIr>(ins)) {
      // exceptional only
    } else {
      add(g.normal[i], i + 1);
    }

    // what can this instruction throw?
    std::optional<ClassNameId> thrown;  // nullopt = anything
    bool can_throw = false;
    if (auto* ck = ir_as<ir::CheckIr>(ins)) {
      can_throw = true;
      thrown = pool_name(check_exception_name(ck->check.kind));
    } else if (ir_is<ir::InvokeIr>(ins) || ir_is<ir::NewObject>(ins) || ir_is<ir::ThrowIr>(ins)) {
      can_throw = true;  // arbitrary classes
    }
    if (!can_throw) continue;

    bool surely_caught = false;
    for (const auto& hd : m.handlers) {
      if (i < hd.start || i >= hd.end) continue;
      if (maybe_caught(h, thrown, hd.catch_type)) add(g.exceptional[i], hd.handler);
      if (definitely_caught(h, thrown, hd.catch_type)) {
        surely_caught = true;
        break;  // later handlers are shadowed
      }
    }
    if (!surely_caught) add(g.exceptional[i], g.exit);
  }
  return g;
}

// Decoded-bytecode form.
inline Cfg intra_cfg(const std::vector<PcInstr>& code,
                     const std::vector<ExceptionHandler>& handlers, Hierarchy* h = nullptr) {
  using namespace cfg_detail;
  Cfg g;
  g.exit = static_cast<u4>(code.size());
  g.normal.resize(code.size());
  g.exceptional.resize(code.size());

  std::map<u4, u4> index_of;
  for (u4 i = 0; i < code.size(); ++i) index_of[code[i].pc] = i;
  auto idx = [&](u4 pc) { return index_of.at(pc); };
  auto pool_name = [&](const char* n) -> std::optional<ClassNameId> {
    if (!h) return std::nullopt;
    return h->pool().class_name(n);
  };

  for (u4 i = 0; i < code.size(); ++i) {
    const Instr& in = code[i].instr;
    for (u4 t : branch_targets(in)) add(g.normal[i], idx(t));
    if (instr_is<op::Return>(in)) {
      add(g.normal[i], g.exit);
    } else if (falls_through(in) && !instr_is<op::Jsr>(in)) {
      if (i + 1 < code.size()) add(g.normal[i], i + 1);
    }

    std::optional<ClassNameId> thrown;
    bool can_throw = false;
    if (auto* ar = instr_as<op::Arith>(in)) {
      if ((ar->op == ArithOp::Div || ar->op == ArithOp::Rem) &&
          (ar->type == JvmBasicType::Int || ar->type == JvmBasicType::Long)) {
        can_throw = true;
        thrown = pool_name("java.lang.ArithmeticException");
      }
    } else if (instr_is<op::ArrayLoad>(in) || instr_is<op::ArrayStore>(in) ||
               instr_is<op::ArrayLength>(in) || instr_is<op::FieldOp>(in) ||
               instr_is<op::MonitorEnter>(in) || instr_is<op::MonitorExit>(in) ||
               instr_is<op::CheckCast>(in) || instr_is<op::NewArray>(in) ||
               instr_is<op::Invoke>(in) || instr_is<op::Throw>(in) || instr_is<op::New>(in)) {
      can_throw = true;  // several possible classes; treated as anything
    }
    if (!can_throw) continue;

    bool surely_caught = false;
    u4 pc = code[i].pc;
    for (const auto& hd : handlers) {
      if (pc < hd.start_pc || pc >= hd.end_pc) continue;
      if (maybe_caught(h, thrown, hd.catch_type)) add(g.exceptional[i], idx(hd.handler_pc));
      if (definitely_caught(h, thrown, hd.catch_type)) {
        surely_caught = true;
        break;
      }
    }
    if (!surely_caught) add(g.exceptional[i], g.exit);
  }
  return g;
}

}  // namespace jbw
