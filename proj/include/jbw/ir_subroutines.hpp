#pragma once

#include <set>

#include "jbw/classfile.hpp"
#include "jbw/code_encode.hpp"

namespace jbw {

struct InlinedCode {
  std::vector<PcInstr> code;
  std::vector<ExceptionHandler> handlers;
};

namespace subr_detail {

// pcs reachable from the subroutine entry, stopping at its ret/return/throw.
// A jsr inside the body means nesting, which is not supported.
struct SubBody {
  std::set<u4> pcs;
  u2 ret_var = 0;
  bool has_ret = false;
};

inline SubBody scan_body(const std::vector<PcInstr>& code, const std::map<u4, std::size_t>& at,
                         u4 entry) {
  SubBody body;
  const PcInstr& first = code[at.at(entry)];
  auto* store = instr_as<op::Store>(first.instr);
  if (!store || store->type != JvmType::Object)
    throw TransformError("subroutine entry does not store its return address", entry);
  body.ret_var = store->index;

  std::vector<u4> work{entry};
  while (!work.empty()) {
    u4 pc = work.back();
    work.pop_back();
    if (!body.pcs.insert(pc).second) continue;
    auto it = at.find(pc);
    if (it == at.end()) throw TransformError("subroutine body runs off the code", pc);
    const PcInstr& pi = code[it->second];
    if (instr_is<op::Jsr>(pi.instr))
      throw TransformError("nested subroutines are not supported", pc);
    if (auto* r = instr_as<op::Ret>(pi.instr)) {
      if (r->index != body.ret_var)
        throw TransformError("ret uses a different variable than the subroutine entry", pc);
      body.has_ret = true;
      continue;  // terminator
    }
    for (u4 t : branch_targets(pi.instr)) work.push_back(t);
    if (falls_through(pi.instr)) {
      std::size_t idx = it->second;
      if (idx + 1 < code.size()) work.push_back(code[idx + 1].pc);
    }
  }
  return body;
}

}  // namespace subr_detail

// Inlines jsr/ret subroutines by duplicating each subroutine body at every
// call site. jsr becomes a goto into the copy; ret becomes a goto back to
// the instruction after the jsr. Handler rows are re-derived so that copies
// stay covered. Input without jsr is returned unchanged.
inline InlinedCode inline_subroutines(std::vector<PcInstr> code,
                                      std::vector<ExceptionHandler> handlers) {
  using namespace subr_detail;

  bool any_jsr = false;
  for (const auto& pi : code)
    if (instr_is<op::Jsr>(pi.instr)) any_jsr = true;
  if (!any_jsr) {
    for (const auto& pi : code)
      if (instr_is<op::Ret>(pi.instr)) throw TransformError("ret without jsr", pi.pc);
    return {std::move(code), std::move(handlers)};
  }

  std::map<u4, std::size_t> at;
  for (std::size_t i = 0; i < code.size(); ++i) at[code[i].pc] = i;

  std::map<u4, SubBody> bodies;  // entry pc -> body
  for (const auto& pi : code)
    if (auto* j = instr_as<op::Jsr>(pi.instr))
      if (!bodies.count(j->target)) bodies.emplace(j->target, scan_body(code, at, j->target));

  std::set<u4> all_body_pcs;
  for (const auto& [entry, b] : bodies)
    all_body_pcs.insert(b.pcs.begin(), b.pcs.end());

  // virtual pcs for copies: copy k of any instruction at pc p lives at
  // k * kStride + p until relayout assigns real pcs
  constexpr u4 kStride = 0x100000;

  struct OutIns {
    PcInstr pi;
    u4 origin;   // original pc (for handler coverage)
    u4 context;  // 0 = main, k>0 = copy id
  };
  std::vector<OutIns> out;
  u4 copy_count = 0;

  struct PendingCopy {
    u4 entry;
    u4 return_pc;
    u4 context;
  };
  std::vector<PendingCopy> copies;

  for (std::size_t i = 0; i < code.size(); ++i) {
    const PcInstr& pi = code[i];
    if (all_body_pcs.count(pi.pc)) continue;  // emitted as copies only
    if (auto* j = instr_as<op::Jsr>(pi.instr)) {
      if (i + 1 >= code.size())
        throw TransformError("jsr has no return point", pi.pc);
      u4 ctx = ++copy_count;
      copies.push_back({j->target, code[i + 1].pc, ctx});
      PcInstr g{pi.pc, 0, op::Goto{ctx * kStride + j->target}};
      out.push_back({g, pi.pc, 0});
      continue;
    }
    out.push_back({PcInstr{pi.pc, pi.byte_len, pi.instr}, pi.pc, 0});
  }

  for (const auto& copy : copies) {
    const SubBody& body = bodies.at(copy.entry);
    for (u4 orig_pc : body.pcs) {
      const PcInstr& pi = code[at.at(orig_pc)];
      u4 vpc = copy.context * kStride + orig_pc;
      Instr instr = pi.instr;
      if (orig_pc == copy.entry) {
        instr = op::Nop{};  // the return-address store disappears
      } else if (instr_is<op::Ret>(instr)) {
        instr = op::Goto{copy.return_pc};
      } else {
        // retarget branches that stay inside the body
        auto fix = [&](u4 t) { return body.pcs.count(t) ? copy.context * kStride + t : t; };
        if (auto* f = std::get_if<op::If>(&instr)) f->target = fix(f->target);
        if (auto* g = std::get_if<op::Goto>(&instr)) g->target = fix(g->target);
        if (auto* ts = std::get_if<op::TableSwitch>(&instr)) {
          ts->default_target = fix(ts->default_target);
          for (auto& t : ts->targets) t = fix(t);
        }
        if (auto* ls = std::get_if<op::LookupSwitch>(&instr)) {
          ls->default_target = fix(ls->default_target);
          for (auto& [k, t] : ls->pairs) t = fix(t);
        }
      }
      out.push_back({PcInstr{vpc, 0, std::move(instr)}, orig_pc, copy.context});
    }
  }

  // a body falling through past its own last instruction would continue into
  // unrelated code; reject that shape
  for (const auto& copy : copies) {
    const SubBody& body = bodies.at(copy.entry);
    u4 last = *body.pcs.rbegin();
    const PcInstr& pi = code[at.at(last)];
    if (falls_through(pi.instr) && !instr_is<op::Ret>(pi.instr))
      throw TransformError("subroutine body falls through its end", last);
  }

  // handler rows per context: maximal runs of covered instructions
  std::vector<ExceptionHandler> new_handlers;
  for (const auto& h : handlers) {
    std::size_t i = 0;
    while (i < out.size()) {
      if (out[i].origin < h.start_pc || out[i].origin >= h.end_pc) {
        ++i;
        continue;
      }
      u4 ctx = out[i].context;
      std::size_t j = i;
      while (j < out.size() && out[j].context == ctx && out[j].origin >= h.start_pc &&
             out[j].origin < h.end_pc)
        ++j;
      ExceptionHandler nh;
      nh.start_pc = out[i].pi.pc;
      nh.end_pc = j < out.size() ? out[j].pi.pc : out[j - 1].pi.pc + 1;
      // retarget the handler into the same copy when it lives in the body
      bool in_some_body = false;
      u4 target = h.handler_pc;
      for (const auto& [entry, b] : bodies)
        if (b.pcs.count(h.handler_pc)) in_some_body = true;
      if (in_some_body && ctx != 0) target = ctx * kStride + h.handler_pc;
      if (!(in_some_body && ctx == 0)) {  // a body-local handler has no main-code row
        nh.handler_pc = target;
        nh.catch_type = h.catch_type;
        new_handlers.push_back(nh);
      }
      i = j;
    }
  }

  // assemble + renumber
  std::vector<PcInstr> merged;
  merged.reserve(out.size());
  for (auto& o : out) merged.push_back(std::move(o.pi));

  // relayout needs handler pcs remapped too: do it manually with the same map
  std::vector<PcInstr> final_code = relayout_code(merged);
  std::map<u4, u4> pc_map;  // virtual -> final
  for (std::size_t i = 0; i < merged.size(); ++i) pc_map[merged[i].pc] = final_code[i].pc;

  u4 past_end = final_code.empty() ? 0 : final_code.back().pc + 1;
  for (auto& h : new_handlers) {
    auto s = pc_map.lower_bound(h.start_pc);
    auto e = pc_map.lower_bound(h.end_pc);
    h.start_pc = s == pc_map.end() ? past_end : s->second;
    h.end_pc = e == pc_map.end() ? past_end : e->second;
    auto t = pc_map.find(h.handler_pc);
    if (t == pc_map.end()) throw TransformError("handler target lost in inlining", h.handler_pc);
    h.handler_pc = t->second;
  }
  // drop now-empty rows
  std::vector<ExceptionHandler> kept;
  for (const auto& h : new_handlers)
    if (h.start_pc < h.end_pc) kept.push_back(h);

  return {std::move(final_code), std::move(kept)};
}

}  // namespace jbw
