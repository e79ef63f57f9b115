#pragma once

#include "jbw/program.hpp"

namespace jbw {

// XTA refinement over a previously computed complete program. Every method
// and field carries its own set of accessible classes; the four flow clauses
// (parameters in, static-field reads, guarded instance-field reads, returns
// out) connect them, and virtual sites re-resolve against the per-method
// sets. The result is a subset of the base model in both methods and edges.
class XtaBuilder {
 public:
  explicit XtaBuilder(const ProgramModel& base) : base_(base) {
    if (base.provenance == Provenance::CRA)
      throw ValidationError("refine_xta needs an RTA-built model (or its own output)");
    model_.provider = base.provider;
    model_.hierarchy = base.hierarchy;
    model_.cms = base.cms;
    model_.natives = base.natives;
    model_.provenance = Provenance::XTA;
    model_.entry = base.entry;
    model_.classes = base.classes;
  }

  ProgramModel run() {
    Hierarchy& h = *model_.hierarchy;
    InternPool& pool = h.pool();
    ClassNameId main_cls = pool.class_name(model_.entry.main_class);
    const ClassNode* main_node = h.find(main_cls);
    MethodSigId main_sig = pool.method_sig(program_detail::main_signature(pool));
    mark(model_.cms->get(main_cls, main_sig));
    if (model_.entry.include_default_entries)
      program_detail::trigger_clinit(main_node, pool,
                                     [&](const ClassNode* n, MethodSigId s) {
                                       mark(model_.cms->get(n->name, s));
                                     });

    while (!pending_.empty()) {
      u4 m = *pending_.begin();
      pending_.erase(pending_.begin());
      process(m);
    }
    return std::move(model_);
  }

 private:
  void mark(u4 cms_id) {
    if (!base_.reachable.contains(cms_id)) return;  // never exceed the base
    if (!model_.reachable.contains(cms_id)) model_.reachable = model_.reachable.insert(cms_id);
    pending_.insert(cms_id);
  }

  // set growth helpers; growth requeues dependents
  bool grow_method_set(u4 m, const PatriciaSet& add) {
    PatriciaSet& s = msets_[m];
    PatriciaSet merged = set_union(s, add);
    if (merged == s) return false;
    s = merged;
    pending_.insert(m);
    for (u4 caller : ret_dependents_[m]) pending_.insert(caller);
    return true;
  }
  bool grow_field_set(const std::pair<u4, u4>& f, const PatriciaSet& add) {
    PatriciaSet& s = fsets_[f];
    PatriciaSet merged = set_union(s, add);
    if (merged == s) return false;
    s = merged;
    for (u4 reader : field_readers_[f]) pending_.insert(reader);
    return true;
  }

  PatriciaSet filter_subtypes(const PatriciaSet& s, const ValueType& bound) {
    Hierarchy& h = *model_.hierarchy;
    if (bound.is_basic()) return PatriciaSet();
    PatriciaSet out;
    s.for_each([&](u4 cid) {
      const ClassNode* n = h.find(ClassNameId{cid});
      if (n && is_subtype(h, ObjectType::klass(n->name), bound.object()))
        out = out.insert(cid);
    });
    return out;
  }

  std::pair<u4, u4> field_key(ClassNameId owner, FieldSigId sig) {
    const ClassNode& declared = resolve_field(*model_.hierarchy, *model_.hierarchy->load(owner),
                                              sig);
    return {declared.name.value, sig.value};
  }

  void process(u4 cms_id) {
    Hierarchy& h = *model_.hierarchy;
    InternPool& pool = h.pool();
    auto [cls, sig] = model_.cms->resolve(cms_id);
    const ClassNode* node = h.find(cls);
    const ClassNode::Method* m = node ? node->declared_method(sig) : nullptr;
    if (!m) return;
    if (m->access & acc::kNative) {
      // the RTA pass validated the abstraction; reuse its effects
      apply_native_effects(cms_id, *node, sig);
      return;
    }
    if (!m->info || !m->info->body) return;

    for (const PcInstr& pi : m->info->body->instructions()) {
      if (auto* n = instr_as<op::New>(pi.instr)) {
        grow_method_set(cms_id, PatriciaSet().insert(n->cls.value));
        instantiated_ = instantiated_.insert(n->cls.value);
        program_detail::trigger_clinit(h.load(n->cls), pool,
                                       [&](const ClassNode* d, MethodSigId s) {
                                         mark(model_.cms->get(d->name, s));
                                       });
      } else if (auto* f = instr_as<op::FieldOp>(pi.instr)) {
        std::pair<u4, u4> key;
        try {
          key = field_key(f->owner, f->sig);
        } catch (const ResolutionError& e) {
          model_.diagnostics.push_back(e.what());
          continue;
        }
        const ValueType& ftype = pool.field_sig_of(f->sig).type;
        const ClassNode* declared = h.find(ClassNameId{key.first});
        if (f->is_static)
          program_detail::trigger_clinit(declared, pool,
                                         [&](const ClassNode* d, MethodSigId s) {
                                           mark(model_.cms->get(d->name, s));
                                         });
        if (f->is_put) {
          grow_field_set(key, filter_subtypes(msets_[cms_id], ftype));
        } else if (f->is_static) {
          // clause (ii): any class accessible from a read static field
          field_readers_[key].insert(cms_id);
          grow_method_set(cms_id, fsets_[key]);
        } else {
          // clause (iii): instance read, guarded by an accessible receiver
          field_readers_[key].insert(cms_id);
          bool receiver_accessible = false;
          msets_[cms_id].for_each([&](u4 cid) {
            const ClassNode* c = h.find(ClassNameId{cid});
            if (c && declared && is_subclass_of(*c, *declared)) receiver_accessible = true;
          });
          if (receiver_accessible) grow_method_set(cms_id, fsets_[key]);
        }
      } else if (auto* iv = instr_as<op::Invoke>(pi.instr)) {
        process_call(cms_id, *node, pi.pc, *iv);
      }
    }
  }

  void process_call(u4 caller, const ClassNode& caller_node, u4 pc, const op::Invoke& iv) {
    Hierarchy& h = *model_.hierarchy;
    InternPool& pool = h.pool();
    const ClassNode* declared =
        iv.owner.is_class() ? h.load(iv.owner.class_name()) : h.load(h.object_name());
    const MethodSig& msig = pool.method_sig_of(iv.sig);
    auto key = std::pair<u4, u4>(caller, pc);

    std::vector<DispatchTarget> targets;
    if (iv.kind == InvokeKind::Static || iv.kind == InvokeKind::Special) {
      try {
        DispatchResult r =
            dispatch_targets(h, iv.kind, *declared, iv.sig, PatriciaSet(), &caller_node);
        targets = r.targets;
      } catch (const ResolutionError& e) {
        model_.diagnostics.push_back(e.what());
        model_.call_sites[key] = PatriciaSet();
        return;
      }
      if (iv.kind == InvokeKind::Static)
        for (const auto& t : targets)
          program_detail::trigger_clinit(t.cls, pool,
                                         [&](const ClassNode* d, MethodSigId s) {
                                           mark(model_.cms->get(d->name, s));
                                         });
    } else {
      // virtual/interface resolve against the per-method class set
      try {
        DispatchResult r = dispatch_targets(h, iv.kind, *declared, iv.sig,
                                            set_inter(msets_[caller], instantiated_),
                                            &caller_node);
        targets = r.targets;
      } catch (const ResolutionError& e) {
        model_.diagnostics.push_back(e.what());
        model_.call_sites[key] = PatriciaSet();
        return;
      }
    }

    PatriciaSet& site = model_.call_sites[key];
    for (const auto& t : targets) {
      u4 callee = model_.cms->get(t.cls->name, t.sig);
      // the refinement never invents an edge the base analysis lacked
      if (base_.provenance == Provenance::RTA || base_.provenance == Provenance::XTA) {
        auto base_site = base_.call_sites.find(key);
        if (base_site == base_.call_sites.end() || !base_site->second.contains(callee))
          continue;
      }
      if (!site.contains(callee)) site = site.insert(callee);
      mark(callee);
      ret_dependents_[callee].insert(caller);

      // clause (i): arguments; the receiver behaves as a parameter of the
      // declared type
      PatriciaSet flow;
      for (const auto& p : msig.params)
        flow = set_union(flow, filter_subtypes(msets_[caller], p));
      if (iv.kind != InvokeKind::Static)
        flow = set_union(flow,
                         filter_subtypes(msets_[caller],
                                         ValueType(ObjectType::klass(declared->name))));
      grow_method_set(callee, flow);

      // clause (iv): returned classes flow back
      if (msig.ret && msig.ret->is_object())
        grow_method_set(caller, filter_subtypes(msets_[callee], *msig.ret));
    }
  }

  void apply_native_effects(u4 cms_id, const ClassNode& node, MethodSigId sig) {
    Hierarchy& h = *model_.hierarchy;
    InternPool& pool = h.pool();
    const MethodSig& ms = pool.method_sig_of(sig);
    const NativeAbstraction::Entry* entry =
        model_.natives ? model_.natives->find(pool.class_name_of(node.name), ms.name,
                                              print_method_descriptor(ms, pool))
                       : nullptr;
    if (!entry) {
      model_.diagnostics.push_back("native method without abstraction (unsound): " +
                                   pool.class_name_of(node.name) + "." + ms.name);
      return;
    }
    for (const std::string& cls : entry->instantiates) {
      ClassNameId cid = pool.class_name(cls);
      const ClassNode* n = h.load(cid);
      instantiated_ = instantiated_.insert(cid.value);
      grow_method_set(cms_id, PatriciaSet().insert(cid.value));
      program_detail::trigger_clinit(n, pool, [&](const ClassNode* d, MethodSigId s) {
        mark(model_.cms->get(d->name, s));
      });
      for (const auto& m : n->methods)
        if (pool.method_sig_of(m.sig).name == "<init>") mark(model_.cms->get(n->name, m.sig));
    }
    u4 pc = 0;
    for (const auto& call : entry->calls) {
      ClassNameId cid = pool.class_name(call.cls);
      const ClassNode* n = h.load(cid);
      MethodSigId tsig = pool.method_sig(parse_method_descriptor(call.name, call.desc, pool));
      u4 callee = model_.cms->get(n->name, tsig);
      mark(callee);
      PatriciaSet& out = model_.call_sites[{cms_id, pc++}];
      if (!out.contains(callee)) out = out.insert(callee);
    }
  }

  const ProgramModel& base_;
  ProgramModel model_;
  std::set<u4> pending_;
  std::map<u4, PatriciaSet> msets_;
  std::map<std::pair<u4, u4>, PatriciaSet> fsets_;
  std::map<std::pair<u4, u4>, std::set<u4>> field_readers_;
  std::map<u4, std::set<u4>> ret_dependents_;
  PatriciaSet instantiated_;
};

inline ProgramModel refine_xta(const ProgramModel& base) {
  XtaBuilder b(base);
  ProgramModel out = b.run();
  // expose the instantiation set actually reachable under the refinement
  PatriciaSet inst;
  out.reachable.for_each([&](u4 cms_id) {
    auto [cls, sig] = out.cms->resolve(cms_id);
    const ClassNode* node = out.hierarchy->find(cls);
    const ClassNode::Method* m = node ? node->declared_method(sig) : nullptr;
    if (!m || !m->info || !m->info->body) return;
    for (const PcInstr& pi : m->info->body->instructions())
      if (auto* n = instr_as<op::New>(pi.instr)) inst = inst.insert(n->cls.value);
  });
  out.instantiated = inst;
  return out;
}

}  // namespace jbw
