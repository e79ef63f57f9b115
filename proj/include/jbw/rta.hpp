#pragma once

#include "jbw/program.hpp"

namespace jbw {

// Rapid Type Analysis. One global set of instantiated classes abstracts
// every object in the program; virtual sites resolve against it. The
// program is unknown up front, so constraints attach on the fly: every
// reachable virtual site is cached with its resolution and re-resolved when
// a compatible class becomes instantiated.
class RtaBuilder {
 public:
  RtaBuilder(std::shared_ptr<ClassProvider> provider, EntrySpec entry,
             NativeAbstraction natives, HierarchyOptions opts)
      : natives_(std::move(natives)) {
    model_.provider = std::move(provider);
    model_.hierarchy = std::make_shared<Hierarchy>(model_.provider, opts);
    model_.cms = std::make_shared<CmsTable>();
    model_.natives = std::make_shared<const NativeAbstraction>(natives_);
    model_.provenance = Provenance::RTA;
    model_.entry = std::move(entry);
  }

  ProgramModel run() {
    Hierarchy& h = *model_.hierarchy;
    InternPool& pool = h.pool();
    ClassNameId main_cls = pool.class_name(model_.entry.main_class);
    const ClassNode* main_node = h.load(main_cls);
    MethodSigId main_sig = pool.method_sig(program_detail::main_signature(pool));
    if (!main_node->declared_method(main_sig))
      throw ClasspathError("entry class " + model_.entry.main_class +
                           " has no static void main(java.lang.String[])");
    mark(main_node, main_sig);
    if (model_.entry.include_default_entries)
      program_detail::trigger_clinit(main_node, pool,
                                     [&](const ClassNode* n, MethodSigId s) { mark(n, s); });

    while (!worklist_.empty()) {
      u4 cms_id = worklist_.back();
      worklist_.pop_back();
      process(cms_id);
    }

    h.nodes().for_each([&](u4 id, const ClassNode* const& node) {
      model_.classes = model_.classes.insert(id, node);
    });
    return std::move(model_);
  }

 private:
  void mark(const ClassNode* node, MethodSigId sig) {
    u4 id = model_.cms->get(node->name, sig);
    if (model_.reachable.contains(id)) return;
    model_.reachable = model_.reachable.insert(id);
    worklist_.push_back(id);
  }

  void instantiate(ClassNameId cls) {
    Hierarchy& h = *model_.hierarchy;
    if (model_.instantiated.contains(cls.value)) return;
    const ClassNode* node = h.load(cls);
    model_.instantiated = model_.instantiated.insert(cls.value);
    program_detail::trigger_clinit(node, h.pool(),
                                   [&](const ClassNode* n, MethodSigId s) { mark(n, s); });
    // wake every cached virtual site whose declared type is above this class
    std::set<u4> supers;
    for (const ClassNode* n = node; n; n = n->super) {
      supers.insert(n->name.value);
      std::vector<const ClassNode*> ifs(n->interfaces.begin(), n->interfaces.end());
      while (!ifs.empty()) {
        const ClassNode* i = ifs.back();
        ifs.pop_back();
        if (!supers.insert(i->name.value).second) continue;
        ifs.insert(ifs.end(), i->interfaces.begin(), i->interfaces.end());
      }
    }
    for (u4 super_id : supers) {
      auto it = sites_by_declared_.find(super_id);
      if (it == sites_by_declared_.end()) continue;
      for (std::size_t site_idx : it->second) re_resolve(site_idx, node);
    }
  }

  // a single new receiver class for an existing site
  void re_resolve(std::size_t site_idx, const ClassNode* receiver) {
    const Site& site = sites_[site_idx];
    Hierarchy& h = *model_.hierarchy;
    if (receiver->is_interface || (receiver->access & acc::kAbstract)) return;
    bool compatible = site.declared->is_interface ? implements(*receiver, *site.declared)
                                                  : is_subclass_of(*receiver, *site.declared);
    if (!compatible) return;
    if (const ClassNode* impl = lookup_impl(*receiver, site.sig)) {
      u4 callee = model_.cms->get(impl->name, site.sig);
      PatriciaSet& targets = model_.call_sites[site.key];
      if (!targets.contains(callee)) {
        targets = targets.insert(callee);
        mark(impl, site.sig);
      }
    }
    (void)h;
  }

  void process(u4 cms_id) {
    Hierarchy& h = *model_.hierarchy;
    InternPool& pool = h.pool();
    auto [cls, sig] = model_.cms->resolve(cms_id);
    const ClassNode* node = h.find(cls);
    const ClassNode::Method* m = node->declared_method(sig);
    if (!m) return;
    if (m->access & acc::kNative) {
      apply_native(cms_id, *node, sig);
      return;
    }
    if (!m->info || !m->info->body) return;  // abstract
    for (const PcInstr& pi : m->info->body->instructions()) {
      // hierarchy completeness: load whatever the instruction names
      std::vector<ClassNameId> mentioned;
      program_detail::mentioned_classes(pi.instr, mentioned);
      for (ClassNameId c : mentioned) h.load(c);

      if (auto* n = instr_as<op::New>(pi.instr)) {
        instantiate(n->cls);
      } else if (auto* f = instr_as<op::FieldOp>(pi.instr)) {
        if (f->is_static) {
          try {
            const ClassNode& declared = resolve_field(h, *h.load(f->owner), f->sig);
            program_detail::trigger_clinit(&declared, pool,
                                           [&](const ClassNode* n, MethodSigId s) {
                                             mark(n, s);
                                           });
          } catch (const ResolutionError& e) {
            model_.diagnostics.push_back(e.what());
          }
        }
      } else if (auto* iv = instr_as<op::Invoke>(pi.instr)) {
        process_call(cms_id, *node, pi.pc, *iv);
      }
    }
    // catch types participate in the hierarchy too
    for (const auto& handler : m->info->body->handlers)
      if (handler.catch_type) h.load(*handler.catch_type);
  }

  void process_call(u4 caller, const ClassNode& caller_node, u4 pc, const op::Invoke& iv) {
    Hierarchy& h = *model_.hierarchy;
    InternPool& pool = h.pool();
    const ClassNode* declared =
        iv.owner.is_class() ? h.load(iv.owner.class_name()) : h.load(h.object_name());
    auto key = std::pair<u4, u4>(caller, pc);
    switch (iv.kind) {
      case InvokeKind::Static:
      case InvokeKind::Special: {
        try {
          DispatchResult r =
              dispatch_targets(h, iv.kind, *declared, iv.sig, model_.instantiated, &caller_node);
          PatriciaSet targets;
          for (const auto& t : r.targets) {
            targets = targets.insert(model_.cms->get(t.cls->name, t.sig));
            mark(t.cls, t.sig);
            if (iv.kind == InvokeKind::Static)
              program_detail::trigger_clinit(t.cls, pool,
                                             [&](const ClassNode* n, MethodSigId s) {
                                               mark(n, s);
                                             });
          }
          model_.call_sites[key] = targets;
        } catch (const ResolutionError& e) {
          model_.diagnostics.push_back(std::string(e.what()) + " (call site kept unresolved)");
          model_.call_sites[key] = PatriciaSet();
        }
        break;
      }
      case InvokeKind::Virtual:
      case InvokeKind::Interface: {
        try {
          resolve_method(h, *declared, iv.sig);
        } catch (const ResolutionError& e) {
          model_.diagnostics.push_back(std::string(e.what()) + " (call site kept unresolved)");
          model_.call_sites[key] = PatriciaSet();
          break;
        }
        Site site{key, declared, iv.sig};
        sites_.push_back(site);
        std::size_t idx = sites_.size() - 1;
        index_site(idx);
        model_.call_sites[key];  // materialize (possibly empty) target set
        // resolve against everything instantiated so far
        model_.instantiated.for_each([&](u4 cid) {
          const ClassNode* recv = h.find(ClassNameId{cid});
          if (recv) re_resolve(idx, recv);
        });
        if (model_.call_sites[key].empty())
          model_.diagnostics.push_back("virtual call with no instantiated receiver: " +
                                       pool.class_name_of(declared->name) + "." +
                                       pool.method_sig_of(iv.sig).name + " at pc " +
                                       std::to_string(pc));
        break;
      }
    }
  }

  void index_site(std::size_t idx) {
    sites_by_declared_[sites_[idx].declared->name.value].push_back(idx);
  }

  void apply_native(u4 cms_id, const ClassNode& node, MethodSigId sig) {
    Hierarchy& h = *model_.hierarchy;
    InternPool& pool = h.pool();
    const MethodSig& ms = pool.method_sig_of(sig);
    const NativeAbstraction::Entry* entry =
        natives_.find(pool.class_name_of(node.name), ms.name,
                      print_method_descriptor(ms, pool));
    if (!entry) {
      model_.diagnostics.push_back("native method without abstraction (unsound): " +
                                   pool.class_name_of(node.name) + "." + ms.name);
      return;
    }
    for (const std::string& cls : entry->instantiates) {
      ClassNameId cid = pool.class_name(cls);
      instantiate(cid);
      // constructors become reachable: the abstraction cannot say which one
      const ClassNode* n = h.load(cid);
      for (const auto& m : n->methods)
        if (pool.method_sig_of(m.sig).name == "<init>") mark(n, m.sig);
    }
    u4 pc = 0;
    for (const auto& call : entry->calls) {
      ClassNameId cid = pool.class_name(call.cls);
      const ClassNode* n = h.load(cid);
      MethodSig target_sig = parse_method_descriptor(call.name, call.desc, pool);
      MethodSigId tsig = pool.method_sig(target_sig);
      if (!n->declared_method(tsig))
        throw ValidationError("native abstraction calls unknown method " + call.cls + "." +
                              call.name);
      mark(n, tsig);
      model_.call_sites[{cms_id, pc++}] =
          PatriciaSet().insert(model_.cms->get(n->name, tsig));
    }
  }

  struct Site {
    std::pair<u4, u4> key;  // (caller cms, pc)
    const ClassNode* declared;
    MethodSigId sig;
  };

  ProgramModel model_;
  NativeAbstraction natives_;
  std::vector<u4> worklist_;
  std::vector<Site> sites_;
  std::map<u4, std::vector<std::size_t>> sites_by_declared_;
};

inline ProgramModel build_rta(std::shared_ptr<ClassProvider> provider, const EntrySpec& entry,
                              const NativeAbstraction& natives = {},
                              HierarchyOptions opts = {}) {
  RtaBuilder b(std::move(provider), entry, natives, opts);
  return b.run();
}

}  // namespace jbw
