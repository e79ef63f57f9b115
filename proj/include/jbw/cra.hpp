#pragma once

#include "jbw/program.hpp"

namespace jbw {

// Class Reachability Analysis: closure over constant-pool class references
// starting from the entry class, without touching any method body. All
// methods of reached classes count as reachable; call targets are computed
// on demand with CHA when the call graph is actually queried.
inline ProgramModel build_cra(std::shared_ptr<ClassProvider> provider, const EntrySpec& entry,
                              HierarchyOptions opts = {}) {
  ProgramModel model;
  model.provider = provider;
  model.hierarchy = std::make_shared<Hierarchy>(provider, opts);
  model.cms = std::make_shared<CmsTable>();
  model.provenance = Provenance::CRA;
  model.entry = entry;
  Hierarchy& h = *model.hierarchy;
  InternPool& pool = h.pool();

  ClassNameId main_cls = pool.class_name(entry.main_class);
  if (!provider->find(main_cls))
    throw ClasspathError("entry class " + entry.main_class + " not on the classpath");

  std::vector<ClassNameId> work{main_cls};
  std::set<u4> seen{main_cls.value};
  while (!work.empty()) {
    ClassNameId cls = work.back();
    work.pop_back();
    const ClassNode* node = h.load(cls);
    if (!node->file) continue;  // stub
    for (ClassNameId ref : node->file->referenced_class_names()) {
      if (seen.insert(ref.value).second) work.push_back(ref);
    }
  }

  h.nodes().for_each([&](u4 id, const ClassNode* const& node) {
    model.classes = model.classes.insert(id, node);
    for (const auto& m : node->methods)
      model.reachable = model.reachable.insert(model.cms->get(node->name, m.sig));
  });

  // the JVM entry point must exist (analysis of a library would pass an
  // explicit entry list through RTA instead)
  const ClassNode* main_node = h.find(main_cls);
  MethodSigId main_sig = pool.method_sig(program_detail::main_signature(pool));
  if (!main_node->declared_method(main_sig))
    throw ClasspathError("entry class " + entry.main_class +
                         " has no static void main(java.lang.String[])");

  // CHA instantiable universe: every loaded concrete class
  h.nodes().for_each([&](u4 id, const ClassNode* const& node) {
    if (!node->is_interface && !node->is_abstract())
      model.instantiated = model.instantiated.insert(id);
  });
  return model;
}

// Populates static_lookup for every call site of the reached methods using
// CHA. This is the "overlying analysis" step: bodies decode here, not during
// build_cra.
inline void cra_materialize_call_sites(ProgramModel& model) {
  if (model.provenance != Provenance::CRA)
    throw ValidationError("cra_materialize_call_sites needs a CRA model");
  Hierarchy& h = *model.hierarchy;
  InternPool& pool = h.pool();
  std::vector<u4> methods = model.reachable.to_vector();
  for (u4 cms_id : methods) {
    auto [cls, sig] = model.cms->resolve(cms_id);
    const ClassNode* node = h.find(cls);
    const ClassNode::Method* m = node ? node->declared_method(sig) : nullptr;
    if (!m || !m->info || !m->info->body) continue;
    for (const PcInstr& pi : m->info->body->instructions()) {
      auto* iv = instr_as<op::Invoke>(pi.instr);
      if (!iv) continue;
      const ClassNode* declared =
          iv->owner.is_class() ? h.find(iv->owner.class_name()) : h.find(h.object_name());
      PatriciaSet targets;
      if (declared) {
        try {
          DispatchResult r =
              dispatch_targets(h, iv->kind, *declared, iv->sig, model.instantiated, node);
          for (const auto& t : r.targets)
            targets = targets.insert(model.cms->get(t.cls->name, t.sig));
          for (auto& d : r.diagnostics) model.diagnostics.push_back(std::move(d));
        } catch (const ResolutionError& e) {
          model.diagnostics.push_back(e.what());
        }
      } else {
        model.diagnostics.push_back("call owner class missing: " +
                                    (iv->owner.is_class()
                                         ? pool.class_name_of(iv->owner.class_name())
                                         : std::string("<array>")));
      }
      model.call_sites[{cms_id, pi.pc}] = targets;
    }
  }
}

}  // namespace jbw
