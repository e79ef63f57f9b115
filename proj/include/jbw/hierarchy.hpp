#pragma once

#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "jbw/classpath.hpp"
#include "jbw/patricia.hpp"

namespace jbw {

// Node in the class/interface graph. Immutable once the hierarchy is built.
struct ClassNode {
  ClassNameId name;
  bool is_interface = false;
  bool is_stub = false;  // synthesized for a missing class in partial mode
  u2 access = 0;
  const ClassNode* super = nullptr;  // null for java.lang.Object and stubs of it
  std::vector<const ClassNode*> interfaces;
  std::vector<const ClassNode*> children;  // direct subclasses / subinterfaces / implementers
  const ClassFile* file = nullptr;         // null for stubs

  struct Method {
    MethodSigId sig;
    u2 access = 0;
    const MethodInfo* info = nullptr;
  };
  struct Field {
    FieldSigId sig;
    u2 access = 0;
    const FieldInfo* info = nullptr;
  };
  std::vector<Method> methods;
  std::vector<Field> fields;

  bool is_abstract() const { return access & acc::kAbstract; }

  const Method* declared_method(MethodSigId sig) const {
    for (const auto& m : methods)
      if (m.sig == sig) return &m;
    return nullptr;
  }
  const Field* declared_field(FieldSigId sig) const {
    for (const auto& f : fields)
      if (f.sig == sig) return &f;
    return nullptr;
  }
};

struct HierarchyOptions {
  // When set, classes missing from the provider become opaque stubs
  // extending java.lang.Object instead of failing the build.
  bool allow_partial_classpath = false;
};

class Hierarchy {
 public:
  Hierarchy(std::shared_ptr<ClassProvider> provider, HierarchyOptions opts = {})
      : provider_(std::move(provider)), opts_(opts), pool_(provider_->intern_pool()) {
    object_name_ = pool_->class_name("java.lang.Object");
    cloneable_name_ = pool_->class_name("java.lang.Cloneable");
    serializable_name_ = pool_->class_name("java.io.Serializable");
  }

  InternPool& pool() const { return *pool_; }
  std::shared_ptr<InternPool> pool_ptr() const { return pool_; }
  ClassProvider& provider() const { return *provider_; }
  ClassNameId object_name() const { return object_name_; }
  ClassNameId cloneable_name() const { return cloneable_name_; }
  ClassNameId serializable_name() const { return serializable_name_; }

  const PatriciaMap<const ClassNode*>& nodes() const { return nodes_; }

  const ClassNode* find(ClassNameId name) const {
    const ClassNode* const* n = nodes_.find(name.value);
    return n ? *n : nullptr;
  }
  const ClassNode& at(ClassNameId name) const {
    const ClassNode* n = find(name);
    if (!n)
      throw ResolutionError(ResolutionError::Kind::UnknownClass,
                            "class " + pool_->class_name_of(name) + " is not in the hierarchy");
    return *n;
  }

  // Loads `name` and the closure of its super types. Returns the node.
  const ClassNode* load(ClassNameId name) {
    if (const ClassNode* existing = find(name)) return existing;
    std::unordered_set<std::uint32_t> in_progress;
    return load_rec(name, in_progress);
  }

  bool is_loaded(ClassNameId name) const { return find(name) != nullptr; }

 private:
  const ClassNode* load_rec(ClassNameId name, std::unordered_set<std::uint32_t>& in_progress) {
    if (const ClassNode* existing = find(name)) return existing;
    if (!in_progress.insert(name.value).second)
      throw HierarchyError("cyclic inheritance through " + pool_->class_name_of(name));

    const ClassFile* cf = provider_->find(name);
    ClassNode* node;
    if (!cf) {
      if (!opts_.allow_partial_classpath && name != object_name_)
        throw HierarchyError("class " + pool_->class_name_of(name) +
                             " is referenced but missing from the classpath");
      node = &storage_.emplace_back();
      node->name = name;
      node->is_stub = name != object_name_;
      node->access = acc::kPublic;
      if (name != object_name_)
        node->super = const_cast<ClassNode*>(load_rec(object_name_, in_progress));
    } else {
      const ClassNode* super = nullptr;
      if (cf->super_class) {
        super = load_rec(*cf->super_class, in_progress);
        if (super->is_interface)
          throw HierarchyError("class " + pool_->class_name_of(name) + " extends interface " +
                               pool_->class_name_of(*cf->super_class));
      }
      std::vector<const ClassNode*> ifaces;
      for (auto i : cf->interfaces) {
        const ClassNode* n = load_rec(i, in_progress);
        if (!n->is_interface && !n->is_stub)
          throw HierarchyError("class " + pool_->class_name_of(name) +
                               " implements non-interface " + pool_->class_name_of(i));
        ifaces.push_back(n);
      }
      node = &storage_.emplace_back();
      node->name = name;
      node->is_interface = cf->is_interface;
      node->access = cf->access;
      node->super = super;
      node->interfaces = std::move(ifaces);
      node->file = cf;
      for (const auto& m : cf->methods) node->methods.push_back({m.sig, m.access, &m});
      for (const auto& f : cf->fields) node->fields.push_back({f.sig, f.access, &f});
    }
    in_progress.erase(name.value);
    nodes_ = nodes_.insert(name.value, node);
    if (node->super) const_cast<ClassNode*>(node->super)->children.push_back(node);
    for (const ClassNode* i : node->interfaces)
      const_cast<ClassNode*>(i)->children.push_back(node);
    return node;
  }

  std::shared_ptr<ClassProvider> provider_;
  HierarchyOptions opts_;
  std::shared_ptr<InternPool> pool_;
  ClassNameId object_name_, cloneable_name_, serializable_name_;
  std::deque<ClassNode> storage_;
  PatriciaMap<const ClassNode*> nodes_;

  friend bool is_subclass_of(const ClassNode& a, const ClassNode& b);
  friend class SubtypeQuery;
};

// Builds the hierarchy closure over super/interface edges starting from the
// seed classes.
inline Hierarchy build_hierarchy(std::shared_ptr<ClassProvider> provider,
                                 const std::vector<ClassNameId>& seeds,
                                 HierarchyOptions opts = {}) {
  Hierarchy h(std::move(provider), opts);
  h.load(h.object_name());
  for (auto s : seeds) h.load(s);
  return h;
}

// --- subtyping -------------------------------------------------------------

inline bool is_subclass_of(const ClassNode& a, const ClassNode& b) {
  for (const ClassNode* n = &a; n; n = n->super)
    if (n == &b) return true;
  return false;
}

// transitive interface implementation (walks supers and superinterfaces)
inline bool implements(const ClassNode& a, const ClassNode& iface) {
  for (const ClassNode* n = &a; n; n = n->super) {
    std::vector<const ClassNode*> work(n->interfaces.begin(), n->interfaces.end());
    while (!work.empty()) {
      const ClassNode* i = work.back();
      work.pop_back();
      if (i == &iface) return true;
      work.insert(work.end(), i->interfaces.begin(), i->interfaces.end());
    }
  }
  return false;
}

// superinterface closure for interface-to-interface subtyping
inline bool implements_iface(const ClassNode& i1, const ClassNode& i2) {
  if (&i1 == &i2) return true;
  for (const ClassNode* s : i1.interfaces)
    if (implements_iface(*s, i2)) return true;
  return false;
}

// t1 <= t2 per the JVM rules over loaded classes: class extension,
// transitive interface implementation, array covariance, and the special
// array supertypes Object/Cloneable/Serializable.
inline bool is_subtype(const Hierarchy& h, const ObjectType& t1, const ObjectType& t2) {
  if (t1 == t2) return true;
  if (t2.is_class()) {
    if (t1.is_array())
      return t2.class_name() == h.object_name() || t2.class_name() == h.cloneable_name() ||
             t2.class_name() == h.serializable_name();
    const ClassNode& c1 = h.at(t1.class_name());
    const ClassNode& c2 = h.at(t2.class_name());
    if (c2.is_interface) return c1.is_interface ? implements_iface(c1, c2) : implements(c1, c2);
    if (c1.is_interface) return c2.name == h.object_name();
    return is_subclass_of(c1, c2);
  }
  // t2 is an array: only arrays can be below it
  if (t1.is_class()) return false;
  const ValueType& e1 = t1.element();
  const ValueType& e2 = t2.element();
  if (e1.is_basic() || e2.is_basic()) return e1 == e2;
  return is_subtype(h, e1.object(), e2.object());
}

inline bool is_subtype(const Hierarchy& h, ClassNameId c1, ClassNameId c2) {
  return is_subtype(h, ObjectType::klass(c1), ObjectType::klass(c2));
}

// --- resolution ------------------------------------------------------------

// Field resolution order: the class itself, then superinterfaces
// (recursively), then the superclass chain.
inline const ClassNode& resolve_field(const Hierarchy& h, const ClassNode& start,
                                      FieldSigId sig) {
  if (start.declared_field(sig)) return start;
  for (const ClassNode* i : start.interfaces) {
    try {
      return resolve_field(h, *i, sig);
    } catch (const ResolutionError&) {
    }
  }
  if (start.super) return resolve_field(h, *start.super, sig);
  throw ResolutionError(ResolutionError::Kind::NoSuchField,
                        "no field " + h.pool().field_sig_of(sig).name + " reachable from " +
                            h.pool().class_name_of(start.name));
}

// Maximally-specific superinterface declarations of `sig` above `start`.
// Multiple unrelated candidates are all returned; the tie is not broken.
inline void max_specific_interface_methods(const ClassNode& start, MethodSigId sig,
                                           std::vector<const ClassNode*>& out) {
  std::vector<const ClassNode*> work;
  std::unordered_set<const ClassNode*> seen;
  for (const ClassNode* n = &start; n; n = n->super)
    work.insert(work.end(), n->interfaces.begin(), n->interfaces.end());
  std::vector<const ClassNode*> declaring;
  while (!work.empty()) {
    const ClassNode* i = work.back();
    work.pop_back();
    if (!seen.insert(i).second) continue;
    if (const auto* m = i->declared_method(sig); m && !(m->access & acc::kStatic)) {
      declaring.push_back(i);
      continue;  // more-general declarations above i are not maximally specific
    }
    work.insert(work.end(), i->interfaces.begin(), i->interfaces.end());
  }
  // drop declarations that have a more specific one below them
  for (const ClassNode* cand : declaring) {
    bool shadowed = false;
    for (const ClassNode* other : declaring)
      if (other != cand && implements_iface(*other, *cand)) shadowed = true;
    if (!shadowed && std::find(out.begin(), out.end(), cand) == out.end()) out.push_back(cand);
  }
}

// Method resolution per the JVM spec: superclass chain first, then
// maximally-specific superinterfaces. Abstract declarations resolve. The
// first node is the primary result; extra nodes appear only for ambiguous
// interface declarations.
inline std::vector<const ClassNode*> resolve_method(const Hierarchy& h, const ClassNode& start,
                                                    MethodSigId sig) {
  std::vector<const ClassNode*> out;
  if (start.is_interface) {
    if (start.declared_method(sig)) return {&start};
    const ClassNode* object = h.find(h.object_name());
    if (object && object->declared_method(sig)) return {object};
    max_specific_interface_methods(start, sig, out);
  } else {
    for (const ClassNode* n = &start; n; n = n->super)
      if (n->declared_method(sig)) return {n};
    max_specific_interface_methods(start, sig, out);
  }
  if (out.empty())
    throw ResolutionError(ResolutionError::Kind::NoSuchMethod,
                          "no method " + h.pool().method_sig_of(sig).name + " reachable from " +
                              h.pool().class_name_of(start.name));
  return out;
}

// --- dispatch --------------------------------------------------------------

struct DispatchTarget {
  const ClassNode* cls;  // implementing class
  MethodSigId sig;
  friend bool operator==(const DispatchTarget& a, const DispatchTarget& b) {
    return a.cls == b.cls && a.sig == b.sig;
  }
};

struct DispatchResult {
  std::vector<DispatchTarget> targets;
  std::vector<std::string> diagnostics;
};

// Implementation found for a concrete receiver class: first declaration on
// the superclass chain.
inline const ClassNode* lookup_impl(const ClassNode& receiver, MethodSigId sig) {
  for (const ClassNode* n = &receiver; n; n = n->super) {
    if (const auto* m = n->declared_method(sig)) {
      if (m->access & acc::kAbstract) return nullptr;
      return n;
    }
  }
  return nullptr;
}

// Call-site target computation. `instantiable` restricts virtual/interface
// receivers (class-name ids); static/special ignore it. `caller` feeds the
// invokespecial superclass rule.
inline DispatchResult dispatch_targets(const Hierarchy& h, InvokeKind kind,
                                       const ClassNode& declared, MethodSigId sig,
                                       const PatriciaSet& instantiable,
                                       const ClassNode* caller = nullptr) {
  DispatchResult res;
  switch (kind) {
    case InvokeKind::Static: {
      auto r = resolve_method(h, declared, sig);
      res.targets.push_back({r.front(), sig});
      return res;
    }
    case InvokeKind::Special: {
      auto r = resolve_method(h, declared, sig);
      const ClassNode* target = r.front();
      // ACC_SUPER semantics: a non-<init> call to a method of a proper
      // superclass dispatches to the nearest implementation above the caller.
      const std::string& mname = h.pool().method_sig_of(sig).name;
      if (caller && (caller->access & acc::kSuper) && mname != "<init>" &&
          !target->is_interface && target != caller && is_subclass_of(*caller, *target) &&
          caller->super) {
        if (const ClassNode* impl = lookup_impl(*caller->super, sig)) target = impl;
      }
      res.targets.push_back({target, sig});
      return res;
    }
    case InvokeKind::Virtual:
    case InvokeKind::Interface: {
      try {
        resolve_method(h, declared, sig);
      } catch (const ResolutionError& e) {
        res.diagnostics.push_back(e.what());
        return res;
      }
      bool any_receiver = false;
      instantiable.for_each([&](std::uint32_t cid) {
        const ClassNode* recv = h.find(ClassNameId{cid});
        if (!recv || recv->is_interface) return;
        bool compatible = declared.is_interface ? implements(*recv, declared)
                                                : is_subclass_of(*recv, declared);
        if (!compatible) return;
        any_receiver = true;
        if (const ClassNode* impl = lookup_impl(*recv, sig)) {
          DispatchTarget t{impl, sig};
          if (std::find(res.targets.begin(), res.targets.end(), t) == res.targets.end())
            res.targets.push_back(t);
        }
      });
      if (any_receiver && res.targets.empty())
        res.diagnostics.push_back("only abstract implementations reachable for " +
                                  h.pool().method_sig_of(sig).name);
      return res;
    }
  }
  return res;
}

}  // namespace jbw
