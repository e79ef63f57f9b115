#pragma once

#include <sstream>

#include "jbw/hierarchy.hpp"
#include "jbw/ir_transform.hpp"

namespace jbw {

// Dense ids for (class, method signature) pairs so reachable sets and call
// targets live in Patricia sets.
class CmsTable {
 public:
  u4 get(ClassNameId cls, MethodSigId sig) {
    auto key = std::pair<u4, u4>(cls.value, sig.value);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    u4 id = static_cast<u4>(pairs_.size());
    pairs_.push_back({cls, sig});
    index_.emplace(key, id);
    return id;
  }
  std::pair<ClassNameId, MethodSigId> resolve(u4 id) const { return pairs_.at(id); }
  std::size_t size() const { return pairs_.size(); }

 private:
  std::map<std::pair<u4, u4>, u4> index_;
  std::vector<std::pair<ClassNameId, MethodSigId>> pairs_;
};

struct EntrySpec {
  std::string main_class;            // dotted name
  bool include_default_entries = false;  // also mark the main class <clinit>
};

// User-supplied abstraction of native methods: which classes a native may
// instantiate and which methods it may call. Line format:
//   native <cms> instantiates <class>* calls <cms>*
// where <cms> is pkg.Cls.method(<descriptor>).
struct NativeAbstraction {
  struct MethodRef {
    std::string cls;   // dotted
    std::string name;
    std::string desc;  // "(I)V" style descriptor
  };
  struct Entry {
    std::vector<std::string> instantiates;  // dotted class names
    std::vector<MethodRef> calls;
  };
  std::map<std::pair<std::string, std::string>, Entry> by_method;  // (cls, name+desc)

  const Entry* find(const std::string& cls, const std::string& name,
                    const std::string& desc) const {
    auto it = by_method.find({cls, name + desc});
    return it == by_method.end() ? nullptr : &it->second;
  }

  static NativeAbstraction parse(std::istream& in) {
    NativeAbstraction na;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ls(line);
      std::string tok;
      if (!(ls >> tok)) continue;  // blank
      if (tok[0] == '#') continue;
      if (tok != "native")
        throw ValidationError("native abstraction line " + std::to_string(lineno) +
                              ": expected 'native'");
      std::string cms;
      if (!(ls >> cms))
        throw ValidationError("native abstraction line " + std::to_string(lineno) +
                              ": missing method");
      MethodRef target = parse_cms(cms, lineno);
      Entry entry;
      std::string mode;
      while (ls >> tok) {
        if (tok == "instantiates" || tok == "calls") {
          mode = tok;
          continue;
        }
        if (mode == "instantiates")
          entry.instantiates.push_back(tok);
        else if (mode == "calls")
          entry.calls.push_back(parse_cms(tok, lineno));
        else
          throw ValidationError("native abstraction line " + std::to_string(lineno) +
                                ": unexpected token '" + tok + "'");
      }
      na.by_method[{target.cls, target.name + target.desc}] = std::move(entry);
    }
    return na;
  }

  static MethodRef parse_cms(const std::string& s, std::size_t lineno) {
    auto paren = s.find('(');
    if (paren == std::string::npos)
      throw ValidationError("native abstraction line " + std::to_string(lineno) +
                            ": method needs a descriptor: " + s);
    auto dot = s.rfind('.', paren);
    if (dot == std::string::npos)
      throw ValidationError("native abstraction line " + std::to_string(lineno) +
                            ": method needs a class: " + s);
    return MethodRef{s.substr(0, dot), s.substr(dot + 1, paren - dot - 1), s.substr(paren)};
  }
};

enum class Provenance : u1 { CRA, RTA, XTA };

// Complete-program record: loaded classes, reachable methods, and the
// per-call-site target sets of the analysis that built it.
struct ProgramModel {
  std::shared_ptr<ClassProvider> provider;
  std::shared_ptr<Hierarchy> hierarchy;
  std::shared_ptr<CmsTable> cms;
  std::shared_ptr<const NativeAbstraction> natives;
  Provenance provenance = Provenance::CRA;
  EntrySpec entry;

  PatriciaMap<const ClassNode*> classes;  // class-name id -> node
  PatriciaSet reachable;                  // cms ids
  std::map<std::pair<u4, u4>, PatriciaSet> call_sites;  // (caller cms, pc) -> targets
  PatriciaSet instantiated;               // class ids (RTA and finer)
  std::vector<std::string> diagnostics;

  InternPool& pool() const { return hierarchy->pool(); }

  std::string cms_name(u4 id) const {
    auto [cls, sig] = cms->resolve(id);
    const MethodSig& ms = pool().method_sig_of(sig);
    return pool().class_name_of(cls) + "." + ms.name + print_method_descriptor(ms, pool());
  }
};

struct CallGraphEdge {
  u4 caller;  // cms id
  u4 pc;
  u4 callee;  // cms id
  friend bool operator<(const CallGraphEdge& a, const CallGraphEdge& b) {
    return std::tuple(a.caller, a.pc, a.callee) < std::tuple(b.caller, b.pc, b.callee);
  }
  friend bool operator==(const CallGraphEdge&, const CallGraphEdge&) = default;
};

struct CgSummary {
  std::vector<u4> methods;           // sorted cms ids
  std::vector<CallGraphEdge> edges;  // sorted
  std::size_t class_count = 0;
};

// Pure projection of the model with deterministic (interned-id) ordering.
inline CgSummary cg_query(const ProgramModel& p) {
  CgSummary s;
  s.methods = p.reachable.to_vector();
  for (const auto& [site, targets] : p.call_sites)
    targets.for_each([&](u4 callee) {
      s.edges.push_back({site.first, site.second, callee});
    });
  std::sort(s.edges.begin(), s.edges.end());
  s.class_count = p.classes.size();
  return s;
}

namespace program_detail {

// Classes a decoded instruction mentions (for hierarchy completeness).
inline void mentioned_classes(const Instr& in, std::vector<ClassNameId>& out) {
  auto from_type = [&out](const ObjectType& t) {
    const ObjectType* o = &t;
    while (o->is_array() && o->element().is_object()) o = &o->element().object();
    if (o->is_class()) out.push_back(o->class_name());
  };
  if (auto* n = instr_as<op::New>(in)) out.push_back(n->cls);
  if (auto* f = instr_as<op::FieldOp>(in)) out.push_back(f->owner);
  if (auto* v = instr_as<op::Invoke>(in)) from_type(v->owner);
  if (auto* c = instr_as<op::CheckCast>(in)) from_type(c->type);
  if (auto* i = instr_as<op::InstanceOf>(in)) from_type(i->type);
  if (auto* a = instr_as<op::NewArray>(in)) from_type(a->array_type);
  if (auto* k = instr_as<op::Const>(in))
    if (auto* t = std::get_if<ObjectType>(&k->value.v)) from_type(*t);
}

inline MethodSig main_signature(InternPool& pool) {
  return MethodSig{
      "main",
      {ValueType(ObjectType::array(ValueType(ObjectType::klass(pool.class_name(
          "java.lang.String")))))},
      std::nullopt};
}

// marks <clinit> of the class and its superclasses
template <class MarkF>
void trigger_clinit(const ClassNode* node, InternPool& pool, MarkF&& mark) {
  MethodSigId clinit = pool.method_sig(MethodSig{"<clinit>", {}, std::nullopt});
  for (const ClassNode* n = node; n; n = n->super)
    if (n->declared_method(clinit)) mark(n, clinit);
}

}  // namespace program_detail

}  // namespace jbw
