#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "jbw/hierarchy.hpp"
#include "jbw/ir_flatten.hpp"
#include "jbw/ir_transform.hpp"

namespace jbw {

// Reference interpreters for the bytecode subset and the IR. They exist to
// test semantic preservation and call-graph soundness, so they are written
// for clarity and fail loudly (EvalError) on states a correct transformation
// can never reach.

struct Value {
  enum class Kind : u1 { Int, Long, Float, Double, Ref } kind = Kind::Int;
  i4 i = 0;
  i8 l = 0;
  float f = 0;
  double d = 0;
  u4 ref = 0;  // heap id; 0 is null

  static Value of_int(i4 v) { return {Kind::Int, v}; }
  static Value of_long(i8 v) {
    Value x{Kind::Long};
    x.l = v;
    return x;
  }
  static Value of_float(float v) {
    Value x{Kind::Float};
    x.f = v;
    return x;
  }
  static Value of_double(double v) {
    Value x{Kind::Double};
    x.d = v;
    return x;
  }
  static Value of_ref(u4 r) {
    Value x{Kind::Ref};
    x.ref = r;
    return x;
  }
  static Value null() { return of_ref(0); }

  bool is_cat2() const { return kind == Kind::Long || kind == Kind::Double; }
};

inline Value default_value(const ValueType& t) {
  if (t.is_object()) return Value::null();
  switch (t.basic()) {
    case JavaBasicType::Long:
      return Value::of_long(0);
    case JavaBasicType::Float:
      return Value::of_float(0);
    case JavaBasicType::Double:
      return Value::of_double(0);
    default:
      return Value::of_int(0);
  }
}

struct HeapObject {
  bool is_array = false;
  ClassNameId cls{};            // object class, or java.lang.Object-ish for arrays
  ObjectType type{};            // precise type (incl. array types)
  std::vector<Value> elements;  // arrays
  std::map<std::pair<u4, u4>, Value> fields;  // (declaring class id, field sig id) -> value
};

struct Outcome {
  enum class Kind : u1 { Returned, Threw, BudgetExceeded, Unsupported } kind = Kind::Returned;
  std::optional<Value> ret;       // Returned
  std::optional<ClassNameId> exc;  // Threw
  std::string detail;             // Unsupported

  static Outcome returned(std::optional<Value> v) {
    Outcome o;
    o.kind = Kind::Returned;
    o.ret = std::move(v);
    return o;
  }
};

struct CallEdge {
  ClassNameId caller_cls;
  MethodSigId caller_sig;
  u4 pc;
  ClassNameId callee_cls;
  MethodSigId callee_sig;

  friend bool operator<(const CallEdge& a, const CallEdge& b) {
    auto ka = std::tuple(a.caller_cls.value, a.caller_sig.value, a.pc, a.callee_cls.value,
                         a.callee_sig.value);
    auto kb = std::tuple(b.caller_cls.value, b.caller_sig.value, b.pc, b.callee_cls.value,
                         b.callee_sig.value);
    return ka < kb;
  }
};

enum class ExecMode : u1 { Bytecode, Ir, FlatIr };

class EvalMachine {
 public:
  EvalMachine(Hierarchy& h, ExecMode mode, u8 budget = 1'000'000)
      : h_(h), pool_(h.pool()), mode_(mode), budget_(budget) {
    heap_.push_back(HeapObject{});  // slot 0 = null
  }

  // Runs (class, sig) with the given arguments (receiver first for instance
  // methods).
  Outcome run(ClassNameId cls, MethodSigId sig, const std::vector<Value>& args) {
    const ClassNode* node = h_.load(cls);
    const ClassNode::Method* m = node->declared_method(sig);
    if (!m) return unsupported("entry method not declared");
    Inner r = call(*node, *m, args, 0);
    return finish(r);
  }

  const std::vector<CallEdge>& edges() const { return edges_; }
  const HeapObject& object(u4 ref) const { return heap_.at(ref); }

 private:
  struct Inner {
    enum class Kind : u1 { Ret, Exc, Budget, Unsupported } kind = Kind::Ret;
    std::optional<Value> ret;
    u4 exc_ref = 0;
    std::string detail;

    static Inner returned(std::optional<Value> v) {
      Inner r;
      r.ret = std::move(v);
      return r;
    }
    static Inner exception(u4 ref) {
      Inner r;
      r.kind = Kind::Exc;
      r.exc_ref = ref;
      return r;
    }
  };

  Outcome finish(const Inner& r) {
    Outcome o;
    switch (r.kind) {
      case Inner::Kind::Ret:
        return Outcome::returned(r.ret);
      case Inner::Kind::Exc:
        o.kind = Outcome::Kind::Threw;
        o.exc = heap_.at(r.exc_ref).cls;
        return o;
      case Inner::Kind::Budget:
        o.kind = Outcome::Kind::BudgetExceeded;
        return o;
      case Inner::Kind::Unsupported:
        o.kind = Outcome::Kind::Unsupported;
        o.detail = r.detail;
        return o;
    }
    return o;
  }

  Inner unsupported_inner(const std::string& why) {
    Inner r;
    r.kind = Inner::Kind::Unsupported;
    r.detail = why;
    return r;
  }
  Outcome unsupported(const std::string& why) {
    Outcome o;
    o.kind = Outcome::Kind::Unsupported;
    o.detail = why;
    return o;
  }

  bool spend() { return budget_ != 0 && (--budget_, true); }

  // --- heap ------------------------------------------------------------------

  u4 alloc_object(ClassNameId cls) {
    HeapObject o;
    o.cls = cls;
    o.type = ObjectType::klass(cls);
    heap_.push_back(std::move(o));
    return static_cast<u4>(heap_.size() - 1);
  }

  u4 alloc_array(const ObjectType& type, i4 length) {
    HeapObject o;
    o.is_array = true;
    o.cls = h_.object_name();
    o.type = type;
    o.elements.assign(static_cast<std::size_t>(length), default_value(type.element()));
    heap_.push_back(std::move(o));
    return static_cast<u4>(heap_.size() - 1);
  }

  u4 throw_new(const char* dotted_name) {
    ClassNameId cls = pool_.class_name(dotted_name);
    h_.load(cls);
    return alloc_object(cls);
  }

  u4 intern_string(const std::string& s) {
    auto it = strings_.find(s);
    if (it != strings_.end()) return it->second;
    u4 r = alloc_object(pool_.class_name("java.lang.String"));
    strings_.emplace(s, r);
    return r;
  }

  u4 intern_class_const(const ObjectType& t) {
    auto key = print_class_entry(t, pool_);
    auto it = class_consts_.find(key);
    if (it != class_consts_.end()) return it->second;
    u4 r = alloc_object(pool_.class_name("java.lang.Class"));
    class_consts_.emplace(key, r);
    return r;
  }

  // subtype test that loads the named classes first (the hierarchy only
  // answers over loaded nodes)
  void load_type(const ObjectType& t) {
    if (t.is_class()) {
      h_.load(t.class_name());
      return;
    }
    if (t.element().is_object()) load_type(t.element().object());
  }
  bool subtype(const ObjectType& a, const ObjectType& b) {
    load_type(a);
    load_type(b);
    return is_subtype(h_, a, b);
  }

  // --- class initialization -----------------------------------------------------

  // JVM-style: mark first (re-entrant triggers are no-ops), super first.
  std::optional<Inner> ensure_initialized(ClassNameId cls, int depth) {
    if (initialized_.count(cls.value)) return std::nullopt;
    initialized_.insert(cls.value);
    const ClassNode* node = h_.load(cls);
    if (node->super)
      if (auto r = ensure_initialized(node->super->name, depth)) return r;
    MethodSigId clinit = pool_.method_sig(MethodSig{"<clinit>", {}, std::nullopt});
    if (const ClassNode::Method* m = node->declared_method(clinit)) {
      Inner r = call(*node, *m, {}, depth + 1);
      if (r.kind != Inner::Kind::Ret) return r;
    }
    return std::nullopt;
  }

  // --- dispatch ----------------------------------------------------------------

  const ClassNode* runtime_lookup(const ClassNode& recv, MethodSigId sig) {
    for (const ClassNode* n = &recv; n; n = n->super)
      if (const auto* m = n->declared_method(sig); m && !(m->access & acc::kAbstract)) return n;
    return nullptr;
  }

  struct ResolvedCall {
    const ClassNode* node;
    const ClassNode::Method* method;
  };

  std::optional<ResolvedCall> resolve_call(const ObjectType& owner, MethodSigId sig,
                                           InvokeKind kind, const ClassNode* caller,
                                           u4 receiver) {
    // array receivers dispatch through java.lang.Object
    const ClassNode* declared =
        owner.is_class() ? h_.load(owner.class_name()) : h_.load(h_.object_name());
    switch (kind) {
      case InvokeKind::Static: {
        auto r = resolve_method(h_, *declared, sig);
        return ResolvedCall{r.front(), r.front()->declared_method(sig)};
      }
      case InvokeKind::Special: {
        auto r = resolve_method(h_, *declared, sig);
        const ClassNode* target = r.front();
        const std::string& name = pool_.method_sig_of(sig).name;
        if (caller && (caller->access & acc::kSuper) && name != "<init>" &&
            !target->is_interface && target != caller && is_subclass_of(*caller, *target) &&
            caller->super) {
          if (const ClassNode* impl = runtime_lookup(*caller->super, sig)) target = impl;
        }
        return ResolvedCall{target, target->declared_method(sig)};
      }
      case InvokeKind::Virtual:
      case InvokeKind::Interface: {
        const HeapObject& obj = heap_.at(receiver);
        const ClassNode* impl = runtime_lookup(*h_.load(obj.cls), sig);
        if (!impl) return std::nullopt;
        return ResolvedCall{impl, impl->declared_method(sig)};
      }
    }
    return std::nullopt;
  }

  // --- frames --------------------------------------------------------------------

  Inner call(const ClassNode& node, const ClassNode::Method& m, const std::vector<Value>& args,
             int depth) {
    if (depth > 256) {
      Inner r;
      r.kind = Inner::Kind::Budget;
      return r;
    }
    const MethodInfo* info = m.info;
    if (!info || (!info->body.has_value())) {
      if (m.access & acc::kNative)
        return unsupported_inner("native method " + pool_.method_sig_of(m.sig).name);
      return unsupported_inner("abstract method invoked");
    }
    if (mode_ == ExecMode::Bytecode) return run_bytecode(node, *info, args, depth);
    return run_ir(node, *info, args, depth);
  }

  // exception routing inside one frame; returns the new pc index or -1
  template <class Handlers, class CoversF>
  std::ptrdiff_t find_handler(const Handlers& handlers, CoversF covers, u4 exc_ref) {
    const HeapObject& obj = heap_.at(exc_ref);
    for (std::size_t i = 0; i < handlers.size(); ++i) {
      if (!covers(handlers[i])) continue;
      if (!handlers[i].catch_type) return static_cast<std::ptrdiff_t>(i);
      const ClassNode* want = h_.load(*handlers[i].catch_type);
      const ClassNode* got = h_.load(obj.cls);
      if (is_subclass_of(*got, *want)) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
  }

  Inner run_bytecode(const ClassNode& node, const MethodInfo& info,
                     const std::vector<Value>& args, int depth);
  Inner run_ir(const ClassNode& node, const MethodInfo& info, const std::vector<Value>& args,
               int depth);

  // IR method cache per mode
  const IrMethod& ir_of(const ClassNode& node, const MethodInfo& info) {
    auto key = std::pair<u4, u4>(node.name.value, info.sig.value);
    auto it = ir_cache_.find(key);
    if (it != ir_cache_.end()) return it->second;
    IrMethod m = build_ir(*node.file, info, pool_);
    if (mode_ == ExecMode::FlatIr) m = flatten_3addr(m);
    return ir_cache_.emplace(key, std::move(m)).first->second;
  }

  Hierarchy& h_;
  InternPool& pool_;
  ExecMode mode_;
  u8 budget_;
  std::vector<HeapObject> heap_;
  std::set<u4> initialized_;
  std::map<std::string, u4> strings_;
  std::map<std::string, u4> class_consts_;
  std::map<std::pair<u4, u4>, Value> statics_;
  std::map<std::pair<u4, u4>, IrMethod> ir_cache_;
  std::vector<CallEdge> edges_;

  friend struct BytecodeFrame;
  friend struct IrFrame;

 public:
  // exposed for tests that want to seed statics
  std::map<std::pair<u4, u4>, Value>& statics() { return statics_; }
};

// --- shared arithmetic helpers (JVM semantics) -----------------------------------

namespace eval_detail {

inline i4 jvm_iadd(i4 a, i4 b) { return static_cast<i4>(static_cast<u4>(a) + static_cast<u4>(b)); }
inline i4 jvm_isub(i4 a, i4 b) { return static_cast<i4>(static_cast<u4>(a) - static_cast<u4>(b)); }
inline i4 jvm_imul(i4 a, i4 b) { return static_cast<i4>(static_cast<u4>(a) * static_cast<u4>(b)); }
inline i4 jvm_idiv(i4 a, i4 b) {
  if (a == std::numeric_limits<i4>::min() && b == -1) return a;
  return a / b;
}
inline i4 jvm_irem(i4 a, i4 b) {
  if (a == std::numeric_limits<i4>::min() && b == -1) return 0;
  return a % b;
}
inline i8 jvm_ladd(i8 a, i8 b) { return static_cast<i8>(static_cast<u8>(a) + static_cast<u8>(b)); }
inline i8 jvm_lsub(i8 a, i8 b) { return static_cast<i8>(static_cast<u8>(a) - static_cast<u8>(b)); }
inline i8 jvm_lmul(i8 a, i8 b) { return static_cast<i8>(static_cast<u8>(a) * static_cast<u8>(b)); }
inline i8 jvm_ldiv(i8 a, i8 b) {
  if (a == std::numeric_limits<i8>::min() && b == -1) return a;
  return a / b;
}
inline i8 jvm_lrem(i8 a, i8 b) {
  if (a == std::numeric_limits<i8>::min() && b == -1) return 0;
  return a % b;
}

inline i4 d2i(double d) {
  if (std::isnan(d)) return 0;
  if (d >= 2147483647.0) return std::numeric_limits<i4>::max();
  if (d <= -2147483648.0) return std::numeric_limits<i4>::min();
  return static_cast<i4>(d);
}
inline i8 d2l(double d) {
  if (std::isnan(d)) return 0;
  if (d >= 9223372036854775807.0) return std::numeric_limits<i8>::max();
  if (d <= -9223372036854775808.0) return std::numeric_limits<i8>::min();
  return static_cast<i8>(d);
}

inline Value arith(ArithOp op, JvmBasicType t, const Value& a, const Value& b, bool& div_zero) {
  div_zero = false;
  switch (t) {
    case JvmBasicType::Int: {
      i4 x = a.i, y = b.i;
      switch (op) {
        case ArithOp::Add:
          return Value::of_int(jvm_iadd(x, y));
        case ArithOp::Sub:
          return Value::of_int(jvm_isub(x, y));
        case ArithOp::Mul:
          return Value::of_int(jvm_imul(x, y));
        case ArithOp::Div:
          if (y == 0) {
            div_zero = true;
            return Value::of_int(0);
          }
          return Value::of_int(jvm_idiv(x, y));
        case ArithOp::Rem:
          if (y == 0) {
            div_zero = true;
            return Value::of_int(0);
          }
          return Value::of_int(jvm_irem(x, y));
        case ArithOp::Neg:
          return Value::of_int(jvm_isub(0, x));
        case ArithOp::Shl:
          return Value::of_int(static_cast<i4>(static_cast<u4>(x) << (y & 0x1f)));
        case ArithOp::Shr:
          return Value::of_int(x >> (y & 0x1f));
        case ArithOp::UShr:
          return Value::of_int(static_cast<i4>(static_cast<u4>(x) >> (y & 0x1f)));
        case ArithOp::And:
          return Value::of_int(x & y);
        case ArithOp::Or:
          return Value::of_int(x | y);
        case ArithOp::Xor:
          return Value::of_int(x ^ y);
      }
      break;
    }
    case JvmBasicType::Long: {
      i8 x = a.l, y = b.l;
      switch (op) {
        case ArithOp::Add:
          return Value::of_long(jvm_ladd(x, y));
        case ArithOp::Sub:
          return Value::of_long(jvm_lsub(x, y));
        case ArithOp::Mul:
          return Value::of_long(jvm_lmul(x, y));
        case ArithOp::Div:
          if (y == 0) {
            div_zero = true;
            return Value::of_long(0);
          }
          return Value::of_long(jvm_ldiv(x, y));
        case ArithOp::Rem:
          if (y == 0) {
            div_zero = true;
            return Value::of_long(0);
          }
          return Value::of_long(jvm_lrem(x, y));
        case ArithOp::Neg:
          return Value::of_long(jvm_lsub(0, x));
        case ArithOp::Shl:
          return Value::of_long(static_cast<i8>(static_cast<u8>(x) << (b.i & 0x3f)));
        case ArithOp::Shr:
          return Value::of_long(x >> (b.i & 0x3f));
        case ArithOp::UShr:
          return Value::of_long(static_cast<i8>(static_cast<u8>(x) >> (b.i & 0x3f)));
        case ArithOp::And:
          return Value::of_long(x & y);
        case ArithOp::Or:
          return Value::of_long(x | y);
        case ArithOp::Xor:
          return Value::of_long(x ^ y);
      }
      break;
    }
    case JvmBasicType::Float: {
      float x = a.f, y = b.f;
      switch (op) {
        case ArithOp::Add:
          return Value::of_float(x + y);
        case ArithOp::Sub:
          return Value::of_float(x - y);
        case ArithOp::Mul:
          return Value::of_float(x * y);
        case ArithOp::Div:
          return Value::of_float(x / y);
        case ArithOp::Rem:
          return Value::of_float(std::fmod(x, y));
        case ArithOp::Neg:
          return Value::of_float(-x);
        default:
          break;
      }
      break;
    }
    case JvmBasicType::Double: {
      double x = a.d, y = b.d;
      switch (op) {
        case ArithOp::Add:
          return Value::of_double(x + y);
        case ArithOp::Sub:
          return Value::of_double(x - y);
        case ArithOp::Mul:
          return Value::of_double(x * y);
        case ArithOp::Div:
          return Value::of_double(x / y);
        case ArithOp::Rem:
          return Value::of_double(std::fmod(x, y));
        case ArithOp::Neg:
          return Value::of_double(-x);
        default:
          break;
      }
      break;
    }
  }
  throw EvalError("bad arithmetic combination");
}

inline Value convert(JvmBasicType from, ConvTarget to, const Value& v) {
  switch (from) {
    case JvmBasicType::Int:
      switch (to) {
        case ConvTarget::Long:
          return Value::of_long(v.i);
        case ConvTarget::Float:
          return Value::of_float(static_cast<float>(v.i));
        case ConvTarget::Double:
          return Value::of_double(static_cast<double>(v.i));
        case ConvTarget::Byte:
          return Value::of_int(static_cast<i1>(v.i));
        case ConvTarget::Char:
          return Value::of_int(static_cast<u2>(v.i));
        case ConvTarget::Short:
          return Value::of_int(static_cast<i2>(v.i));
        default:
          break;
      }
      break;
    case JvmBasicType::Long:
      switch (to) {
        case ConvTarget::Int:
          return Value::of_int(static_cast<i4>(v.l));
        case ConvTarget::Float:
          return Value::of_float(static_cast<float>(v.l));
        case ConvTarget::Double:
          return Value::of_double(static_cast<double>(v.l));
        default:
          break;
      }
      break;
    case JvmBasicType::Float:
      switch (to) {
        case ConvTarget::Int:
          return Value::of_int(d2i(v.f));
        case ConvTarget::Long:
          return Value::of_long(d2l(v.f));
        case ConvTarget::Double:
          return Value::of_double(static_cast<double>(v.f));
        default:
          break;
      }
      break;
    case JvmBasicType::Double:
      switch (to) {
        case ConvTarget::Int:
          return Value::of_int(d2i(v.d));
        case ConvTarget::Long:
          return Value::of_long(d2l(v.d));
        case ConvTarget::Float:
          return Value::of_float(static_cast<float>(v.d));
        default:
          break;
      }
      break;
  }
  throw EvalError("bad conversion combination");
}

inline i4 compare(CmpKind k, const Value& a, const Value& b) {
  switch (k) {
    case CmpKind::LCmp:
      return a.l < b.l ? -1 : (a.l > b.l ? 1 : 0);
    case CmpKind::FCmpL:
      if (std::isnan(a.f) || std::isnan(b.f)) return -1;
      return a.f < b.f ? -1 : (a.f > b.f ? 1 : 0);
    case CmpKind::FCmpG:
      if (std::isnan(a.f) || std::isnan(b.f)) return 1;
      return a.f < b.f ? -1 : (a.f > b.f ? 1 : 0);
    case CmpKind::DCmpL:
      if (std::isnan(a.d) || std::isnan(b.d)) return -1;
      return a.d < b.d ? -1 : (a.d > b.d ? 1 : 0);
    case CmpKind::DCmpG:
      if (std::isnan(a.d) || std::isnan(b.d)) return 1;
      return a.d < b.d ? -1 : (a.d > b.d ? 1 : 0);
  }
  return 0;
}

}  // namespace eval_detail

}  // namespace jbw

#include "jbw/eval_bytecode.hpp"
#include "jbw/eval_ir.hpp"

namespace jbw {

// Differential comparison of one method under two or three execution modes.
struct EquivReport {
  u4 vectors = 0;
  u4 agreed = 0;
  u4 inconclusive = 0;  // budget exhaustion on either side
  u4 skipped = 0;       // unsupported constructs
  std::vector<std::string> mismatches;

  bool clean() const { return mismatches.empty(); }
};

// Outcome equality up to object identity: references compare by nullness and
// class of the referenced object.
inline bool outcomes_equal(const EvalMachine& ma, const Outcome& a, const EvalMachine& mb,
                           const Outcome& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Outcome::Kind::Threw) return a.exc == b.exc;
  if (a.kind != Outcome::Kind::Returned) return true;
  if (a.ret.has_value() != b.ret.has_value()) return false;
  if (!a.ret) return true;
  const Value &x = *a.ret, &y = *b.ret;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case Value::Kind::Int:
      return x.i == y.i;
    case Value::Kind::Long:
      return x.l == y.l;
    case Value::Kind::Float:
      return std::bit_cast<u4>(x.f) == std::bit_cast<u4>(y.f);
    case Value::Kind::Double:
      return std::bit_cast<u8>(x.d) == std::bit_cast<u8>(y.d);
    case Value::Kind::Ref: {
      if ((x.ref == 0) != (y.ref == 0)) return false;
      if (x.ref == 0) return true;
      return ma.object(x.ref).cls == mb.object(y.ref).cls;
    }
  }
  return false;
}

inline EquivReport check_equiv(std::shared_ptr<ClassProvider> provider, ClassNameId cls,
                               MethodSigId sig, const std::vector<std::vector<Value>>& vectors,
                               u8 budget = 1'000'000) {
  EquivReport rep;
  InternPool& pool = *provider->intern_pool();
  for (const auto& args : vectors) {
    ++rep.vectors;
    std::array<ExecMode, 3> modes{ExecMode::Bytecode, ExecMode::Ir, ExecMode::FlatIr};
    std::vector<Outcome> outs;
    std::vector<std::unique_ptr<EvalMachine>> machines;
    std::vector<std::unique_ptr<Hierarchy>> hs;
    for (ExecMode m : modes) {
      hs.push_back(std::make_unique<Hierarchy>(provider));
      machines.push_back(std::make_unique<EvalMachine>(*hs.back(), m, budget));
      outs.push_back(machines.back()->run(cls, sig, args));
    }
    bool budget_hit = false, unsupported = false;
    for (const auto& o : outs) {
      if (o.kind == Outcome::Kind::BudgetExceeded) budget_hit = true;
      if (o.kind == Outcome::Kind::Unsupported) unsupported = true;
    }
    if (unsupported) {
      ++rep.skipped;
      continue;
    }
    if (budget_hit) {
      ++rep.inconclusive;
      continue;
    }
    bool ok = outcomes_equal(*machines[0], outs[0], *machines[1], outs[1]) &&
              outcomes_equal(*machines[0], outs[0], *machines[2], outs[2]);
    if (ok) {
      ++rep.agreed;
    } else {
      std::string why = pool.class_name_of(cls) + "." + pool.method_sig_of(sig).name + ": ";
      auto render = [&](const Outcome& o) {
        switch (o.kind) {
          case Outcome::Kind::Returned:
            if (!o.ret) return std::string("returned void");
            switch (o.ret->kind) {
              case Value::Kind::Int:
                return "returned int " + std::to_string(o.ret->i);
              case Value::Kind::Long:
                return "returned long " + std::to_string(o.ret->l);
              case Value::Kind::Float:
                return "returned float " + std::to_string(o.ret->f);
              case Value::Kind::Double:
                return "returned double " + std::to_string(o.ret->d);
              case Value::Kind::Ref:
                return std::string(o.ret->ref == 0 ? "returned null" : "returned object");
            }
            return std::string("returned ?");
          case Outcome::Kind::Threw:
            return "threw " + pool.class_name_of(*o.exc);
          default:
            return std::string("inconclusive");
        }
      };
      why += "bytecode " + render(outs[0]) + "; ir " + render(outs[1]) + "; flat " +
             render(outs[2]);
      rep.mismatches.push_back(why);
    }
  }
  return rep;
}

}  // namespace jbw
