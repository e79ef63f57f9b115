#pragma once

#include <algorithm>
#include <atomic>
#include <memory>
#include <mutex>
#include <optional>

#include "jbw/opcodes.hpp"

namespace jbw {

namespace acc {
inline constexpr u2 kPublic = 0x0001;
inline constexpr u2 kPrivate = 0x0002;
inline constexpr u2 kProtected = 0x0004;
inline constexpr u2 kStatic = 0x0008;
inline constexpr u2 kFinal = 0x0010;
inline constexpr u2 kSuper = 0x0020;       // on classes
inline constexpr u2 kSynchronized = 0x0020;  // on methods
inline constexpr u2 kVolatile = 0x0040;
inline constexpr u2 kTransient = 0x0080;
inline constexpr u2 kNative = 0x0100;
inline constexpr u2 kInterface = 0x0200;
inline constexpr u2 kAbstract = 0x0400;
inline constexpr u2 kStrict = 0x0800;
inline constexpr u2 kSynthetic = 0x1000;
inline constexpr u2 kAnnotation = 0x2000;
inline constexpr u2 kEnum = 0x4000;
}  // namespace acc

// Counts method bodies decoded process-wide; the laziness contracts are
// asserted against it.
inline std::atomic<u8>& decode_counter() {
  static std::atomic<u8> counter{0};
  return counter;
}
inline u8 bodies_decoded() { return decode_counter().load(); }
inline void reset_bodies_decoded() { decode_counter().store(0); }

// Attribute kept byte-verbatim (StackMapTable, annotations, debug tables...).
struct AttributeRaw {
  std::string name;
  std::vector<u1> bytes;
  friend bool operator==(const AttributeRaw&, const AttributeRaw&) = default;
};

struct ExceptionHandler {
  u4 start_pc = 0;  // inclusive
  u4 end_pc = 0;    // exclusive
  u4 handler_pc = 0;
  std::optional<ClassNameId> catch_type;  // nullopt = catch everything
  friend bool operator==(const ExceptionHandler&, const ExceptionHandler&) = default;
};

// Code of one non-abstract, non-native method. The raw bytes are kept and
// instructions are decoded once, on first access.
class MethodBody {
 public:
  u2 max_stack = 0;
  u2 max_locals = 0;
  std::vector<u1> code_bytes;
  std::vector<ExceptionHandler> handlers;
  std::vector<AttributeRaw> attributes;  // attributes nested inside Code

  MethodBody() : cell_(std::make_shared<Cell>()) {}

  void bind(std::shared_ptr<const ConstantPool> cp, std::shared_ptr<InternPool> names) {
    cp_ = std::move(cp);
    names_ = std::move(names);
  }

  // Decode happens at most once even under concurrent first access; the
  // counter moves by exactly one per body.
  const std::vector<PcInstr>& instructions() const {
    std::call_once(cell_->once, [this] {
      try {
        cell_->instrs = decode_code(code_bytes, *cp_, *names_);
        decode_counter().fetch_add(1);
        cell_->done = true;
      } catch (...) {
        cell_->error = std::current_exception();
      }
    });
    if (cell_->error) std::rethrow_exception(cell_->error);
    return cell_->instrs;
  }

  bool decoded() const { return cell_->done; }

  // Replaces the instruction list (subroutine inlining, editing). The raw
  // bytes are considered stale from here on.
  void set_instructions(std::vector<PcInstr> instrs, std::vector<ExceptionHandler> new_handlers) {
    auto cell = std::make_shared<Cell>();
    std::call_once(cell->once, [&] {
      cell->instrs = std::move(instrs);
      cell->done = true;
    });
    cell_ = std::move(cell);
    handlers = std::move(new_handlers);
    code_bytes.clear();
  }

 private:
  struct Cell {
    std::once_flag once;
    std::vector<PcInstr> instrs;
    std::exception_ptr error;
    bool done = false;
  };
  std::shared_ptr<Cell> cell_;
  std::shared_ptr<const ConstantPool> cp_;
  std::shared_ptr<InternPool> names_;
};

struct FieldInfo {
  u2 access = 0;
  FieldSigId sig;
  std::optional<ConstVal> constant_value;
  std::vector<AttributeRaw> attributes;
};

struct MethodInfo {
  u2 access = 0;
  MethodSigId sig;
  std::optional<MethodBody> body;  // absent for abstract and native methods
  std::vector<ClassNameId> declared_exceptions;
  std::vector<AttributeRaw> attributes;

  bool is_static() const { return access & acc::kStatic; }
  bool is_abstract() const { return access & acc::kAbstract; }
  bool is_native() const { return access & acc::kNative; }
};

// Typed image of one .class file. Interfaces are distinguished from classes
// and carry the structural constraints the format only implies via flags.
struct ClassFile {
  u2 minor_version = 0;
  u2 major_version = 50;
  u2 access = 0;
  ClassNameId this_class;
  bool is_interface = false;
  std::optional<ClassNameId> super_class;  // absent only for java.lang.Object
  std::vector<ClassNameId> interfaces;
  std::vector<FieldInfo> fields;
  std::vector<MethodInfo> methods;
  std::vector<AttributeRaw> attributes;

  // Retained for reference scanning; bodies decode against it.
  std::shared_ptr<const ConstantPool> pool;
  std::shared_ptr<InternPool> names;

  const MethodInfo* find_method(MethodSigId sig) const {
    for (const auto& m : methods)
      if (m.sig == sig) return &m;
    return nullptr;
  }
  const FieldInfo* find_field(FieldSigId sig) const {
    for (const auto& f : fields)
      if (f.sig == sig) return &f;
    return nullptr;
  }

  // Classes this file references: constant-pool Class entries, descriptor
  // types, super types. Used by the class-reachability analysis; does not
  // decode any method body.
  std::vector<ClassNameId> referenced_class_names() const;
};

namespace classfile_detail {

inline void collect_value_type(const ValueType& t, std::vector<ClassNameId>& out) {
  if (t.is_basic()) return;
  const ObjectType& o = t.object();
  if (o.is_class())
    out.push_back(o.class_name());
  else
    collect_value_type(o.element(), out);
}

}  // namespace classfile_detail

inline std::vector<ClassNameId> ClassFile::referenced_class_names() const {
  std::vector<ClassNameId> out;
  if (super_class) out.push_back(*super_class);
  out.insert(out.end(), interfaces.begin(), interfaces.end());
  pool->for_each([&](u2 idx, const CpEntry& e) {
    try {
      if (e.tag == CpTag::Class) {
        ObjectType t = parse_class_entry(pool->class_internal(idx), *names);
        classfile_detail::collect_value_type(ValueType(t), out);
      } else if (e.tag == CpTag::NameAndType) {
        const std::string& desc = pool->utf8(e.index_b);
        if (!desc.empty() && desc[0] == '(') {
          MethodSig sig = parse_method_descriptor("x", desc, *names);
          for (const auto& p : sig.params) classfile_detail::collect_value_type(p, out);
          if (sig.ret) classfile_detail::collect_value_type(*sig.ret, out);
        } else {
          classfile_detail::collect_value_type(parse_field_descriptor(desc, *names), out);
        }
      }
    } catch (const Error&) {
      // malformed descriptors in unreferenced pool entries do not fail the scan
    }
  });
  for (const auto& f : fields)
    classfile_detail::collect_value_type(names->field_sig_of(f.sig).type, out);
  for (const auto& m : methods) {
    const MethodSig& sig = names->method_sig_of(m.sig);
    for (const auto& p : sig.params) classfile_detail::collect_value_type(p, out);
    if (sig.ret) classfile_detail::collect_value_type(*sig.ret, out);
    out.insert(out.end(), m.declared_exceptions.begin(), m.declared_exceptions.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace jbw
