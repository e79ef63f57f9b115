#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "jbw/ids.hpp"

namespace jbw {

// JVM computational types (what the operand stack and locals distinguish).
enum class JvmBasicType : std::uint8_t { Int, Float, Long, Double };

// jvm_type = jvm_basic_type | object reference.
enum class JvmType : std::uint8_t { Int, Float, Long, Double, Object };

// Source-level primitive types; bool/byte/char/short collapse to Int on the
// stack.
enum class JavaBasicType : std::uint8_t { Bool, Byte, Char, Short, Int, Long, Float, Double };

// Element granularity of the typed array access opcodes (byte and bool
// arrays share one family).
enum class JvmArrayType : std::uint8_t { Int, Short, Char, ByteBool, Long, Float, Double, Object };

inline JvmType to_jvm_type(JavaBasicType t) {
  switch (t) {
    case JavaBasicType::Long:
      return JvmType::Long;
    case JavaBasicType::Float:
      return JvmType::Float;
    case JavaBasicType::Double:
      return JvmType::Double;
    default:
      return JvmType::Int;
  }
}

inline JvmType to_jvm_type(JvmBasicType t) {
  switch (t) {
    case JvmBasicType::Int:
      return JvmType::Int;
    case JvmBasicType::Float:
      return JvmType::Float;
    case JvmBasicType::Long:
      return JvmType::Long;
    case JvmBasicType::Double:
      return JvmType::Double;
  }
  return JvmType::Int;
}

// Long and double occupy two local/stack slots.
inline bool is_category2(JvmType t) { return t == JvmType::Long || t == JvmType::Double; }

class ValueType;

// object_type = class(name) | array(value_type)
class ObjectType {
 public:
  static ObjectType klass(ClassNameId name) {
    ObjectType t;
    t.class_ = name;
    return t;
  }
  static ObjectType array(ValueType element);

  bool is_class() const { return class_.has_value(); }
  bool is_array() const { return !class_.has_value(); }
  ClassNameId class_name() const { return *class_; }
  const ValueType& element() const { return *elem_; }

  // Array depth and the non-array base element; a class type has dims 0.
  std::size_t dims() const;

  friend bool operator==(const ObjectType& a, const ObjectType& b);
  friend bool operator!=(const ObjectType& a, const ObjectType& b) { return !(a == b); }

 private:
  std::optional<ClassNameId> class_;
  std::shared_ptr<const ValueType> elem_;
};

// value_type = java_basic_type | object_type
class ValueType {
 public:
  ValueType(JavaBasicType t) : v_(t) {}
  ValueType(ObjectType t) : v_(std::move(t)) {}

  bool is_basic() const { return std::holds_alternative<JavaBasicType>(v_); }
  bool is_object() const { return !is_basic(); }
  JavaBasicType basic() const { return std::get<JavaBasicType>(v_); }
  const ObjectType& object() const { return std::get<ObjectType>(v_); }

  JvmType computational() const {
    return is_basic() ? to_jvm_type(basic()) : JvmType::Object;
  }

  friend bool operator==(const ValueType& a, const ValueType& b) { return a.v_ == b.v_; }
  friend bool operator!=(const ValueType& a, const ValueType& b) { return !(a == b); }

 private:
  std::variant<JavaBasicType, ObjectType> v_;
};

inline ObjectType ObjectType::array(ValueType element) {
  ObjectType t;
  t.elem_ = std::make_shared<const ValueType>(std::move(element));
  return t;
}

inline std::size_t ObjectType::dims() const {
  if (is_class()) return 0;
  return 1 + (elem_->is_object() ? elem_->object().dims() : 0);
}

inline bool operator==(const ObjectType& a, const ObjectType& b) {
  if (a.is_class() != b.is_class()) return false;
  if (a.is_class()) return a.class_name() == b.class_name();
  return a.element() == b.element();
}

inline JvmArrayType array_access_type(const ValueType& element) {
  if (element.is_object()) return JvmArrayType::Object;
  switch (element.basic()) {
    case JavaBasicType::Bool:
    case JavaBasicType::Byte:
      return JvmArrayType::ByteBool;
    case JavaBasicType::Char:
      return JvmArrayType::Char;
    case JavaBasicType::Short:
      return JvmArrayType::Short;
    case JavaBasicType::Int:
      return JvmArrayType::Int;
    case JavaBasicType::Long:
      return JvmArrayType::Long;
    case JavaBasicType::Float:
      return JvmArrayType::Float;
    case JavaBasicType::Double:
      return JvmArrayType::Double;
  }
  return JvmArrayType::Int;
}

inline JvmType to_jvm_type(JvmArrayType t) {
  switch (t) {
    case JvmArrayType::Long:
      return JvmType::Long;
    case JvmArrayType::Float:
      return JvmType::Float;
    case JvmArrayType::Double:
      return JvmType::Double;
    case JvmArrayType::Object:
      return JvmType::Object;
    default:
      return JvmType::Int;
  }
}

// field: name + value type. The declaring class is not part of the signature
// (one signature is shared by every class declaring a same-shaped field).
struct FieldSig {
  std::string name;
  ValueType type;

  friend bool operator==(const FieldSig& a, const FieldSig& b) {
    return a.name == b.name && a.type == b.type;
  }
};

// method: name + parameter types + return (nullopt = void).
struct MethodSig {
  std::string name;
  std::vector<ValueType> params;
  std::optional<ValueType> ret;

  friend bool operator==(const MethodSig& a, const MethodSig& b) {
    return a.name == b.name && a.params == b.params && a.ret == b.ret;
  }
};

namespace hash_detail {
inline void mix(std::size_t& h, std::size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
}
}  // namespace hash_detail

}  // namespace jbw

template <>
struct std::hash<jbw::ValueType> {
  std::size_t operator()(const jbw::ValueType& t) const noexcept;
};

template <>
struct std::hash<jbw::ObjectType> {
  std::size_t operator()(const jbw::ObjectType& t) const noexcept {
    std::size_t h = 0x517cc1b7;
    if (t.is_class()) {
      jbw::hash_detail::mix(h, t.class_name().value);
    } else {
      jbw::hash_detail::mix(h, 0xa1a1a1a1u);
      jbw::hash_detail::mix(h, std::hash<jbw::ValueType>{}(t.element()));
    }
    return h;
  }
};

inline std::size_t std::hash<jbw::ValueType>::operator()(const jbw::ValueType& t) const noexcept {
  std::size_t h = 0x9b97f4a7;
  if (t.is_basic()) {
    jbw::hash_detail::mix(h, static_cast<std::size_t>(t.basic()));
  } else {
    jbw::hash_detail::mix(h, 0x5bd1e995u);
    jbw::hash_detail::mix(h, std::hash<jbw::ObjectType>{}(t.object()));
  }
  return h;
}

template <>
struct std::hash<jbw::FieldSig> {
  std::size_t operator()(const jbw::FieldSig& s) const noexcept {
    std::size_t h = std::hash<std::string>{}(s.name);
    jbw::hash_detail::mix(h, std::hash<jbw::ValueType>{}(s.type));
    return h;
  }
};

template <>
struct std::hash<jbw::MethodSig> {
  std::size_t operator()(const jbw::MethodSig& s) const noexcept {
    std::size_t h = std::hash<std::string>{}(s.name);
    for (const auto& p : s.params) jbw::hash_detail::mix(h, std::hash<jbw::ValueType>{}(p));
    jbw::hash_detail::mix(h, s.ret ? std::hash<jbw::ValueType>{}(*s.ret) : 0x7fffffffu);
    return h;
  }
};
