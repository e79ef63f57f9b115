#pragma once

#include <string>
#include <string_view>

#include "jbw/common.hpp"
#include "jbw/interning.hpp"
#include "jbw/jtypes.hpp"

namespace jbw {

// Field/method descriptor syntax per the class file format: B C D F I J S Z,
// L<internal name>; and [<component>. Parsing interns class names into the
// pool; printing resolves them back.
namespace descriptor_detail {

inline ValueType parse_value(std::string_view s, std::size_t& pos, InternPool& pool) {
  if (pos >= s.size()) throw ParseError("truncated descriptor '" + std::string(s) + "'", pos);
  char c = s[pos++];
  switch (c) {
    case 'B':
      return JavaBasicType::Byte;
    case 'C':
      return JavaBasicType::Char;
    case 'D':
      return JavaBasicType::Double;
    case 'F':
      return JavaBasicType::Float;
    case 'I':
      return JavaBasicType::Int;
    case 'J':
      return JavaBasicType::Long;
    case 'S':
      return JavaBasicType::Short;
    case 'Z':
      return JavaBasicType::Bool;
    case 'L': {
      std::size_t end = s.find(';', pos);
      if (end == std::string_view::npos)
        throw ParseError("unterminated class descriptor '" + std::string(s) + "'", pos);
      std::string name = dotted_name(s.substr(pos, end - pos));
      pos = end + 1;
      return ObjectType::klass(pool.class_name(name));
    }
    case '[':
      return ObjectType::array(parse_value(s, pos, pool));
    default:
      throw ParseError(std::string("bad descriptor tag '") + c + "' in '" + std::string(s) + "'",
                       pos - 1);
  }
}

inline void print_value(const ValueType& t, const InternPool& pool, std::string& out) {
  if (t.is_basic()) {
    switch (t.basic()) {
      case JavaBasicType::Byte:
        out += 'B';
        return;
      case JavaBasicType::Char:
        out += 'C';
        return;
      case JavaBasicType::Double:
        out += 'D';
        return;
      case JavaBasicType::Float:
        out += 'F';
        return;
      case JavaBasicType::Int:
        out += 'I';
        return;
      case JavaBasicType::Long:
        out += 'J';
        return;
      case JavaBasicType::Short:
        out += 'S';
        return;
      case JavaBasicType::Bool:
        out += 'Z';
        return;
    }
  }
  const ObjectType& o = t.object();
  if (o.is_array()) {
    out += '[';
    print_value(o.element(), pool, out);
  } else {
    out += 'L';
    out += internal_name(pool.class_name_of(o.class_name()));
    out += ';';
  }
}

}  // namespace descriptor_detail

inline ValueType parse_field_descriptor(std::string_view s, InternPool& pool) {
  std::size_t pos = 0;
  ValueType t = descriptor_detail::parse_value(s, pos, pool);
  if (pos != s.size())
    throw ParseError("trailing characters in field descriptor '" + std::string(s) + "'", pos);
  return t;
}

inline std::string print_field_descriptor(const ValueType& t, const InternPool& pool) {
  std::string out;
  descriptor_detail::print_value(t, pool, out);
  return out;
}

// Parses "(IZLjava/lang/String;)V" into parameter and return types; the name
// is supplied separately (it comes from a different constant-pool entry).
inline MethodSig parse_method_descriptor(std::string_view name, std::string_view desc,
                                         InternPool& pool) {
  MethodSig sig;
  sig.name = std::string(name);
  if (desc.empty() || desc[0] != '(')
    throw ParseError("method descriptor must start with '(': '" + std::string(desc) + "'", 0);
  std::size_t pos = 1;
  while (pos < desc.size() && desc[pos] != ')')
    sig.params.push_back(descriptor_detail::parse_value(desc, pos, pool));
  if (pos >= desc.size())
    throw ParseError("unterminated parameter list in '" + std::string(desc) + "'", pos);
  ++pos;  // ')'
  if (pos < desc.size() && desc[pos] == 'V') {
    if (pos + 1 != desc.size())
      throw ParseError("trailing characters in method descriptor '" + std::string(desc) + "'",
                       pos);
    sig.ret = std::nullopt;
  } else {
    sig.ret = descriptor_detail::parse_value(desc, pos, pool);
    if (pos != desc.size())
      throw ParseError("trailing characters in method descriptor '" + std::string(desc) + "'",
                       pos);
  }
  return sig;
}

inline std::string print_method_descriptor(const MethodSig& sig, const InternPool& pool) {
  std::string out = "(";
  for (const auto& p : sig.params) descriptor_detail::print_value(p, pool, out);
  out += ')';
  if (sig.ret)
    descriptor_detail::print_value(*sig.ret, pool, out);
  else
    out += 'V';
  return out;
}

// A CONSTANT_Class entry may name a plain class ("java/lang/Object") or an
// array type ("[[I", "[Ljava/lang/String;").
inline ObjectType parse_class_entry(std::string_view internal, InternPool& pool) {
  if (!internal.empty() && internal[0] == '[') {
    std::size_t pos = 0;
    ValueType t = descriptor_detail::parse_value(internal, pos, pool);
    if (pos != internal.size() || !t.is_object() || !t.object().is_array())
      throw ParseError("bad array class entry '" + std::string(internal) + "'", 0);
    return t.object();
  }
  return ObjectType::klass(pool.class_name(dotted_name(internal)));
}

inline std::string print_class_entry(const ObjectType& t, const InternPool& pool) {
  if (t.is_class()) return internal_name(pool.class_name_of(t.class_name()));
  std::string out;
  descriptor_detail::print_value(ValueType(t), pool, out);
  return out;
}

// Human-readable type name: "int", "java.lang.Object", "int[][]".
inline std::string java_type_name(const ValueType& t, const InternPool& pool) {
  if (t.is_basic()) {
    switch (t.basic()) {
      case JavaBasicType::Bool:
        return "boolean";
      case JavaBasicType::Byte:
        return "byte";
      case JavaBasicType::Char:
        return "char";
      case JavaBasicType::Short:
        return "short";
      case JavaBasicType::Int:
        return "int";
      case JavaBasicType::Long:
        return "long";
      case JavaBasicType::Float:
        return "float";
      case JavaBasicType::Double:
        return "double";
    }
  }
  const ObjectType& o = t.object();
  if (o.is_array()) return java_type_name(o.element(), pool) + "[]";
  return pool.class_name_of(o.class_name());
}

inline std::string java_type_name(const ObjectType& t, const InternPool& pool) {
  return java_type_name(ValueType(t), pool);
}

}  // namespace jbw
