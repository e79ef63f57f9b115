#pragma once

#include "jbw/classfile.hpp"

namespace jbw {

inline constexpr u4 kClassMagic = 0xCAFEBABE;
inline constexpr u2 kMaxSupportedMajor = 50;  // Java 6
inline constexpr u2 kMinSupportedMajor = 45;

namespace parser_detail {

inline std::vector<CpEntry> parse_pool(ByteReader& r) {
  u2 count = r.read_u2();
  std::vector<CpEntry> entries(count);
  for (u2 i = 1; i < count; ++i) {
    std::size_t at = r.offset();
    u1 tag = r.read_u1();
    CpEntry& e = entries[i];
    switch (tag) {
      case 1: {
        e.tag = CpTag::Utf8;
        u2 len = r.read_u2();
        auto bytes = r.read_bytes(len);
        e.utf8.assign(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        break;
      }
      case 3:
        e.tag = CpTag::Integer;
        e.int_value = r.read_i4();
        break;
      case 4:
        e.tag = CpTag::Float;
        e.float_value = std::bit_cast<float>(r.read_u4());
        break;
      case 5: {
        e.tag = CpTag::Long;
        u8 hi = r.read_u4();
        e.long_value = static_cast<i8>((hi << 32) | r.read_u4());
        ++i;  // second slot stays Unusable
        break;
      }
      case 6: {
        e.tag = CpTag::Double;
        u8 hi = r.read_u4();
        u8 bits = (hi << 32) | r.read_u4();
        e.double_value = std::bit_cast<double>(bits);
        ++i;
        break;
      }
      case 7:
        e.tag = CpTag::Class;
        e.index_a = r.read_u2();
        break;
      case 8:
        e.tag = CpTag::String;
        e.index_a = r.read_u2();
        break;
      case 9:
      case 10:
      case 11:
        e.tag = static_cast<CpTag>(tag);
        e.index_a = r.read_u2();
        e.index_b = r.read_u2();
        break;
      case 12:
        e.tag = CpTag::NameAndType;
        e.index_a = r.read_u2();
        e.index_b = r.read_u2();
        break;
      case 15:
      case 16:
      case 18:
        throw ParseError("method-handle/invokedynamic constant (tag " + std::to_string(tag) +
                             ") is past the supported Java 6 format",
                         at);
      default:
        throw ParseError("unknown constant pool tag " + std::to_string(tag), at);
    }
  }
  return entries;
}

inline std::vector<AttributeRaw> parse_attribute_list(ByteReader& r, const ConstantPool& cp) {
  u2 n = r.read_u2();
  std::vector<AttributeRaw> out;
  out.reserve(n);
  for (u2 i = 0; i < n; ++i) {
    AttributeRaw a;
    a.name = cp.utf8(r.read_u2());
    u4 len = r.read_u4();
    auto bytes = r.read_bytes(len);
    a.bytes.assign(bytes.begin(), bytes.end());
    out.push_back(std::move(a));
  }
  return out;
}

inline ClassNameId intern_class(const ConstantPool& cp, u2 idx, InternPool& pool,
                                std::size_t at) {
  ObjectType t = parse_class_entry(cp.class_internal(idx), pool);
  if (!t.is_class()) throw ParseError("expected a plain class name, found an array type", at);
  return t.class_name();
}

inline ConstVal parse_constant_value(const ConstantPool& cp, u2 idx) {
  const CpEntry& e = cp.raw(idx);
  switch (e.tag) {
    case CpTag::Integer:
      return ConstVal{e.int_value};
    case CpTag::Long:
      return ConstVal{e.long_value};
    case CpTag::Float:
      return ConstVal{e.float_value};
    case CpTag::Double:
      return ConstVal{e.double_value};
    case CpTag::String:
      return ConstVal{cp.utf8(e.index_a)};
    default:
      throw ParseError("ConstantValue refers to tag " +
                           std::to_string(static_cast<int>(e.tag)),
                       0);
  }
}

}  // namespace parser_detail

// Parses a full .class byte image. Names and signatures are interned into
// `names`; method bodies stay raw until first instruction access.
inline ClassFile parse_class(std::span<const u1> bytes, std::shared_ptr<InternPool> names) {
  using namespace parser_detail;
  ByteReader r(bytes);

  if (r.read_u4() != kClassMagic) throw ParseError("bad magic", 0);
  ClassFile cf;
  cf.names = names;
  cf.minor_version = r.read_u2();
  cf.major_version = r.read_u2();
  if (cf.major_version > kMaxSupportedMajor)
    throw ParseError("unsupported major version " + std::to_string(cf.major_version) +
                         " (Java 6 / major 50 is the ceiling)",
                     4);
  if (cf.major_version < kMinSupportedMajor)
    throw ParseError("implausible major version " + std::to_string(cf.major_version), 4);

  auto cp = std::make_shared<const ConstantPool>(parse_pool(r));
  cf.pool = cp;

  cf.access = r.read_u2();
  cf.is_interface = cf.access & acc::kInterface;
  std::size_t this_at = r.offset();
  cf.this_class = intern_class(*cp, r.read_u2(), *names, this_at);

  std::size_t super_at = r.offset();
  u2 super_idx = r.read_u2();
  if (super_idx == 0) {
    if (names->class_name_of(cf.this_class) != "java.lang.Object")
      throw ParseError("only java.lang.Object may omit a super class", super_at);
    cf.super_class = std::nullopt;
  } else {
    cf.super_class = intern_class(*cp, super_idx, *names, super_at);
  }

  u2 n_ifaces = r.read_u2();
  for (u2 i = 0; i < n_ifaces; ++i)
    cf.interfaces.push_back(intern_class(*cp, r.read_u2(), *names, r.offset()));

  if (cf.is_interface) {
    if (!(cf.access & acc::kAbstract))
      throw ParseError("interface without ACC_ABSTRACT", this_at);
    if (!cf.super_class || names->class_name_of(*cf.super_class) != "java.lang.Object")
      throw ParseError("interface super class must be java.lang.Object", super_at);
  }

  u2 n_fields = r.read_u2();
  for (u2 i = 0; i < n_fields; ++i) {
    FieldInfo f;
    f.access = r.read_u2();
    const std::string& name = cp->utf8(r.read_u2());
    const std::string& desc = cp->utf8(r.read_u2());
    f.sig = names->field_sig(FieldSig{name, parse_field_descriptor(desc, *names)});
    if (cf.is_interface && !(f.access & acc::kStatic))
      throw ParseError("interface field '" + name + "' must be static", r.offset());
    for (auto& attr : parse_attribute_list(r, *cp)) {
      if (attr.name == "ConstantValue") {
        ByteReader ar(attr.bytes);
        f.constant_value = parse_constant_value(*cp, ar.read_u2());
      } else {
        f.attributes.push_back(std::move(attr));
      }
    }
    cf.fields.push_back(std::move(f));
  }

  u2 n_methods = r.read_u2();
  for (u2 i = 0; i < n_methods; ++i) {
    MethodInfo m;
    std::size_t m_at = r.offset();
    m.access = r.read_u2();
    const std::string& name = cp->utf8(r.read_u2());
    const std::string& desc = cp->utf8(r.read_u2());
    m.sig = names->method_sig(parse_method_descriptor(name, desc, *names));
    if (cf.is_interface && name != "<clinit>" && !(m.access & acc::kAbstract))
      throw ParseError("interface method '" + name + "' must be abstract", m_at);
    for (auto& attr : parse_attribute_list(r, *cp)) {
      if (attr.name == "Code") {
        ByteReader ar(attr.bytes);
        MethodBody body;
        body.max_stack = ar.read_u2();
        body.max_locals = ar.read_u2();
        u4 code_len = ar.read_u4();
        if (code_len == 0 || code_len > 0xffff)
          throw ParseError("code length " + std::to_string(code_len) + " out of range", m_at);
        auto code = ar.read_bytes(code_len);
        body.code_bytes.assign(code.begin(), code.end());
        u2 n_handlers = ar.read_u2();
        for (u2 h = 0; h < n_handlers; ++h) {
          ExceptionHandler eh;
          eh.start_pc = ar.read_u2();
          eh.end_pc = ar.read_u2();
          eh.handler_pc = ar.read_u2();
          u2 ct = ar.read_u2();
          if (ct != 0) eh.catch_type = intern_class(*cp, ct, *names, m_at);
          body.handlers.push_back(eh);
        }
        body.attributes = parse_attribute_list(ar, *cp);
        body.bind(cp, names);
        m.body = std::move(body);
      } else if (attr.name == "Exceptions") {
        ByteReader ar(attr.bytes);
        u2 n = ar.read_u2();
        for (u2 e = 0; e < n; ++e)
          m.declared_exceptions.push_back(intern_class(*cp, ar.read_u2(), *names, m_at));
      } else {
        m.attributes.push_back(std::move(attr));
      }
    }
    bool expects_body = !(m.access & (acc::kAbstract | acc::kNative));
    if (expects_body && !m.body)
      throw ParseError("method '" + name + "' lacks a Code attribute", m_at);
    if (!expects_body && m.body)
      throw ParseError("abstract/native method '" + name + "' carries code", m_at);
    cf.methods.push_back(std::move(m));
  }

  cf.attributes = parse_attribute_list(r, *cp);
  if (!r.at_end()) throw ParseError("trailing bytes after class structure", r.offset());
  return cf;
}

}  // namespace jbw
