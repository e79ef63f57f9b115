#pragma once

#include "jbw/class_parser.hpp"
#include "jbw/code_encode.hpp"

namespace jbw {

// Unparses a ClassFile back to bytes. The constant pool is rebuilt
// deduplicated in first-use order rather than preserving original indices;
// method code is re-encoded against the new pool (widths preserved, so pcs
// do not move). Opaque attributes are emitted byte-verbatim.
inline std::vector<u1> unparse_class(const ClassFile& cf) {
  const InternPool& names = *cf.names;
  CpBuilder cp;

  // Pool order is pinned by touching the header entries first.
  u2 this_idx = cp.add_class(internal_name(names.class_name_of(cf.this_class)));
  u2 super_idx = 0;
  if (cf.super_class) super_idx = cp.add_class(internal_name(names.class_name_of(*cf.super_class)));
  std::vector<u2> iface_idx;
  for (auto i : cf.interfaces) iface_idx.push_back(cp.add_class(internal_name(names.class_name_of(i))));

  struct PendingAttr {
    u2 name_idx;
    std::vector<u1> bytes;
  };

  auto encode_raw_attrs = [&](const std::vector<AttributeRaw>& attrs,
                              std::vector<PendingAttr>& out) {
    for (const auto& a : attrs) out.push_back({cp.add_utf8(a.name), a.bytes});
  };

  // Field and method payloads are produced before the pool is serialized, so
  // every constant they touch lands in the builder first.
  struct MemberOut {
    u2 access, name_idx, desc_idx;
    std::vector<PendingAttr> attrs;
  };

  std::vector<MemberOut> fields_out;
  for (const auto& f : cf.fields) {
    const FieldSig& sig = names.field_sig_of(f.sig);
    MemberOut mo;
    mo.access = f.access;
    mo.name_idx = cp.add_utf8(sig.name);
    mo.desc_idx = cp.add_utf8(print_field_descriptor(sig.type, names));
    if (f.constant_value) {
      u2 v;
      if (auto* i = std::get_if<i4>(&f.constant_value->v))
        v = cp.add_integer(*i);
      else if (auto* l = std::get_if<i8>(&f.constant_value->v))
        v = cp.add_long(*l);
      else if (auto* fl = std::get_if<float>(&f.constant_value->v))
        v = cp.add_float(*fl);
      else if (auto* d = std::get_if<double>(&f.constant_value->v))
        v = cp.add_double(*d);
      else if (auto* s = std::get_if<std::string>(&f.constant_value->v))
        v = cp.add_string(*s);
      else
        throw EncodeError("ConstantValue cannot hold a class constant");
      ByteWriter aw;
      aw.write_u2(v);
      fields_out.push_back(std::move(mo));
      fields_out.back().attrs.push_back({cp.add_utf8("ConstantValue"), aw.take()});
      encode_raw_attrs(f.attributes, fields_out.back().attrs);
      continue;
    }
    encode_raw_attrs(f.attributes, mo.attrs);
    fields_out.push_back(std::move(mo));
  }

  std::vector<MemberOut> methods_out;
  for (const auto& m : cf.methods) {
    const MethodSig& sig = names.method_sig_of(m.sig);
    MemberOut mo;
    mo.access = m.access;
    mo.name_idx = cp.add_utf8(sig.name);
    mo.desc_idx = cp.add_utf8(print_method_descriptor(sig, names));
    if (m.body) {
      const MethodBody& body = *m.body;
      std::vector<u1> code = encode_code(body.instructions(), cp, names);
      ByteWriter aw;
      aw.write_u2(body.max_stack);
      aw.write_u2(body.max_locals);
      aw.write_u4(static_cast<u4>(code.size()));
      aw.write_bytes(code);
      aw.write_u2(static_cast<u2>(body.handlers.size()));
      for (const auto& h : body.handlers) {
        aw.write_u2(static_cast<u2>(h.start_pc));
        aw.write_u2(static_cast<u2>(h.end_pc));
        aw.write_u2(static_cast<u2>(h.handler_pc));
        aw.write_u2(h.catch_type
                        ? cp.add_class(internal_name(names.class_name_of(*h.catch_type)))
                        : 0);
      }
      std::vector<PendingAttr> nested;
      encode_raw_attrs(body.attributes, nested);
      aw.write_u2(static_cast<u2>(nested.size()));
      for (const auto& a : nested) {
        aw.write_u2(a.name_idx);
        aw.write_u4(static_cast<u4>(a.bytes.size()));
        aw.write_bytes(a.bytes);
      }
      mo.attrs.push_back({cp.add_utf8("Code"), aw.take()});
    }
    if (!m.declared_exceptions.empty()) {
      ByteWriter aw;
      aw.write_u2(static_cast<u2>(m.declared_exceptions.size()));
      for (auto e : m.declared_exceptions)
        aw.write_u2(cp.add_class(internal_name(names.class_name_of(e))));
      mo.attrs.push_back({cp.add_utf8("Exceptions"), aw.take()});
    }
    encode_raw_attrs(m.attributes, mo.attrs);
    methods_out.push_back(std::move(mo));
  }

  std::vector<PendingAttr> class_attrs;
  encode_raw_attrs(cf.attributes, class_attrs);

  ByteWriter w;
  w.write_u4(kClassMagic);
  w.write_u2(cf.minor_version);
  w.write_u2(cf.major_version);
  cp.serialize(w);
  w.write_u2(cf.access);
  w.write_u2(this_idx);
  w.write_u2(super_idx);
  w.write_u2(static_cast<u2>(iface_idx.size()));
  for (u2 i : iface_idx) w.write_u2(i);

  auto write_members = [&](const std::vector<MemberOut>& members) {
    w.write_u2(static_cast<u2>(members.size()));
    for (const auto& m : members) {
      w.write_u2(m.access);
      w.write_u2(m.name_idx);
      w.write_u2(m.desc_idx);
      w.write_u2(static_cast<u2>(m.attrs.size()));
      for (const auto& a : m.attrs) {
        w.write_u2(a.name_idx);
        w.write_u4(static_cast<u4>(a.bytes.size()));
        w.write_bytes(a.bytes);
      }
    }
  };
  write_members(fields_out);
  write_members(methods_out);
  w.write_u2(static_cast<u2>(class_attrs.size()));
  for (const auto& a : class_attrs) {
    w.write_u2(a.name_idx);
    w.write_u4(static_cast<u4>(a.bytes.size()));
    w.write_bytes(a.bytes);
  }
  return w.take();
}

// Structural equality of two parsed classes: everything the typed model
// holds, including decoded instruction lists (forced here) and opaque
// attribute bytes. Constant pool layout is deliberately not compared.
inline bool structurally_equal(const ClassFile& a, const ClassFile& b) {
  if (a.minor_version != b.minor_version || a.major_version != b.major_version ||
      a.access != b.access || a.this_class != b.this_class ||
      a.is_interface != b.is_interface || a.super_class != b.super_class ||
      a.interfaces != b.interfaces || a.attributes != b.attributes)
    return false;
  if (a.fields.size() != b.fields.size() || a.methods.size() != b.methods.size()) return false;
  for (std::size_t i = 0; i < a.fields.size(); ++i) {
    const FieldInfo &fa = a.fields[i], &fb = b.fields[i];
    if (fa.access != fb.access || fa.sig != fb.sig || fa.constant_value != fb.constant_value ||
        fa.attributes != fb.attributes)
      return false;
  }
  for (std::size_t i = 0; i < a.methods.size(); ++i) {
    const MethodInfo &ma = a.methods[i], &mb = b.methods[i];
    if (ma.access != mb.access || ma.sig != mb.sig ||
        ma.declared_exceptions != mb.declared_exceptions || ma.attributes != mb.attributes)
      return false;
    if (ma.body.has_value() != mb.body.has_value()) return false;
    if (ma.body) {
      const MethodBody &ba = *ma.body, &bb = *mb.body;
      if (ba.max_stack != bb.max_stack || ba.max_locals != bb.max_locals ||
          ba.handlers != bb.handlers || ba.attributes != bb.attributes)
        return false;
      if (ba.instructions() != bb.instructions()) return false;
    }
  }
  return true;
}

}  // namespace jbw
