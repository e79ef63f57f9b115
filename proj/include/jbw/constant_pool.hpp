#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "jbw/common.hpp"

namespace jbw {

enum class CpTag : u1 {
  Unusable = 0,  // slot after a Long/Double entry
  Utf8 = 1,
  Integer = 3,
  Float = 4,
  Long = 5,
  Double = 6,
  Class = 7,
  String = 8,
  Fieldref = 9,
  Methodref = 10,
  InterfaceMethodref = 11,
  NameAndType = 12,
};

struct CpEntry {
  CpTag tag = CpTag::Unusable;
  std::string utf8;       // Utf8 (raw modified-UTF-8 bytes, kept verbatim)
  i4 int_value = 0;       // Integer
  float float_value = 0;  // Float
  i8 long_value = 0;      // Long
  double double_value = 0;  // Double
  u2 index_a = 0;  // Class.name / String.utf8 / ref.class / NameAndType.name
  u2 index_b = 0;  // ref.name_and_type / NameAndType.descriptor
};

// Parsed constant pool, 1-based like the class file. Kept on the ClassFile
// so reference scanning (CRA) can walk it without touching method bodies.
class ConstantPool {
 public:
  explicit ConstantPool(std::vector<CpEntry> entries) : entries_(std::move(entries)) {}

  std::size_t slot_count() const { return entries_.size(); }

  const CpEntry& at(u2 idx, CpTag expected) const {
    const CpEntry& e = raw(idx);
    if (e.tag != expected)
      throw ParseError("constant pool index " + std::to_string(idx) + " has tag " +
                           std::to_string(static_cast<int>(e.tag)) + ", expected " +
                           std::to_string(static_cast<int>(expected)),
                       0);
    return e;
  }

  const CpEntry& raw(u2 idx) const {
    if (idx == 0 || idx >= entries_.size())
      throw ParseError("constant pool index " + std::to_string(idx) + " out of range", 0);
    return entries_[idx];
  }

  const std::string& utf8(u2 idx) const { return at(idx, CpTag::Utf8).utf8; }

  // Internal (slashed) name behind a CONSTANT_Class entry.
  const std::string& class_internal(u2 idx) const {
    return utf8(at(idx, CpTag::Class).index_a);
  }

  std::pair<const std::string*, const std::string*> name_and_type(u2 idx) const {
    const CpEntry& e = at(idx, CpTag::NameAndType);
    return {&utf8(e.index_a), &utf8(e.index_b)};
  }

  template <class F>
  void for_each(F&& f) const {
    for (u2 i = 1; i < entries_.size(); ++i)
      if (entries_[i].tag != CpTag::Unusable) f(i, entries_[i]);
  }

 private:
  std::vector<CpEntry> entries_;
};

// Write-side pool: entries are deduplicated and numbered in first-use order,
// which makes unparse output deterministic.
class CpBuilder {
 public:
  CpBuilder() { entries_.push_back(CpEntry{}); }

  u2 add_utf8(const std::string& s) {
    auto it = utf8_.find(s);
    if (it != utf8_.end()) return it->second;
    CpEntry e;
    e.tag = CpTag::Utf8;
    e.utf8 = s;
    u2 idx = push(e, 1);
    utf8_.emplace(s, idx);
    return idx;
  }

  u2 add_integer(i4 v) { return add_num(CpTag::Integer, static_cast<u4>(v), 1, [&](CpEntry& e) {
                           e.int_value = v;
                         }); }
  u2 add_float(float v) {
    return add_num(CpTag::Float, std::bit_cast<u4>(v), 1, [&](CpEntry& e) { e.float_value = v; });
  }
  u2 add_long(i8 v) {
    return add_num(CpTag::Long, static_cast<u8>(v), 2, [&](CpEntry& e) { e.long_value = v; });
  }
  u2 add_double(double v) {
    return add_num(CpTag::Double, std::bit_cast<u8>(v), 2,
                   [&](CpEntry& e) { e.double_value = v; });
  }

  u2 add_class(const std::string& internal_name) {
    u2 name = add_utf8(internal_name);
    return add_indexed(CpTag::Class, name, 0);
  }
  u2 add_string(const std::string& value) {
    u2 v = add_utf8(value);
    return add_indexed(CpTag::String, v, 0);
  }
  u2 add_name_and_type(const std::string& name, const std::string& desc) {
    return add_indexed(CpTag::NameAndType, add_utf8(name), add_utf8(desc));
  }
  u2 add_fieldref(const std::string& cls, const std::string& name, const std::string& desc) {
    return add_indexed(CpTag::Fieldref, add_class(cls), add_name_and_type(name, desc));
  }
  u2 add_methodref(const std::string& cls, const std::string& name, const std::string& desc) {
    return add_indexed(CpTag::Methodref, add_class(cls), add_name_and_type(name, desc));
  }
  u2 add_interface_methodref(const std::string& cls, const std::string& name,
                             const std::string& desc) {
    return add_indexed(CpTag::InterfaceMethodref, add_class(cls), add_name_and_type(name, desc));
  }

  void serialize(ByteWriter& w) const {
    w.write_u2(static_cast<u2>(entries_.size()));
    for (std::size_t i = 1; i < entries_.size(); ++i) {
      const CpEntry& e = entries_[i];
      if (e.tag == CpTag::Unusable) continue;
      w.write_u1(static_cast<u1>(e.tag));
      switch (e.tag) {
        case CpTag::Utf8:
          if (e.utf8.size() > 0xffff) throw EncodeError("utf8 constant too long");
          w.write_u2(static_cast<u2>(e.utf8.size()));
          w.write_bytes(std::span<const u1>(reinterpret_cast<const u1*>(e.utf8.data()),
                                            e.utf8.size()));
          break;
        case CpTag::Integer:
          w.write_i4(e.int_value);
          break;
        case CpTag::Float:
          w.write_u4(std::bit_cast<u4>(e.float_value));
          break;
        case CpTag::Long:
          w.write_u4(static_cast<u4>(static_cast<u8>(e.long_value) >> 32));
          w.write_u4(static_cast<u4>(static_cast<u8>(e.long_value)));
          break;
        case CpTag::Double: {
          u8 bits = std::bit_cast<u8>(e.double_value);
          w.write_u4(static_cast<u4>(bits >> 32));
          w.write_u4(static_cast<u4>(bits));
          break;
        }
        case CpTag::Class:
        case CpTag::String:
          w.write_u2(e.index_a);
          break;
        default:
          w.write_u2(e.index_a);
          w.write_u2(e.index_b);
          break;
      }
    }
  }

 private:
  template <class F>
  u2 add_num(CpTag tag, u8 bits, int slots, F&& fill) {
    auto key = std::make_pair(tag, bits);
    auto it = nums_.find(key);
    if (it != nums_.end()) return it->second;
    CpEntry e;
    e.tag = tag;
    fill(e);
    u2 idx = push(e, slots);
    nums_.emplace(key, idx);
    return idx;
  }

  u2 add_indexed(CpTag tag, u2 a, u2 b) {
    auto key = std::tuple<CpTag, u2, u2>(tag, a, b);
    auto it = indexed_.find(key);
    if (it != indexed_.end()) return it->second;
    CpEntry e;
    e.tag = tag;
    e.index_a = a;
    e.index_b = b;
    u2 idx = push(e, 1);
    indexed_.emplace(key, idx);
    return idx;
  }

  u2 push(const CpEntry& e, int slots) {
    if (entries_.size() + slots > 0xffff) throw EncodeError("constant pool exceeds 65535 entries");
    u2 idx = static_cast<u2>(entries_.size());
    entries_.push_back(e);
    if (slots == 2) entries_.push_back(CpEntry{});
    return idx;
  }

  std::vector<CpEntry> entries_;
  std::unordered_map<std::string, u2> utf8_;
  std::map<std::pair<CpTag, u8>, u2> nums_;
  std::map<std::tuple<CpTag, u2, u2>, u2> indexed_;
};

}  // namespace jbw
