#pragma once

#include <deque>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "jbw/common.hpp"
#include "jbw/ids.hpp"
#include "jbw/jtypes.hpp"

namespace jbw {

// One hash-consing table. Ids are dense: after n distinct interns the ids
// are exactly 0..n-1, so they double as indexes into Patricia-keyed
// structures. Thread-safe; values live in a deque so resolved references
// stay valid while the table grows.
template <class T, InternKind K>
class Interner {
 public:
  using Id = InternedId<K>;

  Id intern(const T& value) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = index_.find(value);
    if (it != index_.end()) return Id{it->second};
    std::uint32_t id = static_cast<std::uint32_t>(values_.size());
    values_.push_back(value);
    index_.emplace(value, id);
    return Id{id};
  }

  const T& resolve(Id id) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (id.value >= values_.size())
      throw ValidationError("unknown interned id " + std::to_string(id.value));
    return values_[id.value];
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return values_.size();
  }

 private:
  mutable std::mutex mu_;
  std::unordered_map<T, std::uint32_t> index_;
  std::deque<T> values_;
};

// Global canonicalization of names and signatures, one table per kind.
// Identity of ids within a kind coincides with structural equality of the
// underlying values. Interning is permanent for the lifetime of the pool.
class InternPool {
 public:
  // Class names are stored in dotted ("java.lang.Object") form.
  ClassNameId class_name(std::string_view dotted) {
    validate_class_name(dotted);
    return class_names_.intern(std::string(dotted));
  }
  const std::string& class_name_of(ClassNameId id) const { return class_names_.resolve(id); }

  FieldSigId field_sig(const FieldSig& sig) {
    if (sig.name.empty()) throw ValidationError("empty field name");
    return field_sigs_.intern(sig);
  }
  const FieldSig& field_sig_of(FieldSigId id) const { return field_sigs_.resolve(id); }

  MethodSigId method_sig(const MethodSig& sig) {
    if (sig.name.empty()) throw ValidationError("empty method name");
    return method_sigs_.intern(sig);
  }
  const MethodSig& method_sig_of(MethodSigId id) const { return method_sigs_.resolve(id); }

  std::size_t class_name_count() const { return class_names_.size(); }
  std::size_t field_sig_count() const { return field_sigs_.size(); }
  std::size_t method_sig_count() const { return method_sigs_.size(); }

  static void validate_class_name(std::string_view dotted) {
    if (dotted.empty()) throw ValidationError("empty class name");
    bool segment_empty = true;
    for (char c : dotted) {
      if (c == '.') {
        if (segment_empty) throw ValidationError("empty package segment in class name");
        segment_empty = true;
        continue;
      }
      if (c == '/' || c == ';' || c == '[')
        throw ValidationError(std::string("illegal character '") + c + "' in class name");
      segment_empty = false;
    }
    if (segment_empty) throw ValidationError("class name ends with '.'");
  }

 private:
  Interner<std::string, InternKind::ClassName> class_names_;
  Interner<FieldSig, InternKind::FieldSig> field_sigs_;
  Interner<MethodSig, InternKind::MethodSig> method_sigs_;
};

// Internal ("java/lang/Object") to dotted form and back.
inline std::string dotted_name(std::string_view internal) {
  std::string s(internal);
  for (char& c : s)
    if (c == '/') c = '.';
  return s;
}

inline std::string internal_name(std::string_view dotted) {
  std::string s(dotted);
  for (char& c : s)
    if (c == '.') c = '/';
  return s;
}

}  // namespace jbw
