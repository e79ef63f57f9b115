#pragma once

#include <cstdint>
#include <functional>

namespace jbw {

// Which intern table an id belongs to. Ids are only comparable within a kind;
// the strong typedefs below enforce that at compile time.
enum class InternKind : std::uint8_t { ClassName, FieldSig, MethodSig };

template <InternKind K>
struct InternedId {
  std::uint32_t value = 0;

  static constexpr InternKind kind = K;

  friend bool operator==(InternedId a, InternedId b) { return a.value == b.value; }
  friend bool operator!=(InternedId a, InternedId b) { return a.value != b.value; }
  friend bool operator<(InternedId a, InternedId b) { return a.value < b.value; }
};

using ClassNameId = InternedId<InternKind::ClassName>;
using FieldSigId = InternedId<InternKind::FieldSig>;
using MethodSigId = InternedId<InternKind::MethodSig>;

}  // namespace jbw

template <jbw::InternKind K>
struct std::hash<jbw::InternedId<K>> {
  std::size_t operator()(jbw::InternedId<K> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
