#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace jbw {

// Persistent big-endian Patricia trees over 32-bit unsigned keys (the dense
// ids handed out by the intern pool). The structure is canonical: two trees
// holding the same keys are shaped identically regardless of insertion
// order, so structural equality is content equality. All operations return
// new versions and never touch their inputs.
namespace patricia_detail {

inline std::uint32_t mask_above(std::uint32_t k, std::uint32_t m) {
  return k & ~(m | (m - 1));
}
inline bool zero_bit(std::uint32_t k, std::uint32_t m) { return (k & m) == 0; }
inline bool match_prefix(std::uint32_t k, std::uint32_t p, std::uint32_t m) {
  return mask_above(k, m) == p;
}
inline std::uint32_t branching_bit(std::uint32_t p0, std::uint32_t p1) {
  return std::bit_floor(p0 ^ p1);
}

template <class V>
struct Node {
  // mask == 0 marks a leaf; prefix then holds the full key.
  std::uint32_t prefix;
  std::uint32_t mask;
  std::size_t count;
  V value{};  // meaningful for leaves only
  std::shared_ptr<const Node> left, right;
};

template <class V>
using NodePtr = std::shared_ptr<const Node<V>>;

template <class V>
NodePtr<V> make_leaf(std::uint32_t key, V value) {
  auto n = std::make_shared<Node<V>>();
  n->prefix = key;
  n->mask = 0;
  n->count = 1;
  n->value = std::move(value);
  return n;
}

template <class V>
NodePtr<V> make_branch(std::uint32_t prefix, std::uint32_t mask, NodePtr<V> l, NodePtr<V> r) {
  if (!l) return r;
  if (!r) return l;
  auto n = std::make_shared<Node<V>>();
  n->prefix = prefix;
  n->mask = mask;
  n->count = l->count + r->count;
  n->left = std::move(l);
  n->right = std::move(r);
  return n;
}

template <class V>
NodePtr<V> join(std::uint32_t p0, NodePtr<V> t0, std::uint32_t p1, NodePtr<V> t1) {
  std::uint32_t m = branching_bit(p0, p1);
  std::uint32_t p = mask_above(p0, m);
  if (zero_bit(p0, m)) return make_branch(p, m, std::move(t0), std::move(t1));
  return make_branch(p, m, std::move(t1), std::move(t0));
}

template <class V>
NodePtr<V> insert(const NodePtr<V>& t, std::uint32_t key, const V& value, bool overwrite) {
  if (!t) return make_leaf(key, value);
  if (t->mask == 0) {
    if (t->prefix == key) return overwrite ? make_leaf(key, value) : t;
    return join(key, make_leaf(key, value), t->prefix, t);
  }
  if (!match_prefix(key, t->prefix, t->mask))
    return join(key, make_leaf(key, value), t->prefix, t);
  if (zero_bit(key, t->mask)) {
    auto l = insert(t->left, key, value, overwrite);
    if (l == t->left) return t;
    return make_branch(t->prefix, t->mask, std::move(l), t->right);
  }
  auto r = insert(t->right, key, value, overwrite);
  if (r == t->right) return t;
  return make_branch(t->prefix, t->mask, t->left, std::move(r));
}

template <class V>
NodePtr<V> remove(const NodePtr<V>& t, std::uint32_t key) {
  if (!t) return t;
  if (t->mask == 0) return t->prefix == key ? nullptr : t;
  if (!match_prefix(key, t->prefix, t->mask)) return t;
  if (zero_bit(key, t->mask)) {
    auto l = remove(t->left, key);
    if (l == t->left) return t;
    return make_branch(t->prefix, t->mask, std::move(l), t->right);
  }
  auto r = remove(t->right, key);
  if (r == t->right) return t;
  return make_branch(t->prefix, t->mask, t->left, std::move(r));
}

template <class V>
const V* find(const NodePtr<V>& t, std::uint32_t key) {
  const Node<V>* n = t.get();
  while (n) {
    if (n->mask == 0) return n->prefix == key ? &n->value : nullptr;
    if (!match_prefix(key, n->prefix, n->mask)) return nullptr;
    n = zero_bit(key, n->mask) ? n->left.get() : n->right.get();
  }
  return nullptr;
}

// Union; values from `s` win on collisions.
template <class V>
NodePtr<V> merge(const NodePtr<V>& s, const NodePtr<V>& t) {
  if (!s) return t;
  if (!t) return s;
  if (s == t) return s;
  if (s->mask == 0) return insert(t, s->prefix, s->value, /*overwrite=*/true);
  if (t->mask == 0) return insert(s, t->prefix, t->value, /*overwrite=*/false);
  if (s->mask == t->mask && s->prefix == t->prefix) {
    auto l = merge(s->left, t->left);
    auto r = merge(s->right, t->right);
    if (l == s->left && r == s->right) return s;
    if (l == t->left && r == t->right) return t;
    return make_branch(s->prefix, s->mask, std::move(l), std::move(r));
  }
  if (s->mask > t->mask && match_prefix(t->prefix, s->prefix, s->mask)) {
    if (zero_bit(t->prefix, s->mask)) {
      auto l = merge(s->left, t);
      if (l == s->left) return s;
      return make_branch(s->prefix, s->mask, std::move(l), s->right);
    }
    auto r = merge(s->right, t);
    if (r == s->right) return s;
    return make_branch(s->prefix, s->mask, s->left, std::move(r));
  }
  if (t->mask > s->mask && match_prefix(s->prefix, t->prefix, t->mask)) {
    if (zero_bit(s->prefix, t->mask)) {
      auto l = merge(s, t->left);
      if (l == t->left) return t;
      return make_branch(t->prefix, t->mask, std::move(l), t->right);
    }
    auto r = merge(s, t->right);
    if (r == t->right) return t;
    return make_branch(t->prefix, t->mask, t->left, std::move(r));
  }
  return join(s->prefix, s, t->prefix, t);
}

// Intersection; values from `s` win.
template <class V>
NodePtr<V> intersect(const NodePtr<V>& s, const NodePtr<V>& t) {
  if (!s || !t) return nullptr;
  if (s == t) return s;
  if (s->mask == 0) return find(t, s->prefix) ? s : nullptr;
  if (t->mask == 0) {
    const V* v = find(s, t->prefix);
    return v ? make_leaf(t->prefix, *v) : nullptr;
  }
  if (s->mask == t->mask && s->prefix == t->prefix) {
    auto l = intersect(s->left, t->left);
    auto r = intersect(s->right, t->right);
    if (l == s->left && r == s->right) return s;
    return make_branch(s->prefix, s->mask, std::move(l), std::move(r));
  }
  if (s->mask > t->mask && match_prefix(t->prefix, s->prefix, s->mask))
    return intersect(zero_bit(t->prefix, s->mask) ? s->left : s->right, t);
  if (t->mask > s->mask && match_prefix(s->prefix, t->prefix, t->mask))
    return intersect(s, zero_bit(s->prefix, t->mask) ? t->left : t->right);
  return nullptr;
}

template <class V>
NodePtr<V> difference(const NodePtr<V>& s, const NodePtr<V>& t) {
  if (!s || !t) return s;
  if (s == t) return nullptr;
  if (s->mask == 0) return find(t, s->prefix) ? nullptr : s;
  if (t->mask == 0) return remove(s, t->prefix);
  if (s->mask == t->mask && s->prefix == t->prefix) {
    auto l = difference(s->left, t->left);
    auto r = difference(s->right, t->right);
    if (l == s->left && r == s->right) return s;
    return make_branch(s->prefix, s->mask, std::move(l), std::move(r));
  }
  if (s->mask > t->mask && match_prefix(t->prefix, s->prefix, s->mask)) {
    if (zero_bit(t->prefix, s->mask)) {
      auto l = difference(s->left, t);
      if (l == s->left) return s;
      return make_branch(s->prefix, s->mask, std::move(l), s->right);
    }
    auto r = difference(s->right, t);
    if (r == s->right) return s;
    return make_branch(s->prefix, s->mask, s->left, std::move(r));
  }
  if (t->mask > s->mask && match_prefix(s->prefix, t->prefix, t->mask))
    return difference(s, zero_bit(s->prefix, t->mask) ? t->left : t->right);
  return s;
}

template <class V>
bool equal(const NodePtr<V>& s, const NodePtr<V>& t) {
  if (s == t) return true;
  if (!s || !t) return false;
  if (s->mask != t->mask || s->prefix != t->prefix || s->count != t->count) return false;
  if (s->mask == 0) return s->value == t->value;
  return equal(s->left, t->left) && equal(s->right, t->right);
}

template <class V, class F>
void for_each(const NodePtr<V>& t, F&& f) {
  if (!t) return;
  if (t->mask == 0) {
    f(t->prefix, t->value);
    return;
  }
  for_each(t->left, f);
  for_each(t->right, f);
}

}  // namespace patricia_detail

template <class V>
class PatriciaMap {
 public:
  PatriciaMap() = default;

  PatriciaMap insert(std::uint32_t key, V value) const {
    return PatriciaMap(patricia_detail::insert(root_, key, value, /*overwrite=*/true));
  }
  PatriciaMap remove(std::uint32_t key) const {
    return PatriciaMap(patricia_detail::remove(root_, key));
  }
  // nullptr when the key is absent; present keys always yield a pointer,
  // whatever the stored value.
  const V* find(std::uint32_t key) const { return patricia_detail::find(root_, key); }
  bool contains(std::uint32_t key) const { return find(key) != nullptr; }

  std::size_t size() const { return root_ ? root_->count : 0; }
  bool empty() const { return !root_; }

  template <class F>
  void for_each(F&& f) const {
    patricia_detail::for_each(root_, std::forward<F>(f));
  }
  std::vector<std::uint32_t> keys() const {
    std::vector<std::uint32_t> out;
    out.reserve(size());
    for_each([&](std::uint32_t k, const V&) { out.push_back(k); });
    return out;
  }

  friend PatriciaMap map_union(const PatriciaMap& a, const PatriciaMap& b) {
    return PatriciaMap(patricia_detail::merge(a.root_, b.root_));
  }
  friend bool operator==(const PatriciaMap& a, const PatriciaMap& b) {
    return patricia_detail::equal(a.root_, b.root_);
  }
  friend bool operator!=(const PatriciaMap& a, const PatriciaMap& b) { return !(a == b); }

 private:
  explicit PatriciaMap(patricia_detail::NodePtr<V> root) : root_(std::move(root)) {}
  patricia_detail::NodePtr<V> root_;

  template <class>
  friend class PatriciaMap;
  friend class PatriciaSet;
};

class PatriciaSet {
 public:
  PatriciaSet() = default;

  PatriciaSet insert(std::uint32_t key) const {
    return PatriciaSet(patricia_detail::insert(root_, key, Unit{}, false));
  }
  PatriciaSet remove(std::uint32_t key) const {
    return PatriciaSet(patricia_detail::remove(root_, key));
  }
  bool contains(std::uint32_t key) const { return patricia_detail::find(root_, key) != nullptr; }

  std::size_t size() const { return root_ ? root_->count : 0; }
  bool empty() const { return !root_; }

  template <class F>
  void for_each(F&& f) const {
    patricia_detail::for_each(root_, [&](std::uint32_t k, const Unit&) { f(k); });
  }
  std::vector<std::uint32_t> to_vector() const {
    std::vector<std::uint32_t> out;
    out.reserve(size());
    for_each([&](std::uint32_t k) { out.push_back(k); });
    return out;
  }

  bool is_subset_of(const PatriciaSet& other) const {
    return patricia_detail::difference(root_, other.root_) == nullptr;
  }

  friend PatriciaSet set_union(const PatriciaSet& a, const PatriciaSet& b) {
    return PatriciaSet(patricia_detail::merge(a.root_, b.root_));
  }
  friend PatriciaSet set_inter(const PatriciaSet& a, const PatriciaSet& b) {
    return PatriciaSet(patricia_detail::intersect(a.root_, b.root_));
  }
  friend PatriciaSet set_diff(const PatriciaSet& a, const PatriciaSet& b) {
    return PatriciaSet(patricia_detail::difference(a.root_, b.root_));
  }
  friend bool operator==(const PatriciaSet& a, const PatriciaSet& b) {
    return patricia_detail::equal(a.root_, b.root_);
  }
  friend bool operator!=(const PatriciaSet& a, const PatriciaSet& b) { return !(a == b); }

 private:
  struct Unit {
    friend bool operator==(Unit, Unit) { return true; }
  };
  explicit PatriciaSet(patricia_detail::NodePtr<Unit> root) : root_(std::move(root)) {}
  patricia_detail::NodePtr<Unit> root_;
};

}  // namespace jbw
