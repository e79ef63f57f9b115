#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "jbw/patricia.hpp"

using namespace jbw;

TEST_CASE("set basics", "[patricia]") {
  PatriciaSet s;
  CHECK(s.empty());
  auto s1 = s.insert(5);
  auto s2 = s1.insert(9).insert(5);
  CHECK(!s.contains(5));  // persistence: the old version is untouched
  CHECK(s1.contains(5));
  CHECK(s2.size() == 2);
  CHECK(s2.remove(9).size() == 1);
  CHECK(s2.remove(123) == s2);
}

TEST_CASE("empty set is the identity of union", "[patricia]") {
  PatriciaSet s = PatriciaSet().insert(1).insert(2).insert(3);
  CHECK(set_union(PatriciaSet(), s) == s);
  CHECK(set_union(s, PatriciaSet()) == s);
}

TEST_CASE("small union enumeration", "[patricia]") {
  auto a = PatriciaSet().insert(1).insert(2);
  auto b = PatriciaSet().insert(2).insert(3);
  auto u = set_union(a, b);
  CHECK(u.size() == 3);
  CHECK(u.contains(1));
  CHECK(u.contains(2));
  CHECK(u.contains(3));
  CHECK(set_inter(a, b).to_vector() == std::vector<std::uint32_t>{2});
  CHECK(set_diff(a, b).to_vector() == std::vector<std::uint32_t>{1});
}

TEST_CASE("canonical form: insertion order does not matter", "[patricia][property]") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::uint32_t> key(0, 5000);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::uint32_t> keys;
    for (int i = 0; i < 200; ++i) keys.push_back(key(rng));
    PatriciaSet fwd, shuffled;
    for (auto k : keys) fwd = fwd.insert(k);
    std::shuffle(keys.begin(), keys.end(), rng);
    for (auto k : keys) shuffled = shuffled.insert(k);
    REQUIRE(fwd == shuffled);
    // iteration is sorted ascending
    auto v = fwd.to_vector();
    REQUIRE(std::is_sorted(v.begin(), v.end()));
  }
}

TEST_CASE("persistence survives later mutation", "[patricia]") {
  PatriciaSet a = PatriciaSet().insert(1).insert(2);
  PatriciaSet b = PatriciaSet().insert(3);
  PatriciaSet u = set_union(a, b);
  PatriciaSet u2 = u.remove(2).insert(77);
  CHECK(a.contains(2));
  CHECK(!a.contains(77));
  CHECK(u.contains(2));
  CHECK(!u.contains(77));
  CHECK(u2.contains(77));
}

TEST_CASE("100k random set ops match a reference implementation", "[patricia][property]") {
  std::mt19937 rng(1234);
  std::uniform_int_distribution<std::uint32_t> key(0, 400);
  std::uniform_int_distribution<int> op(0, 5);

  PatriciaSet a, b;
  std::set<std::uint32_t> ra, rb;
  auto check_equal = [](const PatriciaSet& s, const std::set<std::uint32_t>& r) {
    REQUIRE(s.size() == r.size());
    auto v = s.to_vector();
    REQUIRE(std::equal(v.begin(), v.end(), r.begin(), r.end()));
  };

  for (int i = 0; i < 100000; ++i) {
    std::uint32_t k = key(rng);
    switch (op(rng)) {
      case 0:
        a = a.insert(k), ra.insert(k);
        break;
      case 1:
        a = a.remove(k), ra.erase(k);
        break;
      case 2:
        b = b.insert(k), rb.insert(k);
        break;
      case 3: {
        auto u = set_union(a, b);
        std::set<std::uint32_t> ru;
        std::set_union(ra.begin(), ra.end(), rb.begin(), rb.end(),
                       std::inserter(ru, ru.end()));
        a = u, ra = ru;
        break;
      }
      case 4: {
        auto x = set_inter(a, b);
        std::set<std::uint32_t> rx;
        std::set_intersection(ra.begin(), ra.end(), rb.begin(), rb.end(),
                              std::inserter(rx, rx.end()));
        REQUIRE(x.size() == rx.size());
        break;
      }
      case 5: {
        auto x = set_diff(a, b);
        std::set<std::uint32_t> rx;
        std::set_difference(ra.begin(), ra.end(), rb.begin(), rb.end(),
                            std::inserter(rx, rx.end()));
        REQUIRE(x.size() == rx.size());
        break;
      }
    }
    if (i % 4096 == 0) {
      check_equal(a, ra);
      check_equal(b, rb);
    }
    REQUIRE(a.contains(k) == (ra.count(k) != 0));
  }
  check_equal(a, ra);
  check_equal(b, rb);
}

TEST_CASE("map insert/lookup/remove match a reference map", "[patricia][property]") {
  std::mt19937 rng(99);
  std::uniform_int_distribution<std::uint32_t> key(0, 300);
  std::uniform_int_distribution<int> val(0, 1 << 20);
  std::uniform_int_distribution<int> op(0, 2);

  PatriciaMap<int> m;
  std::map<std::uint32_t, int> rm;
  for (int i = 0; i < 100000; ++i) {
    std::uint32_t k = key(rng);
    switch (op(rng)) {
      case 0: {
        int v = val(rng);
        m = m.insert(k, v);
        rm[k] = v;
        break;
      }
      case 1:
        m = m.remove(k);
        rm.erase(k);
        break;
      case 2: {
        const int* found = m.find(k);
        auto it = rm.find(k);
        REQUIRE((found != nullptr) == (it != rm.end()));
        if (found) REQUIRE(*found == it->second);
        break;
      }
    }
    REQUIRE(m.size() == rm.size());
  }
}

TEST_CASE("map last-writer-wins", "[patricia]") {
  PatriciaMap<int> m;
  auto m1 = m.insert(4, 10);
  auto m2 = m1.insert(4, 20);
  CHECK(m1.size() == 1);
  CHECK(m2.size() == 1);
  CHECK(*m1.find(4) == 10);
  CHECK(*m2.find(4) == 20);
  CHECK(m2.find(5) == nullptr);
}
