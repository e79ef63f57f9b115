#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>
#include <thread>

#include "jbw/interning.hpp"

using namespace jbw;

namespace {

std::string random_class_name(std::mt19937& rng) {
  static const char* segs[] = {"com", "org", "net", "io", "app", "util", "core",
                               "alpha", "beta", "gamma", "delta", "extra"};
  std::uniform_int_distribution<int> nseg(1, 4);
  std::uniform_int_distribution<int> seg(0, 11);
  std::uniform_int_distribution<int> suffix(0, 99999);
  std::string name;
  int n = nseg(rng);
  for (int i = 0; i < n; ++i) {
    name += segs[seg(rng)];
    name += '.';
  }
  name += "C" + std::to_string(suffix(rng));
  return name;
}

}  // namespace

TEST_CASE("interning the same value twice returns the same id", "[interning]") {
  InternPool pool;
  auto a = pool.class_name("java.lang.Object");
  auto b = pool.class_name("java.lang.Object");
  CHECK(a == b);
}

TEST_CASE("ids are dense starting at zero", "[interning]") {
  InternPool pool;
  auto a = pool.class_name("A");
  auto b = pool.class_name("B");
  CHECK(a.value == 0);
  CHECK(b.value == 1);
  CHECK(pool.class_name_count() == 2);
}

TEST_CASE("malformed names are rejected", "[interning]") {
  InternPool pool;
  CHECK_THROWS_AS(pool.class_name(""), ValidationError);
  CHECK_THROWS_AS(pool.class_name(".x"), ValidationError);
  CHECK_THROWS_AS(pool.class_name("x."), ValidationError);
  CHECK_THROWS_AS(pool.class_name("a..b"), ValidationError);
  CHECK_THROWS_AS(pool.class_name("a/b"), ValidationError);
  CHECK_THROWS_AS(pool.field_sig(FieldSig{"", JavaBasicType::Int}), ValidationError);
}

TEST_CASE("resolve round-trips and rejects out-of-range ids", "[interning]") {
  InternPool pool;
  auto id = pool.class_name("A");
  CHECK(pool.class_name_of(id) == "A");
  CHECK_THROWS_AS(pool.class_name_of(ClassNameId{1}), ValidationError);
}

TEST_CASE("10k random names re-intern to the same ids", "[interning][property]") {
  InternPool pool;
  std::mt19937 rng(42);
  std::map<std::string, std::uint32_t> reference;
  std::vector<std::string> order;
  while (reference.size() < 10000) {
    std::string name = random_class_name(rng);
    auto id = pool.class_name(name);
    auto it = reference.find(name);
    if (it != reference.end()) {
      REQUIRE(it->second == id.value);
    } else {
      reference.emplace(name, id.value);
      order.push_back(name);
    }
  }
  CHECK(pool.class_name_count() == 10000);
  // Re-intern everything; the id assignment must not move.
  for (const auto& name : order) REQUIRE(pool.class_name(name).value == reference.at(name));
  // id equality <=> structural equality over random pairs.
  std::uniform_int_distribution<std::size_t> pick(0, order.size() - 1);
  for (int i = 0; i < 20000; ++i) {
    const auto& x = order[pick(rng)];
    const auto& y = order[pick(rng)];
    REQUIRE((pool.class_name(x) == pool.class_name(y)) == (x == y));
  }
}

TEST_CASE("signature round-trip over random signatures", "[interning][property]") {
  InternPool pool;
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> basic(0, 7);
  std::uniform_int_distribution<int> nparams(0, 4);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int i = 0; i < 1000; ++i) {
    MethodSig sig;
    sig.name = "m" + std::to_string(i % 257);
    int n = nparams(rng);
    for (int p = 0; p < n; ++p) {
      if (coin(rng))
        sig.params.push_back(static_cast<JavaBasicType>(basic(rng)));
      else
        sig.params.push_back(ObjectType::klass(pool.class_name(random_class_name(rng))));
    }
    if (coin(rng)) sig.ret = ValueType(static_cast<JavaBasicType>(basic(rng)));
    auto id = pool.method_sig(sig);
    REQUIRE(pool.method_sig_of(id) == sig);
  }
}

TEST_CASE("concurrent interning preserves the invariants", "[interning][concurrency]") {
  InternPool pool;
  constexpr int kThreads = 8;
  constexpr int kNames = 500;
  std::vector<std::vector<std::uint32_t>> seen(kThreads, std::vector<std::uint32_t>(kNames));
  std::vector<std::thread> workers;
  for (int t = 0; t < kThreads; ++t) {
    workers.emplace_back([&pool, &seen, t] {
      for (int i = 0; i < kNames; ++i)
        seen[t][i] = pool.class_name("shared.C" + std::to_string(i)).value;
    });
  }
  for (auto& w : workers) w.join();
  CHECK(pool.class_name_count() == kNames);
  for (int i = 0; i < kNames; ++i)
    for (int t = 1; t < kThreads; ++t) REQUIRE(seen[t][i] == seen[0][i]);
  // Density: the ids are a permutation of 0..kNames-1.
  std::set<std::uint32_t> ids(seen[0].begin(), seen[0].end());
  CHECK(ids.size() == kNames);
  CHECK(*ids.rbegin() == kNames - 1);
}
