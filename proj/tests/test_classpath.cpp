#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "jbw/classpath.hpp"
#include "support/classbuilder.hpp"

using namespace jbw;
using testsupport::ClassBuilder;

namespace {

std::vector<u1> tiny_class(const std::string& internal, int marker) {
  ClassBuilder b(internal, "java/lang/Object");
  b.add_default_init("java/lang/Object");
  auto& c = b.add_method("marker", "()I", 0x0009, 1, 0);
  c.iconst(marker);
  c.op(0xac);
  auto bytes = b.build();
  return std::vector<u1>(bytes.begin(), bytes.end());
}

struct TempDir {
  std::filesystem::path path;
  TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("jbw_test_" + tag + "_" +
                                                     std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

void write_file(const std::filesystem::path& p, const std::vector<u1>& bytes) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

}  // namespace

TEST_CASE("zip round-trip with stored and deflate entries", "[zip]") {
  ZipWriter w;
  std::vector<u1> small = {1, 2, 3};
  std::vector<u1> big(5000, 7);
  w.add("a/b.bin", small, false);
  w.add("c.bin", big, true);
  auto zipped = w.finish();
  ZipReader r(zipped);
  CHECK(r.has("a/b.bin"));
  CHECK(r.read("a/b.bin") == small);
  CHECK(r.read("c.bin") == big);
  CHECK_THROWS_AS(r.read("missing"), ClasspathError);
}

TEST_CASE("corrupt zip central directory is reported", "[zip]") {
  ZipWriter w;
  w.add("x", std::vector<u1>{1}, false);
  auto zipped = w.finish();
  zipped[zipped.size() - 6] = 0xff;  // clobber central directory offset
  CHECK_THROWS_AS(ZipReader(std::move(zipped)), ClasspathError);
}

TEST_CASE("jar classpath loads lazily and by internal path", "[classpath][laziness]") {
  TempDir dir("jar");
  ZipWriter w;
  w.add("p/A.class", tiny_class("p/A", 1), true);
  w.add("p/B.class", tiny_class("p/B", 2), true);
  w.add("p/q/C.class", tiny_class("p/q/C", 3), true);
  w.add("notaclass.txt", std::vector<u1>{42}, false);
  auto jar_path = dir.path / "fixture.jar";
  write_file(jar_path, w.finish());

  auto pool = std::make_shared<InternPool>();
  Classpath cp({jar_path.string()}, pool);

  auto names = cp.class_names();
  CHECK(names == std::vector<std::string>{"p.A", "p.B", "p.q.C"});

  reset_bodies_decoded();
  const ClassFile* a = cp.find(pool->class_name("p.A"));
  REQUIRE(a != nullptr);
  CHECK(bodies_decoded() == 0);  // parsing never decodes bodies
  CHECK(cp.find(pool->class_name("p.Missing")) == nullptr);
  // same pointer on re-query (parse once)
  CHECK(cp.find(pool->class_name("p.A")) == a);
}

TEST_CASE("directory roots and shadowing", "[classpath]") {
  TempDir dir("shadow");
  auto root1 = dir.path / "r1";
  auto root2 = dir.path / "r2";
  write_file(root1 / "X.class", tiny_class("X", 10));
  write_file(root2 / "X.class", tiny_class("X", 20));
  write_file(root2 / "Y.class", tiny_class("Y", 30));

  auto pool = std::make_shared<InternPool>();
  Classpath cp({root1.string(), root2.string()}, pool);
  const ClassFile* x = cp.find(pool->class_name("X"));
  REQUIRE(x != nullptr);
  // the first root wins
  const auto& instrs = x->methods[1].body->instructions();
  auto* cv = instr_as<op::Const>(instrs[0].instr);
  REQUIRE(cv != nullptr);
  CHECK(std::get<i4>(cv->value.v) == 10);
  CHECK(cp.find(pool->class_name("Y")) != nullptr);
}

TEST_CASE("unreadable root errors", "[classpath]") {
  auto pool = std::make_shared<InternPool>();
  CHECK_THROWS_AS(Classpath({"/nonexistent/path/zzz"}, pool), ClasspathError);
}

TEST_CASE("listing a 1000-class jar decodes nothing", "[classpath][laziness]") {
  TempDir dir("big");
  ZipWriter w;
  for (int i = 0; i < 1000; ++i) {
    std::string name = "gen/C" + std::to_string(i);
    w.add(name + ".class", tiny_class(name, i), i % 4 == 0);
  }
  auto jar_path = dir.path / "big.jar";
  write_file(jar_path, w.finish());

  auto pool = std::make_shared<InternPool>();
  reset_bodies_decoded();
  Classpath cp({jar_path.string()}, pool);
  auto names = cp.class_names();
  CHECK(names.size() == 1000);
  CHECK(bodies_decoded() == 0);
}
