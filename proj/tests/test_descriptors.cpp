#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "jbw/descriptors.hpp"

using namespace jbw;

TEST_CASE("primitive descriptors parse and print", "[types]") {
  InternPool pool;
  CHECK(parse_field_descriptor("I", pool) == ValueType(JavaBasicType::Int));
  CHECK(parse_field_descriptor("Z", pool) == ValueType(JavaBasicType::Bool));
  CHECK(print_field_descriptor(JavaBasicType::Double, pool) == "D");
}

TEST_CASE("class and array descriptors round-trip", "[types]") {
  InternPool pool;
  auto t = parse_field_descriptor("[[Ljava/lang/String;", pool);
  REQUIRE(t.is_object());
  CHECK(t.object().dims() == 2);
  CHECK(print_field_descriptor(t, pool) == "[[Ljava/lang/String;");
  CHECK(java_type_name(t, pool) == "java.lang.String[][]");
}

TEST_CASE("method descriptors round-trip", "[types]") {
  InternPool pool;
  auto sig = parse_method_descriptor("f", "(IJ[Lfoo/Bar;)V", pool);
  CHECK(sig.params.size() == 3);
  CHECK(!sig.ret.has_value());
  CHECK(print_method_descriptor(sig, pool) == "(IJ[Lfoo/Bar;)V");
  auto sig2 = parse_method_descriptor("g", "()Ljava/lang/Object;", pool);
  CHECK(sig2.params.empty());
  CHECK(print_method_descriptor(sig2, pool) == "()Ljava/lang/Object;");
}

TEST_CASE("malformed descriptors are rejected", "[types]") {
  InternPool pool;
  CHECK_THROWS_AS(parse_field_descriptor("", pool), ParseError);
  CHECK_THROWS_AS(parse_field_descriptor("Q", pool), ParseError);
  CHECK_THROWS_AS(parse_field_descriptor("Ljava/lang/Object", pool), ParseError);
  CHECK_THROWS_AS(parse_field_descriptor("II", pool), ParseError);
  CHECK_THROWS_AS(parse_method_descriptor("f", "(I", pool), ParseError);
  CHECK_THROWS_AS(parse_method_descriptor("f", "(I)VV", pool), ParseError);
}

TEST_CASE("basic type embeddings collapse to computational types", "[types]") {
  // bool/byte/char/short/int all live in the Int computational type; the
  // wide and floating types map to themselves.
  CHECK(to_jvm_type(JavaBasicType::Bool) == JvmType::Int);
  CHECK(to_jvm_type(JavaBasicType::Byte) == JvmType::Int);
  CHECK(to_jvm_type(JavaBasicType::Char) == JvmType::Int);
  CHECK(to_jvm_type(JavaBasicType::Short) == JvmType::Int);
  CHECK(to_jvm_type(JavaBasicType::Int) == JvmType::Int);
  CHECK(to_jvm_type(JavaBasicType::Long) == JvmType::Long);
  CHECK(to_jvm_type(JavaBasicType::Float) == JvmType::Float);
  CHECK(to_jvm_type(JavaBasicType::Double) == JvmType::Double);
  CHECK(ValueType(ObjectType::klass(ClassNameId{0})).computational() == JvmType::Object);
}

TEST_CASE("random descriptor round-trip", "[types][property]") {
  InternPool pool;
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> kind(0, 9);
  std::uniform_int_distribution<int> basic(0, 7);

  std::function<ValueType(int)> gen = [&](int depth) -> ValueType {
    int k = kind(rng);
    if (depth > 3 || k < 6) return static_cast<JavaBasicType>(basic(rng));
    if (k < 8) return ObjectType::klass(pool.class_name("p.C" + std::to_string(k)));
    return ObjectType::array(gen(depth + 1));
  };
  for (int i = 0; i < 2000; ++i) {
    ValueType t = gen(0);
    auto printed = print_field_descriptor(t, pool);
    REQUIRE(parse_field_descriptor(printed, pool) == t);
  }
}
