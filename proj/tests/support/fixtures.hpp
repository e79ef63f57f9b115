#pragma once

// Shared bytecode fixtures: a minimal java.lang stub set, the two-class
// division/allocation example method used across the IR tests, and helpers.
// Everything is assembled with the independent test-side class builder.

#include <memory>

#include "jbw/classpath.hpp"
#include "support/classbuilder.hpp"

namespace testsupport {

// Object, Throwable, the runtime exception family, and the array marker
// interfaces. Enough hierarchy for checks, casts and catch matching.
inline void add_java_lang(jbw::MemoryClasspath& cp) {
  auto cls = [&](const std::string& name, const std::string& super) {
    ClassBuilder b(name, super);
    b.add_default_init(super);
    cp.add(b.build());
  };
  {
    ClassBuilder b("java/lang/Object", "");
    auto& c = b.add_method("<init>", "()V", 0x0001, 0, 1);
    c.op(0xb1);
    cp.add(b.build());
  }
  {
    ClassBuilder b("java/lang/Cloneable", "java/lang/Object", 0x0601);
    cp.add(b.build());
  }
  {
    ClassBuilder b("java/io/Serializable", "java/lang/Object", 0x0601);
    cp.add(b.build());
  }
  cls("java/lang/String", "java/lang/Object");
  cls("java/lang/Class", "java/lang/Object");
  cls("java/lang/Throwable", "java/lang/Object");
  cls("java/lang/Error", "java/lang/Throwable");
  cls("java/lang/Exception", "java/lang/Throwable");
  cls("java/lang/RuntimeException", "java/lang/Exception");
  cls("java/lang/ArithmeticException", "java/lang/RuntimeException");
  cls("java/lang/NullPointerException", "java/lang/RuntimeException");
  cls("java/lang/IndexOutOfBoundsException", "java/lang/RuntimeException");
  cls("java/lang/ArrayIndexOutOfBoundsException", "java/lang/IndexOutOfBoundsException");
  cls("java/lang/NegativeArraySizeException", "java/lang/RuntimeException");
  cls("java/lang/ArrayStoreException", "java/lang/RuntimeException");
  cls("java/lang/ClassCastException", "java/lang/RuntimeException");
}

// class A { A() {} }
// class B { B(int, A) {} }
// class C { B f(int x, int y) { return (x==0) ? new B(x/y, new A()) : null; } }
//
// C.f's bytecode matches the layout discussed alongside the IR design:
//   0: iload_1   1: ifne 24   4: new B   7: dup   8: iload_1   9: iload_2
//  10: idiv     11: new A    14: dup    15: invokespecial A.<init>
//  18: invokespecial B.<init>(int,A)    21: goto 25    24: aconst_null
//  25: areturn
inline void add_div_alloc_example(jbw::MemoryClasspath& cp) {
  {
    ClassBuilder b("A", "java/lang/Object");
    b.add_default_init("java/lang/Object");
    cp.add(b.build());
  }
  {
    ClassBuilder b("B", "java/lang/Object");
    b.add_default_init("java/lang/Object");
    auto& c = b.add_method("<init>", "(ILA;)V", 0x0001, 1, 3);
    c.aload(0);
    c.invokespecial("java/lang/Object", "<init>", "()V");
    c.op(0xb1);
    cp.add(b.build());
  }
  {
    ClassBuilder b("C", "java/lang/Object");
    b.add_default_init("java/lang/Object");
    auto& c = b.add_method("f", "(II)LB;", 0x0001, 4, 3);
    c.iload(1);
    c.jump(0x9a, "null_side");  // ifne
    c.newobj("B");
    c.op(0x59);  // dup
    c.iload(1);
    c.iload(2);
    c.op(0x6c);  // idiv
    c.newobj("A");
    c.op(0x59);  // dup
    c.invokespecial("A", "<init>", "()V");
    c.invokespecial("B", "<init>", "(ILA;)V");
    c.jump(0xa7, "ret");  // goto
    c.label("null_side");
    c.op(0x01);  // aconst_null
    c.label("ret");
    c.op(0xb0);  // areturn
    cp.add(b.build());
  }
}

inline std::shared_ptr<jbw::MemoryClasspath> base_classpath(
    std::shared_ptr<jbw::InternPool> pool) {
  auto cp = std::make_shared<jbw::MemoryClasspath>(pool);
  add_java_lang(*cp);
  return cp;
}

inline const jbw::MethodInfo& method_of(const jbw::ClassFile& cf, jbw::InternPool& pool,
                                        const std::string& name) {
  for (const auto& m : cf.methods)
    if (pool.method_sig_of(m.sig).name == name) return m;
  throw std::runtime_error("fixture method not found: " + name);
}

}  // namespace testsupport
