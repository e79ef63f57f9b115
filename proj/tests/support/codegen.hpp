#pragma once

// Deterministic random-program generator for the differential corpus. Emits
// verifiable bytecode by construction: statements keep the operand stack
// empty, scratch locals are pre-initialized, loops have constant trip
// counts, and generated calls only go to lower-numbered methods.

#include <random>

#include "jbw/classpath.hpp"
#include "support/classbuilder.hpp"

namespace testsupport {

class MethodGen {
 public:
  MethodGen(CodeAsm& c, std::mt19937& rng, const std::string& self_class, int self_index,
            int methods_per_class)
      : c_(c), rng_(rng), cls_(self_class), index_(self_index), per_class_(methods_per_class) {}

  // static int m<i>(int a, int b, int c); locals 3..6 are scratch ints,
  // local 7 holds an int[], local 8 a helper object, locals 9/10 a long.
  void generate() {
    for (int s = 3; s <= 6; ++s) {
      c_.iconst(pick(0, 9));
      c_.istore(s);
    }
    c_.iconst(pick(1, 6));
    c_.newarray_prim(10);  // int[]
    c_.astore(7);
    if (chance(2, 3)) {
      const char* helper = chance(1, 2) ? "gen/H2" : "gen/H";
      c_.newobj(helper);
      c_.op(0x59);
      c_.invokespecial(helper, "<init>", "()V");
    } else {
      c_.op(0x01);  // null helper: downstream calls go through a null check
    }
    c_.astore(8);
    c_.lconst(pick(0, 5));
    c_.lstore(9);

    int stmts = pick(3, 9);
    for (int s = 0; s < stmts; ++s) stmt(0);
    expr_int(0);
    c_.op(0xac);  // ireturn
  }

 private:
  bool chance(int num, int den) { return pick(1, den) <= num; }
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::string fresh(const char* base) { return std::string(base) + std::to_string(label_ctr_++); }

  void stmt(int depth) {
    int choice = pick(0, depth > 2 ? 6 : 12);
    switch (choice) {
      case 0:
      case 1: {  // scratch := expr
        expr_int(depth);
        c_.istore(pick(3, 6));
        break;
      }
      case 2: {  // if/else
        std::string els = fresh("els"), end = fresh("end");
        expr_int(depth + 1);
        c_.jump(static_cast<byte>(0x99 + pick(0, 5)), els);
        stmt(depth + 1);
        c_.jump(0xa7, end);
        c_.label(els);
        if (chance(1, 2)) stmt(depth + 1);
        c_.label(end);
        break;
      }
      case 3: {  // array write, sometimes out of bounds
        c_.aload(7);
        expr_int(depth + 1);
        if (chance(4, 5)) {
          c_.iconst(7);
          c_.op(0x7e);  // & 7 keeps it near range (array len 1..6: can still fault)
        }
        expr_int(depth + 1);
        c_.op(0x4f);  // iastore
        break;
      }
      case 4: {  // static field write
        expr_int(depth + 1);
        c_.putstatic("gen/G0", "shared", "I");
        break;
      }
      case 5: {  // long scratch update
        c_.lload(9);
        expr_long(depth + 1);
        c_.op(pick(0, 1) ? 0x61 : 0x65);  // ladd/lsub
        c_.lstore(9);
        break;
      }
      case 6: {  // instance field write through the helper (may be null)
        c_.aload(8);
        expr_int(depth + 1);
        c_.putfield("gen/H", "x", "I");
        break;
      }
      case 7: {  // bounded loop
        std::string head = fresh("head"), exit = fresh("exit");
        int ctr = pick(3, 6);
        c_.iconst(0);
        c_.istore(ctr);
        c_.label(head);
        c_.iload(ctr);
        c_.iconst(pick(1, 5));
        c_.jump(0xa2, exit);  // if_icmpge
        stmt(depth + 1);
        c_.iinc(ctr, 1);
        c_.jump(0xa7, head);
        c_.label(exit);
        break;
      }
      case 8: {  // try/catch
        std::string ts = fresh("ts"), te = fresh("te"), h = fresh("h"), end = fresh("end");
        c_.label(ts);
        stmt(depth + 1);
        stmt(depth + 1);
        c_.label(te);
        c_.jump(0xa7, end);
        c_.label(h);
        c_.op(0x57);  // drop the exception
        if (chance(1, 2)) stmt(depth + 1);
        c_.label(end);
        static const char* kinds[] = {"java/lang/ArithmeticException",
                                      "java/lang/RuntimeException", ""};
        c_.handler(ts, te, h, kinds[pick(0, 2)]);
        break;
      }
      case 9: {  // conditional throw
        std::string skip = fresh("skip");
        expr_int(depth + 1);
        c_.iconst(pick(0, 6));
        c_.jump(0xa0, skip);  // if_icmpne -> skip
        c_.newobj("java/lang/RuntimeException");
        c_.op(0x59);
        c_.invokespecial("java/lang/RuntimeException", "<init>", "()V");
        c_.op(0xbf);  // athrow
        c_.label(skip);
        break;
      }
      case 10: {  // switch
        std::string d = fresh("d"), c1 = fresh("c1"), c2 = fresh("c2"), end = fresh("end");
        expr_int(depth + 1);
        if (chance(1, 2)) {
          c_.tableswitch(d, pick(-1, 1), {c1, c2});
        } else {
          c_.lookupswitch(d, {{pick(-2, 2), c1}, {pick(3, 9), c2}});
        }
        c_.label(c1);
        stmt(depth + 1);
        c_.jump(0xa7, end);
        c_.label(c2);
        stmt(depth + 1);
        c_.jump(0xa7, end);
        c_.label(d);
        if (chance(1, 2)) stmt(depth + 1);
        c_.label(end);
        break;
      }
      case 11: {  // virtual call through the helper (NPE when null)
        c_.aload(8);
        expr_int(depth + 1);
        c_.invokevirtual("gen/H", "v", "(I)I");
        c_.istore(pick(3, 6));
        break;
      }
      default: {  // monitor pair on the array object
        c_.aload(7);
        c_.op(0xc2);
        c_.aload(7);
        c_.op(0xc3);
        break;
      }
    }
  }

  void expr_int(int depth) {
    int choice = pick(0, depth > 3 ? 4 : 14);
    switch (choice) {
      case 0:
        c_.iconst(pick(-40, 40));
        break;
      case 1:
      case 2:
        c_.iload(pick(0, 2));  // a parameter
        break;
      case 3:
      case 4:
        c_.iload(pick(3, 6));  // scratch
        break;
      case 5: {  // arithmetic, division included
        expr_int(depth + 1);
        expr_int(depth + 1);
        static const byte ops[] = {0x60, 0x64, 0x68, 0x6c, 0x70, 0x78,
                                   0x7a, 0x7c, 0x7e, 0x80, 0x82};
        c_.op(ops[pick(0, 10)]);
        break;
      }
      case 6: {  // negate / convs
        expr_int(depth + 1);
        if (chance(1, 2)) {
          c_.op(0x74);
        } else {
          c_.op(static_cast<byte>(0x91 + pick(0, 2)));  // i2b/i2c/i2s
        }
        break;
      }
      case 7: {  // long route: (int)(expr + long)
        expr_long(depth + 1);
        c_.op(0x88);  // l2i
        break;
      }
      case 8: {  // lcmp as an int
        expr_long(depth + 1);
        expr_long(depth + 1);
        c_.op(0x94);
        break;
      }
      case 9: {  // array read (can fault)
        c_.aload(7);
        expr_int(depth + 1);
        if (chance(3, 4)) {
          c_.iconst(3);
          c_.op(0x7e);
        }
        c_.op(0x2e);  // iaload
        break;
      }
      case 10:
        c_.getstatic("gen/G0", "shared", "I");
        break;
      case 11: {  // call a lower-numbered static method (acyclic)
        int global = class_of_self_ * per_class_ + index_;
        if (global == 0) {
          c_.iconst(pick(0, 5));
          break;
        }
        int callee = pick(0, global - 1);
        int ccls = callee / per_class_, cm = callee % per_class_;
        for (int k = 0; k < 3; ++k) expr_int(depth + 1);
        c_.invokestatic("gen/G" + std::to_string(ccls), "m" + std::to_string(cm), "(III)I");
        break;
      }
      case 12: {  // instance field read via helper
        c_.aload(8);
        c_.getfield("gen/H", "x", "I");
        break;
      }
      case 13: {  // instanceof
        c_.aload(8);
        c_.instanceof_("gen/H2");
        break;
      }
      default: {  // float/double round-trip
        expr_int(depth + 1);
        if (chance(1, 2)) {
          c_.op(0x86);  // i2f
          c_.fconst(2.0f);
          c_.op(pick(0, 1) ? 0x62 : 0x6a);  // fadd/fmul
          c_.op(0x8b);                      // f2i
        } else {
          c_.op(0x87);  // i2d
          c_.dconst(1.0);
          c_.op(0x63);  // dadd
          c_.op(0x8e);  // d2i
        }
        break;
      }
    }
  }

  void expr_long(int depth) {
    int choice = pick(0, depth > 3 ? 2 : 5);
    switch (choice) {
      case 0:
        c_.lconst(pick(-9, 9));
        break;
      case 1:
        c_.lload(9);
        break;
      case 2: {
        expr_int(depth + 1);
        c_.op(0x85);  // i2l
        break;
      }
      case 3: {
        expr_long(depth + 1);
        expr_long(depth + 1);
        static const byte ops[] = {0x61, 0x65, 0x69, 0x6d, 0x71, 0x7f, 0x81, 0x83};
        c_.op(ops[pick(0, 7)]);
        break;
      }
      default: {
        expr_long(depth + 1);
        c_.op(0x75);  // lneg
        break;
      }
    }
  }

 public:
  int class_of_self_ = 0;

 private:
  CodeAsm& c_;
  std::mt19937& rng_;
  std::string cls_;
  int index_;
  int per_class_;
  int label_ctr_ = 0;
};

// Helper classes used by the generated code.
inline void add_gen_helpers(jbw::MemoryClasspath& cp) {
  {
    ClassBuilder b("gen/H", "java/lang/Object");
    b.add_field("x", "I", 0x0001);
    b.add_default_init("java/lang/Object");
    auto& v = b.add_method("v", "(I)I", 0x0001, 3, 2);
    v.iload(1);
    v.iconst(1);
    v.op(0x60);
    v.op(0xac);
    cp.add(b.build());
  }
  {
    ClassBuilder b("gen/H2", "gen/H");
    b.add_default_init("gen/H");
    auto& v = b.add_method("v", "(I)I", 0x0001, 3, 2);
    v.iload(1);
    v.iconst(2);
    v.op(0x68);
    v.op(0xac);
    cp.add(b.build());
  }
}

// classes gen/G0..G<n-1>, each with `methods` static int m<j>(int,int,int).
inline void add_generated_corpus(jbw::MemoryClasspath& cp, int classes, int methods,
                                 unsigned seed) {
  add_gen_helpers(cp);
  for (int ci = 0; ci < classes; ++ci) {
    ClassBuilder b("gen/G" + std::to_string(ci), "java/lang/Object");
    if (ci == 0) b.add_field("shared", "I", 0x0009);
    b.add_default_init("java/lang/Object");
    for (int mi = 0; mi < methods; ++mi) {
      auto& c = b.add_method("m" + std::to_string(mi), "(III)I", 0x0009, 24, 12);
      std::mt19937 rng(seed + ci * 1000 + mi);
      MethodGen gen(c, rng, "gen/G" + std::to_string(ci), mi, methods);
      gen.class_of_self_ = ci;
      gen.generate();
    }
    cp.add(b.build());
  }
}

// gen/Main with a real main(String[]) driving the corpus: calls the last
// method of every class (transitively reaching the rest) inside a catch-all
// so one fault does not mask the other calls.
inline void add_corpus_main(jbw::MemoryClasspath& cp, int classes, int methods) {
  ClassBuilder b("gen/Main", "java/lang/Object");
  auto& c = b.add_method("main", "([Ljava/lang/String;)V", 0x0009, 8, 2);
  for (int ci = 0; ci < classes; ++ci) {
    std::string ts = "t" + std::to_string(ci), te = "e" + std::to_string(ci),
                nx = "n" + std::to_string(ci);
    c.label(ts);
    c.iconst(ci + 1);
    c.iconst(2);
    c.iconst(3);
    c.invokestatic("gen/G" + std::to_string(ci), "m" + std::to_string(methods - 1), "(III)I");
    c.op(0x57);
    c.jump(0xa7, nx);
    c.label(te);
    c.op(0x57);
    c.label(nx);
    c.handler(ts, te, te, "");
  }
  c.op(0xb1);
  cp.add(b.build());
}

}  // namespace testsupport
