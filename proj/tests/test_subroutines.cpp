#include <catch2/catch_amalgamated.hpp>

#include "jbw/ir_transform.hpp"
#include "support/fixtures.hpp"

using namespace jbw;
using testsupport::ClassBuilder;

namespace {

ClassFile parse_fixture(std::vector<testsupport::byte> bytes,
                        std::shared_ptr<InternPool> pool) {
  return parse_class(bytes, pool);
}

}  // namespace

TEST_CASE("jsr-free input is returned unchanged", "[subroutines]") {
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("m", "(I)I", 0x0009, 2, 2);
  c.iload(0);
  c.iconst(1);
  c.op(0x60);
  c.op(0xac);
  auto pool = std::make_shared<InternPool>();
  ClassFile cf = parse_fixture(b.build(), pool);
  const MethodBody& body = *cf.methods[0].body;
  InlinedCode out = inline_subroutines(body.instructions(), body.handlers);
  CHECK(out.code == body.instructions());
  CHECK(out.handlers == body.handlers);
}

TEST_CASE("a subroutine called from two sites is duplicated at each", "[subroutines]") {
  // static void m(int, int):  jsr SUB; jsr SUB; return
  // SUB: astore_2; iinc 1 1; ret 2
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("m", "(II)V", 0x0009, 2, 3);
  c.jump(0xa8, "sub");
  c.jump(0xa8, "sub");
  c.op(0xb1);
  c.label("sub");
  c.astore(2);
  c.iinc(1, 1);
  c.op_u1(0xa9, 2);  // ret 2
  auto pool = std::make_shared<InternPool>();
  ClassFile cf = parse_fixture(b.build(), pool);
  const MethodBody& body = *cf.methods[0].body;
  std::size_t original = body.instructions().size();  // 6

  InlinedCode out = inline_subroutines(body.instructions(), body.handlers);
  std::size_t iinc_count = 0, goto_count = 0;
  for (const auto& pi : out.code) {
    CHECK(!instr_is<op::Jsr>(pi.instr));
    CHECK(!instr_is<op::Ret>(pi.instr));
    if (instr_is<op::IInc>(pi.instr)) ++iinc_count;
    if (instr_is<op::Goto>(pi.instr)) ++goto_count;
  }
  CHECK(iinc_count == 2);  // one body copy per call site
  CHECK(goto_count == 4);  // jsr->goto twice, ret->goto twice
  // body size 3 duplicated once extra, astore became nop both times
  CHECK(out.code.size() == original + 3);

  // the inlined code types and transforms cleanly
  MethodSig sig = pool->method_sig_of(cf.methods[0].sig);
  TypingResult tr = infer_types(out.code, out.handlers, sig, true, 3, *pool);
  IrMethod m = transform_method(cf.this_class, cf.methods[0].sig, cf.methods[0].access,
                                out.code, out.handlers, tr, *pool, 3);
  CHECK(m.body.size() > 0);
}

TEST_CASE("nested subroutines are rejected", "[subroutines]") {
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("m", "()V", 0x0009, 2, 4);
  c.jump(0xa8, "outer");
  c.op(0xb1);
  c.label("outer");
  c.astore(1);
  c.jump(0xa8, "inner");  // jsr inside a subroutine body
  c.op_u1(0xa9, 1);
  c.label("inner");
  c.astore(2);
  c.op_u1(0xa9, 2);
  auto pool = std::make_shared<InternPool>();
  ClassFile cf = parse_fixture(b.build(), pool);
  const MethodBody& body = *cf.methods[0].body;
  CHECK_THROWS_WITH(inline_subroutines(body.instructions(), body.handlers),
                    Catch::Matchers::ContainsSubstring("nested"));
}

TEST_CASE("handlers covering the subroutine body cover every copy", "[subroutines]") {
  // try { jsr SUB; } catch (Throwable) ...; SUB covered by its own handler
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("m", "(II)V", 0x0009, 2, 3);
  c.label("try_s");
  c.jump(0xa8, "sub");
  c.jump(0xa8, "sub");
  c.label("try_e");
  c.op(0xb1);
  c.label("sub");
  c.astore(2);
  c.iinc(1, 1);
  c.op_u1(0xa9, 2);
  c.label("h");
  c.op(0x57);
  c.op(0xb1);
  c.handler("try_s", "try_e", "h", "java/lang/Throwable");
  c.handler("sub", "h", "h", "");  // covers the body itself
  auto pool = std::make_shared<InternPool>();
  ClassFile cf = parse_fixture(b.build(), pool);
  const MethodBody& body = *cf.methods[0].body;
  InlinedCode out = inline_subroutines(body.instructions(), body.handlers);
  // the body-local handler row must exist once per copy
  std::size_t body_rows = 0;
  for (const auto& h : out.handlers)
    if (!h.catch_type.has_value()) ++body_rows;
  CHECK(body_rows == 2);
  // every handler target is an instruction start
  std::set<u4> starts;
  for (const auto& pi : out.code) starts.insert(pi.pc);
  for (const auto& h : out.handlers) {
    CHECK(starts.count(h.handler_pc) == 1);
    CHECK(h.start_pc < h.end_pc);
  }
}
