#include <catch2/catch_amalgamated.hpp>

#include "jbw/ir_flatten.hpp"
#include "jbw/ir_stats.hpp"
#include "jbw/ir_transform.hpp"
#include "support/fixtures.hpp"

using namespace jbw;
using testsupport::ClassBuilder;

namespace {

struct Built {
  std::shared_ptr<InternPool> pool;
  std::shared_ptr<MemoryClasspath> cp;
  ClassFile cf;
};

Built parse_one(std::vector<testsupport::byte> bytes) {
  Built b;
  b.pool = std::make_shared<InternPool>();
  b.cp = testsupport::base_classpath(b.pool);
  b.cf = parse_class(bytes, b.pool);
  return b;
}

IrMethod ir_of(Built& b, const std::string& method) {
  return build_ir(b.cf, testsupport::method_of(b.cf, *b.pool, method), *b.pool);
}

// Walks every expression embedded in an instruction.
template <class F>
void for_each_expr(const IrInstr& ins, F&& f) {
  if (auto* a = ir_as<ir::Assign>(ins)) f(a->value);
  if (auto* fw = ir_as<ir::FieldWrite>(ins)) f(fw->target), f(fw->value);
  if (auto* sw = ir_as<ir::StaticWrite>(ins)) f(sw->value);
  if (auto* fr = ir_as<ir::FieldRead>(ins)) f(fr->target);
  if (auto* aw = ir_as<ir::ArrayWrite>(ins)) f(aw->array), f(aw->index), f(aw->value);
  if (auto* ar = ir_as<ir::ArrayRead>(ins)) f(ar->array), f(ar->index);
  if (auto* no = ir_as<ir::NewObject>(ins))
    for (const auto& e : no->args) f(e);
  if (auto* na = ir_as<ir::NewArr>(ins))
    for (const auto& e : na->dims) f(e);
  if (auto* iv = ir_as<ir::InvokeIr>(ins)) {
    if (iv->receiver) f(*iv->receiver);
    for (const auto& e : iv->args) f(e);
  }
  if (auto* ck = ir_as<ir::CheckIr>(ins)) {
    f(ck->check.a);
    if (ck->check.b) f(*ck->check.b);
  }
  if (auto* br = ir_as<ir::IfIr>(ins)) f(br->left), f(br->right);
  if (auto* sl = ir_as<ir::SwitchIr>(ins)) f(sl->selector);
  if (auto* rt = ir_as<ir::ReturnIr>(ins)) {
    if (rt->value) f(*rt->value);
  }
  if (auto* th = ir_as<ir::ThrowIr>(ins)) f(th->value);
  if (auto* me = ir_as<ir::MonEnter>(ins)) f(me->value);
  if (auto* mx = ir_as<ir::MonExit>(ins)) f(mx->value);
}

template <class F>
void for_each_subexpr(const Expr& e, F&& f) {
  f(e);
  const ExprNode& n = e.node();
  if (n.a) for_each_subexpr(e.child_a(), f);
  if (n.b) for_each_subexpr(e.child_b(), f);
}

}  // namespace

TEST_CASE("typing: stack at pc 1 of iconst_0; ireturn is [I]", "[ir][typing]") {
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("zero", "()I", 0x0009, 1, 0);
  c.op(0x03);
  c.op(0xac);
  Built bt = parse_one(b.build());
  const MethodInfo& m = testsupport::method_of(bt.cf, *bt.pool, "zero");
  TypingResult tr = infer_types(m.body->instructions(), m.body->handlers,
                                bt.pool->method_sig_of(m.sig), true, 0, *bt.pool);
  REQUIRE(tr.at(1) != nullptr);
  REQUIRE(tr.at(1)->stack == std::vector<JvmType>{JvmType::Int});
  CHECK(tr.max_visits == 1);
}

TEST_CASE("typing: a reference join stays a plain Ref", "[ir][typing]") {
  // x ? new A() : new B() -- both branches push different classes
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("pick", "(I)Ljava/lang/Object;", 0x0009, 2, 1);
  c.iload(0);
  c.jump(0x99, "else_");  // ifeq
  c.newobj("A");
  c.op(0x59);
  c.invokespecial("A", "<init>", "()V");
  c.jump(0xa7, "join");
  c.label("else_");
  c.newobj("B");
  c.op(0x59);
  c.invokespecial("B", "<init>", "()V");
  c.label("join");
  c.op(0xb0);  // areturn
  Built bt = parse_one(b.build());
  const MethodInfo& m = testsupport::method_of(bt.cf, *bt.pool, "pick");
  TypingResult tr = infer_types(m.body->instructions(), m.body->handlers,
                                bt.pool->method_sig_of(m.sig), true, 1, *bt.pool);
  u4 join_pc = 0;
  for (const auto& pi : m.body->instructions())
    if (instr_is<op::Return>(pi.instr)) join_pc = pi.pc;
  REQUIRE(tr.at(join_pc) != nullptr);
  CHECK(tr.at(join_pc)->stack == std::vector<JvmType>{JvmType::Object});
}

TEST_CASE("typing: stack height mismatch at a join is rejected", "[ir][typing]") {
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("bad", "(I)I", 0x0009, 2, 1);
  c.iload(0);
  c.jump(0x99, "join");  // ifeq join (stack empty on this edge)
  c.iconst(1);           // stack [I] on the fallthrough edge
  c.label("join");
  c.iconst(2);
  c.op(0x60);  // iadd
  c.op(0xac);
  Built bt = parse_one(b.build());
  const MethodInfo& m = testsupport::method_of(bt.cf, *bt.pool, "bad");
  CHECK_THROWS_WITH(infer_types(m.body->instructions(), m.body->handlers,
                                bt.pool->method_sig_of(m.sig), true, 1, *bt.pool),
                    Catch::Matchers::ContainsSubstring("height"));
}

TEST_CASE("typing: int/ref local clash is reported", "[ir][typing]") {
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("bad", "()I", 0x0009, 1, 1);
  c.op(0x01);  // aconst_null
  c.astore(0);
  c.iload(0);  // int load of a ref slot
  c.op(0xac);
  Built bt = parse_one(b.build());
  const MethodInfo& m = testsupport::method_of(bt.cf, *bt.pool, "bad");
  CHECK_THROWS_WITH(infer_types(m.body->instructions(), m.body->handlers,
                                bt.pool->method_sig_of(m.sig), true, 1, *bt.pool),
                    Catch::Matchers::ContainsSubstring("clash"));
}

TEST_CASE("empty void method becomes a single return", "[ir][transform]") {
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("nothing", "()V", 0x0009, 0, 0);
  c.op(0xb1);
  Built bt = parse_one(b.build());
  IrMethod m = ir_of(bt, "nothing");
  REQUIRE(m.body.size() == 1);
  CHECK(ir_is<ir::ReturnIr>(m.body[0].ins));
}

TEST_CASE("division produces notzero on the divisor then the expression",
          "[ir][transform]") {
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("div", "(II)I", 0x0009, 2, 2);
  c.iload(0);
  c.iload(1);
  c.op(0x6c);
  c.op(0xac);
  Built bt = parse_one(b.build());
  IrMethod m = ir_of(bt, "div");
  REQUIRE(m.body.size() == 2);
  auto* ck = ir_as<ir::CheckIr>(m.body[0].ins);
  REQUIRE(ck != nullptr);
  CHECK(ck->check.kind == CheckKind::NotZero);
  CHECK(m.body[0].pc == 2);  // the idiv pc
  auto* rt = ir_as<ir::ReturnIr>(m.body[1].ins);
  REQUIRE(rt != nullptr);
  REQUIRE(rt->value.has_value());
  const ExprNode& e = rt->value->node();
  REQUIRE(e.kind == ExprNode::Kind::Binop);
  CHECK(e.bin == BinOpKind::Div);
  // the check guards exactly the divisor expression
  CHECK(ck->check.a == rt->value->child_b());
}

TEST_CASE("allocation example transforms to the expected shape", "[ir][transform]") {
  auto pool = std::make_shared<InternPool>();
  auto cp = testsupport::base_classpath(pool);
  testsupport::add_div_alloc_example(*cp);
  const ClassFile* c = cp->find(pool->class_name("C"));
  REQUIRE(c != nullptr);
  IrMethod m = build_ir(*c, testsupport::method_of(*c, *pool, "f"), *pool);

  // Taken branch (x == 0), in order:
  //   if (l1 != 0) goto; mayinit B; notzero l2; mayinit A;
  //   t := new A(); t2 := new B(l1 / l2, t); (spill); goto; ...; return
  std::vector<std::string> kinds;
  for (const auto& ins : m.body) {
    if (ir_is<ir::IfIr>(ins.ins)) kinds.push_back("if");
    if (auto* mi = ir_as<ir::MayInit>(ins.ins))
      kinds.push_back("mayinit " + pool->class_name_of(mi->cls));
    if (auto* ck = ir_as<ir::CheckIr>(ins.ins))
      kinds.push_back(ck->check.kind == CheckKind::NotZero ? "notzero" : "check");
    if (auto* no = ir_as<ir::NewObject>(ins.ins))
      kinds.push_back("new " + pool->class_name_of(no->cls));
    if (ir_is<ir::ReturnIr>(ins.ins)) kinds.push_back("return");
    if (ir_is<ir::GotoIr>(ins.ins)) kinds.push_back("goto");
    if (ir_is<ir::Assign>(ins.ins)) kinds.push_back("assign");
  }
  std::vector<std::string> expect = {"if",     "mayinit B", "notzero", "mayinit A",
                                     "new A",  "new B",     "assign",  "goto",
                                     "assign", "return"};
  CHECK(kinds == expect);

  // the if condition is l1 != 0
  auto* iff = ir_as<ir::IfIr>(m.body[0].ins);
  REQUIRE(iff != nullptr);
  CHECK(iff->op == CondOp::Ne);
  CHECK(m.vars[iff->left.node().var].origin == VarOrigin::Local);
  CHECK(m.vars[iff->left.node().var].a == 1);

  // new B takes (l1 / l2, tA) where tA holds new A()
  const ir::NewObject* newA = nullptr;
  const ir::NewObject* newB = nullptr;
  for (const auto& ins : m.body)
    if (auto* no = ir_as<ir::NewObject>(ins.ins)) {
      if (pool->class_name_of(no->cls) == "A") newA = no;
      if (pool->class_name_of(no->cls) == "B") newB = no;
    }
  REQUIRE(newA != nullptr);
  REQUIRE(newB != nullptr);
  REQUIRE(newB->args.size() == 2);
  CHECK(newB->args[0].node().kind == ExprNode::Kind::Binop);
  CHECK(newB->args[0].node().bin == BinOpKind::Div);
  CHECK(newB->args[1].node().kind == ExprNode::Kind::Var);
  CHECK(newB->args[1].node().var == newA->dst);

  // notzero guards l2, the divisor
  for (const auto& ins : m.body)
    if (auto* ck = ir_as<ir::CheckIr>(ins.ins)) {
      REQUIRE(ck->check.kind == CheckKind::NotZero);
      CHECK(ck->check.a == newB->args[0].child_b());
    }

  // both return paths flow through the same spill variable
  u4 returns = 0;
  for (const auto& ins : m.body)
    if (auto* rt = ir_as<ir::ReturnIr>(ins.ins)) {
      ++returns;
      REQUIRE(rt->value.has_value());
      CHECK(m.vars[rt->value->node().var].origin == VarOrigin::StackSave);
    }
  CHECK(returns == 1);

  CHECK(m.passes_used <= 3);
}

TEST_CASE("join consistency: both arms spill into the same variables", "[ir][transform]") {
  // return x ? a : b  -- a conditional expression joining with stack depth 1
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("sel", "(III)I", 0x0009, 2, 3);
  c.iload(0);
  c.jump(0x99, "else_");
  c.iload(1);
  c.jump(0xa7, "join");
  c.label("else_");
  c.iload(2);
  c.label("join");
  c.op(0xac);
  Built bt = parse_one(b.build());
  IrMethod m = ir_of(bt, "sel");
  std::vector<VarId> spill_targets;
  for (const auto& ins : m.body)
    if (auto* a = ir_as<ir::Assign>(ins.ins))
      if (m.vars[a->dst].origin == VarOrigin::StackSave) spill_targets.push_back(a->dst);
  REQUIRE(spill_targets.size() == 2);
  CHECK(spill_targets[0] == spill_targets[1]);
  auto* rt = ir_as<ir::ReturnIr>(m.body.back().ins);
  REQUIRE(rt != nullptr);
  CHECK(rt->value->node().var == spill_targets[0]);
}

TEST_CASE("uninitialized allocation across a branch is rejected", "[ir][transform]") {
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("bad", "(I)V", 0x0009, 3, 1);
  c.newobj("A");  // uninitialized on the stack
  c.iload(0);
  c.jump(0x99, "skip");  // branch with the marker still live
  c.op(0x59);
  c.invokespecial("A", "<init>", "()V");
  c.label("skip");
  c.op(0x57);  // pop
  c.op(0xb1);
  Built bt = parse_one(b.build());
  CHECK_THROWS_WITH(ir_of(bt, "bad"), Catch::Matchers::ContainsSubstring("unfoldable"));
}

TEST_CASE("uninitialized allocation consumed by a non-constructor is rejected",
          "[ir][transform]") {
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("bad", "()V", 0x0009, 2, 1);
  c.newobj("A");
  c.op(0xb0);  // areturn of an uninitialized object
  Built bt = parse_one(b.build());
  CHECK_THROWS_WITH(ir_of(bt, "bad"),
                    Catch::Matchers::ContainsSubstring("uninitialized"));
}

TEST_CASE("stores materialize stack expressions that mention the local",
          "[ir][transform]") {
  // push x; x = 7; return pushed  => the pushed value must be the old x
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("mat", "(I)I", 0x0009, 2, 1);
  c.iload(0);
  c.iconst(7);
  c.istore(0);
  c.op(0xac);
  Built bt = parse_one(b.build());
  IrMethod m = ir_of(bt, "mat");
  // expected: t := l0; l0 := 7; return t
  REQUIRE(m.body.size() == 3);
  auto* save = ir_as<ir::Assign>(m.body[0].ins);
  REQUIRE(save != nullptr);
  CHECK(m.vars[save->dst].origin == VarOrigin::Temp);
  auto* set = ir_as<ir::Assign>(m.body[1].ins);
  REQUIRE(set != nullptr);
  CHECK(m.vars[set->dst].origin == VarOrigin::Local);
  auto* rt = ir_as<ir::ReturnIr>(m.body[2].ins);
  REQUIRE(rt != nullptr);
  CHECK(rt->value->node().var == save->dst);
}

TEST_CASE("check adjacency: every division is dominated by its notzero",
          "[ir][invariant]") {
  // a few shapes: nested division, division consumed later, div in args
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("m", "(III)I", 0x0009, 6, 4);
  c.iload(0);
  c.iload(1);
  c.op(0x6c);  // x / y
  c.iload(2);
  c.op(0x6c);  // (x/y) / z
  c.iload(1);
  c.iload(2);
  c.op(0x70);  // y % z
  c.op(0x60);  // +
  c.op(0xac);
  Built bt = parse_one(b.build());
  IrMethod m = ir_of(bt, "m");

  for (std::size_t i = 0; i < m.body.size(); ++i) {
    for_each_expr(m.body[i].ins, [&](const Expr& top) {
      for_each_subexpr(top, [&](const Expr& e) {
        const ExprNode& n = e.node();
        if (n.kind != ExprNode::Kind::Binop) return;
        if (n.bin != BinOpKind::Div && n.bin != BinOpKind::Rem) return;
        // find a preceding notzero on the identical divisor with no
        // intervening write to its operands
        Expr divisor = e.child_b();
        bool ok = false;
        for (std::size_t j = i; j-- > 0;) {
          if (auto* ck = ir_as<ir::CheckIr>(m.body[j].ins)) {
            if (ck->check.kind == CheckKind::NotZero && ck->check.a == divisor) {
              ok = true;
              break;
            }
          }
          if (auto* as = ir_as<ir::Assign>(m.body[j].ins))
            if (divisor.mentions(as->dst)) break;
        }
        REQUIRE(ok);
      });
    });
  }
}

TEST_CASE("flatten: already-flat methods are unchanged", "[ir][flatten]") {
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("id", "(I)I", 0x0009, 1, 1);
  c.iload(0);
  c.op(0xac);
  Built bt = parse_one(b.build());
  IrMethod m = ir_of(bt, "id");
  IrMethod f = flatten_3addr(m);
  CHECK(f.body.size() == m.body.size());
  CHECK(f.vars.size() == m.vars.size());
}

TEST_CASE("flatten: (a+b)*c splits once and is idempotent", "[ir][flatten]") {
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("m", "(III)I", 0x0009, 3, 3);
  c.iload(0);
  c.iload(1);
  c.op(0x60);  // a+b
  c.iload(2);
  c.op(0x68);  // *c
  c.op(0xac);
  Built bt = parse_one(b.build());
  IrMethod m = ir_of(bt, "m");
  REQUIRE(m.body.size() == 1);  // return (a+b)*c
  IrMethod f = flatten_3addr(m);
  REQUIRE(f.body.size() == 2);  // t := a+b; return t*c
  auto* t = ir_as<ir::Assign>(f.body[0].ins);
  REQUIRE(t != nullptr);
  auto* rt = ir_as<ir::ReturnIr>(f.body[1].ins);
  REQUIRE(rt != nullptr);
  CHECK(rt->value->height() == 1);
  // idempotent
  IrMethod f2 = flatten_3addr(f);
  CHECK(f2.body.size() == f.body.size());
  // every expression height <= 1
  for (const auto& ins : f.body)
    for_each_expr(ins.ins, [&](const Expr& e) { CHECK(e.height() <= 1); });
}

TEST_CASE("stats: a method needing no temps has ratio 1", "[ir][stats]") {
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("id", "(I)I", 0x0009, 1, 1);
  c.iload(0);
  c.op(0xac);
  Built bt = parse_one(b.build());
  IrMethod m = ir_of(bt, "id");
  MethodStats s = ir_stats(m);
  CHECK(s.bytecode_count == 2);
  CHECK(s.bytecode_locals == 1);
  CHECK(s.ir_var_count == 1);
  CHECK(s.increase_ratio == 1.0);
}

TEST_CASE("stats: the allocation example counts its temps", "[ir][stats]") {
  auto pool = std::make_shared<InternPool>();
  auto cp = testsupport::base_classpath(pool);
  testsupport::add_div_alloc_example(*cp);
  const ClassFile* c = cp->find(pool->class_name("C"));
  IrMethod m = build_ir(*c, testsupport::method_of(*c, *pool, "f"), *pool);
  MethodStats s = ir_stats(m);
  // l1, l2, two fold temps, one spill var (this/l0 is never referenced)
  CHECK(s.bytecode_locals == 3);
  CHECK(s.ir_var_count == 5);
  CHECK(s.increase_ratio == Catch::Approx(5.0 / 3.0));
  auto table = render_stats_table({s});
  CHECK(table.find("[0,50)") != std::string::npos);
}

TEST_CASE("fixed passes: scan + typing + generation", "[ir][passes]") {
  auto pool = std::make_shared<InternPool>();
  auto cp = testsupport::base_classpath(pool);
  testsupport::add_div_alloc_example(*cp);
  const ClassFile* c = cp->find(pool->class_name("C"));
  for (const auto& mi : c->methods) {
    IrMethod m = build_ir(*c, mi, *pool);
    CHECK(m.passes_used <= 3);
  }
}

TEST_CASE("switch transform carries cases and defaults", "[ir][transform]") {
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("sw", "(I)I", 0x0009, 1, 1);
  c.iload(0);
  c.tableswitch("dflt", 5, {"one", "two"});
  c.label("one");
  c.iconst(10);
  c.op(0xac);
  c.label("two");
  c.iconst(20);
  c.op(0xac);
  c.label("dflt");
  c.iconst(-1);
  c.op(0xac);
  Built bt = parse_one(b.build());
  IrMethod m = ir_of(bt, "sw");
  auto* sw = ir_as<ir::SwitchIr>(m.body[0].ins);
  REQUIRE(sw != nullptr);
  REQUIRE(sw->cases.size() == 2);
  CHECK(sw->cases[0].first == 5);
  CHECK(sw->cases[1].first == 6);
  // targets are valid IR labels
  CHECK(sw->cases[0].second < m.body.size());
  CHECK(sw->default_target < m.body.size());
}

TEST_CASE("exception handler ranges surface as IR handlers with a bound variable",
          "[ir][transform]") {
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("guard", "(II)I", 0x0009, 2, 2);
  c.label("try_s");
  c.iload(0);
  c.iload(1);
  c.op(0x6c);
  c.op(0xac);
  c.label("try_e");
  c.label("catch");
  c.op(0x57);  // discard exception
  c.iconst(-1);
  c.op(0xac);
  c.handler("try_s", "try_e", "catch", "java/lang/ArithmeticException");
  Built bt = parse_one(b.build());
  IrMethod m = ir_of(bt, "guard");
  REQUIRE(m.handlers.size() == 1);
  const auto& h = m.handlers[0];
  CHECK(h.start == 0);
  CHECK(h.end > h.start);
  CHECK(h.handler < m.body.size());
  CHECK(m.vars[h.exc_var].origin == VarOrigin::StackSave);
  REQUIRE(h.catch_type.has_value());
  CHECK(bt.pool->class_name_of(*h.catch_type) == "java.lang.ArithmeticException");
}
