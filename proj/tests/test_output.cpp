#include <catch2/catch_amalgamated.hpp>

#include "jbw/ir_transform.hpp"
#include "jbw/output_html.hpp"
#include "jbw/output_jasmin.hpp"
#include "jbw/output_text.hpp"
#include "support/fixtures.hpp"

using namespace jbw;
using testsupport::ClassBuilder;

TEST_CASE("two-byte method lists as javap-style lines", "[output][text]") {
  ClassBuilder b("A", "java/lang/Object");
  auto& c = b.add_method("zero", "()I", 0x0009, 1, 0);
  c.op(0x03);
  c.op(0xac);
  auto pool = std::make_shared<InternPool>();
  ClassFile cf = parse_class(b.build(), pool);
  std::string text = emit_text(cf);
  CHECK(text.find("0: iconst_0\n") != std::string::npos);
  CHECK(text.find("1: ireturn\n") != std::string::npos);
  // determinism
  CHECK(text == emit_text(cf));
}

TEST_CASE("IR listing carries notzero and the folded constructor", "[output][text]") {
  auto pool = std::make_shared<InternPool>();
  auto cp = testsupport::base_classpath(pool);
  testsupport::add_div_alloc_example(*cp);
  const ClassFile* c = cp->find(pool->class_name("C"));
  IrMethod m = build_ir(*c, testsupport::method_of(*c, *pool, "f"), *pool);
  std::string text = emit_text(m, *pool);
  CHECK(text.find("notzero l2:I") != std::string::npos);
  CHECK(text.find(":= new B(l1:I / l2:I,") != std::string::npos);
  CHECK(text.find("mayinit A") != std::string::npos);
  CHECK(text.find("if (l1:I != 0) goto") != std::string::npos);
  CHECK(text == emit_text(m, *pool));
}

TEST_CASE("annotations render next to their program point", "[output][text]") {
  ClassBuilder b("A", "java/lang/Object");
  auto& c = b.add_method("f", "()I", 0x0009, 1, 0);
  c.iconst(3);
  c.op(0xac);
  auto pool = std::make_shared<InternPool>();
  ClassFile cf = parse_class(b.build(), pool);
  AnnotationMap notes;
  notes.notes[{cf.this_class.value, cf.methods[0].sig.value, 0}] = {"constant here"};
  std::string text = emit_text(cf, &notes);
  auto at = text.find("0: iconst_3");
  auto note_at = text.find("; constant here");
  REQUIRE(at != std::string::npos);
  REQUIRE(note_at != std::string::npos);
  CHECK(note_at > at);
  CHECK(note_at - at < 40);  // adjacent, not somewhere else in the listing
}

TEST_CASE("jasmin output for a minimal class has the core directives", "[output][jasmin]") {
  ClassBuilder b("A", "java/lang/Object");
  b.add_default_init("java/lang/Object");
  auto pool = std::make_shared<InternPool>();
  ClassFile cf = parse_class(b.build(), pool);
  JasminResult r = emit_jasmin(cf);
  CHECK(r.text.find(".class public A\n") != std::string::npos);
  CHECK(r.text.find(".super java/lang/Object\n") != std::string::npos);
  CHECK(r.text.find(".method public <init>()V") != std::string::npos);
  CHECK(r.text.find(".limit stack 1") != std::string::npos);
  CHECK(r.text.find("invokespecial java/lang/Object/<init>()V") != std::string::npos);
  CHECK(r.text.find(".end method") != std::string::npos);
  CHECK(r.warnings.empty());
}

TEST_CASE("empty interface uses the .interface directive", "[output][jasmin]") {
  ClassBuilder b("I", "java/lang/Object", 0x0601);
  auto pool = std::make_shared<InternPool>();
  ClassFile cf = parse_class(b.build(), pool);
  JasminResult r = emit_jasmin(cf);
  CHECK(r.text.find(".interface public I\n") != std::string::npos);
}

TEST_CASE("jasmin handlers and labels", "[output][jasmin]") {
  ClassBuilder b("T", "java/lang/Object");
  auto& c = b.add_method("f", "(II)I", 0x0009, 2, 2);
  c.label("ts");
  c.iload(0);
  c.iload(1);
  c.op(0x6c);
  c.op(0xac);
  c.label("te");
  c.label("h");
  c.op(0x57);
  c.iconst(-1);
  c.op(0xac);
  c.handler("ts", "te", "h", "java/lang/ArithmeticException");
  auto pool = std::make_shared<InternPool>();
  ClassFile cf = parse_class(b.build(), pool);
  JasminResult r = emit_jasmin(cf);
  CHECK(r.text.find(".catch java/lang/ArithmeticException from L0 to L4 using L4") !=
        std::string::npos);
  CHECK(r.text.find("L4:") != std::string::npos);
}

TEST_CASE("opaque attributes are dropped with a warning", "[output][jasmin]") {
  ClassBuilder b("A", "java/lang/Object");
  b.add_raw_class_attribute("Xyz", {1, 2, 3});
  auto pool = std::make_shared<InternPool>();
  ClassFile cf = parse_class(b.build(), pool);
  JasminResult r = emit_jasmin(cf);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("Xyz") != std::string::npos);
}

TEST_CASE("html: anchors, links, folding, annotations", "[output][html]") {
  auto pool = std::make_shared<InternPool>();
  auto cp = testsupport::base_classpath(pool);
  // Base with m; Sub overrides m; Caller invokes Base.m
  {
    ClassBuilder b("Base", "java/lang/Object");
    b.add_default_init("java/lang/Object");
    auto& m = b.add_method("m", "()I", 0x0001, 1, 1);
    m.iconst(1);
    m.op(0xac);
    cp->add(b.build());
  }
  {
    ClassBuilder b("Sub", "Base");
    b.add_default_init("Base");
    auto& m = b.add_method("m", "()I", 0x0001, 1, 1);
    m.iconst(2);
    m.op(0xac);
    cp->add(b.build());
  }
  {
    ClassBuilder b("Caller", "java/lang/Object");
    auto& m = b.add_method("go", "(LBase;)I", 0x0009, 2, 1);
    m.aload(0);
    m.invokevirtual("Base", "m", "()I");
    m.op(0xac);
    cp->add(b.build());
  }
  Hierarchy h = build_hierarchy(cp, {pool->class_name("Sub"), pool->class_name("Caller")});

  std::vector<const ClassFile*> classes = {cp->find(pool->class_name("Base")),
                                           cp->find(pool->class_name("Sub")),
                                           cp->find(pool->class_name("Caller"))};
  AnnotationMap notes;
  const ClassFile* caller = classes[2];
  notes.notes[{caller->this_class.value, caller->methods[0].sig.value, 1}] = {"dispatch here"};
  notes.notes[{999999, 0, 0}] = {"points nowhere"};

  HtmlResult r = emit_html(classes, &h, &notes);
  REQUIRE(r.files.size() == 3);
  CHECK(r.annotation_warnings == 1);

  const std::string& base_html = r.files.at("Base.html");
  const std::string& sub_html = r.files.at("Sub.html");
  const std::string& caller_html = r.files.at("Caller.html");

  // one anchor (details block) per method
  auto count = [](const std::string& s, const std::string& needle) {
    std::size_t n = 0, at = 0;
    while ((at = s.find(needle, at)) != std::string::npos) ++n, at += needle.size();
    return n;
  };
  CHECK(count(base_html, "<details open id=\"m") == 2);  // <init>, m
  CHECK(count(sub_html, "<details open id=\"m") == 2);
  CHECK(count(caller_html, "<details open id=\"m") == 1);

  // the call site links to Base.html#<anchor of m>
  CHECK(caller_html.find("<a href=\"Base.html#m") != std::string::npos);
  // override cross-links both ways
  CHECK(sub_html.find("overrides <a href=\"Base.html#m") != std::string::npos);
  CHECK(base_html.find("overridden by <a href=\"Sub.html#m") != std::string::npos);
  // annotation adjacent to its pc line
  auto line_at = caller_html.find("1: <a href=");
  auto note_at = caller_html.find("; dispatch here");
  REQUIRE(line_at != std::string::npos);
  REQUIRE(note_at != std::string::npos);
  CHECK(note_at > line_at);

  // link integrity across the emitted file set: every intra-corpus href
  // resolves to an existing file and anchor
  for (const auto& [file, content] : r.files) {
    std::size_t at = 0;
    while ((at = content.find("<a href=\"", at)) != std::string::npos) {
      at += 9;
      std::size_t end = content.find('"', at);
      std::string href = content.substr(at, end - at);
      auto hash = href.find('#');
      std::string target_file = hash == std::string::npos ? href : href.substr(0, hash);
      REQUIRE(r.files.count(target_file) == 1);
      if (hash != std::string::npos) {
        std::string anchor = href.substr(hash + 1);
        REQUIRE(r.files.at(target_file).find("id=\"" + anchor + "\"") != std::string::npos);
      }
    }
  }
}

TEST_CASE("html output is deterministic", "[output][html]") {
  auto pool = std::make_shared<InternPool>();
  auto cp = testsupport::base_classpath(pool);
  testsupport::add_div_alloc_example(*cp);
  Hierarchy h = build_hierarchy(cp, {pool->class_name("C")});
  std::vector<const ClassFile*> classes = {cp->find(pool->class_name("C"))};
  HtmlResult a = emit_html(classes, &h);
  HtmlResult b = emit_html(classes, &h);
  CHECK(a.files == b.files);
}
