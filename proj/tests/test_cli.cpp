#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "jbw/class_writer.hpp"
#include "jbw/zip.hpp"
#include "support/codegen.hpp"
#include "support/fixtures.hpp"

// Drives the installed binary end to end. The binary path arrives via the
// JBW_CLI_BIN environment variable set by the test registration.

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
  const char* p = std::getenv("JBW_CLI_BIN");
  REQUIRE(p != nullptr);
  return p;
}

struct RunResult {
  int status;
  std::string out;
};

RunResult run(const std::string& args) {
  std::string cmd = cli_path() + " " + args + " 2>&1";
  std::array<char, 4096> buf;
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  int rc = pclose(pipe);
  return {WEXITSTATUS(rc), out};
}

struct FixtureJar {
  fs::path dir;
  fs::path jar;

  FixtureJar() {
    dir = fs::temp_directory_path() / ("jbw_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    auto pool = std::make_shared<jbw::InternPool>();
    jbw::MemoryClasspath mem(pool);
    testsupport::add_java_lang(mem);
    testsupport::add_div_alloc_example(mem);
    testsupport::add_generated_corpus(mem, 2, 3, /*seed=*/31);
    testsupport::add_corpus_main(mem, 2, 3);

    jbw::ZipWriter zw;
    for (const auto& name : mem.class_names()) {
      const jbw::ClassFile* cf = mem.find(pool->class_name(name));
      std::vector<jbw::u1> bytes = jbw::unparse_class(*cf);
      zw.add(jbw::internal_name(name) + ".class", bytes, true);
    }
    jar = dir / "fixture.jar";
    std::ofstream out(jar, std::ios::binary);
    auto z = zw.finish();
    out.write(reinterpret_cast<const char*>(z.data()), static_cast<std::streamsize>(z.size()));
  }
  ~FixtureJar() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("no arguments prints usage and exits 2", "[cli]") {
  RunResult r = run("");
  CHECK(r.status == 2);
  CHECK(r.out.find("Usage") != std::string::npos);
}

TEST_CASE("dump renders a listing", "[cli]") {
  FixtureJar fx;
  RunResult r = run("dump --cp " + fx.jar.string() + " C");
  CHECK(r.status == 0);
  CHECK(r.out.find("class C") != std::string::npos);
  CHECK(r.out.find("idiv") != std::string::npos);
}

TEST_CASE("missing class exits 1 with a diagnostic", "[cli]") {
  FixtureJar fx;
  RunResult r = run("dump --cp " + fx.jar.string() + " NoSuchClass");
  CHECK(r.status == 1);
  CHECK(r.out.find("error:") != std::string::npos);
}

TEST_CASE("ir and ir --flat listings", "[cli]") {
  FixtureJar fx;
  RunResult full = run("ir --cp " + fx.jar.string() + " C");
  CHECK(full.status == 0);
  CHECK(full.out.find("notzero") != std::string::npos);
  CHECK(full.out.find("new B(") != std::string::npos);

  RunResult flat = run("ir --flat --cp " + fx.jar.string() + " gen.G0 gen.G1");
  CHECK(flat.status == 0);
  // flat form: no nested parentheses inside any expression line
  std::istringstream is(flat.out);
  std::string line;
  while (std::getline(is, line)) {
    // count max paren depth beyond the call/condition wrapper
    int depth = 0, maxd = 0;
    for (char c : line) {
      if (c == '(') maxd = std::max(maxd, ++depth);
      if (c == ')') --depth;
    }
    CHECK(maxd <= 2);
  }
}

TEST_CASE("cg rta produces json edges and a summary", "[cli]") {
  FixtureJar fx;
  auto out_file = fx.dir / "edges.jsonl";
  RunResult r = run("cg --cp " + fx.jar.string() + " --entry gen.Main --algo rta --no-timing -o " +
                    out_file.string());
  CHECK(r.status == 0);
  CHECK(r.out.find("classes=") != std::string::npos);
  CHECK(r.out.find("methods=") != std::string::npos);
  CHECK(r.out.find("edges=") != std::string::npos);
  CHECK(r.out.find("time_ms=") == std::string::npos);

  std::ifstream in(out_file);
  REQUIRE(in.good());
  std::string line;
  std::size_t edges = 0;
  while (std::getline(in, line)) {
    CHECK(line.rfind("{\"caller\":", 0) == 0);
    ++edges;
  }
  // summary count matches the file
  auto at = r.out.find("edges=");
  std::size_t claimed = std::stoul(r.out.substr(at + 6));
  CHECK(claimed == edges);

  // byte-for-byte reproducible with identical flags
  auto out_file2 = fx.dir / "edges2.jsonl";
  run("cg --cp " + fx.jar.string() + " --entry gen.Main --algo rta --no-timing -o " +
      out_file2.string());
  std::ifstream a(out_file, std::ios::binary), b(out_file2, std::ios::binary);
  std::string ca((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string cb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(ca == cb);
}

TEST_CASE("cg dot output parses as a digraph and algorithms vary", "[cli]") {
  FixtureJar fx;
  RunResult dot = run("cg --cp " + fx.jar.string() +
                      " --entry gen.Main --algo cra --format dot --no-timing");
  CHECK(dot.status == 0);
  CHECK(dot.out.rfind("digraph", 0) == 0);
  RunResult xta = run("cg --cp " + fx.jar.string() + " --entry gen.Main --algo xta --no-timing");
  CHECK(xta.status == 0);
  RunResult bad = run("cg --cp " + fx.jar.string() + " --entry gen.Main --algo magic");
  CHECK(bad.status == 1);
}

TEST_CASE("html command writes a report tree", "[cli]") {
  FixtureJar fx;
  auto out_dir = fx.dir / "html";
  RunResult r = run("html --cp " + fx.jar.string() + " -o " + out_dir.string() + " C A B");
  CHECK(r.status == 0);
  CHECK(fs::exists(out_dir / "C.html"));
  CHECK(fs::exists(out_dir / "A.html"));
  std::ifstream in(out_dir / "C.html");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content.find("<details") != std::string::npos);
}

TEST_CASE("jasmin command writes .j files", "[cli]") {
  FixtureJar fx;
  auto out_dir = fx.dir / "jas";
  RunResult r = run("jasmin --cp " + fx.jar.string() + " -o " + out_dir.string() + " A");
  CHECK(r.status == 0);
  REQUIRE(fs::exists(out_dir / "A.j"));
  std::ifstream in(out_dir / "A.j");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content.find(".class public A") != std::string::npos);
}

TEST_CASE("stats prints the bucket table", "[cli]") {
  FixtureJar fx;
  RunResult r = run("stats --cp " + fx.jar.string() + " --all");
  CHECK(r.status == 0);
  CHECK(r.out.find("size bucket") != std::string::npos);
  CHECK(r.out.find("[0,50)") != std::string::npos);
  CHECK(r.out.find("[800,+)") != std::string::npos);
}
