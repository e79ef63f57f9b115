// jbw: a workbench over Java class files; parse, transform to the stack-less
// IR, build call graphs, and render the results.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "jbw/cg_export.hpp"
#include "jbw/cra.hpp"
#include "jbw/ir_flatten.hpp"
#include "jbw/ir_stats.hpp"
#include "jbw/output_html.hpp"
#include "jbw/output_jasmin.hpp"
#include "jbw/output_text.hpp"
#include "jbw/rta.hpp"
#include "jbw/xta.hpp"

namespace {

using namespace jbw;

std::vector<std::string> split_classpath(const std::vector<std::string>& cp_args) {
  std::vector<std::string> roots;
  for (const auto& arg : cp_args) {
    std::size_t at = 0;
    while (at <= arg.size()) {
      std::size_t next = arg.find(':', at);
      if (next == std::string::npos) next = arg.size();
      if (next > at) roots.push_back(arg.substr(at, next - at));
      at = next + 1;
    }
  }
  if (roots.empty()) {
    if (const char* env = std::getenv("JBW_CLASSPATH")) roots = split_classpath({env});
  }
  return roots;
}

std::shared_ptr<Classpath> open_classpath(const std::vector<std::string>& cp_args) {
  auto roots = split_classpath(cp_args);
  if (roots.empty())
    throw ClasspathError("no classpath: pass --cp or set JBW_CLASSPATH");
  auto pool = std::make_shared<InternPool>();
  return std::make_shared<Classpath>(roots, pool);
}

std::vector<std::string> pick_classes(ClassProvider& cp, const std::vector<std::string>& names,
                                      bool all) {
  if (all || names.empty()) return cp.class_names();
  return names;
}

void write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ClasspathError("cannot write " + path);
  out << content;
}

struct CgOptions {
  std::vector<std::string> cp;
  std::string entry;
  std::string algo = "rta";
  std::string format = "json";
  std::string out;
  std::string natives_path;
  bool partial = false;
  bool no_timing = false;
  bool jvm_entries = false;
};

int run_cg(const CgOptions& opt) {
  auto provider = open_classpath(opt.cp);
  EntrySpec entry{opt.entry, opt.jvm_entries};
  HierarchyOptions hopts;
  hopts.allow_partial_classpath = opt.partial;

  NativeAbstraction natives;
  if (!opt.natives_path.empty()) {
    std::ifstream in(opt.natives_path);
    if (!in) throw ClasspathError("cannot read natives file " + opt.natives_path);
    natives = NativeAbstraction::parse(in);
  }

  auto t0 = std::chrono::steady_clock::now();
  ProgramModel model;
  if (opt.algo == "cra") {
    model = build_cra(provider, entry, hopts);
    cra_materialize_call_sites(model);
  } else if (opt.algo == "rta") {
    model = build_rta(provider, entry, natives, hopts);
  } else if (opt.algo == "xta") {
    ProgramModel base = build_rta(provider, entry, natives, hopts);
    model = refine_xta(base);
  } else {
    throw ValidationError("unknown algorithm '" + opt.algo + "' (use cra, rta or xta)");
  }
  auto t1 = std::chrono::steady_clock::now();

  std::string rendered = opt.format == "dot" ? cg_to_dot(model) : cg_to_json_lines(model);
  if (opt.out.empty())
    std::cout << rendered;
  else
    write_file(opt.out, rendered);

  for (const auto& d : model.diagnostics) std::cerr << "note: " << d << "\n";

  CgSummary s = cg_query(model);
  std::cout << "classes=" << s.class_count << " methods=" << s.methods.size()
            << " edges=" << s.edges.size();
  if (!opt.no_timing)
    std::cout << " time_ms="
              << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jbw: Java bytecode workbench"};
  app.require_subcommand(1);

  // dump
  auto* dump = app.add_subcommand("dump", "javap-like listing of classes");
  std::vector<std::string> dump_cp, dump_classes;
  bool dump_all = false;
  dump->add_option("--cp", dump_cp, "classpath roots (directories or jars)");
  dump->add_option("classes", dump_classes, "class names (dotted)");
  dump->add_flag("--all", dump_all, "dump every class on the classpath");

  // ir
  auto* ir_cmd = app.add_subcommand("ir", "stack-less IR listing of classes");
  std::vector<std::string> ir_cp, ir_classes;
  bool ir_flat = false, ir_all = false;
  ir_cmd->add_option("--cp", ir_cp, "classpath roots");
  ir_cmd->add_option("classes", ir_classes, "class names (dotted)");
  ir_cmd->add_flag("--flat", ir_flat, "3-address form (expressions of height <= 1)");
  ir_cmd->add_flag("--all", ir_all, "transform every class on the classpath");

  // cg
  auto* cg = app.add_subcommand("cg", "build and export a call graph");
  CgOptions cg_opt;
  cg->add_option("--cp", cg_opt.cp, "classpath roots");
  cg->add_option("--entry", cg_opt.entry, "entry class (with static void main)")->required();
  cg->add_option("--algo", cg_opt.algo, "analysis: cra, rta or xta");
  cg->add_option("--format", cg_opt.format, "output format: json or dot");
  cg->add_option("-o,--out", cg_opt.out, "output file (stdout when absent)");
  cg->add_option("--natives", cg_opt.natives_path, "native-method abstraction file");
  cg->add_flag("--partial", cg_opt.partial, "stub classes missing from the classpath");
  cg->add_flag("--no-timing", cg_opt.no_timing, "omit time_ms from the summary");
  cg->add_flag("--jvm-entries", cg_opt.jvm_entries,
               "also treat the entry class <clinit> as an entry point");

  // html
  auto* html = app.add_subcommand("html", "render classes as a static HTML report");
  std::vector<std::string> html_cp, html_classes;
  std::string html_out = "jbw-html";
  bool html_all = false;
  html->add_option("--cp", html_cp, "classpath roots");
  html->add_option("classes", html_classes, "class names (dotted)");
  html->add_option("-o,--out", html_out, "output directory");
  html->add_flag("--all", html_all, "render every class on the classpath");

  // jasmin
  auto* jas = app.add_subcommand("jasmin", "emit Jasmin assembly files");
  std::vector<std::string> jas_cp, jas_classes;
  std::string jas_out = "jbw-jasmin";
  bool jas_all = false;
  jas->add_option("--cp", jas_cp, "classpath roots");
  jas->add_option("classes", jas_classes, "class names (dotted)");
  jas->add_option("-o,--out", jas_out, "output directory");
  jas->add_flag("--all", jas_all, "emit every class on the classpath");

  // stats
  auto* stats = app.add_subcommand("stats", "IR variable-increase table by method size");
  std::vector<std::string> stats_cp, stats_classes;
  bool stats_all = false;
  stats->add_option("--cp", stats_cp, "classpath roots");
  stats->add_option("classes", stats_classes, "class names (dotted)");
  stats->add_flag("--all", stats_all, "measure every class on the classpath");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*dump) {
      auto provider = open_classpath(dump_cp);
      InternPool& pool = *provider->intern_pool();
      for (const auto& name : pick_classes(*provider, dump_classes, dump_all)) {
        const ClassFile* cf = provider->find(pool.class_name(name));
        if (!cf) throw ClasspathError("class not found: " + name);
        std::cout << emit_text(*cf);
      }
      return 0;
    }
    if (*ir_cmd) {
      auto provider = open_classpath(ir_cp);
      InternPool& pool = *provider->intern_pool();
      for (const auto& name : pick_classes(*provider, ir_classes, ir_all)) {
        const ClassFile* cf = provider->find(pool.class_name(name));
        if (!cf) throw ClasspathError("class not found: " + name);
        for (const auto& m : cf->methods) {
          if (!m.body) continue;
          IrMethod irm = build_ir(*cf, m, pool);
          if (ir_flat) irm = flatten_3addr(irm);
          std::cout << emit_text(irm, pool) << "\n";
        }
      }
      return 0;
    }
    if (*cg) return run_cg(cg_opt);
    if (*html) {
      auto provider = open_classpath(html_cp);
      InternPool& pool = *provider->intern_pool();
      auto names = pick_classes(*provider, html_classes, html_all);
      std::vector<ClassNameId> seeds;
      std::vector<const ClassFile*> classes;
      for (const auto& n : names) {
        ClassNameId id = pool.class_name(n);
        const ClassFile* cf = provider->find(id);
        if (!cf) throw ClasspathError("class not found: " + n);
        classes.push_back(cf);
        seeds.push_back(id);
      }
      HierarchyOptions hopts;
      hopts.allow_partial_classpath = true;  // reporting tolerates missing supers
      Hierarchy h = build_hierarchy(provider, seeds, hopts);
      HtmlResult r = emit_html(classes, &h);
      for (const auto& [file, content] : r.files)
        write_file((std::filesystem::path(html_out) / file).string(), content);
      std::cout << "wrote " << r.files.size() << " files to " << html_out << "\n";
      return 0;
    }
    if (*jas) {
      auto provider = open_classpath(jas_cp);
      InternPool& pool = *provider->intern_pool();
      for (const auto& name : pick_classes(*provider, jas_classes, jas_all)) {
        const ClassFile* cf = provider->find(pool.class_name(name));
        if (!cf) throw ClasspathError("class not found: " + name);
        JasminResult r = emit_jasmin(*cf);
        for (const auto& w : r.warnings) std::cerr << "note: " << w << "\n";
        write_file((std::filesystem::path(jas_out) / (internal_name(name) + ".j")).string(),
                   r.text);
      }
      std::cout << "wrote Jasmin files to " << jas_out << "\n";
      return 0;
    }
    if (*stats) {
      auto provider = open_classpath(stats_cp);
      InternPool& pool = *provider->intern_pool();
      std::vector<MethodStats> all;
      for (const auto& name : pick_classes(*provider, stats_classes, stats_all)) {
        const ClassFile* cf = provider->find(pool.class_name(name));
        if (!cf) throw ClasspathError("class not found: " + name);
        for (const auto& m : cf->methods) {
          if (!m.body) continue;
          all.push_back(ir_stats(build_ir(*cf, m, pool)));
        }
      }
      std::cout << render_stats_table(all);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
