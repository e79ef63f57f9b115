#pragma once

#include <sstream>

#include "jbw/hierarchy.hpp"
#include "jbw/output_text.hpp"

namespace jbw {

struct HtmlResult {
  std::map<std::string, std::string> files;  // filename -> content
  u4 annotation_warnings = 0;                // notes that matched nothing
};

namespace html_detail {

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

inline std::string file_of(const std::string& dotted) { return dotted + ".html"; }
inline std::string anchor_of(MethodSigId sig) { return "m" + std::to_string(sig.value); }

}  // namespace html_detail

// Static, dependency-free HTML: one file per class, collapsible method
// bodies, invoke sites hyperlink to their declared target's anchor,
// overrides/overridden-by lists from the hierarchy, user annotations inline.
inline HtmlResult emit_html(const std::vector<const ClassFile*>& classes, const Hierarchy* h,
                            const AnnotationMap* notes = nullptr) {
  using namespace html_detail;
  HtmlResult res;
  if (classes.empty()) return res;
  const InternPool& pool = *classes.front()->names;

  std::set<u4> emitted;  // class ids with a file
  for (const ClassFile* cf : classes) emitted.insert(cf->this_class.value);

  std::set<std::tuple<u4, u4, u4>> used_notes;

  for (const ClassFile* cf : classes) {
    std::ostringstream os;
    std::string cname = pool.class_name_of(cf->this_class);
    os << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" << escape(cname)
       << "</title>\n<style>\n"
          "body{font-family:monospace}\n"
          ".note{color:#905; margin-left:2em}\n"
          ".hdr{font-weight:bold}\n"
          "details{margin:4px 0 4px 1em}\n"
          "</style></head>\n<body>\n";
    os << "<h1 class=\"hdr\">" << (cf->is_interface ? "interface " : "class ")
       << escape(cname) << "</h1>\n";
    if (cf->super_class) {
      std::string sname = pool.class_name_of(*cf->super_class);
      os << "<p>extends ";
      if (emitted.count(cf->super_class->value))
        os << "<a href=\"" << file_of(sname) << "\">" << escape(sname) << "</a>";
      else
        os << escape(sname);
      os << "</p>\n";
    }
    for (const auto& f : cf->fields) {
      const FieldSig& sig = pool.field_sig_of(f.sig);
      os << "<p>field " << escape(java_type_name(sig.type, pool)) << " " << escape(sig.name)
         << "</p>\n";
    }

    const ClassNode* node = h ? h->find(cf->this_class) : nullptr;

    for (const auto& m : cf->methods) {
      const MethodSig& sig = pool.method_sig_of(m.sig);
      os << "<details open id=\"" << anchor_of(m.sig) << "\">\n<summary>"
         << escape((sig.ret ? java_type_name(*sig.ret, pool) : "void") + " " + sig.name +
                   print_method_descriptor(sig, pool))
         << "</summary>\n";

      // overriding relations via the hierarchy
      if (node && h && !(m.access & acc::kStatic) && sig.name != "<init>" &&
          sig.name != "<clinit>") {
        for (const ClassNode* up = node->super; up; up = up->super) {
          if (up->declared_method(m.sig)) {
            std::string uname = pool.class_name_of(up->name);
            os << "<p>overrides ";
            if (emitted.count(up->name.value))
              os << "<a href=\"" << file_of(uname) << "#" << anchor_of(m.sig) << "\">"
                 << escape(uname) << "</a>";
            else
              os << escape(uname);
            os << "</p>\n";
            break;
          }
        }
        std::vector<const ClassNode*> work(node->children.begin(), node->children.end());
        std::vector<std::string> overriders;
        while (!work.empty()) {
          const ClassNode* c = work.back();
          work.pop_back();
          if (c->declared_method(m.sig)) overriders.push_back(pool.class_name_of(c->name));
          work.insert(work.end(), c->children.begin(), c->children.end());
        }
        std::sort(overriders.begin(), overriders.end());
        if (!overriders.empty()) {
          os << "<p>overridden by ";
          for (std::size_t i = 0; i < overriders.size(); ++i) {
            if (i) os << ", ";
            os << "<a href=\"" << file_of(overriders[i]) << "#" << anchor_of(m.sig) << "\">"
               << escape(overriders[i]) << "</a>";
          }
          os << "</p>\n";
        }
      }

      if (m.body) {
        os << "<pre>\n";
        for (const PcInstr& pi : m.body->instructions()) {
          std::string line = instr_text(pi.instr, pool);
          if (auto* iv = instr_as<op::Invoke>(pi.instr); iv && iv->owner.is_class() &&
                                                         emitted.count(
                                                             iv->owner.class_name().value)) {
            std::string oname = pool.class_name_of(iv->owner.class_name());
            line = "<a href=\"" + file_of(oname) + "#" + anchor_of(iv->sig) + "\">" +
                   escape(line) + "</a>";
          } else {
            line = escape(line);
          }
          os << pi.pc << ": " << line << "\n";
          if (notes) {
            auto key = std::tuple<u4, u4, u4>(cf->this_class.value, m.sig.value, pi.pc);
            auto it = notes->notes.find(key);
            if (it != notes->notes.end()) {
              used_notes.insert(key);
              for (const auto& n : it->second)
                os << "<span class=\"note\">; " << escape(n) << "</span>\n";
            }
          }
        }
        os << "</pre>\n";
      }
      os << "</details>\n";
    }
    os << "</body></html>\n";
    res.files.emplace(file_of(cname), os.str());
  }

  if (notes)
    for (const auto& [key, v] : notes->notes)
      if (!used_notes.count(key)) ++res.annotation_warnings;
  return res;
}

}  // namespace jbw
