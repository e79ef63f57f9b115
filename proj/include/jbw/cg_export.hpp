#pragma once

#include <sstream>

#include "jbw/cfg.hpp"
#include "jbw/program.hpp"

namespace jbw {

// DOT rendering of the call graph: node ids come from the interned cms ids,
// edges are sorted, so output is byte-stable.
inline std::string cg_to_dot(const ProgramModel& p) {
  CgSummary s = cg_query(p);
  std::ostringstream os;
  os << "digraph callgraph {\n";
  for (u4 m : s.methods)
    os << "  m" << m << " [label=\"" << p.cms_name(m) << "\"];\n";
  for (const auto& e : s.edges)
    os << "  m" << e.caller << " -> m" << e.callee << " [label=\"" << e.pc << "\"];\n";
  os << "}\n";
  return os.str();
}

namespace cg_detail {

inline std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace cg_detail

// Line-oriented JSON: exactly one edge object per line, deterministic order.
inline std::string cg_to_json_lines(const ProgramModel& p) {
  CgSummary s = cg_query(p);
  std::ostringstream os;
  for (const auto& e : s.edges) {
    os << "{\"caller\":\"" << cg_detail::json_escape(p.cms_name(e.caller)) << "\",\"pc\":"
       << e.pc << ",\"callee\":\"" << cg_detail::json_escape(p.cms_name(e.callee)) << "\"}\n";
  }
  return os.str();
}

// DOT for an intra-procedural CFG.
inline std::string cfg_to_dot(const Cfg& g, const std::string& title) {
  std::ostringstream os;
  os << "digraph \"" << title << "\" {\n";
  for (u4 i = 0; i < g.normal.size(); ++i) {
    for (u4 t : g.normal[i]) os << "  n" << i << " -> n" << t << ";\n";
    for (u4 t : g.exceptional[i]) os << "  n" << i << " -> n" << t << " [style=dashed];\n";
  }
  os << "  n" << g.exit << " [label=\"exit\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace jbw
