#pragma once

#include <sstream>

#include "jbw/ir.hpp"

namespace jbw {

struct MethodStats {
  ClassNameId owner;
  MethodSigId sig;
  u4 bytecode_count = 0;
  u2 bytecode_locals = 0;
  u4 ir_var_count = 0;
  double increase_ratio = 0;  // ir vars / max(1, bytecode locals)
};

inline MethodStats ir_stats(const IrMethod& m) {
  MethodStats s;
  s.owner = m.owner;
  s.sig = m.sig;
  s.bytecode_count = m.bytecode_instr_count;
  s.bytecode_locals = m.bytecode_locals;
  s.ir_var_count = static_cast<u4>(m.vars.size());
  s.increase_ratio =
      static_cast<double>(s.ir_var_count) / std::max<u4>(1, s.bytecode_locals);
  return s;
}

// Aggregation bucketed by method size in bytecodes. The last bucket starts
// where the variable increase is known to degrade (very large methods).
struct StatsBucket {
  u4 lo, hi;  // [lo, hi), hi == 0 means open-ended
  u4 method_count = 0;
  double ratio_sum = 0;
  double ratio_max = 0;
  u4 over_double = 0;  // methods whose ratio exceeds 2.0

  double mean() const { return method_count ? ratio_sum / method_count : 0.0; }
};

inline std::vector<StatsBucket> bucketize(const std::vector<MethodStats>& all) {
  std::vector<StatsBucket> buckets = {{0, 50}, {50, 200}, {200, 800}, {800, 0}};
  for (const auto& s : all) {
    for (auto& b : buckets) {
      if (s.bytecode_count < b.lo) continue;
      if (b.hi != 0 && s.bytecode_count >= b.hi) continue;
      b.method_count++;
      b.ratio_sum += s.increase_ratio;
      b.ratio_max = std::max(b.ratio_max, s.increase_ratio);
      if (s.increase_ratio > 2.0) b.over_double++;
      break;
    }
  }
  return buckets;
}

inline std::string render_stats_table(const std::vector<MethodStats>& all) {
  auto buckets = bucketize(all);
  std::ostringstream os;
  os << "size bucket      methods  mean ratio  max ratio  >2.0x\n";
  for (const auto& b : buckets) {
    std::ostringstream label;
    if (b.hi)
      label << "[" << b.lo << "," << b.hi << ")";
    else
      label << "[" << b.lo << ",+)";
    os << label.str();
    for (std::size_t p = label.str().size(); p < 17; ++p) os << ' ';
    char line[96];
    std::snprintf(line, sizeof(line), "%7u  %10.3f  %9.3f  %5u\n", b.method_count, b.mean(),
                  b.ratio_max, b.over_double);
    os << line;
  }
  return os.str();
}

}  // namespace jbw
