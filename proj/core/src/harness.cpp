// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slimir/harness.hpp"

#include <random>

namespace slimir::harness {

SizeStats stats(const ir::Program& p) {
  SizeStats s;
  s.funcs = static_cast<std::int64_t>(p.functions.size());
  s.globals = static_cast<std::int64_t>(p.globals.size());
  for (const auto& f : p.functions) {
    s.basic_blocks += static_cast<std::int64_t>(f.blocks.size());
    for (const auto& b : f.blocks)
      s.ir_insts += static_cast<std::int64_t>(b.insts.size());
  }
  return s;
}

std::vector<InputExtension> random_delayed_inputs(std::uint64_t seed, int n,
                                                  InputProfile profile) {
  std::mt19937_64 rng(seed);
  std::vector<InputExtension> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    InputExtension ext;
    if (profile == InputProfile::Text) {
      auto lines = static_cast<int>(rng() % 51);  // 0..50
      for (int l = 0; l < lines; ++l) {
        auto len = static_cast<int>(rng() % 79);  // 0..78
        for (int k = 0; k < len; ++k) {
          // Printable run with occasional tabs.
          std::uint64_t r = rng() % 96;
          char c = r == 95 ? '\t' : static_cast<char>(0x20 + r);
          ext.stdin_bytes += c;
        }
        ext.stdin_bytes += '\n';
      }
    } else {
      auto len = static_cast<int>(rng() % 2049);
      for (int k = 0; k < len; ++k)
        ext.stdin_bytes += static_cast<char>(rng() & 0xFF);
    }
    out.push_back(std::move(ext));
  }
  return out;
}

DiffReport diff_run(const ir::Program& orig, const ir::Program& spec,
                    const std::vector<std::string>& supplied_args,
                    const std::vector<InputExtension>& extensions,
                    std::int64_t step_budget) {
  DiffReport rep;
  rep.trials = static_cast<int>(extensions.size());
  for (std::size_t i = 0; i < extensions.size(); ++i) {
    const auto& ext = extensions[i];
    interp::Invocation inv;
    inv.args = supplied_args;
    inv.args.insert(inv.args.end(), ext.extra_args.begin(), ext.extra_args.end());
    inv.stdin_bytes = ext.stdin_bytes;
    inv.step_budget = step_budget;
    interp::RunOutcome a = interp::run_full(orig, inv);
    interp::RunOutcome b = interp::run_full(spec, inv);
    if (!a.same_behavior(b)) {
      rep.mismatches.push_back({static_cast<int>(i), ext, std::move(a), std::move(b)});
    }
  }
  return rep;
}

std::map<std::string, double> reduction_report(const SizeStats& before,
                                               const SizeStats& after) {
  std::map<std::string, double> out;
  auto add = [&](const std::string& name, std::int64_t b, std::int64_t a) {
    if (b > 0) out[name] = 100.0 * static_cast<double>(b - a) / static_cast<double>(b);
  };
  add("irInsts", before.ir_insts, after.ir_insts);
  add("funcs", before.funcs, after.funcs);
  add("basicBlocks", before.basic_blocks, after.basic_blocks);
  add("globals", before.globals, after.globals);
  return out;
}

}  // namespace slimir::harness
