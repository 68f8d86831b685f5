// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Each criterion carries a wall-clock bound checked with steady_clock.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include "slimir/constconv.hpp"
#include "slimir/harness.hpp"
#include "slimir/interp.hpp"
#include "slimir/neck.hpp"
#include "slimir/pipeline.hpp"
#include "slimir/validate.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace slimir;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool ok, double seconds,
            double budget_s, const std::string& detail = {}) {
  bool in_time = seconds <= budget_s;
  bool pass = ok && in_time;
  if (!pass) ++failures;
  std::printf("[%s] criterion %d: %s (%.2fs of %.0fs)%s%s\n", pass ? "PASS" : "FAIL",
              number, name.c_str(), seconds, budget_s, detail.empty() ? "" : " - ",
              detail.c_str());
}

struct CorpusConfig {
  const char* prog;
  std::vector<std::string> args;
  neck::ProgramCategory cat = neck::ProgramCategory::CommandLine;
};

const std::vector<CorpusConfig>& corpus_configs() {
  static std::vector<CorpusConfig> rows = {
      {"wc.ir", {"-l"}},
      {"wc.ir", {"-c"}},
      {"sort_mini.ir", {}},
      {"sort_mini.ir", {"-r"}},
      {"sort_mini.ir", {"-u"}},
      {"head_mini.ir", {}},
      {"head_mini.ir", {"-n", "3"}},
      {"head_mini.ir", {"-v"}},
      {"config_demo.ir", {"upper"}, neck::ProgramCategory::ConfigFile},
      {"config_demo.ir", {}, neck::ProgramCategory::ConfigFile},
      {"fptr_demo.ir", {"-d"}},
      {"fptr_demo.ir", {}},
  };
  return rows;
}

pipeline::PipelineConfig to_pipeline_config(const CorpusConfig& c) {
  pipeline::PipelineConfig cfg;
  cfg.category = c.cat;
  cfg.supplied_args = c.args;
  return cfg;
}

// Criterion 1: the worked-example partial state, exactly.
void criterion_1() {
  auto t0 = Clock::now();
  bool ok = false;
  std::string detail;
  try {
    auto p = test_util::load_corpus("wc.ir");
    auto [marked, nr] = neck::mine_neck(p, {});
    auto st = interp::run_to_neck(marked, {"-l"});
    auto flag = interp::Path::stack_slot(
        "main", test_util::inst_at(marked, "main", "entry", 0), "flag_slot");
    const auto* tl = st.find(interp::Path::global("total_lines"));
    const auto* tc = st.find(interp::Path::global("total_chars"));
    const auto* cc = st.find(interp::Path::struct_elem(flag, 0));
    const auto* cl = st.find(interp::Path::struct_elem(flag, 1));
    ok = st.entries.size() == 4 && tl && tc && cc && cl &&
         tl->value == ir::ConstValue::of_int(0) &&
         tc->value == ir::ConstValue::of_int(0) &&
         cc->value == ir::ConstValue::of_byte(0) &&
         cl->value == ir::ConstValue::of_int(1) && st.neck_crossings == 1;
    if (!ok) detail = "captured state differs from the worked example";
  } catch (const std::exception& e) {
    detail = e.what();
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  report(1, "wc -l partial state is {0, 0, count_lines=1, count_chars=0}", ok, secs, 1.0,
         detail);
}

// Criterion 2: the worked-example debloating result.
void criterion_2() {
  auto t0 = Clock::now();
  bool ok = false;
  std::string detail;
  try {
    auto p = test_util::load_corpus("wc.ir");
    auto [out, rep] = pipeline::debloat_pipeline(p, to_pipeline_config({"wc.ir", {"-l"}}));

    bool no_decode = out.find_function("decode_chars") == nullptr;
    bool no_total_chars = out.find_global("total_chars") == nullptr;

    // No conditional test may read a struct field: after specialization the
    // flag checks are gone.
    bool no_flag_tests = true;
    const auto* main_fn = out.find_function("main");
    for (const auto& b : main_fn->blocks) {
      for (const auto& in : b.insts) {
        if (in.op != ir::Opcode::Cbr) continue;
        if (in.operands[0].kind != ir::Operand::Kind::Reg) continue;
        for (const auto& b2 : main_fn->blocks)
          for (const auto& def : b2.insts)
            if (def.result && *def.result == in.operands[0].name &&
                def.op == ir::Opcode::Load)
              for (const auto& b3 : main_fn->blocks)
                for (const auto& addr : b3.insts)
                  if (addr.result && def.operands[0].is_reg(*addr.result) &&
                      addr.op == ir::Opcode::Field)
                    no_flag_tests = false;
      }
    }

    // Unconditional line counter: the read-success branch leads straight to
    // the block that increments @total_lines and loops back.
    bool unconditional_counter = false;
    for (const auto& b : main_fn->blocks) {
      bool has_store = false;
      for (const auto& in : b.insts)
        if (in.op == ir::Opcode::Store &&
            in.operands[1].kind == ir::Operand::Kind::Global &&
            in.operands[1].name == "total_lines")
          has_store = true;
      if (!has_store) continue;
      const auto& term = b.insts.back();
      if (term.op == ir::Opcode::Br) unconditional_counter = true;
    }

    bool golden = ir::structural_equal(out, test_util::load_corpus("wc.l.expected.ir"));
    ok = no_decode && no_total_chars && no_flag_tests && unconditional_counter && golden;
    if (!ok) {
      std::ostringstream ss;
      ss << "decode_chars gone=" << no_decode << " total_chars gone=" << no_total_chars
         << " no flag tests=" << no_flag_tests
         << " unconditional counter=" << unconditional_counter << " golden=" << golden;
      detail = ss.str();
    }
  } catch (const std::exception& e) {
    detail = e.what();
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  report(2, "wc -l debloats to the golden specialized program", ok, secs, 2.0, detail);
}

// Criterion 3: the mined neck and its input-independence.
void criterion_3() {
  auto t0 = Clock::now();
  bool ok = false;
  std::string detail;
  try {
    auto p = test_util::load_corpus("wc.ir");
    auto [m1, r1] = neck::mine_neck(p, {});
    auto [m2, r2] = neck::mine_neck(p, {});
    auto lp = pipeline::debloat_pipeline(p, to_pipeline_config({"wc.ir", {"-l"}}));
    auto cp = pipeline::debloat_pipeline(p, to_pipeline_config({"wc.ir", {"-c"}}));
    ok = r1.chosen_block == "after_args" && r1.chosen == r2.chosen &&
         lp.second.neck.chosen == cp.second.neck.chosen &&
         lp.second.neck.chosen_block == "after_args";
    if (!ok) detail = "neck at " + r1.chosen_block;
  } catch (const std::exception& e) {
    detail = e.what();
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  report(3, "wc neck is the boundary after the argument loop, for -l and -c", ok, secs,
         1.0, detail);
}

// Criterion 4: functionality preservation across the corpus.
void criterion_4() {
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  int pairs = 0;
  try {
    for (const auto& row : corpus_configs()) {
      auto p = test_util::load_corpus(row.prog);
      auto [out, rep] = pipeline::debloat_pipeline(p, to_pipeline_config(row));
      auto inputs = harness::random_delayed_inputs(7, 100, harness::InputProfile::Text);
      auto diff = harness::diff_run(p, out, row.args, inputs);
      ++pairs;
      if (!diff.pass()) {
        ok = false;
        detail += std::string(row.prog) + " mismatches=" +
                  std::to_string(diff.mismatches.size()) + "; ";
      }
    }
    if (pairs < 8) {
      ok = false;
      detail += "only " + std::to_string(pairs) + " pairs";
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  report(4, "12 corpus configs x 100 delayed inputs: zero mismatches", ok, secs, 60.0,
         detail);
}

// Criterion 5: reduction direction for wc -l.
void criterion_5() {
  auto t0 = Clock::now();
  bool ok = false;
  std::string detail;
  try {
    auto p = test_util::load_corpus("wc.ir");
    auto [out, rep] = pipeline::debloat_pipeline(p, to_pipeline_config({"wc.ir", {"-l"}}));
    // Golden counts frozen from the first verified run.
    bool golden_counts = rep.before.ir_insts == 96 && rep.before.funcs == 2 &&
                         rep.after.ir_insts == 47 && rep.after.funcs == 1;
    double inst_reduction = rep.reduction.at("irInsts");
    ok = (rep.before.funcs - rep.after.funcs >= 1) && inst_reduction >= 25.0 &&
         golden_counts;
    std::ostringstream ss;
    ss << "funcs " << rep.before.funcs << "->" << rep.after.funcs << ", insts "
       << rep.before.ir_insts << "->" << rep.after.ir_insts << " ("
       << static_cast<int>(inst_reduction) << "%)";
    detail = ss.str();
  } catch (const std::exception& e) {
    detail = e.what();
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  report(5, "wc -l drops a function and >=25% of instructions", ok, secs, 2.0, detail);
}

// Criterion 6: the indirect-call guard.
void criterion_6() {
  auto t0 = Clock::now();
  bool ok = false;
  std::string detail;
  try {
    auto p = test_util::load_corpus("fptr_demo.ir");
    auto [out, rep] =
        pipeline::debloat_pipeline(p, to_pipeline_config({"fptr_demo.ir", {"-d"}}));
    auto cg = analysis::call_graph(out);
    bool icall_alive = !cg.indirect_sites.empty();
    ok = out.find_function("double_op") != nullptr &&
         cg.address_taken.count("double_op") == 1 && icall_alive &&
         out.find_function("triple_op") == nullptr;
    if (!ok) detail = "address-taken function not preserved";
  } catch (const std::exception& e) {
    detail = e.what();
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  report(6, "fptr_demo -d keeps the address-taken op through debloating", ok, secs, 1.0,
         detail);
}

// Criterion 7: analysis oracle suites.
void criterion_7() {
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  try {
    std::mt19937_64 rng(0xACC7);
    auto random_cfg = [&](int max_nodes) {
      int n = 1 + static_cast<int>(rng() % max_nodes);
      double p = 0.15 + 0.1 * static_cast<double>(rng() % 4);
      std::vector<std::pair<int, int>> edges;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          if (a == b) continue;
          if (static_cast<double>(rng() % 1000) / 1000.0 < p) edges.push_back({a, b});
        }
      return test_util::make_cfg(n, edges);
    };
    int dom_bad = 0, artic_bad = 0;
    for (int i = 0; i < 50; ++i) {
      auto g = random_cfg(10);
      if (analysis::dominators(g).idom != oracles::idom_oracle(g)) ++dom_bad;
    }
    for (int i = 0; i < 100; ++i) {
      auto g = random_cfg(12);
      if (analysis::articulation_points(g) != oracles::articulation_oracle(g))
        ++artic_bad;
    }
    ok = dom_bad == 0 && artic_bad == 0;
    if (!ok)
      detail = "dominator mismatches=" + std::to_string(dom_bad) +
               " articulation mismatches=" + std::to_string(artic_bad);
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  report(7, "dominators (50 digraphs) and articulation points (100 graphs) match oracles",
         ok, secs, 30.0, detail);
}

// Criterion 8: simplification fixed point and neck-state consistency.
void criterion_8() {
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  try {
    for (const auto& row : corpus_configs()) {
      auto p = test_util::load_corpus(row.prog);
      neck::MinerConfig mc;
      mc.category = row.cat;
      auto [marked, nr] = neck::mine_neck(p, mc);
      auto st = interp::run_to_neck(marked, row.args);
      auto plan = constconv::plan_conversion(marked, st, nr.marker);
      auto cc = constconv::apply_conversion(marked, plan);

      // Consistency: the converted program reproduces the captured state.
      auto st2 = interp::run_to_neck(cc, row.args);
      bool same = st.entries.size() == st2.entries.size();
      for (const auto& e : st.entries) {
        const auto* other = st2.find(e.path);
        if (!other || !(other->value == e.value)) same = false;
      }
      if (!same) {
        ok = false;
        detail += std::string(row.prog) + " state drift; ";
      }

      // Fixed point of the simplifier.
      auto [once, r1] = simplify::run_simplify(cc, st.visited_funcs);
      auto [twice, r2] = simplify::run_simplify(once, st.visited_funcs);
      if (!ir::structural_equal(once, twice)) {
        ok = false;
        detail += std::string(row.prog) + " not a fixed point; ";
      }
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  report(8, "simplify is idempotent and conversion reproduces the captured state", ok,
         secs, 60.0, detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  if (failures) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all 8 criteria passed\n");
  return 0;
}
