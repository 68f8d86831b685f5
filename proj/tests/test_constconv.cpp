// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slimir/constconv.hpp"
#include "slimir/interp.hpp"
#include "slimir/neck.hpp"
#include "support/test_util.hpp"

using namespace slimir;
using constconv::ConversionPlan;
using constconv::Rewrite;

namespace {

struct Prepared {
  ir::Program necked;
  interp::PartialState state;
  ir::InstId neck;
};

Prepared prepare(const std::string& corpus, std::vector<std::string> args,
                 neck::MinerConfig cfg = {}) {
  auto p = test_util::load_corpus(corpus);
  auto [marked, report] = neck::mine_neck(p, cfg);
  auto st = interp::run_to_neck(marked, args);
  return {std::move(marked), std::move(st), report.marker};
}

const ir::Instruction* inst_by_id(const ir::Program& p, ir::InstId id) {
  auto loc = p.find_inst(id);
  return loc ? loc->inst : nullptr;
}

bool entries_match(const interp::PartialState& a, const interp::PartialState& b) {
  if (a.entries.size() != b.entries.size()) return false;
  for (const auto& e : a.entries) {
    const auto* other = b.find(e.path);
    if (!other || !(other->value == e.value)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("wc -l plan matches the worked example") {
  auto prep = prepare("wc.ir", {"-l"});
  ConversionPlan plan =
      constconv::plan_conversion(prep.necked, prep.state, prep.neck);

  // No pre-neck loads of either global exist, so nothing to replace there.
  for (const auto& rw : plan.pre_neck)
    CHECK(rw.action == Rewrite::Action::RewriteStoreSource);

  // The flag-field stores that disagree with the captured state become
  // constant: the set_chars store (1 -> 0) and the count_lines init (0 -> 1).
  REQUIRE(plan.pre_neck.size() == 2);
  for (const auto& rw : plan.pre_neck) {
    const auto* in = inst_by_id(prep.necked, rw.site);
    REQUIRE(in != nullptr);
    CHECK(in->op == ir::Opcode::Store);
  }

  // Post-neck: all four flag-field loads become constants...
  CHECK(plan.post_neck.size() == 4);
  for (const auto& rw : plan.post_neck) {
    CHECK(rw.action == Rewrite::Action::ReplaceLoadWithConst);
    const auto* in = inst_by_id(prep.necked, rw.site);
    CHECK(in->op == ir::Opcode::Load);
  }

  // ...while the counting globals stay loads: both are stored after the neck.
  int skipped_globals = 0;
  for (const auto& s : plan.skipped) {
    if ((s.path == "@total_lines" || s.path == "@total_chars") &&
        s.reason.find("post-neck store") != std::string::npos)
      ++skipped_globals;
  }
  CHECK(skipped_globals == 2);
}

TEST_CASE("applying the wc -l plan preserves the captured state") {
  auto prep = prepare("wc.ir", {"-l"});
  auto plan = constconv::plan_conversion(prep.necked, prep.state, prep.neck);
  ir::Program converted = constconv::apply_conversion(prep.necked, plan);

  // Consistency contract: re-running to the neck reproduces the state.
  auto st2 = interp::run_to_neck(converted, {"-l"});
  CHECK(entries_match(prep.state, st2));

  // Idempotence: nothing left to convert.
  auto neck2 = ir::find_neck(converted);
  REQUIRE(neck2.has_value());
  auto plan2 = constconv::plan_conversion(converted, st2, *neck2);
  CHECK(plan2.pre_neck.empty());
  CHECK(plan2.post_neck.empty());
  CHECK(plan2.new_globals.empty());
}

TEST_CASE("an empty plan leaves the program structurally unchanged") {
  auto prep = prepare("wc.ir", {"-l"});
  ConversionPlan empty;
  ir::Program out = constconv::apply_conversion(prep.necked, empty);
  CHECK(ir::structural_equal(out, prep.necked));
}

TEST_CASE("conversion alone already preserves behavior") {
  for (auto args : std::vector<std::vector<std::string>>{{"-l"}, {"-c"}}) {
    auto prep = prepare("wc.ir", args);
    auto plan = constconv::plan_conversion(prep.necked, prep.state, prep.neck);
    auto converted = constconv::apply_conversion(prep.necked, plan);
    for (const char* text : {"", "one\n", "a\nbb\nccc\n", "no trailing newline"}) {
      interp::Invocation inv;
      inv.args = args;
      inv.stdin_bytes = text;
      auto a = interp::run_full(prep.necked, inv);
      auto b = interp::run_full(converted, inv);
      CAPTURE(text);
      CHECK(a.stdout_bytes == b.stdout_bytes);
      CHECK(a.exit_status == b.exit_status);
    }
  }
}

TEST_CASE("captured strings become fresh globals with rewritten stores") {
  std::string src = test_util::read_file(test_util::corpus_path("wc.ir"));
  auto p = ir::parse_program(
      "fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
      "entry:\n"
      "  %iface_slot = alloca ptr<byte>\n"
      "  %cur_slot = alloca ptr<ptr<byte>>\n"
      "  %first = index %argv, 1\n"
      "  store %first, %cur_slot\n"
      "  %end = index %argv, %argc\n"
      "  br scan\n"
      "scan:\n"
      "  %cur = load %cur_slot\n"
      "  %more = lt %cur, %end\n"
      "  cbr %more, body, after\n"
      "body:\n"
      "  %arg = load %cur\n"
      "  store %arg, %iface_slot\n"
      "  %nxt = index %cur, 1\n"
      "  store %nxt, %cur_slot\n"
      "  br scan\n"
      "after:\n"
      "  neckmark\n"
      "  %p = load %iface_slot\n"
      "  call @print_str, %p\n"
      "  ret 0\n"
      "}\n");
  auto st = interp::run_to_neck(p, {"ens160"});
  auto plan = constconv::plan_conversion(p, st, *ir::find_neck(p));

  REQUIRE(plan.new_globals.size() == 1);
  CHECK(plan.new_globals[0].name == "str0");
  CHECK(plan.new_globals[0].bytes == "ens160");

  auto converted = constconv::apply_conversion(p, plan);
  const auto* g = converted.find_global("str0");
  REQUIRE(g != nullptr);
  CHECK(ir::type_to_string(g->type) == "arr<byte, 7>");  // NUL included

  // The store of the argument pointer now stores the constant global.
  bool rewritten = false;
  for (const auto& b : converted.find_function("main")->blocks)
    for (const auto& in : b.insts)
      if (in.op == ir::Opcode::Store && in.operands[0].kind == ir::Operand::Kind::Global &&
          in.operands[0].name == "str0")
        rewritten = true;
  CHECK(rewritten);

  // Behavior with the same supplied args is unchanged.
  interp::Invocation inv;
  inv.args = {"ens160"};
  inv.stdin_bytes = "";
  CHECK(interp::run_full(converted, inv).stdout_bytes ==
        interp::run_full(p, inv).stdout_bytes);
}

TEST_CASE("pre-neck loads inside loops are skipped, not converted") {
  auto p = ir::parse_program(
      "fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
      "entry:\n"
      "  %i = alloca int\n"
      "  store 0, %i\n"
      "  %lim_slot = alloca ptr<ptr<byte>>\n"
      "  %first = index %argv, 1\n"
      "  store %first, %lim_slot\n"
      "  %end = index %argv, %argc\n"
      "  br loop\n"
      "loop:\n"
      "  %iv = load %i\n"
      "  %cur = load %lim_slot\n"
      "  %go = lt %cur, %end\n"
      "  cbr %go, body, out\n"
      "body:\n"
      "  %iv2 = add %iv, 1\n"
      "  store %iv2, %i\n"
      "  %nxt = index %cur, 1\n"
      "  store %nxt, %lim_slot\n"
      "  br loop\n"
      "out:\n"
      "  neckmark\n"
      "  %final = load %i\n"
      "  call @print_int, %final\n"
      "  ret 0\n"
      "}\n");
  auto st = interp::run_to_neck(p, {"a", "b", "c"});
  auto plan = constconv::plan_conversion(p, st, *ir::find_neck(p));

  // The loop-resident load of %i must be listed under skipped; the post-neck
  // load converts to the final value 3.
  bool loop_skip = false;
  for (const auto& s : plan.skipped)
    if (s.path == "main/%i" && s.reason.find("loop") != std::string::npos)
      loop_skip = true;
  CHECK(loop_skip);
  REQUIRE(plan.post_neck.size() == 1);
  CHECK(plan.post_neck[0].value == ir::ConstValue::of_int(3));

  auto converted = constconv::apply_conversion(p, plan);
  interp::Invocation inv;
  inv.args = {"a", "b", "c"};
  inv.stdin_bytes = "";
  CHECK(interp::run_full(converted, inv).stdout_bytes == "3");
}

TEST_CASE("a state from another program is a mismatch") {
  auto wc = prepare("wc.ir", {"-l"});
  auto other = prepare("head_mini.ir", {});
  CHECK_THROWS_AS(
      constconv::plan_conversion(other.necked, wc.state, other.neck),
      constconv::StateMismatch);
}

TEST_CASE("address-taken locations with aliasing post-neck stores are skipped") {
  auto p = ir::parse_program(
      "fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
      "entry:\n"
      "  %x = alloca int\n"
      "  store 7, %x\n"
      "  %xp = alloca ptr<int>\n"
      "  store %x, %xp\n"
      "  neckmark\n"
      "  %p = load %xp\n"
      "  store 9, %p\n"
      "  %v = load %x\n"
      "  call @print_int, %v\n"
      "  ret 0\n"
      "}\n");
  auto st = interp::run_to_neck(p, {});
  auto plan = constconv::plan_conversion(p, st, *ir::find_neck(p));

  // %x is written through %xp after the neck: its load must stay.
  for (const auto& rw : plan.post_neck) {
    const auto* in = inst_by_id(p, rw.site);
    REQUIRE(in != nullptr);
    REQUIRE(in->result.has_value());
    CHECK(*in->result != "v");
  }
  auto converted = constconv::apply_conversion(p, plan);
  interp::Invocation inv;
  inv.stdin_bytes = "";
  CHECK(interp::run_full(converted, inv).stdout_bytes == "9");
}

TEST_CASE("config_demo conversion bakes in the mode") {
  neck::MinerConfig cfg;
  cfg.category = neck::ProgramCategory::ConfigFile;
  auto prep = prepare("config_demo.ir", {"upper"}, cfg);
  auto plan = constconv::plan_conversion(prep.necked, prep.state, prep.neck);
  REQUIRE(plan.post_neck.size() == 1);
  CHECK(plan.post_neck[0].value == ir::ConstValue::of_int(1));
  auto converted = constconv::apply_conversion(prep.necked, plan);
  auto st2 = interp::run_to_neck(converted, {"upper"});
  CHECK(entries_match(prep.state, st2));
}
