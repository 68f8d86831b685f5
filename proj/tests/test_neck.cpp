// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slimir/json_io.hpp"
#include "slimir/neck.hpp"
#include "support/test_util.hpp"

using namespace slimir;

namespace {

const neck::NeckCandidate* find_candidate(const std::vector<neck::NeckCandidate>& cs,
                                          const std::string& block) {
  for (const auto& c : cs)
    if (c.block == block) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("wc heuristic start is the first in-loop argv use") {
  auto p = test_util::load_corpus("wc.ir");
  neck::MinerConfig cfg;
  ir::InstId start = neck::heuristic_start(p, cfg);
  auto loc = p.find_inst(start);
  REQUIRE(loc.has_value());
  // The argument-scan loop reads the argv cursor first thing in its header.
  CHECK(loc->block->label == "args_head");
  CHECK(loc->inst_index == 0);
  CHECK(loc->inst->op == ir::Opcode::Load);
}

TEST_CASE("config programs start at the file-parsing call site") {
  auto p = test_util::load_corpus("config_demo.ir");
  neck::MinerConfig cfg;
  cfg.category = neck::ProgramCategory::ConfigFile;
  ir::InstId start = neck::heuristic_start(p, cfg);
  auto loc = p.find_inst(start);
  REQUIRE(loc.has_value());
  CHECK(loc->inst->op == ir::Opcode::Call);
  CHECK(loc->inst->operands[0].name == "read_cfg_line");
}

TEST_CASE("a main that never touches argv has no heuristic match") {
  auto p = ir::parse_program("fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
                             "entry:\n"
                             "  call @print_str, \"hi\"\n"
                             "  ret 0\n"
                             "}\n");
  CHECK_THROWS_AS(neck::heuristic_start(p, {}), neck::NeckError);
}

TEST_CASE("argv uses outside loops do not count") {
  auto p = ir::parse_program("fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
                             "entry:\n"
                             "  %a0 = index %argv, 1\n"
                             "  ret 0\n"
                             "}\n");
  CHECK_THROWS_AS(neck::heuristic_start(p, {}), neck::NeckError);
}

TEST_CASE("wc structural evidence matches the worked example") {
  auto p = test_util::load_corpus("wc.ir");
  ir::InstId start = neck::heuristic_start(p, {});
  auto candidates = neck::structural_candidates(p, start);

  // Blocks inside the argument loop are rejected: in a loop, not
  // articulation points.
  for (const char* loopy : {"args_head", "args_body", "set_chars", "check_l"}) {
    const auto* c = find_candidate(candidates, loopy);
    REQUIRE(c != nullptr);
    CHECK(!c->evidence.executed_once_proxy);
    CHECK(!c->evidence.admissible());
  }

  // The block after the argument loop satisfies all three properties.
  const auto* neck_cand = find_candidate(candidates, "after_args");
  REQUIRE(neck_cand != nullptr);
  CHECK(neck_cand->evidence.executed_once_proxy);
  CHECK(neck_cand->evidence.articulation);
  CHECK(neck_cand->evidence.dominates_rest);
  CHECK(neck_cand->evidence.admissible());
  CHECK(neck_cand->distance == 1);

  // The entry block is not part of the scan (it precedes the start).
  CHECK(find_candidate(candidates, "entry") == nullptr);
}

TEST_CASE("straight-line main: every block admissible, entry included") {
  auto p = ir::parse_program("fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
                             "entry:\n"
                             "  %x = const int 1\n"
                             "  br mid\n"
                             "mid:\n"
                             "  %y = add %x, 1\n"
                             "  br last\n"
                             "last:\n"
                             "  ret %y\n"
                             "}\n");
  auto candidates =
      neck::structural_candidates(p, test_util::inst_at(p, "main", "entry", 0));
  REQUIRE(candidates.size() == 3);
  for (const auto& c : candidates) {
    CAPTURE(c.block);
    CHECK(c.evidence.admissible());
  }
}

TEST_CASE("single-block main is admissible") {
  auto p = ir::parse_program("fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
                             "entry:\n"
                             "  ret 0\n"
                             "}\n");
  auto candidates =
      neck::structural_candidates(p, test_util::inst_at(p, "main", "entry", 0));
  REQUIRE(candidates.size() == 1);
  CHECK(candidates[0].evidence.admissible());
}

TEST_CASE("mine_neck picks the closest admissible candidate") {
  // Two admissible candidates at distances 3 and 5; the nearer one wins.
  auto p = ir::parse_program(
      "fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
      "entry:\n"
      "  %cur_slot = alloca ptr<ptr<byte>>\n"
      "  br setup\n"
      "setup:\n"
      "  %first = index %argv, 1\n"
      "  store %first, %cur_slot\n"
      "  %end = index %argv, %argc\n"
      "  br scan\n"
      "scan:\n"
      "  %cur = load %cur_slot\n"
      "  %more = lt %cur, %end\n"
      "  cbr %more, scan_next, near\n"
      "scan_next:\n"
      "  %nxt = index %cur, 1\n"
      "  store %nxt, %cur_slot\n"
      "  br scan\n"
      "near:\n"
      "  %a = const int 1\n"
      "  br mid\n"
      "mid:\n"
      "  %b = add %a, 1\n"
      "  br far\n"
      "far:\n"
      "  ret %b\n"
      "}\n");
  auto [marked, report] = neck::mine_neck(p, {});
  CHECK(report.chosen_block == "near");
  const auto* near_c = find_candidate(report.candidates, "near");
  const auto* far_c = find_candidate(report.candidates, "far");
  REQUIRE(near_c != nullptr);
  REQUIRE(far_c != nullptr);
  CHECK(near_c->evidence.admissible());
  CHECK(far_c->evidence.admissible());
  CHECK(near_c->distance == 3);
  CHECK(far_c->distance == 5);
  CHECK(ir::find_neck(marked).has_value());
}

TEST_CASE("wc neck is the block boundary after the argument loop") {
  auto p = test_util::load_corpus("wc.ir");
  auto [marked, report] = neck::mine_neck(p, {});
  CHECK(report.chosen_block == "after_args");
  const auto* blk = marked.find_function("main")->find_block("after_args");
  CHECK(blk->insts.front().op == ir::Opcode::NeckMark);
}

TEST_CASE("mining is deterministic and input-independent") {
  auto p = test_util::load_corpus("wc.ir");
  // The miner never sees supplied arguments, so any two configs of the same
  // category must agree; byte-identical reports on repeated runs.
  neck::MinerConfig a, b;
  b.file_parsing_apis = {"read_cfg_line", "read_line"};  // irrelevant for cli
  auto [p1, r1] = neck::mine_neck(p, a);
  auto [p2, r2] = neck::mine_neck(p, b);
  CHECK(r1.chosen == r2.chosen);
  CHECK(json_io::neck_report_to_json(r1) == json_io::neck_report_to_json(r2));
  CHECK(ir::print_program(p1) == ir::print_program(p2));
}

TEST_CASE("the mined neck block sits in no natural loop") {
  for (const char* name : {"wc.ir", "sort_mini.ir", "head_mini.ir", "fptr_demo.ir"}) {
    CAPTURE(name);
    auto p = test_util::load_corpus(name);
    auto [marked, report] = neck::mine_neck(p, {});
    const auto* f = marked.find_function("main");
    auto g = analysis::build_cfg(*f);
    auto dt = analysis::dominators(g);
    auto li = analysis::loops(g, dt);
    CHECK(!li.in_any_loop(report.chosen_block));
  }
}

TEST_CASE("config category requires parse APIs") {
  auto p = test_util::load_corpus("config_demo.ir");
  neck::MinerConfig cfg;
  cfg.category = neck::ProgramCategory::ConfigFile;
  cfg.file_parsing_apis.clear();
  CHECK_THROWS_AS(neck::heuristic_start(p, cfg), neck::NeckError);
}

TEST_CASE("config_demo mines to the block after the config loop") {
  auto p = test_util::load_corpus("config_demo.ir");
  neck::MinerConfig cfg;
  cfg.category = neck::ProgramCategory::ConfigFile;
  auto [marked, report] = neck::mine_neck(p, cfg);
  CHECK(report.chosen_block == "after_cfg");
}

TEST_CASE("unknown start instruction") {
  auto p = test_util::load_corpus("wc.ir");
  CHECK_THROWS_AS(neck::structural_candidates(p, 424242), neck::NeckError);
}
