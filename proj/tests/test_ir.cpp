// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slimir/parse.hpp"
#include "slimir/print.hpp"
#include "slimir/validate.hpp"
#include "support/test_util.hpp"

using namespace slimir;

TEST_CASE("empty source parses to an empty program") {
  ir::Program p = ir::parse_program("");
  CHECK(p.structs.empty());
  CHECK(p.globals.empty());
  CHECK(p.functions.empty());
  CHECK(ir::print_program(p) == "");
}

TEST_CASE("wc.ir parses with the expected shape") {
  ir::Program p = test_util::load_corpus("wc.ir");
  REQUIRE(p.globals.size() == 2);
  CHECK(p.globals[0].name == "total_lines");
  CHECK(p.globals[1].name == "total_chars");
  REQUIRE(p.functions.size() == 2);
  CHECK(p.functions[0].name == "main");
  CHECK(p.functions[1].name == "decode_chars");
  REQUIRE(p.structs.size() == 1);
  CHECK(p.structs[0].name == "Flags");
  CHECK(p.structs[0].fields.size() == 2);
}

TEST_CASE("InstIds are assigned in source order") {
  ir::Program p = test_util::load_corpus("wc.ir");
  ir::InstId prev = -1;
  for (const auto& f : p.functions)
    for (const auto& b : f.blocks)
      for (const auto& in : b.insts) {
        CHECK(in.id > prev);
        prev = in.id;
      }
}

TEST_CASE("round-trip is structurally identical across the corpus") {
  for (const char* name : {"wc.ir", "sort_mini.ir", "head_mini.ir", "config_demo.ir",
                           "fptr_demo.ir"}) {
    CAPTURE(name);
    ir::Program p = ir::parse_program(test_util::read_file(test_util::corpus_path(name)));
    ir::Program again = ir::parse_program(ir::print_program(p));
    CHECK(ir::structural_equal(p, again));
    // And the printed form is a fixed point.
    CHECK(ir::print_program(p) == ir::print_program(again));
  }
}

TEST_CASE("global definitions print exactly") {
  ir::Program p = ir::parse_program("global @g : int = 7\n");
  CHECK(ir::print_program(p) == "global @g : int = 7\n");
}

TEST_CASE("string escapes round-trip") {
  std::string src =
      "global @s : str = \"a\\n\\t\\\"b\\\\c\\x01\\xFF\"\n";
  ir::Program p = ir::parse_program(src);
  CHECK(p.globals[0].init.str_val == std::string("a\n\t\"b\\c\x01\xff"));
  ir::Program again = ir::parse_program(ir::print_program(p));
  CHECK(again.globals[0].init.str_val == p.globals[0].init.str_val);
}

TEST_CASE("unknown label is a resolution error") {
  std::string src = "fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
                    "entry:\n"
                    "  br Lx\n"
                    "}\n";
  CHECK_THROWS_AS(ir::parse_program(src), ir::ResolutionError);
}

TEST_CASE("unknown global and function references are resolution errors") {
  CHECK_THROWS_AS(ir::parse_program("fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
                                    "entry:\n"
                                    "  %x = load @nope\n"
                                    "  ret 0\n"
                                    "}\n"),
                  ir::ResolutionError);
  CHECK_THROWS_AS(ir::parse_program("fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
                                    "entry:\n"
                                    "  call @nope\n"
                                    "  ret 0\n"
                                    "}\n"),
                  ir::ResolutionError);
}

TEST_CASE("syntax errors carry line and column") {
  try {
    ir::parse_program("global @g : int =\n");
    FAIL("expected ParseError");
  } catch (const ir::ParseError& e) {
    CHECK(e.line == 1);
    CHECK(e.col > 1);
  }
}

TEST_CASE("validator accepts the whole corpus") {
  for (const char* name : {"wc.ir", "sort_mini.ir", "head_mini.ir", "config_demo.ir",
                           "fptr_demo.ir"}) {
    CAPTURE(name);
    ir::Program p = test_util::load_corpus(name);
    auto diags = ir::validate(p);
    CHECK_MESSAGE(diags.empty(), ir::diagnostics_to_string(diags));
  }
}

TEST_CASE("validator flags a block without a terminator") {
  std::string src = "fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
                    "entry:\n"
                    "  %a = const int 1\n"
                    "blk:\n"
                    "  ret 0\n"
                    "}\n";
  ir::Program p = ir::parse_program(src);
  auto diags = ir::validate(p);
  REQUIRE(!diags.empty());
  bool found = false;
  for (const auto& d : diags)
    if (d.message.find("terminator") != std::string::npos &&
        d.message.find("entry") != std::string::npos)
      found = true;
  CHECK(found);
}

TEST_CASE("validator flags use before assignment along a path") {
  // %x is only assigned on one arm of the diamond.
  std::string src = "fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
                    "entry:\n"
                    "  %c = ge %argc, 2\n"
                    "  cbr %c, a, b\n"
                    "a:\n"
                    "  %x = const int 1\n"
                    "  br join\n"
                    "b:\n"
                    "  br join\n"
                    "join:\n"
                    "  %y = add %x, 1\n"
                    "  ret %y\n"
                    "}\n";
  ir::Program p = ir::parse_program(src);
  auto diags = ir::validate(p);
  REQUIRE(!diags.empty());
  bool found = false;
  for (const auto& d : diags) {
    if (d.message.find("%x") == std::string::npos) continue;
    if (d.inst) found = true;
  }
  CHECK(found);
}

TEST_CASE("validator rejects double assignment of a register") {
  std::string src = "fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
                    "entry:\n"
                    "  %x = const int 1\n"
                    "  %x = const int 2\n"
                    "  ret %x\n"
                    "}\n";
  auto diags = ir::validate(ir::parse_program(src));
  CHECK(!diags.empty());
}

TEST_CASE("validator rejects fully-constant division by zero only") {
  std::string ok = "fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
                   "entry:\n"
                   "  %q = div %argc, 0\n"
                   "  ret %q\n"
                   "}\n";
  CHECK(ir::validate(ir::parse_program(ok)).empty());
  std::string bad = "fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
                    "entry:\n"
                    "  %q = div 4, 0\n"
                    "  ret %q\n"
                    "}\n";
  CHECK(!ir::validate(ir::parse_program(bad)).empty());
}

TEST_CASE("validator enforces the main signature unless waived") {
  std::string src = "fn @helper(%x: int) -> int {\n"
                    "entry:\n"
                    "  ret %x\n"
                    "}\n";
  ir::Program p = ir::parse_program(src);
  CHECK(!ir::validate(p).empty());
  CHECK(ir::validate(p, {.require_main = false}).empty());
}

TEST_CASE("validator rejects recursive struct containment by value") {
  std::string src = "struct A { int, struct A }\n";
  auto diags = ir::validate(ir::parse_program(src), {.require_main = false});
  CHECK(!diags.empty());
  // Recursion through a pointer is fine.
  std::string ok = "struct B { int, ptr<struct B> }\n";
  CHECK(ir::validate(ir::parse_program(ok), {.require_main = false}).empty());
}

TEST_CASE("validator type-checks array global initializers") {
  CHECK(ir::validate(ir::parse_program("global @s : arr<byte, 7> = \"ens160\"\n"),
                     {.require_main = false})
            .empty());
  CHECK(!ir::validate(ir::parse_program("global @s : arr<byte, 6> = \"ens160\"\n"),
                      {.require_main = false})
             .empty());
}

TEST_CASE("neck marker insertion preserves ids and position") {
  ir::Program p = test_util::load_corpus("wc.ir");
  ir::InstId at = test_util::inst_at(p, "main", "after_args", 0);
  ir::Program marked = ir::insert_neck_marker(p, at);

  auto neck = ir::find_neck(marked);
  REQUIRE(neck.has_value());
  const auto* blk = marked.find_function("main")->find_block("after_args");
  CHECK(blk->insts.front().op == ir::Opcode::NeckMark);
  CHECK(blk->insts.front().id == *neck);
  CHECK(blk->insts[1].id == at);

  // All pre-existing ids survive unchanged.
  for (const auto& f : p.functions)
    for (const auto& b : f.blocks)
      for (const auto& in : b.insts) CHECK(marked.find_inst(in.id).has_value());

  SUBCASE("unknown id") {
    CHECK_THROWS_AS(ir::insert_neck_marker(p, 99999), ir::IrError);
  }
  SUBCASE("double insertion") {
    CHECK_THROWS_AS(ir::insert_neck_marker(marked, at), ir::IrError);
  }
}

TEST_CASE("structural equality ignores register names but not structure") {
  std::string a = "fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
                  "entry:\n"
                  "  %a = const int 1\n"
                  "  ret %a\n"
                  "}\n";
  std::string b = "fn @main(%n: int, %v: ptr<ptr<byte>>) -> int {\n"
                  "entry:\n"
                  "  %result = const int 1\n"
                  "  ret %result\n"
                  "}\n";
  std::string c = "fn @main(%argc: int, %argv: ptr<ptr<byte>>) -> int {\n"
                  "entry:\n"
                  "  %a = const int 2\n"
                  "  ret %a\n"
                  "}\n";
  CHECK(ir::structural_equal(ir::parse_program(a), ir::parse_program(b)));
  CHECK(!ir::structural_equal(ir::parse_program(a), ir::parse_program(c)));
}
