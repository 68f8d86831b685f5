// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "slimir/analysis.hpp"
#include "slimir/harness.hpp"
#include "slimir/parse.hpp"
#include "slimir/pipeline.hpp"
#include "slimir/validate.hpp"

namespace {

std::string read_corpus(const std::string& name) {
  std::ifstream in(std::string(SLIMIR_CORPUS_DIR) + "/" + name, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string& wc_source() {
  static std::string src = read_corpus("wc.ir");
  return src;
}

std::string make_stdin(int lines) {
  std::string s;
  for (int i = 0; i < lines; ++i) s += "line " + std::to_string(i) + "\n";
  return s;
}

void BM_ParseWc(benchmark::State& state) {
  for (auto _ : state) {
    auto p = slimir::ir::parse_program(wc_source());
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_ParseWc);

void BM_ValidateWc(benchmark::State& state) {
  auto p = slimir::ir::parse_program(wc_source());
  for (auto _ : state) {
    auto diags = slimir::ir::validate(p);
    benchmark::DoNotOptimize(diags);
  }
}
BENCHMARK(BM_ValidateWc);

void BM_DominatorsWcMain(benchmark::State& state) {
  auto p = slimir::ir::parse_program(wc_source());
  auto g = slimir::analysis::build_cfg(*p.find_function("main"));
  for (auto _ : state) {
    auto dt = slimir::analysis::dominators(g);
    benchmark::DoNotOptimize(dt);
  }
}
BENCHMARK(BM_DominatorsWcMain);

void BM_RunWcLines(benchmark::State& state) {
  auto p = slimir::ir::parse_program(wc_source());
  slimir::interp::Invocation inv;
  inv.args = {"-l"};
  inv.stdin_bytes = make_stdin(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto out = slimir::interp::run_full(p, inv);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_RunWcLines)->Arg(16)->Arg(256);

void BM_DebloatWc(benchmark::State& state) {
  auto p = slimir::ir::parse_program(wc_source());
  slimir::pipeline::PipelineConfig cfg;
  cfg.supplied_args = {"-l"};
  for (auto _ : state) {
    auto result = slimir::pipeline::debloat_pipeline(p, cfg);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_DebloatWc);

}  // namespace

BENCHMARK_MAIN();
