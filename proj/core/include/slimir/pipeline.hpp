// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "slimir/constconv.hpp"
#include "slimir/harness.hpp"
#include "slimir/interp.hpp"
#include "slimir/ir.hpp"
#include "slimir/neck.hpp"
#include "slimir/simplify.hpp"

namespace slimir::pipeline {

struct PipelineConfig {
  neck::ProgramCategory category = neck::ProgramCategory::CommandLine;
  std::vector<std::string> parse_apis{"read_cfg_line"};
  std::vector<std::string> supplied_args;
  std::int64_t step_budget = 10'000'000;
  std::uint64_t seed = 1;
  int trials = 100;
};

struct DebloatReport {
  neck::NeckReport neck;
  interp::PartialState partial_state;
  constconv::ConversionPlan plan;
  std::vector<simplify::PassReport> passes;
  harness::SizeStats before;
  harness::SizeStats after;
  std::map<std::string, double> reduction;
};

class PipelineError : public std::runtime_error {
public:
  PipelineError(std::string phase, const std::string& msg)
      : std::runtime_error("[" + phase + "] " + msg), phase(std::move(phase)) {}
  std::string phase;
};

/// mine -> interpret to the neck -> constant conversion -> simplification.
/// Each phase's errors surface as PipelineError tagged with the phase name.
std::pair<ir::Program, DebloatReport> debloat_pipeline(const ir::Program& p,
                                                       const PipelineConfig& cfg);

}  // namespace slimir::pipeline
