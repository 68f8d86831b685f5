// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slimir/pipeline.hpp"

#include "slimir/validate.hpp"

namespace slimir::pipeline {

std::pair<ir::Program, DebloatReport> debloat_pipeline(const ir::Program& p,
                                                       const PipelineConfig& cfg) {
  DebloatReport report;
  report.before = harness::stats(p);

  ir::Program necked;
  try {
    neck::MinerConfig mc;
    mc.category = cfg.category;
    mc.file_parsing_apis = cfg.parse_apis;
    auto [marked, nr] = neck::mine_neck(p, mc);
    necked = std::move(marked);
    report.neck = std::move(nr);
  } catch (const neck::NeckError& e) {
    throw PipelineError("mine", e.what());
  }

  try {
    report.partial_state =
        interp::run_to_neck(necked, cfg.supplied_args, cfg.step_budget);
  } catch (const interp::InterpError& e) {
    throw PipelineError("interpret-to-neck", e.what());
  }

  ir::Program converted;
  try {
    report.plan = constconv::plan_conversion(necked, report.partial_state, report.neck.marker);
    converted = constconv::apply_conversion(necked, report.plan);
  } catch (const constconv::StateMismatch& e) {
    throw PipelineError("convert", e.what());
  }

  auto [final_prog, passes] =
      simplify::run_simplify(converted, report.partial_state.visited_funcs);
  report.passes = std::move(passes);

  auto diags = ir::validate(final_prog);
  if (!diags.empty())
    throw PipelineError("simplify", "output does not validate:\n" +
                                        ir::diagnostics_to_string(diags));

  report.after = harness::stats(final_prog);
  report.reduction = harness::reduction_report(report.before, report.after);
  return {std::move(final_prog), std::move(report)};
}

}  // namespace slimir::pipeline
