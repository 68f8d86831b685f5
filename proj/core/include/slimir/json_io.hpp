// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "slimir/constconv.hpp"
#include "slimir/harness.hpp"
#include "slimir/interp.hpp"
#include "slimir/neck.hpp"
#include "slimir/pipeline.hpp"

namespace slimir::json_io {

// All serializers emit deterministic, insertion-ordered JSON with two-space
// indentation and a trailing newline.

std::string state_to_json(const interp::PartialState& st);
interp::PartialState state_from_json(const std::string& text);

std::string neck_report_to_json(const neck::NeckReport& r);

std::string plan_to_json(const constconv::ConversionPlan& plan);

std::string stats_to_json(const harness::SizeStats& s);

std::string diff_report_to_json(const harness::DiffReport& r);

std::string debloat_report_to_json(const pipeline::DebloatReport& r);

pipeline::PipelineConfig pipeline_config_from_json(const std::string& text);

}  // namespace slimir::json_io
