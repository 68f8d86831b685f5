// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slimir/ir.hpp"

namespace slimir::ir {

struct Diagnostic {
  std::string entity;              // function/global/struct name or block label
  std::optional<InstId> inst;
  std::string message;
};

struct ValidateOptions {
  /// Require a `main(argc: int, argv: ptr<ptr<byte>>)` entry point.
  /// Library fixtures used only in unit tests may turn this off.
  bool require_main = true;
};

/// Structural and type checking. Returns an empty list iff the program is
/// well formed. Never throws.
std::vector<Diagnostic> validate(const Program& p, const ValidateOptions& opts = {});

std::string diagnostics_to_string(const std::vector<Diagnostic>& ds);

}  // namespace slimir::ir
