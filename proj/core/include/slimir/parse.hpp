// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

#include "slimir/ir.hpp"

namespace slimir::ir {

class ParseError : public std::runtime_error {
public:
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
  int line;
  int col;
};

/// Thrown when a parsed name (label, global, struct, function) does not
/// resolve. Carries the offending line like ParseError.
class ResolutionError : public ParseError {
public:
  using ParseError::ParseError;
};

/// Parses the textual IR. InstIds are assigned in source order starting at 0.
Program parse_program(const std::string& text);

}  // namespace slimir::ir
