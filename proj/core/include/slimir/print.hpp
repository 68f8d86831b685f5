// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "slimir/ir.hpp"

namespace slimir::ir {

/// Deterministic textual form. parse(print(p)) is structurally equal to p.
/// Output is empty for an empty program and otherwise ends with a newline.
std::string print_program(const Program& p);

std::string print_instruction(const Instruction& in);

/// Printed form with registers renamed %v0, %v1, ... in order of first
/// occurrence per function. Two programs are structurally equal iff their
/// canonical prints match.
std::string canonical_print(const Program& p);

/// IR string literal quoting: "..." with \n \t \r \" \\ \0 and \xNN escapes.
std::string quote_string(const std::string& raw);

}  // namespace slimir::ir
