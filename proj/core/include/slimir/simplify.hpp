// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <vector>

#include "slimir/ir.hpp"

namespace slimir::simplify {

struct PassReport {
  std::string pass;
  int round = 0;
  std::int64_t removed_insts = 0;
  std::int64_t removed_blocks = 0;
  std::int64_t removed_funcs = 0;
  std::int64_t removed_globals = 0;
  std::int64_t iterations = 0;
  std::int64_t folded_sites = 0;              // constant_fold only
  std::vector<ir::InstId> unfolded_div_traps; // divisions left in place

  bool changed() const {
    return removed_insts || removed_blocks || removed_funcs || removed_globals ||
           folded_sites;
  }
};

/// Folds all-constant arithmetic and comparisons and turns cbr on a constant
/// condition into br, to a fixed point. Division that would trap is left in
/// place and reported.
std::pair<ir::Program, PassReport> constant_fold(const ir::Program& p);

/// Removes blocks unreachable from the entry and merges a block into its
/// unique predecessor when that predecessor has it as unique successor.
std::pair<ir::Function, PassReport> simplify_cfg(const ir::Function& f);

/// The cleanup pass: unused functions (with the indirect-call guard), unused
/// globals, unused or initialized-but-unused stack slots, and side-effect
/// free instructions without uses.
std::pair<ir::Program, PassReport> cleanup(const ir::Program& p,
                                           const std::set<std::string>& visited_funcs);

/// fold -> cfg -> cleanup, iterated to a fixed point; the neck marker is
/// dropped once the rounds settle.
std::pair<ir::Program, std::vector<PassReport>> run_simplify(
    const ir::Program& p, const std::set<std::string>& visited_funcs);

}  // namespace slimir::simplify
