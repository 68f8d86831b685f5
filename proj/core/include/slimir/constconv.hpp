// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "slimir/interp.hpp"
#include "slimir/ir.hpp"

namespace slimir::constconv {

struct Rewrite {
  enum class Action { ReplaceLoadWithConst, RewriteStoreSource };

  ir::InstId site = -1;
  Action action = Action::ReplaceLoadWithConst;
  ir::ConstValue value;
  std::optional<std::string> global_name;  // string rewrites store a global ref
};

struct NewGlobal {
  std::string name;
  std::string bytes;  // materialized as arr<byte, bytes+1>, NUL-terminated
};

struct Skipped {
  std::string path;
  std::string reason;
};

struct ConversionPlan {
  std::vector<Rewrite> pre_neck;
  std::vector<Rewrite> post_neck;
  std::vector<Skipped> skipped;
  std::vector<NewGlobal> new_globals;

  bool empty() const { return pre_neck.empty() && post_neck.empty() && new_globals.empty(); }
};

class StateMismatch : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Builds the rewrite plan enforcing the captured state. Pre-neck: loads of
/// base locations become constants (outside loops), stores through captured
/// pointers / to captured struct elements / of captured strings get constant
/// sources. Post-neck: loads become constants only when the location is
/// provably unmodified in the post-neck region. Throws StateMismatch when an
/// entry path no longer resolves in `p`.
ConversionPlan plan_conversion(const ir::Program& p, const interp::PartialState& st,
                               ir::InstId neck);

/// Applies a plan produced for `p`. Replaced loads become fresh const
/// instructions; rewritten stores keep their InstId. The result validates.
ir::Program apply_conversion(const ir::Program& p, const ConversionPlan& plan);

}  // namespace slimir::constconv
