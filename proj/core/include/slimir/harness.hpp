// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slimir/interp.hpp"
#include "slimir/ir.hpp"

namespace slimir::harness {

struct SizeStats {
  std::int64_t ir_insts = 0;
  std::int64_t funcs = 0;
  std::int64_t basic_blocks = 0;
  std::int64_t globals = 0;

  bool operator==(const SizeStats&) const = default;
};

SizeStats stats(const ir::Program& p);

/// A delayed-input extension of a supplied-argument invocation: the stdin
/// bytes plus optional extra trailing arguments.
struct InputExtension {
  std::string stdin_bytes;
  std::vector<std::string> extra_args;
};

enum class InputProfile { Text, Bytes };

/// Deterministic per seed. The text profile yields at most 50 newline
/// terminated lines of at most 78 printable characters (bytes from
/// {0x09, 0x0A, 0x20..0x7E}); the bytes profile yields arbitrary bytes.
std::vector<InputExtension> random_delayed_inputs(std::uint64_t seed, int n,
                                                  InputProfile profile);

struct Mismatch {
  int trial = 0;
  InputExtension extension;
  interp::RunOutcome original;
  interp::RunOutcome specialized;
};

struct DiffReport {
  int trials = 0;
  std::vector<Mismatch> mismatches;

  bool pass() const { return mismatches.empty(); }
};

/// Runs both programs on suppliedArgs extended by each extension and
/// compares stdout bytes and exit status; traps are outcomes and must match
/// by kind.
DiffReport diff_run(const ir::Program& orig, const ir::Program& spec,
                    const std::vector<std::string>& supplied_args,
                    const std::vector<InputExtension>& extensions,
                    std::int64_t step_budget = 10'000'000);

/// Percentage reduction per metric; a metric is absent when its before
/// count is zero.
std::map<std::string, double> reduction_report(const SizeStats& before,
                                               const SizeStats& after);

}  // namespace slimir::harness
