// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "slimir/ir.hpp"

namespace slimir::neck {

enum class ProgramCategory { CommandLine, ConfigFile };

const char* category_name(ProgramCategory c);

struct MinerConfig {
  ProgramCategory category = ProgramCategory::CommandLine;
  std::vector<std::string> file_parsing_apis{"read_cfg_line"};
};

struct Evidence {
  bool executed_once_proxy = false;
  bool articulation = false;
  bool dominates_rest = false;

  bool admissible() const {
    return executed_once_proxy && articulation && dominates_rest;
  }
};

struct NeckCandidate {
  ir::InstId inst = -1;
  std::string block;
  int distance = 0;   // block hops from the entry of the scanned function
  int offset = 0;     // instruction offset inside the block
  Evidence evidence;
};

struct NeckReport {
  ProgramCategory category = ProgramCategory::CommandLine;
  ir::InstId heuristic_start = -1;
  std::string start_block;
  std::vector<NeckCandidate> candidates;  // sorted by (distance, inst)
  ir::InstId chosen = -1;
  std::string chosen_block;
  ir::InstId marker = -1;  // id of the inserted neckmark
};

class NeckError : public std::runtime_error {
public:
  enum class Kind { NoHeuristicMatch, NoAdmissibleCandidate, UnknownInstId };

  NeckError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

/// Heuristic analysis: the starting instruction for the structural scan.
/// Command-line programs: the closest use of argv-derived data inside a
/// natural loop of @main. Config-file programs: the closest call site of a
/// file-parsing API. Throws NeckError{NoHeuristicMatch}.
ir::InstId heuristic_start(const ir::Program& p, const MinerConfig& cfg);

/// Structural analysis: evidence for every candidate at or after `start`
/// (block granularity). Returns admissible and inadmissible candidates;
/// the caller filters.
std::vector<NeckCandidate> structural_candidates(const ir::Program& p, ir::InstId start);

/// Full miner: heuristic start, structural filtering, closest admissible
/// candidate wins, marker inserted. Deterministic.
std::pair<ir::Program, NeckReport> mine_neck(const ir::Program& p, const MinerConfig& cfg);

}  // namespace slimir::neck
