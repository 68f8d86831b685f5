// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slimir/neck.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "slimir/analysis.hpp"

namespace slimir::neck {

using analysis::Cfg;
using ir::Function;
using ir::InstId;
using ir::Instruction;
using ir::Opcode;
using ir::Operand;
using ir::Program;

const char* category_name(ProgramCategory c) {
  return c == ProgramCategory::CommandLine ? "cli" : "config";
}

namespace {

struct SiteKey {
  int distance;
  int offset;
  InstId id;

  bool operator<(const SiteKey& o) const {
    if (distance != o.distance) return distance < o.distance;
    if (offset != o.offset) return offset < o.offset;
    return id < o.id;
  }
};

// Registers and stack slots transitively carrying argv-derived pointers.
// Flow-insensitive: results of instructions with a tainted operand are
// tainted; loads of slots that ever receive a tainted value are tainted.
struct ArgvTaint {
  std::set<std::string> regs;
  std::set<std::string> slots;  // alloca result registers

  explicit ArgvTaint(const Function& main_fn) {
    if (main_fn.params.size() >= 2) regs.insert(main_fn.params[1].name);
    std::map<std::string, std::string> load_source;  // result -> slot reg
    std::map<std::string, bool> is_alloca;
    for (const auto& b : main_fn.blocks)
      for (const auto& in : b.insts)
        if (in.result && in.op == Opcode::Alloca) is_alloca[*in.result] = true;

    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& b : main_fn.blocks) {
        for (const auto& in : b.insts) {
          bool any_tainted = false;
          for (const auto& o : in.operands)
            if (o.kind == Operand::Kind::Reg && regs.count(o.name)) any_tainted = true;

          if (in.op == Opcode::Store) {
            const Operand& val = in.operands[0];
            const Operand& dst = in.operands[1];
            if (val.kind == Operand::Kind::Reg && regs.count(val.name) &&
                dst.kind == Operand::Kind::Reg && is_alloca.count(dst.name)) {
              if (slots.insert(dst.name).second) changed = true;
            }
            continue;
          }
          if (in.op == Opcode::Load) {
            const Operand& src = in.operands[0];
            if (src.kind == Operand::Kind::Reg && slots.count(src.name) && in.result) {
              if (regs.insert(*in.result).second) changed = true;
            }
          }
          if (any_tainted && in.result) {
            if (regs.insert(*in.result).second) changed = true;
          }
        }
      }
    }
  }

  bool touches(const Instruction& in) const {
    for (const auto& o : in.operands)
      if (o.kind == Operand::Kind::Reg && (regs.count(o.name) || slots.count(o.name)))
        return true;
    return false;
  }
};

const Function& main_or_throw(const Program& p) {
  const Function* f = p.find_function("main");
  if (!f)
    throw NeckError(NeckError::Kind::NoHeuristicMatch, "program has no @main");
  return *f;
}

}  // namespace

InstId heuristic_start(const Program& p, const MinerConfig& cfg) {
  const Function& fn = main_or_throw(p);
  Cfg g = analysis::build_cfg(fn);
  analysis::DomTree dt = analysis::dominators(g);
  analysis::LoopInfo li = analysis::loops(g, dt);
  auto dist = analysis::bfs_distance(g, g.entry);

  std::optional<SiteKey> best;
  auto consider = [&](const std::string& block, int offset, InstId id) {
    auto it = dist.find(block);
    if (it == dist.end()) return;  // unreachable
    SiteKey key{it->second, offset, id};
    if (!best || key < *best) best = key;
  };

  if (cfg.category == ProgramCategory::CommandLine) {
    ArgvTaint taint(fn);
    for (const auto& b : fn.blocks) {
      if (!li.in_any_loop(b.label)) continue;
      for (std::size_t i = 0; i < b.insts.size(); ++i) {
        if (taint.touches(b.insts[i]))
          consider(b.label, static_cast<int>(i), b.insts[i].id);
      }
    }
    if (!best)
      throw NeckError(NeckError::Kind::NoHeuristicMatch,
                      "no use of argv inside a loop of @main");
  } else {
    std::set<std::string> apis(cfg.file_parsing_apis.begin(), cfg.file_parsing_apis.end());
    if (apis.empty())
      throw NeckError(NeckError::Kind::NoHeuristicMatch, "no file-parsing APIs configured");
    for (const auto& b : fn.blocks) {
      for (std::size_t i = 0; i < b.insts.size(); ++i) {
        const auto& in = b.insts[i];
        if (in.op == Opcode::Call && apis.count(in.operands[0].name))
          consider(b.label, static_cast<int>(i), in.id);
      }
    }
    if (!best)
      throw NeckError(NeckError::Kind::NoHeuristicMatch,
                      "no call site of a file-parsing API in @main");
  }
  return best->id;
}

std::vector<NeckCandidate> structural_candidates(const Program& p, InstId start) {
  auto loc = p.find_inst(start);
  if (!loc)
    throw NeckError(NeckError::Kind::UnknownInstId,
                    "no instruction with id " + std::to_string(start));
  const Function& fn = *loc->function;

  Cfg g = analysis::build_cfg(fn);
  analysis::DomTree dt = analysis::dominators(g);
  analysis::LoopInfo li = analysis::loops(g, dt);
  std::set<std::string> artic = analysis::articulation_points(g);
  auto dist = analysis::bfs_distance(g, g.entry);

  // Undirected degree over the entry-reachable subgraph; degree <= 1 means
  // the block is a boundary node and counts as articulation evidence for
  // neck purposes (entry of a chain, single exit).
  auto reach = g.reachable();
  std::map<std::string, std::set<std::string>> undirected;
  for (const auto& [n, ss] : g.succs) {
    if (!reach.count(n)) continue;
    for (const auto& s : ss) {
      if (!reach.count(s) || s == n) continue;
      undirected[n].insert(s);
      undirected[s].insert(n);
    }
  }

  // Blocks at or after the start: the start's own block plus everything
  // reachable from it.
  std::set<std::string> scan{loc->block->label};
  {
    std::deque<std::string> work{loc->block->label};
    while (!work.empty()) {
      std::string n = work.front();
      work.pop_front();
      for (const auto& s : g.succs.at(n))
        if (scan.insert(s).second) work.push_back(s);
    }
  }

  // Successor closure per block for the dominates-rest check.
  auto closure = [&](const std::string& from) {
    std::set<std::string> out;
    std::deque<std::string> work{from};
    while (!work.empty()) {
      std::string n = work.front();
      work.pop_front();
      for (const auto& s : g.succs.at(n))
        if (out.insert(s).second) work.push_back(s);
    }
    return out;
  };

  std::vector<NeckCandidate> out;
  for (const auto& b : fn.blocks) {
    if (!scan.count(b.label) || !dist.count(b.label)) continue;
    NeckCandidate c;
    c.block = b.label;
    c.distance = dist.at(b.label);
    if (b.label == loc->block->label) {
      c.inst = start;
      c.offset = static_cast<int>(loc->inst_index);
    } else {
      c.inst = b.insts.front().id;
      c.offset = 0;
    }
    auto succ_set = closure(b.label);
    bool self_reach = succ_set.count(b.label) > 0;
    c.evidence.executed_once_proxy = !li.in_any_loop(b.label) && !self_reach;
    c.evidence.articulation =
        artic.count(b.label) > 0 || undirected[b.label].size() <= 1;
    bool dominates_all = true;
    for (const auto& r : succ_set) {
      if (r == b.label) continue;
      if (!dt.dominates(b.label, r)) {
        dominates_all = false;
        break;
      }
    }
    c.evidence.dominates_rest = dominates_all;
    out.push_back(std::move(c));
  }

  std::sort(out.begin(), out.end(), [](const NeckCandidate& a, const NeckCandidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.inst < b.inst;
  });
  return out;
}

std::pair<Program, NeckReport> mine_neck(const Program& p, const MinerConfig& cfg) {
  NeckReport report;
  report.category = cfg.category;
  report.heuristic_start = heuristic_start(p, cfg);
  auto sloc = p.find_inst(report.heuristic_start);
  report.start_block = sloc->block->label;

  report.candidates = structural_candidates(p, report.heuristic_start);

  const NeckCandidate* chosen = nullptr;
  for (const auto& c : report.candidates) {
    if (!c.evidence.admissible()) continue;
    if (!chosen || c.distance < chosen->distance ||
        (c.distance == chosen->distance && c.inst < chosen->inst))
      chosen = &c;
  }
  if (!chosen)
    throw NeckError(NeckError::Kind::NoAdmissibleCandidate,
                    "no admissible neck candidate after the heuristic start");
  report.chosen = chosen->inst;
  report.chosen_block = chosen->block;

  Program marked = ir::insert_neck_marker(p, chosen->inst);
  report.marker = *ir::find_neck(marked);
  return {std::move(marked), std::move(report)};
}

}  // namespace slimir::neck
