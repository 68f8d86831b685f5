// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "slimir/ir.hpp"

namespace slimir::analysis {

/// Control-flow graph of one function. Nodes are block labels; edges come
/// from the block terminators. Unreachable nodes are retained and flagged.
struct Cfg {
  std::string entry;
  std::vector<std::string> nodes;  // function block order
  std::map<std::string, std::vector<std::string>> succs;
  std::map<std::string, std::vector<std::string>> preds;
  std::set<std::string> unreachable;

  bool has_node(const std::string& n) const;
  std::set<std::string> reachable() const;
};

Cfg build_cfg(const ir::Function& f);

/// Immediate dominators of entry-reachable nodes; entry maps to itself.
struct DomTree {
  std::map<std::string, std::string> idom;

  /// Reflexive dominance. False if either node is unreachable.
  bool dominates(const std::string& a, const std::string& b) const;
};

DomTree dominators(const Cfg& g);

/// Articulation points of the undirected view of the CFG restricted to
/// entry-reachable nodes: v is returned iff removing v disconnects two
/// other reachable nodes.
std::set<std::string> articulation_points(const Cfg& g);

struct LoopInfo {
  std::set<std::pair<std::string, std::string>> back_edges;  // (tail, head)
  std::map<std::string, std::set<std::string>> loop_blocks;  // header -> members

  bool in_any_loop(const std::string& block) const;
};

LoopInfo loops(const Cfg& g, const DomTree& d);

/// Unweighted shortest hop counts over directed edges; unreachable nodes
/// are absent from the result.
std::map<std::string, int> bfs_distance(const Cfg& g, const std::string& from);

/// Per-function def-use chains. Keys are register names; each use is listed
/// once per operand slot that names the definition.
struct DefUse {
  std::map<std::string, std::vector<ir::InstId>> reg_uses;
};

DefUse def_use(const ir::Function& f);

/// Program-wide uses of each global, one entry per operand slot.
std::map<std::string, std::vector<ir::InstId>> global_uses(const ir::Program& p);

struct CallEdge {
  std::string caller;
  std::string callee;
  ir::InstId site;
};

struct IndirectSite {
  std::string caller;
  ir::InstId site;
};

struct CallGraph {
  std::set<std::string> nodes;
  std::vector<CallEdge> edges;
  std::set<std::string> address_taken;   // funcaddr operands
  std::vector<IndirectSite> indirect_sites;

  std::set<std::string> reachable_from(const std::string& root) const;
};

/// Direct call edges only; icall sites are recorded separately.
/// Intrinsics are not graph nodes.
CallGraph call_graph(const ir::Program& p);

/// All instructions that can execute at or after the neck marker: the
/// remainder of the marker's block, every block reachable from it, and the
/// bodies of functions transitively callable from those instructions
/// (icall sites conservatively pull in every address-taken function).
/// The marker itself is not part of the region.
std::set<ir::InstId> post_neck_region(const ir::Program& p, ir::InstId neck);

/// Static types of all registers of a validated function (params included).
/// Function-address registers are absent from the map.
std::map<std::string, ir::TypeRef> register_types(const ir::Program& p, const ir::Function& f);

}  // namespace slimir::analysis
