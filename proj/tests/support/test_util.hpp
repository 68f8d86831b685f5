// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "slimir/analysis.hpp"
#include "slimir/parse.hpp"
#include "slimir/print.hpp"
#include "slimir/validate.hpp"

namespace test_util {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string corpus_path(const std::string& name) {
  return std::string(SLIMIR_CORPUS_DIR) + "/" + name;
}

inline slimir::ir::Program load_corpus(const std::string& name) {
  return slimir::ir::parse_program(read_file(corpus_path(name)));
}

// Builds a bare Cfg from an edge list over integer node names n0, n1, ...
inline slimir::analysis::Cfg make_cfg(int nodes,
                                      const std::vector<std::pair<int, int>>& edges,
                                      int entry = 0) {
  slimir::analysis::Cfg g;
  g.entry = "n" + std::to_string(entry);
  for (int i = 0; i < nodes; ++i) {
    std::string n = "n" + std::to_string(i);
    g.nodes.push_back(n);
    g.succs[n];
    g.preds[n];
  }
  for (auto [a, b] : edges) {
    g.succs["n" + std::to_string(a)].push_back("n" + std::to_string(b));
    g.preds["n" + std::to_string(b)].push_back("n" + std::to_string(a));
  }
  auto reach = g.reachable();
  for (const auto& n : g.nodes)
    if (!reach.count(n)) g.unreachable.insert(n);
  return g;
}

// Finds the instruction id of the k-th instruction of a labeled block.
inline slimir::ir::InstId inst_at(const slimir::ir::Program& p, const std::string& fn,
                                  const std::string& block, std::size_t k = 0) {
  const auto* f = p.find_function(fn);
  const auto* b = f->find_block(block);
  return b->insts.at(k).id;
}

}  // namespace test_util
