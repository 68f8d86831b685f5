// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference implementations the analysis tests compare against.
// These stay independent of the production algorithms: dominance via node
// removal, articulation via connectivity recount, distances via
// Floyd-Warshall.
#pragma once

#include <deque>
#include <map>
#include <set>
#include <string>

#include "slimir/analysis.hpp"

namespace oracles {

using slimir::analysis::Cfg;

inline std::set<std::string> reachable_without(const Cfg& g, const std::string& removed) {
  std::set<std::string> seen;
  if (g.entry == removed) return seen;
  std::deque<std::string> work{g.entry};
  seen.insert(g.entry);
  while (!work.empty()) {
    auto n = work.front();
    work.pop_front();
    for (const auto& s : g.succs.at(n)) {
      if (s == removed) continue;
      if (seen.insert(s).second) work.push_back(s);
    }
  }
  return seen;
}

// d dominates v iff v is unreachable from entry once d is removed.
inline bool dominates_oracle(const Cfg& g, const std::string& d, const std::string& v) {
  auto reach = g.reachable();
  if (!reach.count(v) || !reach.count(d)) return false;
  if (d == v) return true;
  return reachable_without(g, d).count(v) == 0;
}

// Full dominator sets by enumeration; idom is the strict dominator that all
// other strict dominators dominate.
inline std::map<std::string, std::string> idom_oracle(const Cfg& g) {
  std::map<std::string, std::string> idom;
  auto reach = g.reachable();
  for (const auto& v : reach) {
    if (v == g.entry) {
      idom[v] = v;
      continue;
    }
    std::set<std::string> doms;
    for (const auto& d : reach)
      if (d != v && dominates_oracle(g, d, v)) doms.insert(d);
    for (const auto& cand : doms) {
      bool closest = true;
      for (const auto& other : doms)
        if (other != cand && !dominates_oracle(g, other, cand)) closest = false;
      if (closest) {
        idom[v] = cand;
        break;
      }
    }
  }
  return idom;
}

// Articulation points of the undirected view restricted to reachable nodes:
// removing v must split two other reachable nodes.
inline std::set<std::string> articulation_oracle(const Cfg& g) {
  std::set<std::string> result;
  auto reach = g.reachable();
  if (reach.size() < 3) return result;
  std::map<std::string, std::set<std::string>> adj;
  for (const auto& n : reach) adj[n];
  for (const auto& [n, ss] : g.succs) {
    if (!reach.count(n)) continue;
    for (const auto& s : ss) {
      if (!reach.count(s) || s == n) continue;
      adj[n].insert(s);
      adj[s].insert(n);
    }
  }
  auto components_without = [&](const std::string& removed) {
    std::set<std::string> seen;
    int comps = 0;
    for (const auto& n : reach) {
      if (n == removed || seen.count(n)) continue;
      ++comps;
      std::deque<std::string> work{n};
      seen.insert(n);
      while (!work.empty()) {
        auto cur = work.front();
        work.pop_front();
        for (const auto& s : adj.at(cur)) {
          if (s == removed) continue;
          if (seen.insert(s).second) work.push_back(s);
        }
      }
    }
    return comps;
  };
  for (const auto& v : reach)
    if (components_without(v) > 1) result.insert(v);
  return result;
}

// All-pairs hop counts; used to cross-check BFS distances.
inline std::map<std::string, int> distances_oracle(const Cfg& g, const std::string& from) {
  const int INF = 1 << 28;
  std::map<std::string, std::map<std::string, int>> d;
  for (const auto& a : g.nodes)
    for (const auto& b : g.nodes) d[a][b] = a == b ? 0 : INF;
  for (const auto& [n, ss] : g.succs)
    for (const auto& s : ss)
      if (n != s) d[n][s] = 1;
  for (const auto& k : g.nodes)
    for (const auto& i : g.nodes)
      for (const auto& j : g.nodes)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  std::map<std::string, int> out;
  for (const auto& n : g.nodes)
    if (d[from][n] < INF) out[n] = d[from][n];
  return out;
}

}  // namespace oracles
