// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slimir/analysis.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace slimir::analysis {

using ir::Function;
using ir::InstId;
using ir::Instruction;
using ir::Opcode;
using ir::Operand;
using ir::Program;

bool Cfg::has_node(const std::string& n) const {
  return std::find(nodes.begin(), nodes.end(), n) != nodes.end();
}

std::set<std::string> Cfg::reachable() const {
  std::set<std::string> seen;
  if (nodes.empty()) return seen;
  std::deque<std::string> work{entry};
  seen.insert(entry);
  while (!work.empty()) {
    std::string n = work.front();
    work.pop_front();
    auto it = succs.find(n);
    if (it == succs.end()) continue;
    for (const auto& s : it->second) {
      if (seen.insert(s).second) work.push_back(s);
    }
  }
  return seen;
}

Cfg build_cfg(const Function& f) {
  Cfg g;
  g.entry = f.blocks.front().label;
  for (const auto& b : f.blocks) {
    g.nodes.push_back(b.label);
    g.succs[b.label];
    g.preds[b.label];
  }
  for (const auto& b : f.blocks) {
    if (b.insts.empty()) continue;
    const Instruction& t = b.insts.back();
    auto add_edge = [&](const std::string& to) {
      g.succs[b.label].push_back(to);
      g.preds[to].push_back(b.label);
    };
    switch (t.op) {
      case Opcode::Br:
        add_edge(t.operands[0].name);
        break;
      case Opcode::Cbr:
        add_edge(t.operands[1].name);
        add_edge(t.operands[2].name);
        break;
      default:
        break;  // ret: no successors
    }
  }
  auto seen = g.reachable();
  for (const auto& n : g.nodes)
    if (!seen.count(n)) g.unreachable.insert(n);
  return g;
}

namespace {

// Reverse postorder of the reachable subgraph.
std::vector<std::string> reverse_postorder(const Cfg& g) {
  std::vector<std::string> order;
  std::set<std::string> visited;
  std::function<void(const std::string&)> dfs = [&](const std::string& n) {
    visited.insert(n);
    auto it = g.succs.find(n);
    if (it != g.succs.end()) {
      for (const auto& s : it->second)
        if (!visited.count(s)) dfs(s);
    }
    order.push_back(n);
  };
  if (!g.nodes.empty()) dfs(g.entry);
  std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace

DomTree dominators(const Cfg& g) {
  DomTree dt;
  if (g.nodes.empty()) return dt;
  auto rpo = reverse_postorder(g);
  std::map<std::string, int> rpo_index;
  for (std::size_t i = 0; i < rpo.size(); ++i) rpo_index[rpo[i]] = static_cast<int>(i);

  dt.idom[g.entry] = g.entry;
  auto intersect = [&](std::string a, std::string b) {
    while (a != b) {
      while (rpo_index.at(a) > rpo_index.at(b)) a = dt.idom.at(a);
      while (rpo_index.at(b) > rpo_index.at(a)) b = dt.idom.at(b);
    }
    return a;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& n : rpo) {
      if (n == g.entry) continue;
      std::string new_idom;
      auto pit = g.preds.find(n);
      if (pit != g.preds.end()) {
        for (const auto& p : pit->second) {
          if (!rpo_index.count(p) || !dt.idom.count(p)) continue;
          if (new_idom.empty()) {
            new_idom = p;
          } else {
            new_idom = intersect(new_idom, p);
          }
        }
      }
      if (new_idom.empty()) continue;
      auto it = dt.idom.find(n);
      if (it == dt.idom.end() || it->second != new_idom) {
        dt.idom[n] = new_idom;
        changed = true;
      }
    }
  }
  return dt;
}

bool DomTree::dominates(const std::string& a, const std::string& b) const {
  if (!idom.count(a) || !idom.count(b)) return false;
  std::string cur = b;
  while (true) {
    if (cur == a) return true;
    const std::string& up = idom.at(cur);
    if (up == cur) return false;  // reached entry
    cur = up;
  }
}

std::set<std::string> articulation_points(const Cfg& g) {
  std::set<std::string> result;
  auto reach = g.reachable();
  if (reach.size() < 3) return result;

  // Undirected adjacency, deduplicated, self-loops dropped.
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

  // Tarjan low-link cut vertices (iterative since graphs may be deep chains).
  std::map<std::string, int> disc, low;
  std::map<std::string, std::string> parent;
  int timer = 0;
  struct StackItem {
    std::string node;
    std::set<std::string>::const_iterator next;
  };
  for (const auto& root : reach) {
    if (disc.count(root)) continue;
    int root_children = 0;
    std::vector<StackItem> st;
    disc[root] = low[root] = timer++;
    st.push_back({root, adj[root].begin()});
    while (!st.empty()) {
      auto& top = st.back();
      const std::string n = top.node;
      if (top.next != adj[n].end()) {
        std::string child = *top.next;
        ++top.next;
        if (!disc.count(child)) {
          parent[child] = n;
          if (n == root) ++root_children;
          disc[child] = low[child] = timer++;
          st.push_back({child, adj[child].begin()});
        } else if (parent.count(n) == 0 || parent.at(n) != child) {
          low[n] = std::min(low[n], disc[child]);
        }
      } else {
        st.pop_back();
        if (!st.empty()) {
          const std::string& par = st.back().node;
          low[par] = std::min(low[par], low[n]);
          if (par != root && low[n] >= disc[par]) result.insert(par);
        }
      }
    }
    if (root_children > 1) result.insert(root);
  }
  return result;
}

LoopInfo loops(const Cfg& g, const DomTree& d) {
  LoopInfo li;
  for (const auto& [n, ss] : g.succs) {
    for (const auto& h : ss) {
      if (d.dominates(h, n)) li.back_edges.insert({n, h});
    }
  }
  for (const auto& [tail, head] : li.back_edges) {
    auto& members = li.loop_blocks[head];
    members.insert(head);
    // Backward walk from the tail, not crossing the header.
    std::deque<std::string> work;
    if (members.insert(tail).second || tail != head) work.push_back(tail);
    while (!work.empty()) {
      std::string n = work.front();
      work.pop_front();
      if (n == head) continue;
      auto pit = g.preds.find(n);
      if (pit == g.preds.end()) continue;
      for (const auto& p : pit->second) {
        if (members.insert(p).second) work.push_back(p);
      }
    }
  }
  return li;
}

bool LoopInfo::in_any_loop(const std::string& block) const {
  for (const auto& [h, members] : loop_blocks)
    if (members.count(block)) return true;
  return false;
}

std::map<std::string, int> bfs_distance(const Cfg& g, const std::string& from) {
  std::map<std::string, int> dist;
  if (!g.has_node(from)) return dist;
  std::deque<std::string> work{from};
  dist[from] = 0;
  while (!work.empty()) {
    std::string n = work.front();
    work.pop_front();
    auto it = g.succs.find(n);
    if (it == g.succs.end()) continue;
    for (const auto& s : it->second) {
      if (!dist.count(s)) {
        dist[s] = dist[n] + 1;
        work.push_back(s);
      }
    }
  }
  return dist;
}

DefUse def_use(const Function& f) {
  DefUse du;
  for (const auto& p : f.params) du.reg_uses[p.name];
  for (const auto& b : f.blocks)
    for (const auto& in : b.insts)
      if (in.result) du.reg_uses[*in.result];
  for (const auto& b : f.blocks) {
    for (const auto& in : b.insts) {
      for (const auto& o : in.operands) {
        if (o.kind == Operand::Kind::Reg) du.reg_uses[o.name].push_back(in.id);
      }
    }
  }
  return du;
}

std::map<std::string, std::vector<InstId>> global_uses(const Program& p) {
  std::map<std::string, std::vector<InstId>> uses;
  for (const auto& g : p.globals) uses[g.name];
  for (const auto& f : p.functions)
    for (const auto& b : f.blocks)
      for (const auto& in : b.insts)
        for (const auto& o : in.operands)
          if (o.kind == Operand::Kind::Global) uses[o.name].push_back(in.id);
  return uses;
}

CallGraph call_graph(const Program& p) {
  CallGraph cg;
  for (const auto& f : p.functions) cg.nodes.insert(f.name);
  for (const auto& f : p.functions) {
    for (const auto& b : f.blocks) {
      for (const auto& in : b.insts) {
        if (in.op == Opcode::Call) {
          const std::string& callee = in.operands[0].name;
          if (cg.nodes.count(callee))
            cg.edges.push_back({f.name, callee, in.id});
        } else if (in.op == Opcode::FuncAddr) {
          if (cg.nodes.count(in.operands[0].name))
            cg.address_taken.insert(in.operands[0].name);
        } else if (in.op == Opcode::ICall) {
          cg.indirect_sites.push_back({f.name, in.id});
        }
      }
    }
  }
  return cg;
}

std::set<std::string> CallGraph::reachable_from(const std::string& root) const {
  std::set<std::string> seen;
  if (!nodes.count(root)) return seen;
  std::deque<std::string> work{root};
  seen.insert(root);
  while (!work.empty()) {
    std::string n = work.front();
    work.pop_front();
    for (const auto& e : edges) {
      if (e.caller == n && seen.insert(e.callee).second) work.push_back(e.callee);
    }
  }
  return seen;
}

std::map<std::string, ir::TypeRef> register_types(const Program& p, const Function& f) {
  using ir::Type;
  using ir::TypeRef;
  std::map<std::string, TypeRef> ty;
  for (const auto& pr : f.params) ty[pr.name] = pr.type;

  auto operand_type = [&](const Operand& o) -> TypeRef {
    switch (o.kind) {
      case Operand::Kind::Reg: {
        auto it = ty.find(o.name);
        return it == ty.end() ? nullptr : it->second;
      }
      case Operand::Kind::Const:
        switch (o.cval.kind) {
          case ir::ConstValue::Kind::Int: return Type::int_ty();
          case ir::ConstValue::Kind::Byte: return Type::byte_ty();
          case ir::ConstValue::Kind::Str: return Type::ptr(Type::byte_ty());
          case ir::ConstValue::Kind::Null: return nullptr;
        }
        return nullptr;
      case Operand::Kind::Global: {
        const ir::Global* g = p.find_global(o.name);
        if (!g) return nullptr;
        if (g->type->kind == Type::Kind::Str) return Type::ptr(Type::byte_ty());
        return Type::ptr(g->type);
      }
      default:
        return nullptr;
    }
  };

  auto result_type = [&](const ir::Instruction& in) -> TypeRef {
    switch (in.op) {
      case Opcode::Const:
        if (in.type->kind == Type::Kind::Str) return Type::ptr(Type::byte_ty());
        return in.type;
      case Opcode::Add:
      case Opcode::Sub:
      case Opcode::Mul:
      case Opcode::Div:
      case Opcode::Eq:
      case Opcode::Ne:
      case Opcode::Lt:
      case Opcode::Le:
      case Opcode::Gt:
      case Opcode::Ge:
        return Type::int_ty();
      case Opcode::Alloca:
      case Opcode::Heap:
        return Type::ptr(in.type);
      case Opcode::Load: {
        TypeRef pt = operand_type(in.operands[0]);
        return pt && pt->kind == Type::Kind::Ptr ? pt->elem : nullptr;
      }
      case Opcode::Field: {
        TypeRef pt = operand_type(in.operands[0]);
        if (pt && pt->kind == Type::Kind::Ptr && pt->elem->kind == Type::Kind::Struct) {
          const ir::StructDef* sd = p.find_struct(pt->elem->struct_name);
          auto idx = static_cast<std::size_t>(in.operands[1].cval.int_val);
          if (sd && idx < sd->fields.size()) return Type::ptr(sd->fields[idx]);
        }
        return nullptr;
      }
      case Opcode::Index: {
        TypeRef pt = operand_type(in.operands[0]);
        if (pt && pt->kind == Type::Kind::Ptr) {
          if (pt->elem->kind == Type::Kind::Arr) return Type::ptr(pt->elem->elem);
          return pt;
        }
        return nullptr;
      }
      case Opcode::Call: {
        const std::string& callee = in.operands[0].name;
        if (const Function* fd = p.find_function(callee)) return fd->return_type;
        if (const ir::IntrinsicSig* s = ir::intrinsic_sig(callee)) return s->ret;
        return nullptr;
      }
      case Opcode::ICall: {
        if (in.operands[0].kind != Operand::Kind::Reg) return nullptr;
        // The callee register has a unique funcaddr definition.
        for (const auto& b : f.blocks)
          for (const auto& i2 : b.insts)
            if (i2.op == Opcode::FuncAddr && i2.result &&
                *i2.result == in.operands[0].name)
              if (const Function* fd = p.find_function(i2.operands[0].name))
                return fd->return_type;
        return nullptr;
      }
      default:
        return nullptr;
    }
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& b : f.blocks) {
      for (const auto& in : b.insts) {
        if (!in.result || ty.count(*in.result)) continue;
        TypeRef t = result_type(in);
        if (t) {
          ty[*in.result] = t;
          changed = true;
        }
      }
    }
  }
  return ty;
}

std::set<InstId> post_neck_region(const Program& p, InstId neck) {
  auto loc = p.find_inst(neck);
  if (!loc || loc->inst->op != Opcode::NeckMark)
    throw ir::IrError(ir::IrError::Kind::NoNeck,
                      "no neckmark instruction with id " + std::to_string(neck));

  std::set<InstId> region;
  const Function& fn = *loc->function;
  Cfg g = build_cfg(fn);

  // Blocks reachable from the neck block via successor edges.
  std::set<std::string> blocks;
  std::deque<std::string> work;
  for (const auto& s : g.succs.at(loc->block->label)) {
    if (blocks.insert(s).second) work.push_back(s);
  }
  while (!work.empty()) {
    std::string n = work.front();
    work.pop_front();
    for (const auto& s : g.succs.at(n))
      if (blocks.insert(s).second) work.push_back(s);
  }

  bool neck_block_in_cycle = blocks.count(loc->block->label) > 0;
  std::set<std::string> callees;
  bool any_icall = false;
  auto add_inst = [&](const Instruction& in) {
    if (in.op == Opcode::NeckMark) return;
    region.insert(in.id);
    if (in.op == Opcode::Call) callees.insert(in.operands[0].name);
    if (in.op == Opcode::ICall) any_icall = true;
  };

  for (const auto& b : fn.blocks) {
    if (blocks.count(b.label)) {
      for (const auto& in : b.insts) add_inst(in);
    } else if (b.label == loc->block->label && !neck_block_in_cycle) {
      for (std::size_t i = loc->inst_index + 1; i < b.insts.size(); ++i)
        add_inst(b.insts[i]);
    }
  }

  // Bodies of functions transitively callable from the region.
  CallGraph cg = call_graph(p);
  std::set<std::string> called;
  std::deque<std::string> fwork;
  auto enqueue = [&](const std::string& name) {
    if (p.find_function(name) && called.insert(name).second) fwork.push_back(name);
  };
  for (const auto& c : callees) enqueue(c);
  if (any_icall) {
    for (const auto& t : cg.address_taken) enqueue(t);
  }
  while (!fwork.empty()) {
    std::string n = fwork.front();
    fwork.pop_front();
    const Function* f = p.find_function(n);
    for (const auto& b : f->blocks) {
      for (const auto& in : b.insts) {
        region.insert(in.id);
        if (in.op == Opcode::Call) enqueue(in.operands[0].name);
        if (in.op == Opcode::ICall) {
          for (const auto& t : cg.address_taken) enqueue(t);
        }
      }
    }
  }
  return region;
}

}  // namespace slimir::analysis
