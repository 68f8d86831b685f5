// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slimir/simplify.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "slimir/analysis.hpp"

namespace slimir::simplify {

using ir::ConstValue;
using ir::Function;
using ir::InstId;
using ir::Instruction;
using ir::Opcode;
using ir::Operand;
using ir::Program;
using ir::Type;

namespace {

std::optional<std::int64_t> const_int(const Operand& o,
                                      const std::map<std::string, ConstValue>& reg_consts) {
  const ConstValue* c = nullptr;
  if (o.kind == Operand::Kind::Const) {
    c = &o.cval;
  } else if (o.kind == Operand::Kind::Reg) {
    auto it = reg_consts.find(o.name);
    if (it != reg_consts.end()) c = &it->second;
  }
  if (!c) return std::nullopt;
  if (c->kind == ConstValue::Kind::Int) return c->int_val;
  if (c->kind == ConstValue::Kind::Byte) return static_cast<std::int64_t>(c->byte_val);
  return std::nullopt;
}

std::int64_t wrap(std::uint64_t v) { return static_cast<std::int64_t>(v); }

}  // namespace

std::pair<Program, PassReport> constant_fold(const Program& p) {
  Program out = p;
  PassReport rep;
  rep.pass = "constant_fold";

  for (auto& f : out.functions) {
    bool changed = true;
    while (changed) {
      changed = false;
      ++rep.iterations;
      // Registers defined by const instructions (unique defs per function).
      std::map<std::string, ConstValue> reg_consts;
      for (const auto& b : f.blocks)
        for (const auto& in : b.insts)
          if (in.op == Opcode::Const && in.result &&
              in.operands[0].cval.kind != ConstValue::Kind::Null &&
              in.operands[0].cval.kind != ConstValue::Kind::Str)
            reg_consts[*in.result] = in.operands[0].cval;

      for (auto& b : f.blocks) {
        for (auto& in : b.insts) {
          if (ir::is_arith(in.op) || ir::is_comparison(in.op)) {
            auto a = const_int(in.operands[0], reg_consts);
            auto c = const_int(in.operands[1], reg_consts);
            if (!a || !c) continue;
            std::int64_t r = 0;
            switch (in.op) {
              case Opcode::Add: r = wrap(std::uint64_t(*a) + std::uint64_t(*c)); break;
              case Opcode::Sub: r = wrap(std::uint64_t(*a) - std::uint64_t(*c)); break;
              case Opcode::Mul: r = wrap(std::uint64_t(*a) * std::uint64_t(*c)); break;
              case Opcode::Div:
                if (*c == 0) {
                  // Folding would trap; leave the site for the interpreter.
                  if (std::find(rep.unfolded_div_traps.begin(), rep.unfolded_div_traps.end(),
                                in.id) == rep.unfolded_div_traps.end())
                    rep.unfolded_div_traps.push_back(in.id);
                  continue;
                }
                r = (*a == INT64_MIN && *c == -1) ? INT64_MIN : *a / *c;
                break;
              case Opcode::Eq: r = *a == *c; break;
              case Opcode::Ne: r = *a != *c; break;
              case Opcode::Lt: r = *a < *c; break;
              case Opcode::Le: r = *a <= *c; break;
              case Opcode::Gt: r = *a > *c; break;
              case Opcode::Ge: r = *a >= *c; break;
              default: break;
            }
            Instruction repl;
            repl.id = out.fresh_id();
            repl.result = in.result;
            repl.op = Opcode::Const;
            repl.type = Type::int_ty();
            repl.operands.push_back(Operand::constant(ConstValue::of_int(r)));
            in = std::move(repl);
            ++rep.folded_sites;
            changed = true;
          } else if (in.op == Opcode::Cbr) {
            auto c = const_int(in.operands[0], reg_consts);
            if (!c) continue;
            Instruction repl;
            repl.id = out.fresh_id();
            repl.op = Opcode::Br;
            repl.operands.push_back(in.operands[*c != 0 ? 1 : 2]);
            in = std::move(repl);
            ++rep.folded_sites;
            changed = true;
          }
        }
      }
    }
  }
  return {std::move(out), std::move(rep)};
}

std::pair<Function, PassReport> simplify_cfg(const Function& f) {
  Function out = f;
  PassReport rep;
  rep.pass = "simplify_cfg";

  bool changed = true;
  while (changed) {
    changed = false;
    ++rep.iterations;
    analysis::Cfg g = analysis::build_cfg(out);

    // Unreachable block removal.
    if (!g.unreachable.empty()) {
      std::vector<ir::BasicBlock> kept;
      for (auto& b : out.blocks) {
        if (g.unreachable.count(b.label)) {
          rep.removed_blocks += 1;
          rep.removed_insts += static_cast<std::int64_t>(b.insts.size());
        } else {
          kept.push_back(std::move(b));
        }
      }
      out.blocks = std::move(kept);
      changed = true;
      continue;
    }

    // Merge: unique predecessor ending in an unconditional br, for which
    // this block is the unique successor.
    for (std::size_t i = 0; i < out.blocks.size(); ++i) {
      ir::BasicBlock& b = out.blocks[i];
      const auto& preds = g.preds.at(b.label);
      std::set<std::string> distinct_preds(preds.begin(), preds.end());
      if (distinct_preds.size() != 1) continue;
      const std::string& pl = *distinct_preds.begin();
      if (pl == b.label) continue;
      const auto& psuccs = g.succs.at(pl);
      std::set<std::string> distinct_succs(psuccs.begin(), psuccs.end());
      if (distinct_succs.size() != 1) continue;
      ir::BasicBlock* pred = out.find_block(pl);
      if (pred->insts.back().op != Opcode::Br) continue;

      pred->insts.pop_back();  // drop the br
      rep.removed_insts += 1;
      for (auto& in : b.insts) pred->insts.push_back(std::move(in));
      out.blocks.erase(out.blocks.begin() + static_cast<std::ptrdiff_t>(i));
      rep.removed_blocks += 1;
      changed = true;
      break;
    }
  }
  return {std::move(out), std::move(rep)};
}

namespace {

// Program-wide operand-use counts for functions and globals plus register
// use counts per function.
struct UseCounts {
  std::map<std::string, std::int64_t> func_uses;
  std::map<std::string, std::int64_t> global_uses;

  explicit UseCounts(const Program& p) {
    for (const auto& f : p.functions) func_uses[f.name] = 0;
    for (const auto& g : p.globals) global_uses[g.name] = 0;
    for (const auto& f : p.functions) {
      for (const auto& b : f.blocks) {
        for (const auto& in : b.insts) {
          for (const auto& o : in.operands) {
            if (o.kind == Operand::Kind::Func && func_uses.count(o.name))
              ++func_uses[o.name];
            if (o.kind == Operand::Kind::Global && global_uses.count(o.name))
              ++global_uses[o.name];
          }
        }
      }
    }
  }
};

bool side_effect_free(Opcode op) {
  switch (op) {
    case Opcode::Const:
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
    case Opcode::Alloca:
    case Opcode::Heap:
    case Opcode::Load:
    case Opcode::Field:
    case Opcode::Index:
    case Opcode::FuncAddr:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::pair<Program, PassReport> cleanup(const Program& p,
                                       const std::set<std::string>& visited_funcs) {
  Program out = p;
  PassReport rep;
  rep.pass = "cleanup";

  auto erase_function = [&](const std::string& name) {
    for (std::size_t i = 0; i < out.functions.size(); ++i) {
      if (out.functions[i].name != name) continue;
      for (const auto& b : out.functions[i].blocks)
        rep.removed_insts += static_cast<std::int64_t>(b.insts.size());
      rep.removed_blocks += static_cast<std::int64_t>(out.functions[i].blocks.size());
      rep.removed_funcs += 1;
      out.functions.erase(out.functions.begin() + static_cast<std::ptrdiff_t>(i));
      return;
    }
  };

  // Stage 1: functions never visited during partial interpretation whose
  // remaining use count (call sites and funcaddr operands) is zero.
  {
    std::vector<std::string> victims;
    UseCounts uses(out);
    for (const auto& f : out.functions) {
      if (f.name == "main") continue;
      if (visited_funcs.count(f.name)) continue;
      if (uses.func_uses.at(f.name) == 0) victims.push_back(f.name);
    }
    for (const auto& v : victims) erase_function(v);
  }

  // Stage 2: iteratively drop any function whose use count reaches zero;
  // this removes descendants that main can no longer reach. Address-taken
  // functions keep a nonzero count through their funcaddr operand.
  {
    bool changed = true;
    while (changed) {
      changed = false;
      UseCounts uses(out);
      for (const auto& f : out.functions) {
        if (f.name == "main") continue;
        if (uses.func_uses.at(f.name) == 0) {
          erase_function(f.name);
          changed = true;
          break;
        }
      }
    }
  }

  // Stage 3: unused globals.
  {
    UseCounts uses(out);
    std::vector<ir::Global> kept;
    for (auto& g : out.globals) {
      if (uses.global_uses.at(g.name) == 0) {
        rep.removed_globals += 1;
      } else {
        kept.push_back(std::move(g));
      }
    }
    out.globals = std::move(kept);
  }

  // Stage 4: stack slots and useless code. Per function: delete allocas with
  // no uses; delete initialized-but-unused slots (single store, no loads)
  // store-first; then sweep side-effect free instructions without uses.
  for (auto& f : out.functions) {
    bool changed = true;
    while (changed) {
      changed = false;

      std::map<std::string, std::int64_t> reg_uses;
      for (const auto& b : f.blocks)
        for (const auto& in : b.insts)
          for (const auto& o : in.operands)
            if (o.kind == Operand::Kind::Reg) ++reg_uses[o.name];

      // Initialized-but-unused slots: the only use is one store destination.
      for (auto& b : f.blocks) {
        for (std::size_t i = 0; i < b.insts.size(); ++i) {
          const Instruction& in = b.insts[i];
          if (in.op != Opcode::Alloca || !in.result) continue;
          const std::string& slot = *in.result;
          std::int64_t stores_to_slot = 0, other_uses = 0;
          InstId store_id = -1;
          for (const auto& b2 : f.blocks) {
            for (const auto& in2 : b2.insts) {
              for (std::size_t oi = 0; oi < in2.operands.size(); ++oi) {
                const Operand& o = in2.operands[oi];
                if (!o.is_reg(slot)) continue;
                if (in2.op == Opcode::Store && oi == 1) {
                  ++stores_to_slot;
                  store_id = in2.id;
                } else {
                  ++other_uses;
                }
              }
            }
          }
          if (other_uses == 0 && stores_to_slot == 1) {
            for (auto& b2 : f.blocks) {
              auto it = std::find_if(b2.insts.begin(), b2.insts.end(),
                                     [&](const Instruction& x) { return x.id == store_id; });
              if (it != b2.insts.end()) {
                b2.insts.erase(it);
                rep.removed_insts += 1;
                break;
              }
            }
            changed = true;
          }
        }
        if (changed) break;
      }
      if (changed) continue;

      // Useless code: no side effects, result never used. Terminators,
      // stores, calls, and the neck marker stay.
      for (auto& b : f.blocks) {
        for (std::size_t i = 0; i < b.insts.size(); ++i) {
          const Instruction& in = b.insts[i];
          if (ir::is_terminator(in.op)) continue;
          if (!side_effect_free(in.op)) continue;
          if (in.result && reg_uses.count(*in.result) && reg_uses[*in.result] > 0) continue;
          b.insts.erase(b.insts.begin() + static_cast<std::ptrdiff_t>(i));
          rep.removed_insts += 1;
          changed = true;
          break;
        }
        if (changed) break;
      }
      ++rep.iterations;
    }
  }
  return {std::move(out), std::move(rep)};
}

std::pair<Program, std::vector<PassReport>> run_simplify(
    const Program& p, const std::set<std::string>& visited_funcs) {
  Program cur = p;
  std::vector<PassReport> reports;
  int round = 0;

  auto one_round = [&](Program prog) {
    ++round;
    auto [folded, frep] = constant_fold(prog);
    frep.round = round;
    bool any = frep.changed();
    reports.push_back(std::move(frep));

    PassReport crep;
    crep.pass = "simplify_cfg";
    crep.round = round;
    for (auto& f : folded.functions) {
      auto [nf, r] = simplify_cfg(f);
      f = std::move(nf);
      crep.removed_insts += r.removed_insts;
      crep.removed_blocks += r.removed_blocks;
      crep.iterations += r.iterations;
    }
    any = any || crep.changed();
    reports.push_back(std::move(crep));

    auto [cleaned, krep] = cleanup(folded, visited_funcs);
    krep.round = round;
    any = any || krep.changed();
    reports.push_back(std::move(krep));
    return std::make_pair(std::move(cleaned), any);
  };

  while (true) {
    auto [next, any] = one_round(std::move(cur));
    cur = std::move(next);
    if (!any) break;
  }

  // The marker has served its purpose; drop it and settle once more.
  bool had_marker = false;
  for (auto& f : cur.functions) {
    for (auto& b : f.blocks) {
      auto it = std::find_if(b.insts.begin(), b.insts.end(),
                             [](const Instruction& in) { return in.op == Opcode::NeckMark; });
      if (it != b.insts.end()) {
        b.insts.erase(it);
        had_marker = true;
      }
    }
  }
  if (had_marker) {
    PassReport r;
    r.pass = "neck_removal";
    r.round = ++round;
    r.removed_insts = 1;
    reports.push_back(std::move(r));
    while (true) {
      auto [next, any] = one_round(std::move(cur));
      cur = std::move(next);
      if (!any) break;
    }
  }
  return {std::move(cur), std::move(reports)};
}

}  // namespace slimir::simplify
