// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slimir/constconv.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "slimir/analysis.hpp"
#include "slimir/validate.hpp"

namespace slimir::constconv {

using interp::CapturedEntry;
using interp::PartialState;
using interp::Path;
using interp::PathRef;
using ir::ConstValue;
using ir::Function;
using ir::InstId;
using ir::Instruction;
using ir::Opcode;
using ir::Operand;
using ir::Program;
using ir::Type;
using ir::TypeRef;

namespace {

// Static matcher for the memory location a capture path names. Addresses
// are matched through the registers that can denote them: the alloca
// result, loads of the holding slot, values stored into it, and field
// chains over struct bases.
class PathMatcher {
public:
  PathMatcher(const Program& p, const PathRef& path) : p_(p), path_(path) {
    if (root_kind() == Path::Kind::Global) {
      global_ = path->global_name;
      if (!p.find_global(*global_))
        throw StateMismatch("captured global @" + *global_ + " no longer exists");
    } else {
      const PathRef* root = &path;
      while ((*root)->kind == Path::Kind::StructElem ||
             (*root)->kind == Path::Kind::PtrTarget)
        root = &(*root)->base;
      fn_ = p.find_function((*root)->func);
      if (!fn_)
        throw StateMismatch("captured function @" + (*root)->func + " no longer exists");
      addr_regs_ = compute_addr_regs(path);
    }
  }

  // Loads whose address operand denotes the location.
  std::vector<const Instruction*> loads() const {
    return collect([&](const Instruction& in) {
      return in.op == Opcode::Load && denotes(in.operands[0]);
    });
  }

  // Stores whose destination operand denotes the location.
  std::vector<const Instruction*> stores() const {
    return collect([&](const Instruction& in) {
      return in.op == Opcode::Store && denotes(in.operands[1]);
    });
  }

  // The location's address appears anywhere other than a load source or a
  // store destination.
  bool address_taken() const {
    bool taken = false;
    for_each_inst([&](const Instruction& in) {
      for (std::size_t i = 0; i < in.operands.size(); ++i) {
        if (!denotes_operand(in.operands[i])) continue;
        bool sanctioned = (in.op == Opcode::Load && i == 0) ||
                          (in.op == Opcode::Store && i == 1);
        if (!sanctioned) taken = true;
      }
    });
    return taken;
  }

  const Function* root_function() const { return fn_; }

private:
  Path::Kind root_kind() const {
    const Path* r = path_.get();
    while (r->kind == Path::Kind::StructElem || r->kind == Path::Kind::PtrTarget)
      r = r->base.get();
    return r->kind;
  }

  TypeRef declared_type(const PathRef& p) const {
    switch (p->kind) {
      case Path::Kind::Global: {
        const ir::Global* g = p_.find_global(p->global_name);
        return g ? g->type : nullptr;
      }
      case Path::Kind::StackSlot: {
        const Instruction* a = find_alloca(p);
        return a ? a->type : nullptr;
      }
      case Path::Kind::PtrTarget: {
        TypeRef b = declared_type(p->base);
        return b && b->kind == Type::Kind::Ptr ? b->elem : nullptr;
      }
      case Path::Kind::StructElem: {
        TypeRef b = declared_type(p->base);
        if (b && b->kind == Type::Kind::Ptr) b = b->elem;
        if (!b || b->kind != Type::Kind::Struct) return nullptr;
        const ir::StructDef* sd = p_.find_struct(b->struct_name);
        if (!sd || p->elem_index < 0 ||
            p->elem_index >= static_cast<std::int64_t>(sd->fields.size()))
          return nullptr;
        return sd->fields[static_cast<std::size_t>(p->elem_index)];
      }
    }
    return nullptr;
  }

  const Instruction* find_alloca(const PathRef& p) const {
    for (const auto& b : fn_->blocks)
      for (const auto& in : b.insts)
        if (in.op == Opcode::Alloca && in.result && *in.result == p->alloca_reg)
          return &in;
    return nullptr;
  }

  // Registers that hold the VALUE stored at location `p`.
  std::set<std::string> value_regs(const PathRef& p) const {
    std::set<std::string> addrs = compute_addr_regs(p);
    std::optional<std::string> glob;
    if (p->kind == Path::Kind::Global) glob = p->global_name;
    std::set<std::string> out;
    for (const auto& b : fn_->blocks) {
      for (const auto& in : b.insts) {
        if (in.op == Opcode::Load && in.result &&
            operand_denotes(in.operands[0], addrs, glob))
          out.insert(*in.result);
        if (in.op == Opcode::Store && in.operands[0].kind == Operand::Kind::Reg &&
            operand_denotes(in.operands[1], addrs, glob))
          out.insert(in.operands[0].name);
      }
    }
    return out;
  }

  // Registers that hold the ADDRESS of location `p`.
  std::set<std::string> compute_addr_regs(const PathRef& p) const {
    switch (p->kind) {
      case Path::Kind::Global:
        return {};  // globals are denoted by the @name operand directly
      case Path::Kind::StackSlot: {
        const Instruction* a = find_alloca(p);
        if (!a)
          throw StateMismatch("captured slot %" + p->alloca_reg + " no longer exists in @" +
                              p->func);
        return {p->alloca_reg};
      }
      case Path::Kind::PtrTarget:
        return value_regs(p->base);
      case Path::Kind::StructElem: {
        // Base registers pointing at the struct value.
        TypeRef bt = declared_type(p->base);
        if (!bt) throw StateMismatch("captured path base no longer resolves");
        std::set<std::string> struct_ptrs;
        if (bt->kind == Type::Kind::Ptr) {
          struct_ptrs = value_regs(p->base);
        } else {
          struct_ptrs = compute_addr_regs(p->base);
        }
        std::set<std::string> out;
        for (const auto& b : fn_->blocks) {
          for (const auto& in : b.insts) {
            if (in.op != Opcode::Field || !in.result) continue;
            if (in.operands[0].kind != Operand::Kind::Reg ||
                !struct_ptrs.count(in.operands[0].name))
              continue;
            if (in.operands[1].cval.int_val != p->elem_index) continue;
            out.insert(*in.result);
          }
        }
        return out;
      }
    }
    return {};
  }

  bool operand_denotes(const Operand& o, const std::set<std::string>& addrs,
                       const std::optional<std::string>& glob) const {
    if (glob && o.kind == Operand::Kind::Global && o.name == *glob) return true;
    return o.kind == Operand::Kind::Reg && addrs.count(o.name) > 0;
  }

  bool denotes(const Operand& o) const { return operand_denotes(o, addr_regs_, global_); }
  bool denotes_operand(const Operand& o) const { return denotes(o); }

  template <class Fn>
  void for_each_inst(Fn&& fn) const {
    if (global_) {
      for (const auto& f : p_.functions)
        for (const auto& b : f.blocks)
          for (const auto& in : b.insts) fn(in);
    } else {
      for (const auto& b : fn_->blocks)
        for (const auto& in : b.insts) fn(in);
    }
  }

  template <class Pred>
  std::vector<const Instruction*> collect(Pred&& pred) const {
    std::vector<const Instruction*> out;
    for_each_inst([&](const Instruction& in) {
      if (pred(in)) out.push_back(&in);
    });
    std::sort(out.begin(), out.end(),
              [](const Instruction* a, const Instruction* b) { return a->id < b->id; });
    return out;
  }

  const Program& p_;
  PathRef path_;
  const Function* fn_ = nullptr;
  std::optional<std::string> global_;
  std::set<std::string> addr_regs_;
};

// Blocks inside natural loops, per function, for the pre-neck load guard.
std::set<InstId> insts_in_loops(const Program& p) {
  std::set<InstId> out;
  for (const auto& f : p.functions) {
    analysis::Cfg g = analysis::build_cfg(f);
    analysis::DomTree dt = analysis::dominators(g);
    analysis::LoopInfo li = analysis::loops(g, dt);
    for (const auto& b : f.blocks) {
      if (!li.in_any_loop(b.label)) continue;
      for (const auto& in : b.insts) out.insert(in.id);
    }
  }
  return out;
}

bool int_like(const TypeRef& t) {
  return t && (t->kind == Type::Kind::Int || t->kind == Type::Kind::Byte);
}

// int 0 and byte 0 are the same stored value; memory cells coerce on store.
bool same_stored_value(const ConstValue& a, const ConstValue& b) {
  if (a == b) return true;
  auto as_int = [](const ConstValue& c) -> std::optional<std::int64_t> {
    if (c.kind == ConstValue::Kind::Int) return c.int_val;
    if (c.kind == ConstValue::Kind::Byte) return static_cast<std::int64_t>(c.byte_val);
    return std::nullopt;
  };
  auto x = as_int(a), y = as_int(b);
  return x && y && *x == *y;
}

}  // namespace

ConversionPlan plan_conversion(const Program& p, const PartialState& st, InstId neck) {
  ConversionPlan plan;
  std::set<InstId> region = analysis::post_neck_region(p, neck);
  std::set<InstId> loop_insts = insts_in_loops(p);

  std::map<InstId, ConstValue> claimed;  // first claim wins
  auto add_rewrite = [&](std::vector<Rewrite>& dst, InstId site, Rewrite::Action action,
                         const ConstValue& v, std::optional<std::string> global_name,
                         const std::string& path_str) {
    auto it = claimed.find(site);
    if (it != claimed.end()) {
      if (!(it->second == v))
        plan.skipped.push_back({path_str, "site " + std::to_string(site) +
                                              " already claimed with a different value"});
      return;
    }
    claimed[site] = v;
    dst.push_back({site, action, v, std::move(global_name)});
  };

  // Pre-computed register types per function for the aliasing check.
  std::map<const Function*, std::map<std::string, TypeRef>> reg_types;
  for (const auto& f : p.functions) reg_types[&f] = analysis::register_types(p, f);

  // All store destinations inside the region, with the pointee type, for the
  // address-taken aliasing gate.
  std::vector<TypeRef> region_store_pointees;
  for (const auto& f : p.functions) {
    for (const auto& b : f.blocks) {
      for (const auto& in : b.insts) {
        if (in.op != Opcode::Store || !region.count(in.id)) continue;
        const Operand& dst = in.operands[1];
        TypeRef pointee;
        if (dst.kind == Operand::Kind::Reg) {
          auto& rt = reg_types[&f];
          auto it = rt.find(dst.name);
          if (it != rt.end() && it->second && it->second->kind == Type::Kind::Ptr)
            pointee = it->second->elem;
        } else if (dst.kind == Operand::Kind::Global) {
          const ir::Global* g = p.find_global(dst.name);
          if (g) pointee = g->type;
        }
        region_store_pointees.push_back(pointee);
      }
    }
  }
  auto aliasing_store_in_region = [&](const TypeRef& t) {
    for (const auto& pt : region_store_pointees) {
      if (!pt) return true;  // unknown pointee: be conservative
      if (ir::type_equal(pt, t)) return true;
      if (int_like(pt) && int_like(t)) return true;
    }
    return false;
  };

  for (const auto& e : st.entries) {
    std::string path_str = interp::path_to_string(e.path);
    bool is_string = e.value.kind == ConstValue::Kind::Str;

    PathMatcher matcher(p, e.path);
    auto loads = matcher.loads();
    auto stores = matcher.stores();

    if (is_string) {
      // Captured string: materialize a global byte array and rewrite
      // pre-neck stores of the string pointer to reference it.
      std::vector<const Instruction*> sites;
      for (const auto* s : stores) {
        if (region.count(s->id)) continue;
        if (s->operands[0].kind == Operand::Kind::Global) {
          const ir::Global* g = p.find_global(s->operands[0].name);
          if (g && g->init.kind == ConstValue::Kind::Str &&
              g->init.str_val == e.value.str_val)
            continue;  // already rewritten to an equivalent constant
        }
        sites.push_back(s);
      }
      if (sites.empty()) {
        plan.skipped.push_back({path_str, "no pre-neck store sites for captured string"});
        continue;
      }
      std::string gname;
      for (const auto& ng : plan.new_globals)
        if (ng.bytes == e.value.str_val) gname = ng.name;
      if (gname.empty()) {
        int n = 0;
        while (true) {
          std::string cand = "str" + std::to_string(n++);
          if (p.find_global(cand)) continue;
          bool used = false;
          for (const auto& ng : plan.new_globals)
            if (ng.name == cand) used = true;
          if (!used) {
            gname = cand;
            break;
          }
        }
        plan.new_globals.push_back({gname, e.value.str_val});
      }
      for (const auto* s : sites)
        add_rewrite(plan.pre_neck, s->id, Rewrite::Action::RewriteStoreSource, e.value,
                    gname, path_str);
      continue;
    }

    bool base_location = e.path->kind == Path::Kind::Global ||
                         e.path->kind == Path::Kind::StackSlot;

    // Pre-neck conversions.
    if (base_location) {
      for (const auto* l : loads) {
        if (region.count(l->id)) continue;
        if (loop_insts.count(l->id)) {
          plan.skipped.push_back({path_str, "pre-neck load " + std::to_string(l->id) +
                                                " inside a loop"});
          continue;
        }
        add_rewrite(plan.pre_neck, l->id, Rewrite::Action::ReplaceLoadWithConst, e.value,
                    std::nullopt, path_str);
      }
    } else {
      for (const auto* s : stores) {
        if (region.count(s->id)) continue;
        const Operand& src = s->operands[0];
        if (src.kind == Operand::Kind::Const && same_stored_value(src.cval, e.value))
          continue;  // no-op
        add_rewrite(plan.pre_neck, s->id, Rewrite::Action::RewriteStoreSource, e.value,
                    std::nullopt, path_str);
      }
    }

    // Post-neck conversions, gated on the location being unmodified in R.
    bool direct_store_in_region = false;
    for (const auto* s : stores)
      if (region.count(s->id)) direct_store_in_region = true;
    if (direct_store_in_region) {
      plan.skipped.push_back({path_str, "post-neck store present"});
      continue;
    }
    if (matcher.address_taken() && aliasing_store_in_region(e.declared_type)) {
      plan.skipped.push_back({path_str, "address taken and a compatible post-neck store exists"});
      continue;
    }
    for (const auto* l : loads) {
      if (!region.count(l->id)) continue;
      add_rewrite(plan.post_neck, l->id, Rewrite::Action::ReplaceLoadWithConst, e.value,
                  std::nullopt, path_str);
    }
  }
  return plan;
}

Program apply_conversion(const Program& p, const ConversionPlan& plan) {
  Program out = p;
  for (const auto& ng : plan.new_globals) {
    if (out.find_global(ng.name))
      throw StateMismatch("planned global @" + ng.name + " already exists");
    ir::Global g;
    g.name = ng.name;
    g.type = Type::arr(Type::byte_ty(), static_cast<std::int64_t>(ng.bytes.size()) + 1);
    g.init = ConstValue::of_str(ng.bytes);
    out.globals.push_back(std::move(g));
  }

  auto apply_one = [&](const Rewrite& rw) {
    for (auto& f : out.functions) {
      for (auto& b : f.blocks) {
        for (auto& in : b.insts) {
          if (in.id != rw.site) continue;
          if (rw.action == Rewrite::Action::ReplaceLoadWithConst) {
            Instruction repl;
            repl.id = out.fresh_id();
            repl.result = in.result;
            repl.op = Opcode::Const;
            if (rw.value.kind == ConstValue::Kind::Byte) {
              repl.type = Type::byte_ty();
            } else {
              repl.type = Type::int_ty();
            }
            repl.operands.push_back(Operand::constant(rw.value));
            in = std::move(repl);
          } else {
            if (rw.global_name) {
              in.operands[0] = Operand::global(*rw.global_name);
            } else {
              in.operands[0] = Operand::constant(rw.value);
            }
          }
          return true;
        }
      }
    }
    return false;
  };

  for (const auto& rw : plan.pre_neck)
    if (!apply_one(rw)) throw StateMismatch("plan site " + std::to_string(rw.site) + " not found");
  for (const auto& rw : plan.post_neck)
    if (!apply_one(rw)) throw StateMismatch("plan site " + std::to_string(rw.site) + " not found");

  auto diags = ir::validate(out, {.require_main = false});
  if (!diags.empty())
    throw StateMismatch("conversion produced an invalid program:\n" +
                        ir::diagnostics_to_string(diags));
  return out;
}

}  // namespace slimir::constconv
