// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slimir/validate.hpp"

#include <map>
#include <set>
#include <sstream>

#include "slimir/analysis.hpp"

namespace slimir::ir {

namespace {

// Validation-time value type: a TypeExpr, a typeless null pointer, or a
// function address (which has no TypeExpr and never touches memory).
struct VType {
  enum class K { Ty, NullPtr, FuncPtr, Bad };
  K k = K::Bad;
  TypeRef ty;
  std::string func;  // FuncPtr target

  static VType of(TypeRef t) { return {K::Ty, std::move(t), {}}; }
  static VType null() { return {K::NullPtr, nullptr, {}}; }
  static VType fptr(std::string f) { return {K::FuncPtr, nullptr, std::move(f)}; }
  static VType bad() { return {}; }
};

bool int_like(const VType& v) {
  return v.k == VType::K::Ty &&
         (v.ty->kind == Type::Kind::Int || v.ty->kind == Type::Kind::Byte);
}

// Assignment/argument compatibility: exact match, int<->byte coercion,
// arr<T, N> pointer decay to ptr<T>, null to any pointer.
bool compatible(const TypeRef& expected, const VType& actual) {
  if (!expected) return false;
  if (actual.k == VType::K::NullPtr) return expected->kind == Type::Kind::Ptr;
  if (actual.k != VType::K::Ty) return false;
  if (type_equal(expected, actual.ty)) return true;
  bool exp_int = expected->kind == Type::Kind::Int || expected->kind == Type::Kind::Byte;
  bool act_int = actual.ty->kind == Type::Kind::Int || actual.ty->kind == Type::Kind::Byte;
  if (exp_int && act_int) return true;
  if (expected->kind == Type::Kind::Ptr && actual.ty->kind == Type::Kind::Ptr &&
      actual.ty->elem->kind == Type::Kind::Arr &&
      type_equal(expected->elem, actual.ty->elem->elem))
    return true;
  return false;
}

class FunctionChecker {
public:
  FunctionChecker(const Program& p, const Function& f, std::vector<Diagnostic>& out)
      : prog_(p), fn_(f), diags_(out) {}

  void run() {
    if (fn_.blocks.empty()) {
      err({}, "function has no blocks");
      return;
    }
    if (!check_shape()) return;
    collect_defs();
    if (has_errors_) return;
    analysis_pass();
  }

private:
  void err(std::optional<InstId> id, const std::string& msg) {
    diags_.push_back({fn_.name, id, msg});
    has_errors_ = true;
  }

  // Terminator placement, label resolution, block label uniqueness.
  bool check_shape() {
    bool ok = true;
    std::set<std::string> labels;
    for (const auto& b : fn_.blocks) {
      if (!labels.insert(b.label).second) {
        err({}, "duplicate block label '" + b.label + "'");
        ok = false;
      }
    }
    for (const auto& b : fn_.blocks) {
      if (b.insts.empty()) {
        err({}, "block '" + b.label + "' is empty (missing terminator)");
        ok = false;
        continue;
      }
      for (std::size_t i = 0; i < b.insts.size(); ++i) {
        const auto& in = b.insts[i];
        bool last = i + 1 == b.insts.size();
        if (last && !is_terminator(in.op)) {
          err(in.id, "block '" + b.label + "' does not end with a terminator");
          ok = false;
        }
        if (!last && is_terminator(in.op)) {
          err(in.id, "terminator in the middle of block '" + b.label + "'");
          ok = false;
        }
        for (const auto& o : in.operands) {
          if (o.kind == Operand::Kind::Label && !labels.count(o.name)) {
            err(in.id, "unknown label '" + o.name + "'");
            ok = false;
          }
        }
      }
    }
    return ok;
  }

  // Unique static definition per register; assign each register its type.
  void collect_defs() {
    for (const auto& p : fn_.params) {
      if (reg_types_.count(p.name)) {
        err({}, "duplicate parameter '%" + p.name + "'");
        continue;
      }
      reg_types_[p.name] = VType::of(p.type);
    }
    for (const auto& b : fn_.blocks) {
      for (const auto& in : b.insts) {
        if (!in.result) continue;
        if (reg_types_.count(*in.result)) {
          err(in.id, "register '%" + *in.result + "' assigned more than once");
          continue;
        }
        reg_types_[*in.result] = VType::bad();  // typed in analysis_pass
      }
    }
  }

  VType operand_type(const Operand& o, InstId site) {
    switch (o.kind) {
      case Operand::Kind::Reg: {
        auto it = reg_types_.find(o.name);
        if (it == reg_types_.end()) {
          err(site, "use of unknown register '%" + o.name + "'");
          return VType::bad();
        }
        return it->second;
      }
      case Operand::Kind::Const:
        switch (o.cval.kind) {
          case ConstValue::Kind::Int: return VType::of(Type::int_ty());
          case ConstValue::Kind::Byte: return VType::of(Type::byte_ty());
          case ConstValue::Kind::Str: return VType::of(Type::ptr(Type::byte_ty()));
          case ConstValue::Kind::Null: return VType::null();
        }
        return VType::bad();
      case Operand::Kind::Global: {
        const Global* g = prog_.find_global(o.name);
        if (!g) {
          err(site, "unknown global '@" + o.name + "'");
          return VType::bad();
        }
        if (g->type->kind == Type::Kind::Str) return VType::of(Type::ptr(Type::byte_ty()));
        return VType::of(Type::ptr(g->type));
      }
      case Operand::Kind::Func:
        return VType::fptr(o.name);
      case Operand::Kind::Label:
        return VType::bad();
    }
    return VType::bad();
  }

  void check_call_args(const Instruction& in, const std::vector<TypeRef>& params,
                       const TypeRef& ret, const std::string& what,
                       std::size_t first_arg) {
    std::size_t argc = in.operands.size() - first_arg;
    if (argc != params.size()) {
      err(in.id, what + " expects " + std::to_string(params.size()) +
                     " argument(s), got " + std::to_string(argc));
      return;
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      VType a = operand_type(in.operands[first_arg + i], in.id);
      if (a.k == VType::K::Bad) continue;
      if (!compatible(params[i], a))
        err(in.id, what + " argument " + std::to_string(i + 1) + " has incompatible type");
    }
    if (in.result && !ret) err(in.id, what + " has no result value");
    if (in.result && ret) reg_types_[*in.result] = VType::of(ret);
    if (!in.result && ret) {
      // Discarding a result is allowed.
    }
  }

  bool check_arity(const Instruction& in) {
    std::size_t need = 0, got = in.operands.size();
    bool exact = true;
    switch (in.op) {
      case Opcode::Const: need = 1; break;
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
      case Opcode::Store:
      case Opcode::Field:
      case Opcode::Index: need = 2; break;
      case Opcode::Load:
      case Opcode::FuncAddr:
      case Opcode::Br: need = 1; break;
      case Opcode::Cbr: need = 3; break;
      case Opcode::Alloca:
      case Opcode::Heap:
      case Opcode::NeckMark: need = 0; break;
      case Opcode::Ret:
        if (got > 1) {
          err(in.id, "ret takes at most one operand");
          return false;
        }
        return true;
      case Opcode::Call:
      case Opcode::ICall:
        exact = false;
        need = 1;
        break;
    }
    if ((exact && got != need) || (!exact && got < need)) {
      err(in.id, std::string(opcode_name(in.op)) + " has wrong operand count");
      return false;
    }
    return true;
  }

  void type_inst(const Instruction& in) {
    if (!check_arity(in)) return;
    auto set_result = [&](VType t) {
      if (in.result) reg_types_[*in.result] = std::move(t);
    };
    auto require_result = [&]() {
      if (!in.result) err(in.id, std::string(opcode_name(in.op)) + " requires a result register");
    };
    switch (in.op) {
      case Opcode::Const: {
        require_result();
        if (in.type->kind == Type::Kind::Ptr) {
          set_result(VType::of(in.type));
        } else if (in.type->kind == Type::Kind::Str) {
          set_result(VType::of(Type::ptr(Type::byte_ty())));
        } else {
          set_result(VType::of(in.type));
        }
        break;
      }
      case Opcode::Add:
      case Opcode::Sub:
      case Opcode::Mul:
      case Opcode::Div: {
        require_result();
        for (int i = 0; i < 2; ++i) {
          VType t = operand_type(in.operands[i], in.id);
          if (t.k != VType::K::Bad && !int_like(t))
            err(in.id, "arithmetic operand must be int or byte");
        }
        if (in.op == Opcode::Div && in.operands[0].kind == Operand::Kind::Const &&
            in.operands[1].kind == Operand::Kind::Const) {
          const auto& d = in.operands[1].cval;
          if ((d.kind == ConstValue::Kind::Int && d.int_val == 0) ||
              (d.kind == ConstValue::Kind::Byte && d.byte_val == 0))
            err(in.id, "constant division by zero");
        }
        set_result(VType::of(Type::int_ty()));
        break;
      }
      case Opcode::Eq:
      case Opcode::Ne:
      case Opcode::Lt:
      case Opcode::Le:
      case Opcode::Gt:
      case Opcode::Ge: {
        require_result();
        VType a = operand_type(in.operands[0], in.id);
        VType b = operand_type(in.operands[1], in.id);
        bool ok = false;
        if (int_like(a) && int_like(b)) ok = true;
        if (a.k == VType::K::Ty && a.ty->kind == Type::Kind::Ptr &&
            (b.k == VType::K::NullPtr ||
             (b.k == VType::K::Ty && b.ty->kind == Type::Kind::Ptr)))
          ok = true;
        if (b.k == VType::K::Ty && b.ty->kind == Type::Kind::Ptr && a.k == VType::K::NullPtr)
          ok = true;
        if (a.k == VType::K::NullPtr && b.k == VType::K::NullPtr) ok = true;
        if (!ok && a.k != VType::K::Bad && b.k != VType::K::Bad)
          err(in.id, "comparison operands must both be int-like or both pointers");
        set_result(VType::of(Type::int_ty()));
        break;
      }
      case Opcode::Alloca:
      case Opcode::Heap: {
        require_result();
        set_result(VType::of(Type::ptr(in.type)));
        break;
      }
      case Opcode::Load: {
        require_result();
        VType p = operand_type(in.operands[0], in.id);
        if (p.k == VType::K::Ty && p.ty->kind == Type::Kind::Ptr &&
            is_scalar(p.ty->elem)) {
          set_result(VType::of(p.ty->elem));
        } else if (p.k != VType::K::Bad) {
          err(in.id, "load requires a pointer to a scalar");
        }
        break;
      }
      case Opcode::Store: {
        VType v = operand_type(in.operands[0], in.id);
        VType p = operand_type(in.operands[1], in.id);
        if (p.k == VType::K::Ty && p.ty->kind == Type::Kind::Ptr &&
            is_scalar(p.ty->elem)) {
          if (v.k != VType::K::Bad && !compatible(p.ty->elem, v))
            err(in.id, "stored value type does not match pointee");
        } else if (p.k != VType::K::Bad) {
          err(in.id, "store requires a pointer to a scalar destination");
        }
        break;
      }
      case Opcode::Field: {
        require_result();
        VType b = operand_type(in.operands[0], in.id);
        if (b.k == VType::K::Ty && b.ty->kind == Type::Kind::Ptr &&
            b.ty->elem->kind == Type::Kind::Struct) {
          const StructDef* sd = prog_.find_struct(b.ty->elem->struct_name);
          if (!sd) {
            err(in.id, "unknown struct '" + b.ty->elem->struct_name + "'");
            break;
          }
          if (in.operands[1].kind != Operand::Kind::Const ||
              in.operands[1].cval.kind != ConstValue::Kind::Int) {
            err(in.id, "field index must be an integer literal");
            break;
          }
          std::int64_t idx = in.operands[1].cval.int_val;
          if (idx < 0 || idx >= static_cast<std::int64_t>(sd->fields.size())) {
            err(in.id, "field index out of range");
            break;
          }
          set_result(VType::of(Type::ptr(sd->fields[static_cast<std::size_t>(idx)])));
        } else if (b.k != VType::K::Bad) {
          err(in.id, "field requires a pointer to a struct");
        }
        break;
      }
      case Opcode::Index: {
        require_result();
        VType b = operand_type(in.operands[0], in.id);
        VType i = operand_type(in.operands[1], in.id);
        if (i.k != VType::K::Bad && !int_like(i))
          err(in.id, "index operand must be int-like");
        if (b.k == VType::K::Ty && b.ty->kind == Type::Kind::Ptr) {
          if (b.ty->elem->kind == Type::Kind::Arr) {
            set_result(VType::of(Type::ptr(b.ty->elem->elem)));
          } else if (is_scalar(b.ty->elem)) {
            set_result(VType::of(b.ty));
          } else {
            err(in.id, "index base must point to an array or scalar");
          }
        } else if (b.k != VType::K::Bad) {
          err(in.id, "index requires a pointer base");
        }
        break;
      }
      case Opcode::Call: {
        const std::string& callee = in.operands[0].name;
        if (const Function* f = prog_.find_function(callee)) {
          std::vector<TypeRef> params;
          for (const auto& pr : f->params) params.push_back(pr.type);
          check_call_args(in, params, f->return_type, "call to @" + callee, 1);
        } else if (const IntrinsicSig* s = intrinsic_sig(callee)) {
          check_call_args(in, s->params, s->ret, "call to @" + callee, 1);
        } else {
          err(in.id, "unknown callee '@" + callee + "'");
        }
        break;
      }
      case Opcode::ICall: {
        VType f = operand_type(in.operands[0], in.id);
        if (f.k != VType::K::FuncPtr) {
          if (f.k != VType::K::Bad) err(in.id, "icall requires a function address");
          break;
        }
        const Function* target = prog_.find_function(f.func);
        if (!target) {
          err(in.id, "icall target '@" + f.func + "' is not a defined function");
          break;
        }
        std::vector<TypeRef> params;
        for (const auto& pr : target->params) params.push_back(pr.type);
        check_call_args(in, params, target->return_type, "icall via @" + f.func, 1);
        break;
      }
      case Opcode::FuncAddr: {
        require_result();
        const std::string& callee = in.operands[0].name;
        if (!prog_.find_function(callee))
          err(in.id, "funcaddr target '@" + callee + "' is not a defined function");
        set_result(VType::fptr(callee));
        break;
      }
      case Opcode::Br:
        break;
      case Opcode::Cbr: {
        VType c = operand_type(in.operands[0], in.id);
        if (c.k != VType::K::Bad && !int_like(c))
          err(in.id, "cbr condition must be int-like");
        break;
      }
      case Opcode::Ret: {
        if (fn_.return_type) {
          if (in.operands.empty()) {
            err(in.id, "ret requires a value of type " + type_to_string(fn_.return_type));
          } else {
            VType v = operand_type(in.operands[0], in.id);
            if (v.k != VType::K::Bad && !compatible(fn_.return_type, v))
              err(in.id, "ret value type does not match function return type");
          }
        } else if (!in.operands.empty()) {
          err(in.id, "ret with a value in a function without a return type");
        }
        break;
      }
      case Opcode::NeckMark:
        break;
    }
  }

  // CFG-based checks: entry has no predecessors, every register use is
  // dominated by its definition.
  void analysis_pass() {
    analysis::Cfg g = analysis::build_cfg(fn_);
    if (!g.preds.at(g.entry).empty())
      err({}, "entry block '" + g.entry + "' has predecessors");

    // Type the instructions in reverse postorder so defs are typed before
    // dominated uses.
    analysis::DomTree dt = analysis::dominators(g);
    std::map<std::string, std::size_t> block_pos;
    for (std::size_t i = 0; i < fn_.blocks.size(); ++i)
      block_pos[fn_.blocks[i].label] = i;

    // Process entry first, then nodes whose idom is already processed, so
    // definitions are typed before any dominated use.
    std::vector<std::string> order;
    {
      std::set<std::string> visited;
      order.push_back(g.entry);
      visited.insert(g.entry);
      bool progress = true;
      while (progress) {
        progress = false;
        for (const auto& n : g.nodes) {
          if (visited.count(n) || !dt.idom.count(n)) continue;
          if (visited.count(dt.idom.at(n))) {
            order.push_back(n);
            visited.insert(n);
            progress = true;
          }
        }
      }
    }

    for (const auto& label : order) {
      const ir::BasicBlock* b = fn_.find_block(label);
      for (const auto& in : b->insts) type_inst(in);
    }

    // Def-before-use along all paths: defs must dominate their uses.
    std::map<std::string, std::pair<std::string, std::size_t>> def_site;
    for (const auto& b : fn_.blocks)
      for (std::size_t i = 0; i < b.insts.size(); ++i)
        if (b.insts[i].result) def_site[*b.insts[i].result] = {b.label, i};

    for (const auto& b : fn_.blocks) {
      bool reachable = !g.unreachable.count(b.label);
      for (std::size_t i = 0; i < b.insts.size(); ++i) {
        const auto& in = b.insts[i];
        for (const auto& o : in.operands) {
          if (o.kind != Operand::Kind::Reg) continue;
          bool is_param = false;
          for (const auto& pr : fn_.params)
            if (pr.name == o.name) is_param = true;
          if (is_param) continue;
          auto it = def_site.find(o.name);
          if (it == def_site.end()) {
            err(in.id, "use of undefined register '%" + o.name + "'");
            continue;
          }
          if (!reachable) continue;  // dominance is meaningless off the CFG
          const auto& [def_label, def_idx] = it->second;
          bool ok;
          if (def_label == b.label) {
            ok = def_idx < i;
          } else {
            ok = dt.dominates(def_label, b.label);
          }
          if (!ok)
            err(in.id, "register '%" + o.name + "' may be used before assignment");
        }
      }
    }
  }

  const Program& prog_;
  const Function& fn_;
  std::vector<Diagnostic>& diags_;
  std::map<std::string, VType> reg_types_;
  bool has_errors_ = false;
};

void check_struct_defs(const Program& p, std::vector<Diagnostic>& out) {
  std::set<std::string> names;
  for (const auto& s : p.structs) {
    if (!names.insert(s.name).second)
      out.push_back({s.name, {}, "duplicate struct definition"});
    if (s.fields.empty())
      out.push_back({s.name, {}, "struct has no fields"});
  }
  // By-value recursion check (recursion through ptr is fine).
  for (const auto& s : p.structs) {
    std::set<std::string> seen;
    std::vector<std::string> work{s.name};
    bool cyclic = false;
    while (!work.empty() && !cyclic) {
      std::string n = work.back();
      work.pop_back();
      const StructDef* sd = p.find_struct(n);
      if (!sd) continue;
      for (const auto& f : sd->fields) {
        const Type* t = f.get();
        while (t && t->kind == Type::Kind::Arr) t = t->elem.get();
        if (t && t->kind == Type::Kind::Struct) {
          if (t->struct_name == s.name) {
            cyclic = true;
            break;
          }
          if (seen.insert(t->struct_name).second) work.push_back(t->struct_name);
        }
      }
    }
    if (cyclic)
      out.push_back({s.name, {}, "struct contains itself by value"});
  }
}

void check_globals(const Program& p, std::vector<Diagnostic>& out) {
  std::set<std::string> names;
  for (const auto& g : p.globals) {
    if (!names.insert(g.name).second)
      out.push_back({g.name, {}, "duplicate global definition"});
    switch (g.type->kind) {
      case Type::Kind::Int:
        if (g.init.kind != ConstValue::Kind::Int)
          out.push_back({g.name, {}, "int global requires an integer initializer"});
        break;
      case Type::Kind::Byte:
        if (g.init.kind != ConstValue::Kind::Byte &&
            !(g.init.kind == ConstValue::Kind::Int && g.init.int_val >= 0 &&
              g.init.int_val <= 255))
          out.push_back({g.name, {}, "byte global requires a byte initializer"});
        break;
      case Type::Kind::Str:
        if (g.init.kind != ConstValue::Kind::Str)
          out.push_back({g.name, {}, "str global requires a string initializer"});
        break;
      case Type::Kind::Arr: {
        if (g.type->elem->kind != Type::Kind::Byte ||
            g.init.kind != ConstValue::Kind::Str) {
          out.push_back({g.name, {}, "array globals must be arr<byte, N> with a string initializer"});
          break;
        }
        // NUL-terminated: declared length covers the bytes plus one.
        if (g.type->len != static_cast<std::int64_t>(g.init.str_val.size()) + 1)
          out.push_back({g.name, {}, "arr<byte, N> initializer must have N-1 bytes"});
        break;
      }
      case Type::Kind::Ptr:
        if (g.init.kind != ConstValue::Kind::Null)
          out.push_back({g.name, {}, "pointer global requires a null initializer"});
        break;
      case Type::Kind::Struct:
        out.push_back({g.name, {}, "struct globals are not supported"});
        break;
    }
  }
}

}  // namespace

std::vector<Diagnostic> validate(const Program& p, const ValidateOptions& opts) {
  std::vector<Diagnostic> out;
  check_struct_defs(p, out);
  check_globals(p, out);

  std::set<std::string> fnames;
  int neckmarks = 0;
  for (const auto& f : p.functions) {
    if (!fnames.insert(f.name).second)
      out.push_back({f.name, {}, "duplicate function definition"});
    if (is_intrinsic(f.name))
      out.push_back({f.name, {}, "function name collides with intrinsic '@" + f.name + "'"});
    if (p.find_global(f.name))
      out.push_back({f.name, {}, "function and global share the name '" + f.name + "'"});
    for (const auto& b : f.blocks)
      for (const auto& in : b.insts)
        if (in.op == Opcode::NeckMark) ++neckmarks;
  }
  if (neckmarks > 1)
    out.push_back({"", {}, "program contains more than one neckmark"});

  if (opts.require_main) {
    const Function* m = p.find_function("main");
    if (!m) {
      out.push_back({"main", {}, "program has no @main function"});
    } else {
      bool sig_ok = m->params.size() == 2 &&
                    type_equal(m->params[0].type, Type::int_ty()) &&
                    type_equal(m->params[1].type, Type::ptr(Type::ptr(Type::byte_ty())));
      if (!sig_ok)
        out.push_back({"main", {}, "@main must take (argc: int, argv: ptr<ptr<byte>>)"});
    }
  }

  if (!out.empty()) return out;
  for (const auto& f : p.functions) {
    FunctionChecker checker(p, f, out);
    checker.run();
  }
  return out;
}

std::string diagnostics_to_string(const std::vector<Diagnostic>& ds) {
  std::ostringstream os;
  for (const auto& d : ds) {
    os << (d.entity.empty() ? std::string("<program>") : d.entity);
    if (d.inst) os << " [inst " << *d.inst << "]";
    os << ": " << d.message << "\n";
  }
  return os.str();
}

}  // namespace slimir::ir
