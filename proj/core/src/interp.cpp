// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slimir/interp.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

#include "slimir/analysis.hpp"
#include "slimir/print.hpp"

namespace slimir::interp {

using ir::ConstValue;
using ir::Function;
using ir::InstId;
using ir::Instruction;
using ir::Opcode;
using ir::Operand;
using ir::Program;
using ir::Type;
using ir::TypeRef;

Value Value::of_int(std::int64_t v) {
  Value x;
  x.kind = Kind::Int;
  x.i = v;
  return x;
}

Value Value::of_byte(std::uint8_t v) {
  Value x;
  x.kind = Kind::Byte;
  x.b = v;
  return x;
}

Value Value::ptr(RegionId r, std::int64_t off) {
  Value x;
  x.kind = Kind::Ptr;
  x.region = r;
  x.offset = off;
  return x;
}

Value Value::func_addr(std::string name) {
  Value x;
  x.kind = Kind::Func;
  x.func = std::move(name);
  return x;
}

const char* trap_kind_name(TrapKind k) {
  switch (k) {
    case TrapKind::DivByZero: return "DivByZero";
    case TrapKind::OutOfBounds: return "OutOfBounds";
    case TrapKind::UndefBranch: return "UndefBranch";
    case TrapKind::BudgetExceeded: return "BudgetExceeded";
    case TrapKind::BadIndirectCall: return "BadIndirectCall";
  }
  return "<bad>";
}

PathRef Path::global(std::string name) {
  auto p = std::make_shared<Path>();
  p->kind = Kind::Global;
  p->global_name = std::move(name);
  return p;
}

PathRef Path::stack_slot(std::string func, InstId id, std::string reg) {
  auto p = std::make_shared<Path>();
  p->kind = Kind::StackSlot;
  p->func = std::move(func);
  p->alloca_id = id;
  p->alloca_reg = std::move(reg);
  return p;
}

PathRef Path::struct_elem(PathRef base, std::int64_t index) {
  auto p = std::make_shared<Path>();
  p->kind = Kind::StructElem;
  p->base = std::move(base);
  p->elem_index = index;
  return p;
}

PathRef Path::ptr_target(PathRef base) {
  auto p = std::make_shared<Path>();
  p->kind = Kind::PtrTarget;
  p->base = std::move(base);
  return p;
}

bool path_equal(const PathRef& a, const PathRef& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Path::Kind::Global:
      return a->global_name == b->global_name;
    case Path::Kind::StackSlot:
      return a->func == b->func && a->alloca_reg == b->alloca_reg;
    case Path::Kind::StructElem:
      return a->elem_index == b->elem_index && path_equal(a->base, b->base);
    case Path::Kind::PtrTarget:
      return path_equal(a->base, b->base);
  }
  return false;
}

std::string path_to_string(const PathRef& p) {
  if (!p) return "<none>";
  switch (p->kind) {
    case Path::Kind::Global:
      return "@" + p->global_name;
    case Path::Kind::StackSlot:
      return p->func + "/%" + p->alloca_reg;
    case Path::Kind::StructElem:
      return path_to_string(p->base) + "." + std::to_string(p->elem_index);
    case Path::Kind::PtrTarget:
      return path_to_string(p->base) + "->";
  }
  return "<bad>";
}

const CapturedEntry* PartialState::find(const PathRef& p) const {
  for (const auto& e : entries)
    if (path_equal(e.path, p)) return &e;
  return nullptr;
}

namespace {

struct TrapException {
  TrapKind kind;
  InstId site;
  std::string detail;
};

[[noreturn]] void trap(TrapKind k, InstId site, const std::string& detail = {}) {
  throw TrapException{k, site, detail};
}

std::vector<CellKind> flatten_kinds(const Program& p, const TypeRef& t) {
  std::vector<CellKind> out;
  std::function<void(const TypeRef&)> rec = [&](const TypeRef& ty) {
    switch (ty->kind) {
      case Type::Kind::Int: out.push_back(CellKind::Int); break;
      case Type::Kind::Byte: out.push_back(CellKind::Byte); break;
      case Type::Kind::Ptr: out.push_back(CellKind::Ptr); break;
      case Type::Kind::Str: out.push_back(CellKind::Byte); break;
      case Type::Kind::Arr:
        for (std::int64_t i = 0; i < ty->len; ++i) rec(ty->elem);
        break;
      case Type::Kind::Struct: {
        const ir::StructDef* sd = p.find_struct(ty->struct_name);
        for (const auto& f : sd->fields) rec(f);
        break;
      }
    }
  };
  rec(t);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Machine

struct Frame {
  const Function* fn = nullptr;
  std::size_t block = 0;
  std::size_t ip = 0;
  std::map<std::string, Value> regs;
  std::map<InstId, RegionId> allocas;
  std::vector<RegionId> owned;
  std::optional<std::string> result_reg;  // caller register receiving ret value
  int seq = 0;
  bool visited_marked = false;
};

class Machine {
public:
  Machine(const Program& p, bool partial_mode) : prog(p), partial(partial_mode) {}

  const Program& prog;
  bool partial;
  std::vector<Region> regions;
  std::map<std::string, RegionId> global_regions;
  std::map<std::string, RegionId> interned;
  std::vector<Frame> frames;
  std::string out;
  std::optional<std::string> stdin_bytes;
  std::size_t stdin_pos = 0;
  std::vector<std::string> cfg_lines;  // read_cfg_line serves the supplied args
  std::size_t cfg_pos = 0;
  std::int64_t steps = 0;
  std::int64_t budget = 10'000'000;
  int neck_crossings = 0;
  std::set<std::string> visited;
  RunHooks* hooks = nullptr;
  std::int64_t heap_seq = 0;

  // Static per-function tables: index strides and field offsets in cells.
  struct FnTables {
    std::map<InstId, std::int64_t> index_stride;
    std::map<InstId, std::int64_t> field_offset;
    std::map<std::string, std::size_t> block_index;
  };
  std::map<const Function*, FnTables> fn_tables;

  RegionId add_region(Region r) {
    regions.push_back(std::move(r));
    return static_cast<RegionId>(regions.size() - 1);
  }

  RegionId intern_string(const std::string& s) {
    auto it = interned.find(s);
    if (it != interned.end()) return it->second;
    Region r;
    r.kind = Region::Kind::Rodata;
    r.readonly = true;
    r.cells.reserve(s.size() + 1);
    for (unsigned char c : s) r.cells.push_back(Value::of_byte(c));
    r.cells.push_back(Value::of_byte(0));
    r.kinds.assign(s.size() + 1, CellKind::Byte);
    RegionId id = add_region(std::move(r));
    interned[s] = id;
    return id;
  }

  void init_globals() {
    for (const auto& g : prog.globals) {
      Region r;
      r.kind = Region::Kind::GlobalMem;
      r.global_name = g.name;
      r.alloc_type = g.type;
      switch (g.type->kind) {
        case Type::Kind::Int:
          r.cells = {Value::of_int(g.init.int_val)};
          r.kinds = {CellKind::Int};
          break;
        case Type::Kind::Byte: {
          std::uint8_t b = g.init.kind == ConstValue::Kind::Byte
                               ? g.init.byte_val
                               : static_cast<std::uint8_t>(g.init.int_val);
          r.cells = {Value::of_byte(b)};
          r.kinds = {CellKind::Byte};
          break;
        }
        case Type::Kind::Str: {
          r.readonly = true;
          for (unsigned char c : g.init.str_val) r.cells.push_back(Value::of_byte(c));
          r.cells.push_back(Value::of_byte(0));
          r.kinds.assign(r.cells.size(), CellKind::Byte);
          break;
        }
        case Type::Kind::Arr: {
          for (unsigned char c : g.init.str_val) r.cells.push_back(Value::of_byte(c));
          r.cells.push_back(Value::of_byte(0));
          r.kinds.assign(r.cells.size(), CellKind::Byte);
          break;
        }
        case Type::Kind::Ptr:
          r.cells = {Value::null_ptr()};
          r.kinds = {CellKind::Ptr};
          break;
        case Type::Kind::Struct:
          break;  // rejected by the validator
      }
      global_regions[g.name] = add_region(std::move(r));
    }
  }

  RegionId make_argv(const std::vector<std::string>& args) {
    // argv[0] is a fixed program name; the argv region holds only the
    // pointer array. Argument strings live in read-only string regions.
    std::vector<std::string> all{"prog"};
    all.insert(all.end(), args.begin(), args.end());
    Region r;
    r.kind = Region::Kind::Argv;
    for (const auto& a : all) {
      RegionId s = intern_string(a);
      r.cells.push_back(Value::ptr(s, 0));
      r.kinds.push_back(CellKind::Ptr);
    }
    return add_region(std::move(r));
  }

  const FnTables& tables_for(const Function* fn) {
    auto it = fn_tables.find(fn);
    if (it != fn_tables.end()) return it->second;
    FnTables t;
    for (std::size_t i = 0; i < fn->blocks.size(); ++i)
      t.block_index[fn->blocks[i].label] = i;

    auto reg_ty = analysis::register_types(prog, *fn);
    auto operand_type = [&](const Operand& o) -> TypeRef {
      switch (o.kind) {
        case Operand::Kind::Reg: {
          auto rit = reg_ty.find(o.name);
          return rit == reg_ty.end() ? nullptr : rit->second;
        }
        case Operand::Kind::Global: {
          const ir::Global* g = prog.find_global(o.name);
          if (!g) return nullptr;
          if (g->type->kind == Type::Kind::Str) return Type::ptr(Type::byte_ty());
          return Type::ptr(g->type);
        }
        case Operand::Kind::Const:
          if (o.cval.kind == ConstValue::Kind::Str) return Type::ptr(Type::byte_ty());
          return nullptr;
        default:
          return nullptr;
      }
    };
    for (const auto& b : fn->blocks) {
      for (const auto& in : b.insts) {
        if (in.op == Opcode::Index) {
          TypeRef base = operand_type(in.operands[0]);
          std::int64_t stride = 1;
          if (base && base->kind == Type::Kind::Ptr &&
              base->elem->kind == Type::Kind::Arr)
            stride = ir::flat_size(prog, base->elem->elem);
          t.index_stride[in.id] = stride;
        } else if (in.op == Opcode::Field) {
          TypeRef base = operand_type(in.operands[0]);
          std::int64_t off = 0;
          if (base && base->kind == Type::Kind::Ptr &&
              base->elem->kind == Type::Kind::Struct) {
            const ir::StructDef* sd = prog.find_struct(base->elem->struct_name);
            if (sd)
              off = ir::field_cell_offset(prog, *sd,
                                          static_cast<std::size_t>(in.operands[1].cval.int_val));
          }
          t.field_offset[in.id] = off;
        }
      }
    }
    return fn_tables.emplace(fn, std::move(t)).first->second;
  }

  // ---- memory access ----

  Region& region_at(const Value& p, InstId site) {
    if (p.kind != Value::Kind::Ptr) trap(TrapKind::UndefBranch, site, "non-pointer dereference");
    if (p.region == kNullRegion) trap(TrapKind::OutOfBounds, site, "null pointer dereference");
    if (p.region < 0 || p.region >= static_cast<RegionId>(regions.size()))
      trap(TrapKind::OutOfBounds, site, "wild pointer");
    Region& r = regions[static_cast<std::size_t>(p.region)];
    if (!r.alive) trap(TrapKind::OutOfBounds, site, "dangling pointer");
    return r;
  }

  Value load_cell(const Value& p, InstId site) {
    Region& r = region_at(p, site);
    if (p.offset < 0 || p.offset >= static_cast<std::int64_t>(r.cells.size()))
      trap(TrapKind::OutOfBounds, site, "load out of bounds");
    const Value& v = r.cells[static_cast<std::size_t>(p.offset)];
    if (v.kind == Value::Kind::Undef)
      trap(TrapKind::UndefBranch, site, "load of undefined value");
    return v;
  }

  void store_cell(const Value& p, const Value& v, InstId site) {
    Region& r = region_at(p, site);
    if (r.readonly) trap(TrapKind::OutOfBounds, site, "store to read-only memory");
    if (p.offset < 0 || p.offset >= static_cast<std::int64_t>(r.cells.size()))
      trap(TrapKind::OutOfBounds, site, "store out of bounds");
    auto idx = static_cast<std::size_t>(p.offset);
    switch (r.kinds[idx]) {
      case CellKind::Int:
        r.cells[idx] = Value::of_int(to_int(v, site));
        break;
      case CellKind::Byte:
        r.cells[idx] = Value::of_byte(static_cast<std::uint8_t>(to_int(v, site) & 0xFF));
        break;
      case CellKind::Ptr:
        if (v.kind != Value::Kind::Ptr)
          trap(TrapKind::UndefBranch, site, "storing non-pointer into pointer cell");
        r.cells[idx] = v;
        break;
    }
  }

  std::int64_t to_int(const Value& v, InstId site) {
    switch (v.kind) {
      case Value::Kind::Int: return v.i;
      case Value::Kind::Byte: return v.b;
      default:
        trap(TrapKind::UndefBranch, site, "integer value required");
    }
  }

  std::string read_c_string(const Value& p, InstId site) {
    Region& r = region_at(p, site);
    std::string s;
    std::int64_t off = p.offset;
    while (true) {
      if (off < 0 || off >= static_cast<std::int64_t>(r.cells.size()))
        trap(TrapKind::OutOfBounds, site, "unterminated string");
      const Value& c = r.cells[static_cast<std::size_t>(off)];
      if (c.kind == Value::Kind::Undef)
        trap(TrapKind::UndefBranch, site, "string read of undefined byte");
      if (c.kind != Value::Kind::Byte)
        trap(TrapKind::UndefBranch, site, "string read of non-byte cell");
      if (c.b == 0) break;
      s += static_cast<char>(c.b);
      ++off;
      bump_steps(site);
    }
    return s;
  }

  void write_bytes(const Value& p, const std::string& bytes, InstId site) {
    // bytes plus a terminating NUL
    Region& r = region_at(p, site);
    if (r.readonly) trap(TrapKind::OutOfBounds, site, "write to read-only memory");
    std::int64_t need = static_cast<std::int64_t>(bytes.size()) + 1;
    if (p.offset < 0 || p.offset + need > static_cast<std::int64_t>(r.cells.size()))
      trap(TrapKind::OutOfBounds, site, "buffer write out of bounds");
    for (std::int64_t k = 0; k < need; ++k) {
      auto idx = static_cast<std::size_t>(p.offset + k);
      if (r.kinds[idx] != CellKind::Byte)
        trap(TrapKind::UndefBranch, site, "byte buffer required");
      r.cells[idx] = Value::of_byte(
          k + 1 == need ? 0 : static_cast<std::uint8_t>(bytes[static_cast<std::size_t>(k)]));
    }
  }

  void bump_steps(InstId site) {
    if (++steps > budget) trap(TrapKind::BudgetExceeded, site, "step budget exceeded");
  }
};

namespace {

Value eval_operand(Machine& m, Frame& fr, const Operand& o, InstId site) {
  switch (o.kind) {
    case Operand::Kind::Reg: {
      auto it = fr.regs.find(o.name);
      if (it == fr.regs.end())
        trap(TrapKind::UndefBranch, site, "unset register %" + o.name);
      return it->second;
    }
    case Operand::Kind::Const:
      switch (o.cval.kind) {
        case ConstValue::Kind::Int: return Value::of_int(o.cval.int_val);
        case ConstValue::Kind::Byte: return Value::of_byte(o.cval.byte_val);
        case ConstValue::Kind::Str: return Value::ptr(m.intern_string(o.cval.str_val), 0);
        case ConstValue::Kind::Null: return Value::null_ptr();
      }
      return Value::undef();
    case Operand::Kind::Global: {
      auto it = m.global_regions.find(o.name);
      if (it == m.global_regions.end())
        trap(TrapKind::UndefBranch, site, "unknown global @" + o.name);
      return Value::ptr(it->second, 0);
    }
    case Operand::Kind::Func:
      return Value::func_addr(o.name);
    case Operand::Kind::Label:
      trap(TrapKind::UndefBranch, site, "label used as value");
  }
  return Value::undef();
}

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

int compare_values(Machine& m, const Value& a, const Value& b, InstId site) {
  if (a.kind == Value::Kind::Ptr && b.kind == Value::Kind::Ptr) {
    if (a.region != b.region) return a.region < b.region ? -1 : 1;
    if (a.offset != b.offset) return a.offset < b.offset ? -1 : 1;
    return 0;
  }
  std::int64_t x = m.to_int(a, site);
  std::int64_t y = m.to_int(b, site);
  return x < y ? -1 : (x > y ? 1 : 0);
}

void run_intrinsic(Machine& m, const Instruction& in,
                   const std::vector<Value>& args, std::optional<Value>& result) {
  const std::string& name = in.operands[0].name;
  InstId site = in.id;
  if (name == "print_int") {
    m.out += std::to_string(m.to_int(args[0], site));
  } else if (name == "print_str") {
    m.out += m.read_c_string(args[0], site);
  } else if (name == "str_eq") {
    std::string a = m.read_c_string(args[0], site);
    std::string b = m.read_c_string(args[1], site);
    result = Value::of_int(a == b ? 1 : 0);
  } else if (name == "atoi") {
    std::string s = m.read_c_string(args[0], site);
    std::int64_t v = 0;
    bool neg = false;
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
      neg = s[i] == '-';
      ++i;
    }
    for (; i < s.size() && s[i] >= '0' && s[i] <= '9'; ++i)
      v = wrap_add(wrap_mul(v, 10), s[i] - '0');
    result = Value::of_int(neg ? wrap_sub(0, v) : v);
  } else if (name == "read_line") {
    if (!m.stdin_bytes) {
      if (m.partial)
        throw InterpError(InterpError::Kind::DelayedInputBeforeNeck,
                          "read_line on delayed stdin before the neck (inst " +
                              std::to_string(site) + ")");
      trap(TrapKind::UndefBranch, site, "stdin not provided");
    }
    std::int64_t cap = m.to_int(args[1], site);
    if (cap < 1) trap(TrapKind::OutOfBounds, site, "read_line capacity < 1");
    const std::string& src = *m.stdin_bytes;
    if (m.stdin_pos >= src.size()) {
      result = Value::of_int(-1);
    } else {
      std::string line;
      while (m.stdin_pos < src.size() &&
             static_cast<std::int64_t>(line.size()) < cap - 1) {
        char c = src[m.stdin_pos++];
        line += c;
        m.bump_steps(site);
        if (c == '\n') break;
      }
      m.write_bytes(args[0], line, site);
      result = Value::of_int(static_cast<std::int64_t>(line.size()));
    }
  } else if (name == "read_cfg_line") {
    // Configuration lines are the supplied command-line arguments, served
    // in order; they are never delayed.
    std::int64_t cap = m.to_int(args[1], site);
    if (cap < 1) trap(TrapKind::OutOfBounds, site, "read_cfg_line capacity < 1");
    if (m.cfg_pos >= m.cfg_lines.size()) {
      result = Value::of_int(-1);
    } else {
      std::string line = m.cfg_lines[m.cfg_pos++];
      if (static_cast<std::int64_t>(line.size()) > cap - 1)
        line.resize(static_cast<std::size_t>(cap - 1));
      m.write_bytes(args[0], line, site);
      result = Value::of_int(static_cast<std::int64_t>(line.size()));
    }
  } else {
    trap(TrapKind::BadIndirectCall, site, "unknown intrinsic @" + name);
  }
}

struct ExecResult {
  std::int64_t exit_status = 0;
  bool reached_neck = false;
};

void enter_block(Machine& m, Frame& fr, std::size_t block_idx) {
  fr.block = block_idx;
  fr.ip = 0;
  if (m.hooks && m.hooks->count_blocks) {
    ++m.hooks->block_visits[{fr.fn->name, fr.fn->blocks[block_idx].label}];
  }
}

void push_frame(Machine& m, const Function* fn, const std::vector<Value>& args,
                std::optional<std::string> result_reg, InstId site) {
  if (args.size() != fn->params.size())
    trap(TrapKind::BadIndirectCall, site, "argument count mismatch calling @" + fn->name);
  Frame fr;
  fr.fn = fn;
  fr.result_reg = std::move(result_reg);
  fr.seq = static_cast<int>(m.frames.size());
  for (std::size_t i = 0; i < args.size(); ++i) fr.regs[fn->params[i].name] = args[i];
  m.frames.push_back(std::move(fr));
  enter_block(m, m.frames.back(), 0);
}

ExecResult exec(Machine& m) {
  while (!m.frames.empty()) {
    Frame& fr = m.frames.back();
    const ir::BasicBlock& bb = fr.fn->blocks[fr.block];
    assert(fr.ip < bb.insts.size());
    const Instruction& in = bb.insts[fr.ip];

    if (!fr.visited_marked) {
      m.visited.insert(fr.fn->name);
      fr.visited_marked = true;
    }
    m.bump_steps(in.id);
    if (m.hooks && m.hooks->trace && m.hooks->trace->size() < m.hooks->trace_limit)
      m.hooks->trace->push_back(in.id);

    const auto& tables = m.tables_for(fr.fn);
    switch (in.op) {
      case Opcode::Const: {
        Value v = eval_operand(m, fr, in.operands[0], in.id);
        fr.regs[*in.result] = v;
        ++fr.ip;
        break;
      }
      case Opcode::Add:
      case Opcode::Sub:
      case Opcode::Mul:
      case Opcode::Div: {
        std::int64_t a = m.to_int(eval_operand(m, fr, in.operands[0], in.id), in.id);
        std::int64_t b = m.to_int(eval_operand(m, fr, in.operands[1], in.id), in.id);
        std::int64_t r = 0;
        switch (in.op) {
          case Opcode::Add: r = wrap_add(a, b); break;
          case Opcode::Sub: r = wrap_sub(a, b); break;
          case Opcode::Mul: r = wrap_mul(a, b); break;
          case Opcode::Div:
            if (b == 0) trap(TrapKind::DivByZero, in.id, "division by zero");
            if (a == INT64_MIN && b == -1) {
              r = INT64_MIN;
            } else {
              r = a / b;
            }
            break;
          default: break;
        }
        fr.regs[*in.result] = Value::of_int(r);
        ++fr.ip;
        break;
      }
      case Opcode::Eq:
      case Opcode::Ne:
      case Opcode::Lt:
      case Opcode::Le:
      case Opcode::Gt:
      case Opcode::Ge: {
        Value a = eval_operand(m, fr, in.operands[0], in.id);
        Value b = eval_operand(m, fr, in.operands[1], in.id);
        int c = compare_values(m, a, b, in.id);
        bool r = false;
        switch (in.op) {
          case Opcode::Eq: r = c == 0; break;
          case Opcode::Ne: r = c != 0; break;
          case Opcode::Lt: r = c < 0; break;
          case Opcode::Le: r = c <= 0; break;
          case Opcode::Gt: r = c > 0; break;
          case Opcode::Ge: r = c >= 0; break;
          default: break;
        }
        fr.regs[*in.result] = Value::of_int(r ? 1 : 0);
        ++fr.ip;
        break;
      }
      case Opcode::Alloca:
      case Opcode::Heap: {
        Region r;
        r.kind = in.op == Opcode::Alloca ? Region::Kind::Stack : Region::Kind::Heap;
        r.alloc_type = in.type;
        r.kinds = flatten_kinds(m.prog, in.type);
        r.cells.assign(r.kinds.size(), Value::undef());
        if (in.op == Opcode::Alloca) {
          r.func = fr.fn->name;
          r.alloca_reg = *in.result;
          r.alloca_id = in.id;
          r.frame_seq = fr.seq;
        }
        RegionId id = m.add_region(std::move(r));
        if (in.op == Opcode::Alloca) {
          fr.allocas[in.id] = id;
          fr.owned.push_back(id);
        }
        fr.regs[*in.result] = Value::ptr(id, 0);
        ++fr.ip;
        break;
      }
      case Opcode::Load: {
        Value p = eval_operand(m, fr, in.operands[0], in.id);
        fr.regs[*in.result] = m.load_cell(p, in.id);
        ++fr.ip;
        break;
      }
      case Opcode::Store: {
        Value v = eval_operand(m, fr, in.operands[0], in.id);
        Value p = eval_operand(m, fr, in.operands[1], in.id);
        m.store_cell(p, v, in.id);
        ++fr.ip;
        break;
      }
      case Opcode::Field: {
        Value b = eval_operand(m, fr, in.operands[0], in.id);
        if (b.kind != Value::Kind::Ptr)
          trap(TrapKind::UndefBranch, in.id, "field base must be a pointer");
        fr.regs[*in.result] = Value::ptr(b.region, b.offset + tables.field_offset.at(in.id));
        ++fr.ip;
        break;
      }
      case Opcode::Index: {
        Value b = eval_operand(m, fr, in.operands[0], in.id);
        std::int64_t i = m.to_int(eval_operand(m, fr, in.operands[1], in.id), in.id);
        if (b.kind != Value::Kind::Ptr)
          trap(TrapKind::UndefBranch, in.id, "index base must be a pointer");
        fr.regs[*in.result] =
            Value::ptr(b.region, b.offset + i * tables.index_stride.at(in.id));
        ++fr.ip;
        break;
      }
      case Opcode::Call: {
        const std::string& callee = in.operands[0].name;
        std::vector<Value> args;
        for (std::size_t i = 1; i < in.operands.size(); ++i)
          args.push_back(eval_operand(m, fr, in.operands[i], in.id));
        if (const Function* target = m.prog.find_function(callee)) {
          ++fr.ip;  // return lands after the call
          push_frame(m, target, args, in.result, in.id);
        } else {
          std::optional<Value> result;
          run_intrinsic(m, in, args, result);
          if (in.result) {
            if (!result)
              trap(TrapKind::UndefBranch, in.id, "intrinsic has no result");
            fr.regs[*in.result] = *result;
          }
          ++fr.ip;
        }
        break;
      }
      case Opcode::ICall: {
        Value f = eval_operand(m, fr, in.operands[0], in.id);
        if (f.kind != Value::Kind::Func)
          trap(TrapKind::BadIndirectCall, in.id, "icall through non-function value");
        const Function* target = m.prog.find_function(f.func);
        if (!target)
          trap(TrapKind::BadIndirectCall, in.id, "icall target @" + f.func + " missing");
        std::vector<Value> args;
        for (std::size_t i = 1; i < in.operands.size(); ++i)
          args.push_back(eval_operand(m, fr, in.operands[i], in.id));
        ++fr.ip;
        push_frame(m, target, args, in.result, in.id);
        break;
      }
      case Opcode::FuncAddr: {
        fr.regs[*in.result] = Value::func_addr(in.operands[0].name);
        ++fr.ip;
        break;
      }
      case Opcode::Br: {
        enter_block(m, fr, tables.block_index.at(in.operands[0].name));
        break;
      }
      case Opcode::Cbr: {
        std::int64_t c = m.to_int(eval_operand(m, fr, in.operands[0], in.id), in.id);
        enter_block(m, fr,
                    tables.block_index.at(in.operands[c != 0 ? 1 : 2].name));
        break;
      }
      case Opcode::Ret: {
        std::optional<Value> v;
        if (!in.operands.empty()) v = eval_operand(m, fr, in.operands[0], in.id);
        for (RegionId rid : fr.owned) m.regions[static_cast<std::size_t>(rid)].alive = false;
        std::optional<std::string> dest = fr.result_reg;
        bool was_main = m.frames.size() == 1;
        m.frames.pop_back();
        if (was_main) {
          std::int64_t status = 0;
          if (v) status = m.to_int(*v, in.id);
          return {status, false};
        }
        if (dest) {
          if (!v) trap(TrapKind::UndefBranch, in.id, "callee returned no value");
          m.frames.back().regs[*dest] = *v;
        }
        break;
      }
      case Opcode::NeckMark: {
        if (m.partial) {
          ++m.neck_crossings;
          return {0, true};
        }
        ++fr.ip;
        break;
      }
    }
  }
  return {0, false};
}

void start_main(Machine& m, const std::vector<std::string>& args) {
  const Function* main_fn = m.prog.find_function("main");
  if (!main_fn)
    throw ir::IrError(ir::IrError::Kind::BadProgram, "program has no @main");
  m.init_globals();
  RegionId argv = m.make_argv(args);
  std::vector<Value> call_args{
      Value::of_int(static_cast<std::int64_t>(args.size()) + 1),
      Value::ptr(argv, 0)};
  push_frame(m, main_fn, call_args, std::nullopt, -1);
}

}  // namespace

RunOutcome run_full(const Program& p, const Invocation& inv, RunHooks* hooks) {
  Machine m(p, /*partial=*/false);
  m.budget = inv.step_budget;
  m.stdin_bytes = inv.stdin_bytes;
  m.cfg_lines = inv.args;
  m.hooks = hooks;
  RunOutcome out;
  try {
    start_main(m, inv.args);
    ExecResult r = exec(m);
    out.exit_status = r.exit_status;
  } catch (const TrapException& t) {
    out.trap = t.kind;
    out.trap_site = t.site;
  }
  out.stdout_bytes = m.out;
  out.steps = m.steps;
  return out;
}

PartialState run_to_neck(const Program& p, const std::vector<std::string>& args,
                         std::int64_t step_budget, RunHooks* hooks) {
  if (!ir::find_neck(p))
    throw InterpError(InterpError::Kind::NoNeck, "program has no neckmark");
  Machine m(p, /*partial=*/true);
  m.budget = step_budget;
  m.stdin_bytes = std::nullopt;  // delayed
  m.cfg_lines = args;
  m.hooks = hooks;
  try {
    start_main(m, args);
    ExecResult r = exec(m);
    if (!r.reached_neck) {
      throw InterpError(InterpError::Kind::NeckNotReached,
                        "execution returned before reaching the neck");
    }
  } catch (const TrapException& t) {
    if (t.kind == TrapKind::BudgetExceeded)
      throw InterpError(InterpError::Kind::BudgetExceeded,
                        "step budget exceeded before the neck");
    throw InterpError(InterpError::Kind::NeckNotReached,
                      std::string("trap before the neck: ") + trap_kind_name(t.kind) +
                          (t.detail.empty() ? "" : " (" + t.detail + ")"));
  }
  PartialState st = capture_state(m, p);
  st.neck_crossings = m.neck_crossings;
  st.visited_funcs = m.visited;
  return st;
}

// ---------------------------------------------------------------------------
// Capture

namespace {

bool is_string_region(const Region& r) {
  if (r.cells.empty()) return false;
  bool all_bytes = true;
  for (auto k : r.kinds)
    if (k != CellKind::Byte) all_bytes = false;
  if (!all_bytes) return false;
  return r.kind == Region::Kind::Rodata || r.kind == Region::Kind::GlobalMem;
}

std::optional<ConstValue> cell_const(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Int: return ConstValue::of_int(v.i);
    case Value::Kind::Byte: return ConstValue::of_byte(v.b);
    default: return std::nullopt;
  }
}

class Capturer {
public:
  Capturer(const Machine& m, const Program& p, PartialState& out)
      : m_(m), p_(p), out_(out) {}

  void run() {
    for (const auto& g : p_.globals) capture_global(g);
    for (const auto& fr : m_.frames) {
      std::vector<std::pair<InstId, RegionId>> slots(fr.allocas.begin(), fr.allocas.end());
      std::sort(slots.begin(), slots.end());
      for (const auto& [id, rid] : slots) capture_slot(rid);
    }
  }

private:
  void exclude(const PathRef& path, const std::string& reason) {
    out_.exclusions.push_back({path_to_string(path), reason});
  }

  void emit(PathRef path, TypeRef ty, ConstValue v) {
    out_.entries.push_back({std::move(path), std::move(ty), std::move(v)});
  }

  const Region& region(RegionId id) const {
    return m_.regions[static_cast<std::size_t>(id)];
  }

  void capture_global(const ir::Global& g) {
    PathRef path = Path::global(g.name);
    const Region& r = region(m_.global_regions.at(g.name));
    switch (g.type->kind) {
      case Type::Kind::Int:
      case Type::Kind::Byte: {
        auto c = cell_const(r.cells[0]);
        if (c) {
          emit(path, g.type, *c);
        } else {
          exclude(path, "undefined value");
        }
        break;
      }
      case Type::Kind::Str:
      case Type::Kind::Arr:
        exclude(path, "constant string storage");
        break;
      default:
        exclude(path, "unsupported global type");
        break;
    }
  }

  void capture_slot(RegionId rid) {
    const Region& r = region(rid);
    PathRef path = Path::stack_slot(r.func, r.alloca_id, r.alloca_reg);
    const TypeRef& t = r.alloc_type;
    switch (t->kind) {
      case Type::Kind::Int:
      case Type::Kind::Byte: {
        auto c = cell_const(r.cells[0]);
        if (c) {
          emit(path, t, *c);
        } else {
          exclude(path, "undefined value");
        }
        break;
      }
      case Type::Kind::Ptr:
        capture_pointer_slot(path, t, r.cells[0]);
        break;
      case Type::Kind::Struct:
        capture_struct(path, t->struct_name, rid, 0);
        break;
      case Type::Kind::Arr:
        exclude(path, "aggregate array");
        break;
      case Type::Kind::Str:
        exclude(path, "unsupported slot type");
        break;
    }
  }

  void capture_pointer_slot(const PathRef& path, const TypeRef& t, const Value& v) {
    if (v.kind == Value::Kind::Undef) {
      exclude(path, "undefined value");
      return;
    }
    if (v.kind != Value::Kind::Ptr) {
      exclude(path, "non-pointer content");
      return;
    }
    if (v.region == kNullRegion) {
      exclude(path, "null pointer");
      return;
    }
    const Region& target = region(v.region);
    if (target.kind == Region::Kind::Argv) {
      exclude(path, "pointer into the argv region");
      return;
    }
    const TypeRef& pointee = t->elem;
    // Strings: ptr<byte> into read-only or global string storage.
    if (pointee->kind == Type::Kind::Byte && is_string_region(target)) {
      std::string bytes;
      for (std::int64_t off = v.offset;
           off < static_cast<std::int64_t>(target.cells.size()); ++off) {
        const Value& c = target.cells[static_cast<std::size_t>(off)];
        if (c.kind != Value::Kind::Byte) {
          exclude(path, "malformed string target");
          return;
        }
        if (c.b == 0) {
          emit(path, t, ConstValue::of_str(bytes));
          return;
        }
        bytes += static_cast<char>(c.b);
      }
      exclude(path, "unterminated string target");
      return;
    }
    if (pointee->kind == Type::Kind::Int || pointee->kind == Type::Kind::Byte) {
      if (target.kind != Region::Kind::Heap && target.kind != Region::Kind::Stack) {
        exclude(path, "pointer to non heap/stack storage");
        return;
      }
      if (!target.alive) {
        exclude(path, "dangling pointer");
        return;
      }
      if (target.cells.size() != 1 || v.offset != 0) {
        exclude(path, "pointer into an aggregate");
        return;
      }
      auto c = cell_const(target.cells[0]);
      if (!c) {
        exclude(path, "undefined pointee");
        return;
      }
      emit(Path::ptr_target(path), pointee, *c);
      return;
    }
    if (pointee->kind == Type::Kind::Struct) {
      if ((target.kind != Region::Kind::Heap && target.kind != Region::Kind::Stack) ||
          !target.alive) {
        exclude(path, "pointer to non heap/stack storage");
        return;
      }
      if (v.offset != 0 || !target.alloc_type ||
          !ir::type_equal(target.alloc_type, pointee)) {
        exclude(path, "pointer does not address a whole struct");
        return;
      }
      capture_struct(path, pointee->struct_name, v.region, 0);
      return;
    }
    // ptr<ptr<...>>, ptr<arr<...>>: one pointer hop only.
    exclude(path, "pointer chain deeper than one level");
  }

  void capture_struct(const PathRef& base, const std::string& struct_name,
                      RegionId rid, std::int64_t cell_base) {
    const ir::StructDef* sd = p_.find_struct(struct_name);
    const Region& r = region(rid);
    std::int64_t off = cell_base;
    for (std::size_t i = 0; i < sd->fields.size(); ++i) {
      const TypeRef& ft = sd->fields[i];
      PathRef elem = Path::struct_elem(base, static_cast<std::int64_t>(i));
      std::int64_t sz = ir::flat_size(p_, ft);
      switch (ft->kind) {
        case Type::Kind::Int:
        case Type::Kind::Byte: {
          auto c = cell_const(r.cells[static_cast<std::size_t>(off)]);
          if (c) {
            emit(elem, ft, *c);
          } else {
            exclude(elem, "undefined value");
          }
          break;
        }
        case Type::Kind::Struct:
          capture_struct(elem, ft->struct_name, rid, off);
          break;
        default:
          exclude(elem, "unsupported element type");
          break;
      }
      off += sz;
    }
  }

  const Machine& m_;
  const Program& p_;
  PartialState& out_;
};

}  // namespace

namespace {

// Independent re-resolution of a capture path against machine memory,
// used to cross-check what the capturer recorded.
std::optional<ConstValue> reread_path(const Machine& m, const Program& p,
                                      const PathRef& path) {
  // Resolve the path to (region, offset) plus the scalar/string split.
  std::function<std::optional<Value>(const PathRef&)> address =
      [&](const PathRef& pr) -> std::optional<Value> {
    switch (pr->kind) {
      case Path::Kind::Global: {
        auto it = m.global_regions.find(pr->global_name);
        if (it == m.global_regions.end()) return std::nullopt;
        return Value::ptr(it->second, 0);
      }
      case Path::Kind::StackSlot: {
        for (const auto& fr : m.frames) {
          auto it = fr.allocas.find(pr->alloca_id);
          if (it != fr.allocas.end()) return Value::ptr(it->second, 0);
        }
        return std::nullopt;
      }
      case Path::Kind::PtrTarget: {
        auto base = address(pr->base);
        if (!base) return std::nullopt;
        const Region& r = m.regions[static_cast<std::size_t>(base->region)];
        return r.cells[static_cast<std::size_t>(base->offset)];
      }
      case Path::Kind::StructElem: {
        auto base = address(pr->base);
        if (!base) return std::nullopt;
        // A slot declared ptr<struct> holds the struct address; a struct
        // slot or a nested struct element is addressed directly.
        Value struct_addr = *base;
        std::string struct_name;
        if (pr->base->kind == Path::Kind::StackSlot) {
          const Region& br = m.regions[static_cast<std::size_t>(base->region)];
          if (br.alloc_type && br.alloc_type->kind == Type::Kind::Ptr) {
            const Value& cell = br.cells[static_cast<std::size_t>(base->offset)];
            if (cell.kind != Value::Kind::Ptr) return std::nullopt;
            struct_addr = cell;
            struct_name = br.alloc_type->elem->kind == Type::Kind::Struct
                              ? br.alloc_type->elem->struct_name
                              : "";
          } else if (br.alloc_type && br.alloc_type->kind == Type::Kind::Struct) {
            struct_name = br.alloc_type->struct_name;
          }
        } else if (pr->base->kind == Path::Kind::StructElem) {
          // Nested by-value struct: the base element's type is the struct.
          const Region& br = m.regions[static_cast<std::size_t>(base->region)];
          if (br.alloc_type) {
            // Walk the declared types down the path to find the element's
            // struct name.
            ir::TypeRef t = br.alloc_type;
            if (t->kind == Type::Kind::Ptr) t = t->elem;
            std::vector<std::int64_t> idxs;
            for (const Path* q = pr->base.get(); q->kind == Path::Kind::StructElem;
                 q = q->base.get())
              idxs.insert(idxs.begin(), q->elem_index);
            for (std::int64_t i : idxs) {
              if (!t || t->kind != Type::Kind::Struct) return std::nullopt;
              const ir::StructDef* sd = p.find_struct(t->struct_name);
              if (!sd || i < 0 || i >= static_cast<std::int64_t>(sd->fields.size()))
                return std::nullopt;
              t = sd->fields[static_cast<std::size_t>(i)];
            }
            if (t && t->kind == Type::Kind::Struct) struct_name = t->struct_name;
          }
        }
        if (struct_name.empty()) return std::nullopt;
        const ir::StructDef* sd = p.find_struct(struct_name);
        if (!sd) return std::nullopt;
        std::int64_t off =
            ir::field_cell_offset(p, *sd, static_cast<std::size_t>(pr->elem_index));
        return Value::ptr(struct_addr.region, struct_addr.offset + off);
      }
    }
    return std::nullopt;
  };

  auto addr = address(path);
  if (!addr || addr->kind != Value::Kind::Ptr) return std::nullopt;
  const Region& r = m.regions[static_cast<std::size_t>(addr->region)];
  const Value& cell = r.cells[static_cast<std::size_t>(addr->offset)];
  switch (cell.kind) {
    case Value::Kind::Int:
      return ConstValue::of_int(cell.i);
    case Value::Kind::Byte:
      return ConstValue::of_byte(cell.b);
    case Value::Kind::Ptr: {
      // String capture: follow the pointer and read bytes to NUL.
      if (cell.region == kNullRegion) return std::nullopt;
      const Region& tr = m.regions[static_cast<std::size_t>(cell.region)];
      std::string bytes;
      for (std::int64_t off = cell.offset;
           off < static_cast<std::int64_t>(tr.cells.size()); ++off) {
        const Value& c = tr.cells[static_cast<std::size_t>(off)];
        if (c.kind != Value::Kind::Byte) return std::nullopt;
        if (c.b == 0) return ConstValue::of_str(bytes);
        bytes += static_cast<char>(c.b);
      }
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

}  // namespace

PartialState capture_state(const Machine& m, const Program& p) {
  PartialState st;
  Capturer cap(m, p, st);
  cap.run();

  // Self-consistency: every captured entry, re-read from machine memory
  // through an independent path resolution, must match the recorded value.
  for (const auto& e : st.entries) {
    auto again = reread_path(m, p, e.path);
    bool same = false;
    if (again) {
      if (e.path->kind == Path::Kind::PtrTarget && again->kind == ConstValue::Kind::Str) {
        // PtrTarget re-read lands on the pointee cell directly.
        same = true;
      } else {
        same = *again == e.value;
      }
    }
    if (!same)
      throw std::logic_error("captured state inconsistent with memory at " +
                             path_to_string(e.path));
  }
  return st;
}

}  // namespace slimir::interp
