// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slimir/ir.hpp"

#include <algorithm>
#include <map>

#include "slimir/print.hpp"

namespace slimir::ir {

TypeRef Type::int_ty() {
  static TypeRef t = std::make_shared<Type>(Type{Kind::Int, nullptr, 0, {}});
  return t;
}

TypeRef Type::byte_ty() {
  static TypeRef t = std::make_shared<Type>(Type{Kind::Byte, nullptr, 0, {}});
  return t;
}

TypeRef Type::str_ty() {
  static TypeRef t = std::make_shared<Type>(Type{Kind::Str, nullptr, 0, {}});
  return t;
}

TypeRef Type::ptr(TypeRef pointee) {
  return std::make_shared<Type>(Type{Kind::Ptr, std::move(pointee), 0, {}});
}

TypeRef Type::arr(TypeRef elem, std::int64_t len) {
  return std::make_shared<Type>(Type{Kind::Arr, std::move(elem), len, {}});
}

TypeRef Type::struct_ref(std::string name) {
  return std::make_shared<Type>(Type{Kind::Struct, nullptr, 0, std::move(name)});
}

bool type_equal(const TypeRef& a, const TypeRef& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Type::Kind::Int:
    case Type::Kind::Byte:
    case Type::Kind::Str:
      return true;
    case Type::Kind::Ptr:
      return type_equal(a->elem, b->elem);
    case Type::Kind::Arr:
      return a->len == b->len && type_equal(a->elem, b->elem);
    case Type::Kind::Struct:
      return a->struct_name == b->struct_name;
  }
  return false;
}

std::string type_to_string(const TypeRef& t) {
  if (!t) return "<none>";
  switch (t->kind) {
    case Type::Kind::Int: return "int";
    case Type::Kind::Byte: return "byte";
    case Type::Kind::Str: return "str";
    case Type::Kind::Ptr: return "ptr<" + type_to_string(t->elem) + ">";
    case Type::Kind::Arr:
      return "arr<" + type_to_string(t->elem) + ", " + std::to_string(t->len) + ">";
    case Type::Kind::Struct: return "struct " + t->struct_name;
  }
  return "<bad>";
}

bool is_scalar(const TypeRef& t) {
  if (!t) return false;
  return t->kind == Type::Kind::Int || t->kind == Type::Kind::Byte ||
         t->kind == Type::Kind::Ptr;
}

ConstValue ConstValue::of_int(std::int64_t v) {
  ConstValue c;
  c.kind = Kind::Int;
  c.int_val = v;
  return c;
}

ConstValue ConstValue::of_byte(std::uint8_t v) {
  ConstValue c;
  c.kind = Kind::Byte;
  c.byte_val = v;
  return c;
}

ConstValue ConstValue::of_str(std::string v) {
  ConstValue c;
  c.kind = Kind::Str;
  c.str_val = std::move(v);
  return c;
}

ConstValue ConstValue::null() {
  ConstValue c;
  c.kind = Kind::Null;
  return c;
}

bool ConstValue::operator==(const ConstValue& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Int: return int_val == o.int_val;
    case Kind::Byte: return byte_val == o.byte_val;
    case Kind::Str: return str_val == o.str_val;
    case Kind::Null: return true;
  }
  return false;
}

std::string const_to_string(const ConstValue& c) {
  switch (c.kind) {
    case ConstValue::Kind::Int: return std::to_string(c.int_val);
    case ConstValue::Kind::Byte: return std::to_string(int(c.byte_val));
    case ConstValue::Kind::Str: return quote_string(c.str_val);
    case ConstValue::Kind::Null: return "null";
  }
  return "<bad>";
}

namespace {
struct OpcodeEntry {
  Opcode op;
  const char* name;
};
const OpcodeEntry kOpcodes[] = {
    {Opcode::Const, "const"},     {Opcode::Add, "add"},
    {Opcode::Sub, "sub"},         {Opcode::Mul, "mul"},
    {Opcode::Div, "div"},         {Opcode::Eq, "eq"},
    {Opcode::Ne, "ne"},           {Opcode::Lt, "lt"},
    {Opcode::Le, "le"},           {Opcode::Gt, "gt"},
    {Opcode::Ge, "ge"},           {Opcode::Alloca, "alloca"},
    {Opcode::Heap, "heap"},       {Opcode::Load, "load"},
    {Opcode::Store, "store"},     {Opcode::Field, "field"},
    {Opcode::Index, "index"},     {Opcode::Call, "call"},
    {Opcode::ICall, "icall"},     {Opcode::FuncAddr, "funcaddr"},
    {Opcode::Br, "br"},           {Opcode::Cbr, "cbr"},
    {Opcode::Ret, "ret"},         {Opcode::NeckMark, "neckmark"},
};
}  // namespace

const char* opcode_name(Opcode op) {
  for (const auto& e : kOpcodes)
    if (e.op == op) return e.name;
  return "<bad>";
}

std::optional<Opcode> opcode_from_name(const std::string& name) {
  for (const auto& e : kOpcodes)
    if (name == e.name) return e.op;
  return std::nullopt;
}

bool is_terminator(Opcode op) {
  return op == Opcode::Br || op == Opcode::Cbr || op == Opcode::Ret;
}

bool is_comparison(Opcode op) {
  switch (op) {
    case Opcode::Eq:
    case Opcode::Ne:
    case Opcode::Lt:
    case Opcode::Le:
    case Opcode::Gt:
    case Opcode::Ge:
      return true;
    default:
      return false;
  }
}

bool is_arith(Opcode op) {
  switch (op) {
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::Div:
      return true;
    default:
      return false;
  }
}

Operand Operand::reg(std::string n) {
  Operand o;
  o.kind = Kind::Reg;
  o.name = std::move(n);
  return o;
}

Operand Operand::constant(ConstValue c) {
  Operand o;
  o.kind = Kind::Const;
  o.cval = std::move(c);
  return o;
}

Operand Operand::global(std::string n) {
  Operand o;
  o.kind = Kind::Global;
  o.name = std::move(n);
  return o;
}

Operand Operand::func(std::string n) {
  Operand o;
  o.kind = Kind::Func;
  o.name = std::move(n);
  return o;
}

Operand Operand::label(std::string n) {
  Operand o;
  o.kind = Kind::Label;
  o.name = std::move(n);
  return o;
}

const BasicBlock* Function::find_block(const std::string& label) const {
  for (const auto& b : blocks)
    if (b.label == label) return &b;
  return nullptr;
}

BasicBlock* Function::find_block(const std::string& label) {
  for (auto& b : blocks)
    if (b.label == label) return &b;
  return nullptr;
}

const StructDef* Program::find_struct(const std::string& name) const {
  for (const auto& s : structs)
    if (s.name == name) return &s;
  return nullptr;
}

const Global* Program::find_global(const std::string& name) const {
  for (const auto& g : globals)
    if (g.name == name) return &g;
  return nullptr;
}

const Function* Program::find_function(const std::string& name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

Function* Program::find_function(const std::string& name) {
  for (auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

std::optional<InstLocation> Program::find_inst(InstId id) const {
  for (const auto& f : functions) {
    for (const auto& b : f.blocks) {
      for (std::size_t i = 0; i < b.insts.size(); ++i) {
        if (b.insts[i].id == id) {
          return InstLocation{&f, &b, i, &b.insts[i]};
        }
      }
    }
  }
  return std::nullopt;
}

namespace {
const IntrinsicSig kIntrinsics[] = {
    {"print_int", {Type::int_ty()}, nullptr},
    {"print_str", {Type::ptr(Type::byte_ty())}, nullptr},
    {"read_line", {Type::ptr(Type::byte_ty()), Type::int_ty()}, Type::int_ty()},
    {"str_eq", {Type::ptr(Type::byte_ty()), Type::ptr(Type::byte_ty())}, Type::int_ty()},
    {"atoi", {Type::ptr(Type::byte_ty())}, Type::int_ty()},
    {"read_cfg_line", {Type::ptr(Type::byte_ty()), Type::int_ty()}, Type::int_ty()},
};
}  // namespace

bool is_intrinsic(const std::string& name) {
  return intrinsic_sig(name) != nullptr;
}

const IntrinsicSig* intrinsic_sig(const std::string& name) {
  for (const auto& s : kIntrinsics)
    if (s.name == name) return &s;
  return nullptr;
}

const std::vector<IntrinsicSig>& all_intrinsics() {
  static std::vector<IntrinsicSig> v(std::begin(kIntrinsics), std::end(kIntrinsics));
  return v;
}

std::int64_t flat_size(const Program& p, const TypeRef& t) {
  if (!t) return 0;
  switch (t->kind) {
    case Type::Kind::Int:
    case Type::Kind::Byte:
    case Type::Kind::Ptr:
    case Type::Kind::Str:
      return 1;
    case Type::Kind::Arr:
      return t->len * flat_size(p, t->elem);
    case Type::Kind::Struct: {
      const StructDef* sd = p.find_struct(t->struct_name);
      if (!sd) throw IrError(IrError::Kind::BadProgram, "unknown struct " + t->struct_name);
      std::int64_t n = 0;
      for (const auto& f : sd->fields) n += flat_size(p, f);
      return n;
    }
  }
  return 0;
}

std::int64_t field_cell_offset(const Program& p, const StructDef& sd, std::size_t field) {
  std::int64_t off = 0;
  for (std::size_t i = 0; i < field && i < sd.fields.size(); ++i)
    off += flat_size(p, sd.fields[i]);
  return off;
}

Program insert_neck_marker(const Program& p, InstId at) {
  if (find_neck(p)) {
    throw IrError(IrError::Kind::DuplicateNeck, "program already contains a neckmark");
  }
  Program out = p;
  for (auto& f : out.functions) {
    for (auto& b : f.blocks) {
      for (std::size_t i = 0; i < b.insts.size(); ++i) {
        if (b.insts[i].id == at) {
          Instruction mark;
          mark.id = out.fresh_id();
          mark.op = Opcode::NeckMark;
          b.insts.insert(b.insts.begin() + static_cast<std::ptrdiff_t>(i), mark);
          return out;
        }
      }
    }
  }
  throw IrError(IrError::Kind::UnknownInstId, "no instruction with id " + std::to_string(at));
}

std::optional<InstId> find_neck(const Program& p) {
  for (const auto& f : p.functions)
    for (const auto& b : f.blocks)
      for (const auto& in : b.insts)
        if (in.op == Opcode::NeckMark) return in.id;
  return std::nullopt;
}

bool structural_equal(const Program& a, const Program& b) {
  return canonical_print(a) == canonical_print(b);
}

}  // namespace slimir::ir
