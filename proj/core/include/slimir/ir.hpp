// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace slimir::ir {

using InstId = std::int64_t;

// ---------------------------------------------------------------------------
// Types

class Type;
using TypeRef = std::shared_ptr<const Type>;

/// A type expression: int, byte, str, ptr<T>, arr<T, N>, or struct NAME.
/// Instances are immutable and shared; build them through the factories.
class Type {
public:
  enum class Kind { Int, Byte, Str, Ptr, Arr, Struct };

  Kind kind;
  TypeRef elem;             // Ptr pointee / Arr element
  std::int64_t len = 0;     // Arr length
  std::string struct_name;  // Struct reference

  static TypeRef int_ty();
  static TypeRef byte_ty();
  static TypeRef str_ty();
  static TypeRef ptr(TypeRef pointee);
  static TypeRef arr(TypeRef elem, std::int64_t len);
  static TypeRef struct_ref(std::string name);
};

bool type_equal(const TypeRef& a, const TypeRef& b);
std::string type_to_string(const TypeRef& t);
bool is_scalar(const TypeRef& t);  // int, byte, or ptr

// ---------------------------------------------------------------------------
// Constants

/// A literal constant: signed 64-bit int, byte, byte-string, or null pointer.
struct ConstValue {
  enum class Kind { Int, Byte, Str, Null };

  Kind kind = Kind::Int;
  std::int64_t int_val = 0;
  std::uint8_t byte_val = 0;
  std::string str_val;

  static ConstValue of_int(std::int64_t v);
  static ConstValue of_byte(std::uint8_t v);
  static ConstValue of_str(std::string v);
  static ConstValue null();

  bool operator==(const ConstValue& o) const;
  bool operator!=(const ConstValue& o) const { return !(*this == o); }
};

std::string const_to_string(const ConstValue& c);

// ---------------------------------------------------------------------------
// Instructions

enum class Opcode {
  Const,
  Add,
  Sub,
  Mul,
  Div,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Alloca,
  Heap,
  Load,
  Store,
  Field,
  Index,
  Call,
  ICall,
  FuncAddr,
  Br,
  Cbr,
  Ret,
  NeckMark,
};

const char* opcode_name(Opcode op);
std::optional<Opcode> opcode_from_name(const std::string& name);
bool is_terminator(Opcode op);
bool is_comparison(Opcode op);
bool is_arith(Opcode op);

/// An instruction operand. Labels appear only in br/cbr; function refs only
/// in call/funcaddr.
struct Operand {
  enum class Kind { Reg, Const, Global, Func, Label };

  Kind kind = Kind::Reg;
  std::string name;  // Reg / Global / Func / Label
  ConstValue cval;   // Const

  static Operand reg(std::string n);
  static Operand constant(ConstValue c);
  static Operand global(std::string n);
  static Operand func(std::string n);
  static Operand label(std::string n);

  bool is_reg(const std::string& r) const {
    return kind == Kind::Reg && name == r;
  }
};

struct Instruction {
  InstId id = -1;
  std::optional<std::string> result;
  Opcode op = Opcode::Const;
  std::vector<Operand> operands;
  TypeRef type;  // const value type / alloca/heap allocation type
};

// ---------------------------------------------------------------------------
// Program structure

struct BasicBlock {
  std::string label;
  std::vector<Instruction> insts;
};

struct Param {
  std::string name;
  TypeRef type;
};

struct Function {
  std::string name;
  std::vector<Param> params;
  TypeRef return_type;  // null => no return value
  std::vector<BasicBlock> blocks;

  const BasicBlock* find_block(const std::string& label) const;
  BasicBlock* find_block(const std::string& label);
  const std::string& entry_label() const { return blocks.front().label; }
};

struct StructDef {
  std::string name;
  std::vector<TypeRef> fields;
};

struct Global {
  std::string name;
  TypeRef type;
  ConstValue init;
};

struct InstLocation {
  const Function* function = nullptr;
  const BasicBlock* block = nullptr;
  std::size_t inst_index = 0;
  const Instruction* inst = nullptr;
};

struct Program {
  std::vector<StructDef> structs;
  std::vector<Global> globals;
  std::vector<Function> functions;
  InstId next_id = 0;

  const StructDef* find_struct(const std::string& name) const;
  const Global* find_global(const std::string& name) const;
  const Function* find_function(const std::string& name) const;
  Function* find_function(const std::string& name);
  std::optional<InstLocation> find_inst(InstId id) const;

  InstId fresh_id() { return next_id++; }
};

// ---------------------------------------------------------------------------
// Intrinsics

struct IntrinsicSig {
  std::string name;
  std::vector<TypeRef> params;
  TypeRef ret;  // null => no result
};

bool is_intrinsic(const std::string& name);
const IntrinsicSig* intrinsic_sig(const std::string& name);
const std::vector<IntrinsicSig>& all_intrinsics();

// ---------------------------------------------------------------------------
// Struct layout. Aggregates are flattened into scalar cells; offsets and
// sizes below are cell counts, not bytes.

std::int64_t flat_size(const Program& p, const TypeRef& t);
std::int64_t field_cell_offset(const Program& p, const StructDef& sd, std::size_t field);

// ---------------------------------------------------------------------------
// Errors

class IrError : public std::runtime_error {
public:
  enum class Kind { UnknownInstId, DuplicateNeck, NoNeck, BadProgram };

  IrError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

// ---------------------------------------------------------------------------
// Neck marker helpers

/// Returns a copy of `p` with a neckmark inserted immediately before the
/// instruction `at`. All existing InstIds are preserved; the marker gets a
/// fresh id. Throws IrError{UnknownInstId, DuplicateNeck}.
Program insert_neck_marker(const Program& p, InstId at);

/// Id of the unique neckmark instruction, if present.
std::optional<InstId> find_neck(const Program& p);

// ---------------------------------------------------------------------------
// Structural equality: ignores InstIds and register names, compares
// everything else (struct defs, globals, block labels and order, opcodes,
// operands, type annotations).

bool structural_equal(const Program& a, const Program& b);

}  // namespace slimir::ir
