// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "slimir/ir.hpp"

namespace slimir::interp {

// ---------------------------------------------------------------------------
// Values and memory

using RegionId = std::int32_t;
inline constexpr RegionId kNullRegion = -1;

struct Value {
  enum class Kind { Undef, Int, Byte, Ptr, Func };

  Kind kind = Kind::Undef;
  std::int64_t i = 0;      // Int
  std::uint8_t b = 0;      // Byte
  RegionId region = kNullRegion;
  std::int64_t offset = 0; // Ptr
  std::string func;        // Func

  static Value undef() { return {}; }
  static Value of_int(std::int64_t v);
  static Value of_byte(std::uint8_t v);
  static Value ptr(RegionId r, std::int64_t off);
  static Value null_ptr() { return ptr(kNullRegion, 0); }
  static Value func_addr(std::string name);
};

enum class CellKind : std::uint8_t { Int, Byte, Ptr };

struct Region {
  enum class Kind { GlobalMem, Stack, Heap, Rodata, Argv };

  Kind kind = Kind::Heap;
  bool readonly = false;
  bool alive = true;
  ir::TypeRef alloc_type;          // allocation/global type; null for argv/rodata
  std::vector<Value> cells;
  std::vector<CellKind> kinds;

  // Identity for capture paths and diagnostics.
  std::string global_name;         // GlobalMem
  std::string func;                // Stack: owning function
  std::string alloca_reg;          // Stack: result register of the alloca
  ir::InstId alloca_id = -1;       // Stack
  int frame_seq = -1;              // Stack
};

// ---------------------------------------------------------------------------
// Invocations and outcomes

/// Supplied command-line arguments plus the delayed input channel.
/// `stdin_bytes == nullopt` means stdin is delayed: any read traps partial
/// interpretation and is invalid in full execution.
struct Invocation {
  std::vector<std::string> args;
  std::optional<std::string> stdin_bytes = std::string{};
  std::int64_t step_budget = 10'000'000;
};

enum class TrapKind { DivByZero, OutOfBounds, UndefBranch, BudgetExceeded, BadIndirectCall };

const char* trap_kind_name(TrapKind k);

struct RunOutcome {
  std::string stdout_bytes;
  std::int64_t exit_status = 0;
  std::int64_t steps = 0;
  std::optional<TrapKind> trap;
  std::optional<ir::InstId> trap_site;

  bool same_behavior(const RunOutcome& o) const {
    return stdout_bytes == o.stdout_bytes && trap == o.trap &&
           (trap || exit_status == o.exit_status);
  }
};

/// Optional observation hooks for property tests.
struct RunHooks {
  bool count_blocks = false;
  std::map<std::pair<std::string, std::string>, std::int64_t> block_visits;
  std::vector<ir::InstId>* trace = nullptr;
  std::size_t trace_limit = 1u << 20;
};

// ---------------------------------------------------------------------------
// Partial state

struct Path;
using PathRef = std::shared_ptr<const Path>;

struct Path {
  enum class Kind { Global, StackSlot, StructElem, PtrTarget };

  Kind kind = Kind::Global;
  std::string global_name;           // Global
  std::string func;                  // StackSlot
  ir::InstId alloca_id = -1;         // StackSlot
  std::string alloca_reg;            // StackSlot
  PathRef base;                      // StructElem / PtrTarget
  std::int64_t elem_index = 0;       // StructElem

  static PathRef global(std::string name);
  static PathRef stack_slot(std::string func, ir::InstId id, std::string reg);
  static PathRef struct_elem(PathRef base, std::int64_t index);
  static PathRef ptr_target(PathRef base);
};

bool path_equal(const PathRef& a, const PathRef& b);
std::string path_to_string(const PathRef& p);

struct CapturedEntry {
  PathRef path;
  ir::TypeRef declared_type;
  ir::ConstValue value;
};

struct Exclusion {
  std::string path;
  std::string reason;
};

struct PartialState {
  std::vector<CapturedEntry> entries;
  std::set<std::string> visited_funcs;
  int neck_crossings = 0;
  std::vector<Exclusion> exclusions;

  const CapturedEntry* find(const PathRef& p) const;
};

// ---------------------------------------------------------------------------
// Errors

class InterpError : public std::runtime_error {
public:
  enum class Kind { NoNeck, NeckNotReached, DelayedInputBeforeNeck, BudgetExceeded };

  InterpError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

// ---------------------------------------------------------------------------
// Execution

/// Runs main(argc, argv) to completion. Traps become part of the outcome.
/// A neckmark, if present, executes as a no-op.
RunOutcome run_full(const ir::Program& p, const Invocation& inv, RunHooks* hooks = nullptr);

/// Runs from entry until the unique neckmark executes, then captures the
/// partial state. stdin is delayed. Throws InterpError.
PartialState run_to_neck(const ir::Program& p, const std::vector<std::string>& args,
                         std::int64_t step_budget = 10'000'000, RunHooks* hooks = nullptr);

class Machine;

/// State capture at the neck; exposed for targeted tests. The machine must
/// be halted at a neckmark.
PartialState capture_state(const Machine& m, const ir::Program& p);

}  // namespace slimir::interp
