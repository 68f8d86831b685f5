// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slimir/print.hpp"

#include <cstdio>
#include <map>
#include <sstream>

namespace slimir::ir {

std::string quote_string(const std::string& raw) {
  std::string out = "\"";
  for (unsigned char c : raw) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\0': out += "\\0"; break;
      default:
        if (c < 0x20 || c >= 0x7F) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\x%02X", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
  return out;
}

namespace {

using RenameMap = std::map<std::string, std::string>;

std::string operand_str(const Operand& o, const RenameMap* rn) {
  switch (o.kind) {
    case Operand::Kind::Reg: {
      if (rn) {
        auto it = rn->find(o.name);
        if (it != rn->end()) return "%" + it->second;
      }
      return "%" + o.name;
    }
    case Operand::Kind::Const: return const_to_string(o.cval);
    case Operand::Kind::Global: return "@" + o.name;
    case Operand::Kind::Func: return "@" + o.name;
    case Operand::Kind::Label: return o.name;
  }
  return "<bad>";
}

std::string inst_str(const Instruction& in, const RenameMap* rn) {
  std::string s;
  if (in.result) {
    std::string r = *in.result;
    if (rn) {
      auto it = rn->find(r);
      if (it != rn->end()) r = it->second;
    }
    s += "%" + r + " = ";
  }
  s += opcode_name(in.op);
  // Type annotation slot: const <type> <value>, alloca/heap <type>.
  if (in.op == Opcode::Const || in.op == Opcode::Alloca || in.op == Opcode::Heap)
    s += " " + type_to_string(in.type);
  bool first = true;
  for (const auto& o : in.operands) {
    s += first ? " " : ", ";
    s += operand_str(o, rn);
    first = false;
  }
  return s;
}

void print_function(std::ostringstream& out, const Function& f, bool canonical) {
  RenameMap rename;
  const RenameMap* rn = nullptr;
  if (canonical) {
    int next = 0;
    for (const auto& p : f.params) rename[p.name] = "v" + std::to_string(next++);
    for (const auto& b : f.blocks) {
      for (const auto& in : b.insts) {
        if (in.result && !rename.count(*in.result))
          rename[*in.result] = "v" + std::to_string(next++);
      }
    }
    rn = &rename;
  }

  out << "fn @" << f.name << "(";
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    if (i) out << ", ";
    std::string pn = f.params[i].name;
    if (rn) pn = rn->at(pn);
    out << "%" << pn << ": " << type_to_string(f.params[i].type);
  }
  out << ")";
  if (f.return_type) out << " -> " << type_to_string(f.return_type);
  out << " {\n";
  for (const auto& b : f.blocks) {
    out << b.label << ":\n";
    for (const auto& in : b.insts) out << "  " << inst_str(in, rn) << "\n";
  }
  out << "}\n";
}

std::string print_impl(const Program& p, bool canonical) {
  std::ostringstream out;
  bool any = false;
  for (const auto& s : p.structs) {
    out << "struct " << s.name << " { ";
    for (std::size_t i = 0; i < s.fields.size(); ++i) {
      if (i) out << ", ";
      out << type_to_string(s.fields[i]);
    }
    out << " }\n";
    any = true;
  }
  if (!p.structs.empty() && (!p.globals.empty() || !p.functions.empty())) out << "\n";
  for (const auto& g : p.globals) {
    out << "global @" << g.name << " : " << type_to_string(g.type) << " = "
        << const_to_string(g.init) << "\n";
    any = true;
  }
  if (!p.globals.empty() && !p.functions.empty()) out << "\n";
  for (std::size_t i = 0; i < p.functions.size(); ++i) {
    if (i) out << "\n";
    print_function(out, p.functions[i], canonical);
    any = true;
  }
  (void)any;
  return out.str();
}

}  // namespace

std::string print_program(const Program& p) { return print_impl(p, false); }

std::string print_instruction(const Instruction& in) { return inst_str(in, nullptr); }

std::string canonical_print(const Program& p) { return print_impl(p, true); }

}  // namespace slimir::ir
