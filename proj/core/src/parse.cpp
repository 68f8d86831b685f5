// Copyright (c) slimir contributors.
// SPDX-License-Identifier: Apache-2.0
#include "slimir/parse.hpp"

#include <cctype>
#include <cstdlib>
#include <map>
#include <set>
#include <vector>

namespace slimir::ir {

namespace {

// Line-oriented scanner. One construct per line; '#' starts a comment.
class Cursor {
public:
  Cursor(const std::string& line, int line_no) : s_(line), line_(line_no) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  bool try_consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!try_consume(c)) fail(std::string("expected '") + c + "'");
  }

  bool try_word(const std::string& w) {
    skip_ws();
    if (s_.compare(pos_, w.size(), w) == 0) {
      std::size_t after = pos_ + w.size();
      if (after >= s_.size() || !is_ident_char(s_[after])) {
        pos_ = after;
        return true;
      }
    }
    return false;
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
    if (pos_ == start) fail("expected identifier");
    return s_.substr(start, pos_ - start);
  }

  std::int64_t integer() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    std::string tok = s_.substr(start, pos_ - start);
    if (tok.empty() || tok == "-" || tok == "+") fail("expected integer");
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(tok.c_str(), &end, 10);
    if (errno == ERANGE || end != tok.c_str() + tok.size())
      fail("integer out of range: " + tok);
    return v;
  }

  std::string string_lit() {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != '"') fail("expected string literal");
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        char e = s_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '0': out += '\0'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'x': {
            if (pos_ + 1 >= s_.size()) fail("bad \\x escape");
            auto hex = [&](char h) -> int {
              if (h >= '0' && h <= '9') return h - '0';
              if (h >= 'a' && h <= 'f') return h - 'a' + 10;
              if (h >= 'A' && h <= 'F') return h - 'A' + 10;
              fail("bad hex digit in \\x escape");
              return 0;
            };
            int v = hex(s_[pos_]) * 16 + hex(s_[pos_ + 1]);
            pos_ += 2;
            out += static_cast<char>(v);
            break;
          }
          default:
            fail(std::string("unknown escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    if (pos_ >= s_.size()) fail("unterminated string literal");
    ++pos_;  // closing quote
    return out;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(line_, static_cast<int>(pos_) + 1, msg);
  }

  int line_no() const { return line_; }
  int col() const { return static_cast<int>(pos_) + 1; }

private:
  static bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_;
};

class Parser {
public:
  explicit Parser(const std::string& text) {
    std::string cur;
    for (char c : text) {
      if (c == '\n') {
        lines_.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) lines_.push_back(cur);
  }

  Program run() {
    while (next_ < lines_.size()) {
      Cursor c(lines_[next_], static_cast<int>(next_) + 1);
      if (c.at_end()) {
        ++next_;
        continue;
      }
      if (c.try_word("struct")) {
        parse_struct(c);
      } else if (c.try_word("global")) {
        parse_global(c);
      } else if (c.try_word("fn")) {
        parse_function(c);
        continue;  // parse_function advances next_ past the body
      } else {
        c.fail("expected 'struct', 'global', or 'fn'");
      }
      ++next_;
    }
    resolve();
    return std::move(prog_);
  }

private:
  TypeRef parse_type(Cursor& c) {
    if (c.try_word("int")) return Type::int_ty();
    if (c.try_word("byte")) return Type::byte_ty();
    if (c.try_word("str")) return Type::str_ty();
    if (c.try_word("ptr")) {
      c.expect('<');
      TypeRef inner = parse_type(c);
      c.expect('>');
      return Type::ptr(inner);
    }
    if (c.try_word("arr")) {
      c.expect('<');
      TypeRef elem = parse_type(c);
      c.expect(',');
      std::int64_t len = c.integer();
      c.expect('>');
      if (len < 1) c.fail("array length must be >= 1");
      return Type::arr(elem, len);
    }
    if (c.try_word("struct")) {
      return Type::struct_ref(c.ident());
    }
    c.fail("expected type");
  }

  ConstValue parse_const(Cursor& c, const TypeRef& expect_type) {
    if (c.try_word("null")) return ConstValue::null();
    if (c.peek() == '"') return ConstValue::of_str(c.string_lit());
    std::int64_t v = c.integer();
    if (expect_type && expect_type->kind == Type::Kind::Byte) {
      if (v < 0 || v > 255) c.fail("byte constant out of range");
      return ConstValue::of_byte(static_cast<std::uint8_t>(v));
    }
    return ConstValue::of_int(v);
  }

  void parse_struct(Cursor& c) {
    StructDef sd;
    sd.name = c.ident();
    c.expect('{');
    do {
      sd.fields.push_back(parse_type(c));
    } while (c.try_consume(','));
    c.expect('}');
    if (!c.at_end()) c.fail("trailing tokens after struct definition");
    prog_.structs.push_back(std::move(sd));
  }

  void parse_global(Cursor& c) {
    Global g;
    c.expect('@');
    g.name = c.ident();
    c.expect(':');
    g.type = parse_type(c);
    c.expect('=');
    g.init = parse_const(c, g.type);
    if (!c.at_end()) c.fail("trailing tokens after global definition");
    prog_.globals.push_back(std::move(g));
  }

  Operand parse_operand(Cursor& c) {
    char p = c.peek();
    if (p == '%') {
      c.expect('%');
      return Operand::reg(c.ident());
    }
    if (p == '@') {
      c.expect('@');
      // Global vs function reference resolved after the whole file is read.
      return Operand::global(c.ident());
    }
    if (p == '"') return Operand::constant(ConstValue::of_str(c.string_lit()));
    if (c.try_word("null")) return Operand::constant(ConstValue::null());
    if (p == '-' || std::isdigit(static_cast<unsigned char>(p)))
      return Operand::constant(ConstValue::of_int(c.integer()));
    // Bare identifier: block label.
    return Operand::label(c.ident());
  }

  void parse_function(Cursor& header) {
    Function fn;
    header.expect('@');
    fn.name = header.ident();
    header.expect('(');
    if (!header.try_consume(')')) {
      do {
        Param p;
        header.expect('%');
        p.name = header.ident();
        header.expect(':');
        p.type = parse_type(header);
        fn.params.push_back(std::move(p));
      } while (header.try_consume(','));
      header.expect(')');
    }
    if (header.try_consume('-')) {
      header.expect('>');
      fn.return_type = parse_type(header);
    }
    header.expect('{');
    if (!header.at_end()) header.fail("trailing tokens after function header");
    ++next_;

    BasicBlock* block = nullptr;
    bool closed = false;
    while (next_ < lines_.size()) {
      Cursor c(lines_[next_], static_cast<int>(next_) + 1);
      if (c.at_end()) {
        ++next_;
        continue;
      }
      if (c.try_consume('}')) {
        if (!c.at_end()) c.fail("trailing tokens after '}'");
        ++next_;
        closed = true;
        break;
      }
      // Either a label line "name:" or an instruction.
      if (is_label_line(lines_[next_])) {
        BasicBlock b;
        b.label = c.ident();
        c.expect(':');
        if (!c.at_end()) c.fail("trailing tokens after block label");
        fn.blocks.push_back(std::move(b));
        block = &fn.blocks.back();
        ++next_;
        continue;
      }
      if (!block) c.fail("instruction outside of a block");
      block->insts.push_back(parse_instruction(c));
      ++next_;
    }
    if (!closed) {
      throw ParseError(static_cast<int>(lines_.size()), 1,
                       "missing '}' at end of function @" + fn.name);
    }
    if (fn.blocks.empty()) {
      throw ParseError(header.line_no(), 1, "function @" + fn.name + " has no blocks");
    }
    prog_.functions.push_back(std::move(fn));
  }

  static bool is_label_line(const std::string& line) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() &&
           (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_'))
      ++i;
    if (i == start) return false;
    return i < line.size() && line[i] == ':';
  }

  Instruction parse_instruction(Cursor& c) {
    Instruction in;
    in.id = prog_.fresh_id();
    if (c.peek() == '%') {
      c.expect('%');
      in.result = c.ident();
      c.expect('=');
    }
    std::string opname = c.ident();
    auto op = opcode_from_name(opname);
    if (!op) c.fail("unknown opcode '" + opname + "'");
    in.op = *op;

    switch (in.op) {
      case Opcode::Const: {
        in.type = parse_type(c);
        if (in.type->kind == Type::Kind::Ptr) {
          // const ptr<T> null
          if (!c.try_word("null")) c.fail("pointer constant must be null");
          in.operands.push_back(Operand::constant(ConstValue::null()));
        } else if (in.type->kind == Type::Kind::Str) {
          in.operands.push_back(Operand::constant(ConstValue::of_str(c.string_lit())));
        } else if (in.type->kind == Type::Kind::Byte) {
          std::int64_t v = c.integer();
          if (v < 0 || v > 255) c.fail("byte constant out of range");
          in.operands.push_back(Operand::constant(ConstValue::of_byte(static_cast<std::uint8_t>(v))));
        } else if (in.type->kind == Type::Kind::Int) {
          in.operands.push_back(Operand::constant(ConstValue::of_int(c.integer())));
        } else {
          c.fail("const requires int, byte, str, or ptr type");
        }
        break;
      }
      case Opcode::Alloca:
      case Opcode::Heap:
        in.type = parse_type(c);
        break;
      case Opcode::Br:
        in.operands.push_back(Operand::label(c.ident()));
        break;
      case Opcode::Cbr: {
        in.operands.push_back(parse_operand(c));
        c.expect(',');
        in.operands.push_back(Operand::label(c.ident()));
        c.expect(',');
        in.operands.push_back(Operand::label(c.ident()));
        break;
      }
      case Opcode::Ret:
        if (!c.at_end()) in.operands.push_back(parse_operand(c));
        break;
      case Opcode::NeckMark:
        break;
      default: {
        if (!c.at_end()) {
          in.operands.push_back(parse_operand(c));
          while (c.try_consume(',')) in.operands.push_back(parse_operand(c));
        }
        break;
      }
    }
    if (!c.at_end()) c.fail("trailing tokens after instruction");
    return in;
  }

  // After the whole file is read: classify @-operands as global vs function
  // references and check that labels/structs resolve.
  void resolve() {
    std::set<std::string> struct_names, global_names, func_names;
    for (const auto& s : prog_.structs) struct_names.insert(s.name);
    for (const auto& g : prog_.globals) global_names.insert(g.name);
    for (const auto& f : prog_.functions) func_names.insert(f.name);

    auto check_type = [&](const TypeRef& t, auto&& self) -> void {
      if (!t) return;
      if (t->kind == Type::Kind::Struct && !struct_names.count(t->struct_name))
        throw ResolutionError(0, 0, "unknown struct '" + t->struct_name + "'");
      self(t->elem, self);
    };
    for (const auto& s : prog_.structs)
      for (const auto& f : s.fields) check_type(f, check_type);
    for (const auto& g : prog_.globals) check_type(g.type, check_type);

    for (auto& f : prog_.functions) {
      for (const auto& p : f.params) check_type(p.type, check_type);
      check_type(f.return_type, check_type);
      std::set<std::string> labels;
      for (const auto& b : f.blocks) labels.insert(b.label);
      for (auto& b : f.blocks) {
        for (auto& in : b.insts) {
          check_type(in.type, check_type);
          for (std::size_t oi = 0; oi < in.operands.size(); ++oi) {
            Operand& o = in.operands[oi];
            if (o.kind == Operand::Kind::Label) {
              if (!labels.count(o.name))
                throw ResolutionError(0, 0, "unknown label '" + o.name +
                                                "' in function @" + f.name);
            } else if (o.kind == Operand::Kind::Global) {
              bool callee_slot =
                  (in.op == Opcode::Call && oi == 0) ||
                  (in.op == Opcode::FuncAddr && oi == 0);
              if (callee_slot) {
                if (func_names.count(o.name) || is_intrinsic(o.name)) {
                  o.kind = Operand::Kind::Func;
                } else {
                  throw ResolutionError(0, 0, "unknown function '@" + o.name + "'");
                }
              } else if (!global_names.count(o.name)) {
                throw ResolutionError(0, 0, "unknown global '@" + o.name + "'");
              }
            }
          }
        }
      }
    }
  }

  std::vector<std::string> lines_;
  std::size_t next_ = 0;
  Program prog_;
};

}  // namespace

Program parse_program(const std::string& text) {
  Parser p(text);
  return p.run();
}

}  // namespace slimir::ir
