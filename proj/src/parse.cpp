// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#include "gpuir/parse.hpp"

#include <cassert>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <map>
#include <set>
#include <unordered_map>

#include "gpuir/verify.hpp"

namespace gpuir {

std::string ParseError::to_string() const {
  std::string s = std::to_string(span.line) + ":" +
                  std::to_string(span.column) + ": " + message;
  if (expected)
    s += " (expected " + *expected + ")";
  return s;
}

namespace {

enum class Tok {
  Eof,
  Ident,     // keywords, type names, opcodes, bare identifiers
  LocalId,   // %name
  GlobalId,  // @name
  MetaName,  // !name or !123 (without following '{' or '"')
  Int,       // decimal integer, possibly negative
  FloatLit,  // decimal float
  HexLit,    // 0x... raw bit pattern
  Str,       // "..."
  Punct,     // single-char punctuation
};

struct Token {
  Tok kind = Tok::Eof;
  std::string text;  // payload without sigils/quotes
  char punct = 0;
  int line = 1, col = 1, length = 0;
};

bool ident_start(char c) {
  return std::isalpha(unsigned(c)) || c == '_' || c == '$' || c == '.';
}
bool ident_char(char c) {
  return std::isalnum(unsigned(c)) || c == '_' || c == '$' || c == '.';
}

class Lexer {
public:
  Lexer(std::string_view text, std::vector<ParseError> &errors)
      : text_(text), errors_(errors) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      Token t = next();
      bool eof = t.kind == Tok::Eof;
      out.push_back(std::move(t));
      if (eof)
        break;
    }
    return out;
  }

private:
  std::string_view text_;
  std::vector<ParseError> &errors_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;

  char peek(size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = peek();
      if (c == ';') {
        while (pos_ < text_.size() && peek() != '\n')
          advance();
      } else if (std::isspace(unsigned(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  Token make(Tok kind, int line, int col, size_t start) {
    Token t;
    t.kind = kind;
    t.line = line;
    t.col = col;
    t.length = int(pos_ - start);
    return t;
  }

  Token next() {
    skip_trivia();
    int line = line_, col = col_;
    size_t start = pos_;
    if (pos_ >= text_.size())
      return make(Tok::Eof, line, col, start);

    char c = peek();

    if (c == '"') {
      advance();
      std::string s;
      while (pos_ < text_.size() && peek() != '"') {
        char ch = advance();
        if (ch == '\\' && pos_ + 1 < text_.size()) {
          // LLVM-style two-hex-digit escape
          char h1 = advance();
          if (h1 == '\\') {
            s += '\\';
            continue;
          }
          char h2 = advance();
          auto hex = [](char h) -> int {
            if (h >= '0' && h <= '9')
              return h - '0';
            if (h >= 'a' && h <= 'f')
              return h - 'a' + 10;
            if (h >= 'A' && h <= 'F')
              return h - 'A' + 10;
            return -1;
          };
          int v1 = hex(h1), v2 = hex(h2);
          if (v1 >= 0 && v2 >= 0)
            s += char(v1 * 16 + v2);
          else
            s += ch;
        } else {
          s += ch;
        }
      }
      if (pos_ < text_.size())
        advance(); // closing quote
      else
        errors_.push_back({{line, col, int(pos_ - start)},
                           "unterminated string literal",
                           std::nullopt});
      Token t = make(Tok::Str, line, col, start);
      t.text = std::move(s);
      return t;
    }

    if (c == '%' || c == '@') {
      advance();
      std::string s;
      if (peek() == '"') {
        advance();
        while (pos_ < text_.size() && peek() != '"')
          s += advance();
        if (pos_ < text_.size())
          advance();
      } else {
        while (pos_ < text_.size() &&
               (ident_char(peek()) || std::isdigit(unsigned(peek()))))
          s += advance();
      }
      Token t = make(c == '%' ? Tok::LocalId : Tok::GlobalId, line, col, start);
      t.text = std::move(s);
      return t;
    }

    if (c == '!') {
      advance();
      if (peek() == '"') {
        advance();
        std::string s;
        while (pos_ < text_.size() && peek() != '"')
          s += advance();
        if (pos_ < text_.size())
          advance();
        Token t = make(Tok::Str, line, col, start);
        t.text = std::move(s);
        return t;
      }
      std::string s;
      while (pos_ < text_.size() && ident_char(peek()))
        s += advance();
      Token t = make(Tok::MetaName, line, col, start);
      t.text = std::move(s);
      return t;
    }

    if (std::isdigit(unsigned(c)) ||
        (c == '-' && std::isdigit(unsigned(peek(1))))) {
      std::string s;
      if (c == '-')
        s += advance();
      if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
        advance();
        advance();
        std::string hex;
        while (pos_ < text_.size() && std::isxdigit(unsigned(peek())))
          hex += advance();
        Token t = make(Tok::HexLit, line, col, start);
        t.text = hex;
        return t;
      }
      bool is_float = false;
      while (pos_ < text_.size() && std::isdigit(unsigned(peek())))
        s += advance();
      if (peek() == '.' && std::isdigit(unsigned(peek(1)))) {
        is_float = true;
        s += advance();
        while (pos_ < text_.size() && std::isdigit(unsigned(peek())))
          s += advance();
      }
      if (peek() == 'e' || peek() == 'E') {
        char sign = peek(1);
        if (std::isdigit(unsigned(sign)) ||
            ((sign == '+' || sign == '-') && std::isdigit(unsigned(peek(2))))) {
          is_float = true;
          s += advance();
          if (peek() == '+' || peek() == '-')
            s += advance();
          while (pos_ < text_.size() && std::isdigit(unsigned(peek())))
            s += advance();
        }
      }
      Token t = make(is_float ? Tok::FloatLit : Tok::Int, line, col, start);
      t.text = std::move(s);
      return t;
    }

    if (ident_start(c)) {
      std::string s;
      while (pos_ < text_.size() && ident_char(peek()))
        s += advance();
      Token t = make(Tok::Ident, line, col, start);
      t.text = std::move(s);
      return t;
    }

    advance();
    Token t = make(Tok::Punct, line, col, start);
    t.punct = c;
    t.text = std::string(1, c);
    return t;
  }
};

// Locus of a parsed construct, for mapping verifier findings back to spans.
struct InstLocus {
  std::string function;
  std::string block;
  int index;
  bool operator<(const InstLocus &o) const {
    return std::tie(function, block, index) <
           std::tie(o.function, o.block, o.index);
  }
};

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {
    Lexer lex(text, errors_);
    toks_ = lex.run();
  }

  ParseResult run() {
    parse_toplevels();
    if (errors_.empty())
      finalize();
    ParseResult r;
    if (errors_.empty())
      r.module = std::move(m_);
    r.errors = std::move(errors_);
    return r;
  }

  // Entry point for parse_type()
  TypeParseResult run_type() {
    TypeParseResult r;
    TypeRef t = parse_type_spec();
    if (errors_.empty() && !at(Tok::Eof))
      error_here("trailing characters after type");
    if (!errors_.empty()) {
      r.error = errors_.front();
      return r;
    }
    r.type = t;
    return r;
  }

private:
  std::string_view text_;
  std::vector<Token> toks_;
  size_t ti_ = 0;
  Module m_;
  std::vector<ParseError> errors_;
  bool saw_triple_ = false;
  SourceSpan triple_span_{1, 1, 0};
  std::map<InstLocus, SourceSpan> inst_spans_;
  std::map<std::string, SourceSpan> func_spans_;

  const Token &cur() const { return toks_[ti_]; }
  const Token &peek(size_t n = 1) const {
    size_t i = ti_ + n;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_ident(const char *s) const {
    return cur().kind == Tok::Ident && cur().text == s;
  }
  bool at_punct(char c) const {
    return cur().kind == Tok::Punct && cur().punct == c;
  }
  void bump() {
    if (ti_ + 1 < toks_.size())
      ++ti_;
  }

  SourceSpan span_of(const Token &t) const {
    return {t.line, t.col, t.length};
  }

  void error_at(const Token &t, std::string msg,
                std::optional<std::string> expected = std::nullopt) {
    errors_.push_back({span_of(t), std::move(msg), std::move(expected)});
  }

  void error_here(std::string msg,
                  std::optional<std::string> expected = std::nullopt) {
    error_at(cur(), std::move(msg), std::move(expected));
  }

  bool expect_punct(char c) {
    if (at_punct(c)) {
      bump();
      return true;
    }
    error_here("unexpected token '" + cur().text + "'",
               std::string(1, c));
    return false;
  }

  bool expect_ident(const char *s) {
    if (at_ident(s)) {
      bump();
      return true;
    }
    error_here("unexpected token '" + cur().text + "'", std::string(s));
    return false;
  }

  void skip_to_next_line() {
    int line = cur().line;
    while (!at(Tok::Eof) && cur().line == line)
      bump();
  }

  // ---- types ----------------------------------------------------------

  bool int_width_ok(int w) {
    return w == 1 || w == 8 || w == 16 || w == 32 || w == 64;
  }

  TypeRef parse_type_spec() {
    TypeRef base;
    const Token &t = cur();
    if (t.kind == Tok::Ident) {
      if (t.text == "void") {
        base = Type::void_ty();
        bump();
      } else if (t.text == "float") {
        base = Type::float_ty(32);
        bump();
      } else if (t.text == "double") {
        base = Type::float_ty(64);
        bump();
      } else if (t.text.size() > 1 && t.text[0] == 'i' &&
                 std::isdigit(unsigned(t.text[1]))) {
        int w = 0;
        auto [p, ec] = std::from_chars(t.text.data() + 1,
                                       t.text.data() + t.text.size(), w);
        if (ec != std::errc{} || p != t.text.data() + t.text.size() ||
            !int_width_ok(w)) {
          error_here("malformed integer type '" + t.text + "'");
          bump();
          return nullptr;
        }
        base = Type::int_ty(w);
        bump();
      } else {
        error_here("malformed type, found '" + t.text + "'", "type");
        return nullptr;
      }
    } else if (at_punct('<') || at_punct('[')) {
      char close = at_punct('<') ? '>' : ']';
      bool vec = close == '>';
      bump();
      if (!at(Tok::Int)) {
        error_here("expected element count");
        return nullptr;
      }
      int count = std::atoi(cur().text.c_str());
      bump();
      if (!expect_ident("x"))
        return nullptr;
      TypeRef elem = parse_type_spec();
      if (!elem)
        return nullptr;
      if (!expect_punct(close))
        return nullptr;
      if (vec && (count < 2 || count > 4)) {
        error_here("vector lane count must be 2, 3 or 4");
        return nullptr;
      }
      if (!vec && count < 1) {
        error_here("array length must be positive");
        return nullptr;
      }
      base = vec ? Type::vector_of(elem, count) : Type::array_of(elem, count);
    } else {
      error_here("malformed type, found '" + t.text + "'", "type");
      return nullptr;
    }

    // Suffixes: pointers (with optional addrspace) and function types.
    while (true) {
      if (at_punct('*')) {
        bump();
        base = Type::pointer_to(base);
      } else if (at_ident("addrspace")) {
        bump();
        if (!expect_punct('('))
          return nullptr;
        if (!at(Tok::Int)) {
          error_here("expected address space number");
          return nullptr;
        }
        int n = std::atoi(cur().text.c_str());
        bump();
        if (!expect_punct(')'))
          return nullptr;
        if (n < 0 || n > 3) {
          error_here("address space must be 0..3");
          return nullptr;
        }
        if (!expect_punct('*'))
          return nullptr;
        base = Type::pointer_to(base, AddressSpace(n));
      } else if (at_punct('(')) {
        bump();
        std::vector<TypeRef> params;
        if (!at_punct(')')) {
          while (true) {
            TypeRef p = parse_type_spec();
            if (!p)
              return nullptr;
            params.push_back(p);
            if (at_punct(',')) {
              bump();
              continue;
            }
            break;
          }
        }
        if (!expect_punct(')'))
          return nullptr;
        base = Type::function_ty(base, std::move(params));
      } else {
        break;
      }
    }
    return base;
  }

  // ---- values ---------------------------------------------------------

  std::optional<Value> parse_value(const TypeRef &type) {
    const Token &t = cur();
    switch (t.kind) {
    case Tok::LocalId: {
      Value v = Value::reg(t.text, type);
      bump();
      return v;
    }
    case Tok::GlobalId: {
      Value v = Value::global_ref(t.text, type);
      bump();
      return v;
    }
    case Tok::Int: {
      if (type->is_float()) {
        // Integer-looking literal in float position: accept (e.g. "1").
        double d = type->bits == 32 ? double(std::strtof(t.text.c_str(), nullptr))
                                    : std::strtod(t.text.c_str(), nullptr);
        bump();
        return Value::float_const(d, type);
      }
      if (!type->is_int()) {
        error_here("integer constant for non-integer type " +
                   type_text(type));
        bump();
        return std::nullopt;
      }
      int64_t v = 0;
      auto [p, ec] =
          std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (ec != std::errc{} || p != t.text.data() + t.text.size()) {
        error_here("integer constant out of range");
        bump();
        return std::nullopt;
      }
      bump();
      return Value::int_const(v, type);
    }
    case Tok::FloatLit: {
      if (!type->is_float()) {
        error_here("float constant for non-float type " + type_text(type));
        bump();
        return std::nullopt;
      }
      // Parse at the target width so shortest-form decimals round-trip.
      double d = type->bits == 32 ? double(std::strtof(t.text.c_str(), nullptr))
                                  : std::strtod(t.text.c_str(), nullptr);
      bump();
      return Value::float_const(d, type);
    }
    case Tok::HexLit: {
      if (!type->is_float()) {
        error_here("hex constant only supported for float types");
        bump();
        return std::nullopt;
      }
      uint64_t bits = 0;
      auto [p, ec] =
          std::from_chars(t.text.data(), t.text.data() + t.text.size(), bits,
                          16);
      if (ec != std::errc{} || p != t.text.data() + t.text.size()) {
        error_here("malformed hex constant");
        bump();
        return std::nullopt;
      }
      Value v;
      v.kind = Value::Kind::FloatConst;
      v.type = type;
      v.bits = type->bits == 32 ? (bits & 0xffffffffull) : bits;
      bump();
      return v;
    }
    case Tok::Ident:
      if (t.text == "undef") {
        bump();
        return Value::undef(type);
      }
      [[fallthrough]];
    default:
      error_here("expected a value, found '" + t.text + "'");
      return std::nullopt;
    }
  }

  std::optional<Value> parse_typed_value() {
    TypeRef t = parse_type_spec();
    if (!t)
      return std::nullopt;
    return parse_value(t);
  }

  // ---- top level ------------------------------------------------------

  bool at_toplevel_anchor() const {
    return at(Tok::Eof) || at_ident("target") || at_ident("define") ||
           at_ident("declare") || at(Tok::GlobalId) || at(Tok::MetaName);
  }

  void parse_toplevels() {
    while (!at(Tok::Eof)) {
      size_t before = errors_.size();
      size_t tok_before = ti_;
      if (at_ident("target")) {
        parse_target();
      } else if (at_ident("declare")) {
        parse_function(/*is_declaration=*/true);
      } else if (at_ident("define")) {
        parse_function(/*is_declaration=*/false);
      } else if (at(Tok::GlobalId)) {
        parse_global();
      } else if (at(Tok::MetaName)) {
        parse_metadata_def();
      } else {
        error_here("unexpected token '" + cur().text + "' at top level");
        bump();
      }
      if (errors_.size() > before) {
        // Drop the rest of the failed construct.
        while (!at(Tok::Eof) && !at_toplevel_anchor())
          bump();
      }
      if (ti_ == tok_before)
        bump(); // guarantee progress on any input
    }
  }

  void parse_target() {
    const Token &kw = cur();
    triple_span_ = span_of(kw);
    bump();
    if (!expect_ident("triple"))
      return;
    if (!expect_punct('='))
      return;
    if (!at(Tok::Str)) {
      error_here("expected triple string");
      return;
    }
    if (saw_triple_)
      error_here("duplicate target triple");
    saw_triple_ = true;
    triple_span_ = span_of(cur());
    m_.target_triple = cur().text;
    bump();
  }

  void parse_global() {
    GlobalVariable g;
    g.name = cur().text;
    SourceSpan sp = span_of(cur());
    bump();
    if (!expect_punct('='))
      return;
    bool external = false;
    while (at(Tok::Ident)) {
      if (cur().text == "internal") {
        g.internal = true;
        bump();
      } else if (cur().text == "external") {
        external = true;
        bump();
      } else if (cur().text == "addrspace") {
        bump();
        if (!expect_punct('('))
          return;
        if (!at(Tok::Int)) {
          error_here("expected address space number");
          return;
        }
        int n = std::atoi(cur().text.c_str());
        if (n < 0 || n > 3) {
          error_here("address space must be 0..3");
          return;
        }
        g.space = AddressSpace(n);
        bump();
        if (!expect_punct(')'))
          return;
      } else if (cur().text == "global") {
        bump();
        break;
      } else {
        error_here("unexpected token '" + cur().text + "' in global",
                   "global");
        return;
      }
    }
    TypeRef t = parse_type_spec();
    if (!t)
      return;
    g.type = t;
    if (external) {
      g.init = GlobalVariable::Init::External;
    } else if (at_ident("zeroinitializer")) {
      g.init = GlobalVariable::Init::Zero;
      bump();
    } else if (t->is_scalar()) {
      auto v = parse_value(t);
      if (!v)
        return;
      g.init = GlobalVariable::Init::Scalar;
      g.init_val = *v;
    } else {
      error_here("global @" + g.name +
                 " needs zeroinitializer or a scalar constant");
      return;
    }
    func_spans_["@" + g.name] = sp;
    m_.globals.push_back(std::move(g));
  }

  // declare/define share signature parsing.
  void parse_function(bool is_declaration) {
    Function f;
    bump(); // declare/define

    while (at(Tok::Ident)) {
      if (cur().text == "dso_local") {
        f.dso_local = true;
        bump();
      } else if (cur().text == "spir_kernel") {
        f.cconv = CallConv::spir_kernel;
        bump();
      } else if (cur().text == "spir_func") {
        f.cconv = CallConv::spir_func;
        bump();
      } else {
        break;
      }
    }

    TypeRef ret = parse_type_spec();
    if (!ret)
      return;
    f.ret = ret;
    if (!at(Tok::GlobalId)) {
      error_here("expected function name");
      return;
    }
    f.name = cur().text;
    func_spans_[f.name] = span_of(cur());
    bump();

    if (!expect_punct('('))
      return;
    int unnamed = 0;
    if (!at_punct(')')) {
      while (true) {
        Param p;
        p.type = parse_type_spec();
        if (!p.type)
          return;
        // Opaque parameter attributes.
        while (at(Tok::Ident)) {
          if (cur().text == "align") {
            std::string a = "align";
            bump();
            if (at(Tok::Int)) {
              a += " " + cur().text;
              bump();
            }
            p.attrs.push_back(a);
          } else {
            p.attrs.push_back(cur().text);
            bump();
          }
        }
        if (at(Tok::LocalId)) {
          p.name = cur().text;
          bump();
        } else {
          p.name = std::to_string(unnamed++);
        }
        f.params.push_back(std::move(p));
        if (at_punct(',')) {
          bump();
          continue;
        }
        break;
      }
    }
    if (!expect_punct(')'))
      return;

    if (is_declaration) {
      m_.functions.push_back(std::move(f));
      return;
    }

    // Attached metadata: !kind !id pairs before the body.
    while (at(Tok::MetaName) && !cur().text.empty() &&
           !std::isdigit(unsigned(cur().text[0]))) {
      std::string kind = cur().text;
      bump();
      if (!at(Tok::MetaName)) {
        error_here("expected metadata node reference");
        return;
      }
      f.metadata[kind] = cur().text;
      bump();
    }

    if (!expect_punct('{'))
      return;
    parse_body(f);
    m_.functions.push_back(std::move(f));
  }

  void parse_body(Function &f) {
    BasicBlock *block = nullptr;
    while (!at(Tok::Eof) && !at_punct('}')) {
      // Block label: ident ':' on its own.
      if (at(Tok::Ident) && peek().kind == Tok::Punct && peek().punct == ':' &&
          !opcode_from_text(cur().text)) {
        f.blocks.push_back({cur().text, {}});
        block = &f.blocks.back();
        bump();
        bump();
        continue;
      }
      if (!block) {
        error_here("expected block label");
        skip_to_next_line();
        continue;
      }
      size_t before = errors_.size();
      SourceSpan sp = span_of(cur());
      std::optional<Instruction> inst = parse_instruction(f);
      if (errors_.size() > before || !inst) {
        skip_to_next_line();
        continue;
      }
      inst_spans_[{f.name, block->label, int(block->insts.size())}] = sp;
      block->insts.push_back(std::move(*inst));
    }
    expect_punct('}');
  }

  // ---- instructions ----------------------------------------------------

  std::optional<Instruction> parse_instruction(Function &f) {
    Instruction inst;
    if (at(Tok::LocalId)) {
      inst.result = cur().text;
      bump();
      if (!expect_punct('='))
        return std::nullopt;
    }

    if (at_ident("tail"))
      bump(); // accepted and normalized away

    if (!at(Tok::Ident)) {
      error_here("expected instruction mnemonic");
      return std::nullopt;
    }
    const Token &mn = cur();
    auto op = opcode_from_text(mn.text);
    if (!op) {
      error_here("unknown instruction '" + mn.text + "'");
      return std::nullopt;
    }
    inst.op = *op;
    bump();

    switch (inst.op) {
    case Opcode::add:
    case Opcode::sub:
    case Opcode::mul:
      while (at_ident("nuw") || at_ident("nsw")) {
        (cur().text == "nuw" ? inst.nuw : inst.nsw) = true;
        bump();
      }
      [[fallthrough]];
    case Opcode::sdiv:
    case Opcode::udiv:
    case Opcode::and_:
    case Opcode::or_:
    case Opcode::xor_:
    case Opcode::shl:
    case Opcode::lshr:
    case Opcode::ashr:
    case Opcode::fadd:
    case Opcode::fsub:
    case Opcode::fmul:
    case Opcode::fdiv: {
      inst.type = parse_type_spec();
      if (!inst.type)
        return std::nullopt;
      auto a = parse_value(inst.type);
      if (!a || !expect_punct(','))
        return std::nullopt;
      auto b = parse_value(inst.type);
      if (!b)
        return std::nullopt;
      inst.operands = {*a, *b};
      return inst;
    }
    case Opcode::icmp:
    case Opcode::fcmp: {
      if (!at(Tok::Ident)) {
        error_here("expected comparison predicate");
        return std::nullopt;
      }
      if (inst.op == Opcode::icmp) {
        auto p = icmp_from_text(cur().text);
        if (!p) {
          error_here("unknown icmp predicate '" + cur().text + "'");
          return std::nullopt;
        }
        inst.ipred = *p;
      } else {
        auto p = fcmp_from_text(cur().text);
        if (!p) {
          error_here("unknown fcmp predicate '" + cur().text + "'");
          return std::nullopt;
        }
        inst.fpred = *p;
      }
      bump();
      TypeRef t = parse_type_spec();
      if (!t)
        return std::nullopt;
      auto a = parse_value(t);
      if (!a || !expect_punct(','))
        return std::nullopt;
      auto b = parse_value(t);
      if (!b)
        return std::nullopt;
      inst.type = Type::int_ty(1);
      inst.operands = {*a, *b};
      return inst;
    }
    case Opcode::load: {
      if (at_ident("volatile")) {
        inst.is_volatile = true;
        bump();
      }
      inst.type = parse_type_spec();
      if (!inst.type || !expect_punct(','))
        return std::nullopt;
      auto p = parse_typed_value();
      if (!p)
        return std::nullopt;
      inst.operands = {*p};
      parse_align_suffix(inst);
      return inst;
    }
    case Opcode::store: {
      if (at_ident("volatile")) {
        inst.is_volatile = true;
        bump();
      }
      auto v = parse_typed_value();
      if (!v || !expect_punct(','))
        return std::nullopt;
      auto p = parse_typed_value();
      if (!p)
        return std::nullopt;
      inst.type = v->type;
      inst.operands = {*v, *p};
      parse_align_suffix(inst);
      return inst;
    }
    case Opcode::getelementptr: {
      if (at_ident("inbounds")) {
        inst.inbounds = true;
        bump();
      }
      inst.pointee = parse_type_spec();
      if (!inst.pointee || !expect_punct(','))
        return std::nullopt;
      auto base = parse_typed_value();
      if (!base)
        return std::nullopt;
      inst.operands = {*base};
      while (at_punct(',')) {
        bump();
        auto idx = parse_typed_value();
        if (!idx)
          return std::nullopt;
        inst.operands.push_back(*idx);
      }
      if (inst.operands.size() < 2 || inst.operands.size() > 3) {
        error_here("getelementptr expects one or two indices");
        return std::nullopt;
      }
      TypeRef elem = inst.pointee;
      if (inst.operands.size() == 3) {
        if (!elem->is_array()) {
          error_here("two-index getelementptr requires an array type");
          return std::nullopt;
        }
        elem = elem->elem;
      }
      AddressSpace space = base->type->is_pointer()
                               ? base->type->addr_space
                               : AddressSpace::Private;
      inst.type = Type::pointer_to(elem, space);
      return inst;
    }
    case Opcode::call: {
      while (at_ident("spir_func") || at_ident("spir_kernel"))
        bump(); // call-site calling convention, implied by the callee
      inst.type = parse_type_spec();
      if (!inst.type)
        return std::nullopt;
      if (!at(Tok::GlobalId)) {
        error_here("expected callee name");
        return std::nullopt;
      }
      inst.callee = cur().text;
      bump();
      if (!expect_punct('('))
        return std::nullopt;
      if (!at_punct(')')) {
        while (true) {
          auto a = parse_typed_value();
          if (!a)
            return std::nullopt;
          inst.operands.push_back(*a);
          if (at_punct(',')) {
            bump();
            continue;
          }
          break;
        }
      }
      if (!expect_punct(')'))
        return std::nullopt;
      return inst;
    }
    case Opcode::atomicrmw: {
      if (at_ident("volatile")) {
        inst.is_volatile = true;
        bump();
      }
      if (!at(Tok::Ident)) {
        error_here("expected atomicrmw operation");
        return std::nullopt;
      }
      auto aop = atomic_op_from_text(cur().text);
      if (!aop) {
        error_here("unknown atomicrmw operation '" + cur().text + "'");
        return std::nullopt;
      }
      inst.rmw = *aop;
      bump();
      auto p = parse_typed_value();
      if (!p || !expect_punct(','))
        return std::nullopt;
      auto v = parse_typed_value();
      if (!v)
        return std::nullopt;
      inst.type = v->type;
      inst.operands = {*p, *v};
      // Ordering keyword, if on the same line; all atomics execute
      // sequentially consistent regardless.
      if (at(Tok::Ident) && cur().line == mn.line) {
        static const std::set<std::string> orders = {
            "monotonic", "acquire", "release", "acq_rel", "seq_cst"};
        if (orders.count(cur().text))
          bump();
        else
          error_here("unknown atomic ordering '" + cur().text + "'");
      }
      return inst;
    }
    case Opcode::select: {
      auto c = parse_typed_value();
      if (!c || !expect_punct(','))
        return std::nullopt;
      auto a = parse_typed_value();
      if (!a || !expect_punct(','))
        return std::nullopt;
      auto b = parse_typed_value();
      if (!b)
        return std::nullopt;
      inst.type = a->type;
      inst.operands = {*c, *a, *b};
      return inst;
    }
    case Opcode::phi: {
      inst.type = parse_type_spec();
      if (!inst.type)
        return std::nullopt;
      while (true) {
        if (!expect_punct('['))
          return std::nullopt;
        auto v = parse_value(inst.type);
        if (!v || !expect_punct(','))
          return std::nullopt;
        if (!at(Tok::LocalId)) {
          error_here("expected predecessor label");
          return std::nullopt;
        }
        inst.labels.push_back(cur().text);
        bump();
        if (!expect_punct(']'))
          return std::nullopt;
        inst.operands.push_back(*v);
        if (at_punct(',')) {
          bump();
          continue;
        }
        break;
      }
      return inst;
    }
    case Opcode::br: {
      if (at_ident("label")) {
        bump();
        if (!at(Tok::LocalId)) {
          error_here("expected branch target");
          return std::nullopt;
        }
        inst.labels = {cur().text};
        bump();
        return inst;
      }
      TypeRef t = parse_type_spec();
      if (!t)
        return std::nullopt;
      auto c = parse_value(t);
      if (!c || !expect_punct(','))
        return std::nullopt;
      for (int i = 0; i < 2; ++i) {
        if (!expect_ident("label"))
          return std::nullopt;
        if (!at(Tok::LocalId)) {
          error_here("expected branch target");
          return std::nullopt;
        }
        inst.labels.push_back(cur().text);
        bump();
        if (i == 0 && !expect_punct(','))
          return std::nullopt;
      }
      inst.operands = {*c};
      return inst;
    }
    case Opcode::ret: {
      if (at_ident("void")) {
        bump();
        inst.type = Type::void_ty();
        return inst;
      }
      auto v = parse_typed_value();
      if (!v)
        return std::nullopt;
      inst.type = v->type;
      inst.operands = {*v};
      return inst;
    }
    case Opcode::sext:
    case Opcode::zext:
    case Opcode::trunc:
    case Opcode::fptosi:
    case Opcode::sitofp:
    case Opcode::bitcast: {
      auto v = parse_typed_value();
      if (!v || !expect_ident("to"))
        return std::nullopt;
      inst.type = parse_type_spec();
      if (!inst.type)
        return std::nullopt;
      inst.operands = {*v};
      return inst;
    }
    case Opcode::extractelement: {
      auto v = parse_typed_value();
      if (!v || !expect_punct(','))
        return std::nullopt;
      auto idx = parse_typed_value();
      if (!idx)
        return std::nullopt;
      if (!v->type->is_vector()) {
        error_here("extractelement requires a vector operand");
        return std::nullopt;
      }
      inst.type = v->type->elem;
      inst.operands = {*v, *idx};
      return inst;
    }
    case Opcode::alloca: {
      inst.pointee = parse_type_spec();
      if (!inst.pointee)
        return std::nullopt;
      inst.type = Type::pointer_to(inst.pointee);
      parse_align_suffix(inst);
      return inst;
    }
    default:
      error_at(mn, "unknown instruction '" + mn.text + "'");
      return std::nullopt;
    }
    (void)f;
  }

  void parse_align_suffix(Instruction &inst) {
    if (at_punct(',') && peek().kind == Tok::Ident && peek().text == "align") {
      bump();
      bump();
      if (at(Tok::Int)) {
        inst.align = uint32_t(std::atoi(cur().text.c_str()));
        bump();
      } else {
        error_here("expected alignment value");
      }
    }
  }

  // ---- metadata -------------------------------------------------------

  void parse_metadata_def() {
    const Token &name_tok = cur();
    std::string name = name_tok.text;
    bool numeric = !name.empty() && std::isdigit(unsigned(name[0]));
    func_spans_["!" + name] = span_of(name_tok);
    bump();
    if (!expect_punct('='))
      return;
    // The lexer produces a MetaName with empty text for the '!' of "!{".
    if (at(Tok::MetaName) && cur().text.empty()) {
      bump();
    } else {
      error_here("expected '!{'");
      return;
    }
    if (!expect_punct('{'))
      return;

    if (numeric) {
      MetadataNode node;
      node.id = name;
      if (!at_punct('}')) {
        while (true) {
          auto e = parse_metadata_elem();
          if (!e)
            return;
          node.elems.push_back(*e);
          if (at_punct(',')) {
            bump();
            continue;
          }
          break;
        }
      }
      if (!expect_punct('}'))
        return;
      if (m_.metadata_nodes.count(name)) {
        error_at(name_tok, "duplicate metadata node !" + name);
        return;
      }
      m_.metadata_nodes.emplace(name, std::move(node));
      return;
    }

    std::vector<std::string> ids;
    if (!at_punct('}')) {
      while (true) {
        if (!at(Tok::MetaName)) {
          error_here("expected metadata node reference");
          return;
        }
        ids.push_back(cur().text);
        bump();
        if (at_punct(',')) {
          bump();
          continue;
        }
        break;
      }
    }
    if (!expect_punct('}'))
      return;
    if (m_.find_named_metadata(name)) {
      error_at(name_tok, "duplicate named metadata !" + name);
      return;
    }
    m_.named_metadata.emplace_back(name, std::move(ids));
  }

  std::optional<MetadataElem> parse_metadata_elem() {
    if (at(Tok::Str)) {
      MetadataElem e = MetadataElem::str_elem(cur().text);
      bump();
      return e;
    }
    if (at(Tok::MetaName)) {
      if (cur().text.empty()) {
        error_here("nested metadata nodes are not supported");
        return std::nullopt;
      }
      MetadataElem e = MetadataElem::node_elem(cur().text);
      bump();
      return e;
    }
    // Either "iN <int>" or a function reference "TYPE @name".
    size_t save = ti_;
    size_t err_save = errors_.size();
    TypeRef t = parse_type_spec();
    if (!t) {
      return std::nullopt;
    }
    if (t->is_int() && at(Tok::Int)) {
      int64_t v = 0;
      std::from_chars(cur().text.data(), cur().text.data() + cur().text.size(),
                      v);
      bump();
      return MetadataElem::int_elem(v);
    }
    if (at(Tok::GlobalId)) {
      MetadataElem e = MetadataElem::func_elem(cur().text, t);
      bump();
      return e;
    }
    ti_ = save;
    errors_.resize(err_save);
    error_here("malformed metadata element");
    return std::nullopt;
  }

  // ---- finalize -------------------------------------------------------

  SourceSpan locate(const Diagnostic &d) const {
    if (!d.function.empty() && d.inst_index >= 0) {
      auto it = inst_spans_.find({d.function, d.block, d.inst_index});
      if (it != inst_spans_.end())
        return it->second;
    }
    if (!d.function.empty()) {
      auto it = func_spans_.find(d.function);
      if (it != func_spans_.end())
        return it->second;
    }
    return triple_span_;
  }

  void finalize() {
    if (!saw_triple_) {
      errors_.push_back(
          {triple_span_, "module has no target triple", std::nullopt});
      return;
    }
    if (m_.target_triple == kNvvmTriple) {
      m_.dialect = Dialect::NVVM;
    } else if (m_.target_triple.rfind("spir", 0) == 0) {
      m_.dialect = Dialect::OpenCL;
    } else {
      errors_.push_back({triple_span_,
                         "unknown target triple \"" + m_.target_triple + "\"",
                         std::nullopt});
      return;
    }

    // Kernel flags come from annotations (NVVM) or calling convention.
    if (m_.dialect == Dialect::NVVM) {
      KernelsResult kr = kernels_of(m_);
      for (const Function *k : kr.kernels)
        m_.find_function(k->name)->is_kernel = true;
      // unknown-function annotations surface through verify below
    } else {
      for (auto &f : m_.functions)
        if (f.cconv == CallConv::spir_kernel)
          f.is_kernel = true;
    }

    for (const Diagnostic &d : verify_module(m_))
      errors_.push_back({locate(d), d.to_string(), std::nullopt});
  }
};

} // namespace

ParseResult parse_module(std::string_view text) {
  Parser p(text);
  return p.run();
}

TypeParseResult parse_type(std::string_view text) {
  Parser p(text);
  return p.run_type();
}

} // namespace gpuir
