// Copyright 2026 The Ignis Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ignis/lambda/lambda.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <cmath>
#include <limits>

#include "ignis/error.hpp"

namespace ignis::lambda {

enum class NodeKind : uint8_t { kLiteral, kParam, kContext, kUnary, kBinary, kPair, kList, kIf };

enum class Op : uint8_t {
  kNeg, kNot, kFst, kSnd, kLen,
  kAdd, kSub, kMul, kDiv, kMod, kEq, kNe, kLt, kLe, kGt, kGe, kAnd, kOr,
};

struct Node {
  NodeKind kind = NodeKind::kLiteral;
  Op op = Op::kAdd;
  Value literal;
  int slot = 0;
  std::string name;
  std::vector<std::shared_ptr<const Node>> kids;
  int line = 1;
  int col = 1;
};

namespace {

using NodePtr = std::shared_ptr<const Node>;

enum class Tok : uint8_t {
  kEnd, kInt, kFloat, kString, kIdent, kContext, kLParen, kRParen, kLBracket, kRBracket, kComma,
  kPlus, kMinus, kStar, kSlash, kPercent, kEqEq, kNe, kLt, kLe, kGt, kGe, kAndAnd, kOrOr, kBang,
};

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  Value value;
  int line = 1;
  int col = 1;
};

[[noreturn]] void parseError(int line, int col, const std::string& msg) {
  fail(ErrorCode::kParse, "parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                              msg);
}

bool isIdentStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool isIdentChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool isDigit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1;
  int col = 1;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (isDigit(c)) {
      size_t j = i;
      while (j < src.size() && isDigit(src[j])) ++j;
      bool isFloat = false;
      if (j + 1 < src.size() && src[j] == '.' && isDigit(src[j + 1])) {
        isFloat = true;
        ++j;
        while (j < src.size() && isDigit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && isDigit(src[k])) {
          isFloat = true;
          j = k;
          while (j < src.size() && isDigit(src[j])) ++j;
        }
      }
      std::string text(src.substr(i, j - i));
      if (isFloat) {
        t.kind = Tok::kFloat;
        t.value = Value::f64(std::strtod(text.c_str(), nullptr));
      } else {
        int64_t v = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc()) parseError(line, col, "integer literal " + text + " out of range");
        t.kind = Tok::kInt;
        t.value = Value::i64(v);
      }
      t.text = text;
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (isIdentStart(c) || c == '$') {
      size_t j = i + (c == '$' ? 1 : 0);
      if (c == '$' && (j >= src.size() || !isIdentStart(src[j]))) parseError(line, col, "expected name after '$'");
      while (j < src.size() && isIdentChar(src[j])) ++j;
      t.kind = c == '$' ? Tok::kContext : Tok::kIdent;
      t.text = std::string(src.substr(i + (c == '$' ? 1 : 0), j - i - (c == '$' ? 1 : 0)));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '"') {
      std::string s;
      size_t j = i + 1;
      while (true) {
        if (j >= src.size()) parseError(line, col, "unterminated string literal");
        char d = src[j];
        if (d == '"') break;
        if (d == '\\') {
          if (j + 1 >= src.size()) parseError(line, col, "unterminated string literal");
          char e = src[j + 1];
          switch (e) {
            case '"': s.push_back('"'); break;
            case '\\': s.push_back('\\'); break;
            case 'n': s.push_back('\n'); break;
            case 't': s.push_back('\t'); break;
            case 'r': s.push_back('\r'); break;
            default: parseError(line, col, std::string("unknown escape \\") + e);
          }
          j += 2;
          continue;
        }
        s.push_back(d);
        ++j;
      }
      t.kind = Tok::kString;
      t.value = Value::str(s);
      advance(j + 1 - i);
      out.push_back(std::move(t));
      continue;
    }
    auto two = src.substr(i, 2);
    struct Sym {
      std::string_view text;
      Tok kind;
    };
    static const Sym kSyms[] = {
        {"==", Tok::kEqEq}, {"!=", Tok::kNe}, {"<=", Tok::kLe}, {">=", Tok::kGe}, {"&&", Tok::kAndAnd},
        {"||", Tok::kOrOr}, {"(", Tok::kLParen}, {")", Tok::kRParen}, {"[", Tok::kLBracket}, {"]", Tok::kRBracket},
        {",", Tok::kComma}, {"+", Tok::kPlus}, {"-", Tok::kMinus}, {"*", Tok::kStar}, {"/", Tok::kSlash},
        {"%", Tok::kPercent}, {"<", Tok::kLt}, {">", Tok::kGt}, {"!", Tok::kBang},
    };
    bool matched = false;
    for (const Sym& sym : kSyms) {
      if ((sym.text.size() == 2 && two == sym.text) || (sym.text.size() == 1 && c == sym.text[0])) {
        t.kind = sym.kind;
        t.text = std::string(sym.text);
        advance(sym.text.size());
        out.push_back(std::move(t));
        matched = true;
        break;
      }
    }
    if (!matched) parseError(line, col, std::string("unexpected character '") + c + "'");
  }
  Token end;
  end.kind = Tok::kEnd;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, const std::vector<std::string>& params) : toks_(std::move(toks)), params_(params) {}

  NodePtr parseAll() {
    NodePtr e = expr();
    if (peek().kind != Tok::kEnd) unexpected("end of input");
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_++]; }
  bool isKeyword(const char* kw) const { return peek().kind == Tok::kIdent && peek().text == kw; }

  [[noreturn]] void unexpected(const std::string& wanted) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::kEnd ? "end of input" : "'" + t.text + "'";
    parseError(t.line, t.col, "expected " + wanted + ", found " + got);
  }

  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) unexpected(what);
    ++pos_;
  }

  void expectKeyword(const char* kw) {
    if (!isKeyword(kw)) unexpected(std::string("'") + kw + "'");
    ++pos_;
  }

  static std::shared_ptr<Node> at(NodeKind kind, const Token& t) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->line = t.line;
    n->col = t.col;
    return n;
  }

  NodePtr expr() {
    if (isKeyword("if")) {
      auto n = at(NodeKind::kIf, next());
      n->kids.push_back(expr());
      expectKeyword("then");
      n->kids.push_back(expr());
      expectKeyword("else");
      n->kids.push_back(expr());
      return n;
    }
    return binary(0);
  }

  // Binary precedence levels, loosest first.
  NodePtr binary(int level) {
    struct Level {
      std::vector<std::pair<Tok, Op>> ops;
    };
    static const Level kLevels[] = {
        {{{Tok::kOrOr, Op::kOr}}},
        {{{Tok::kAndAnd, Op::kAnd}}},
        {{{Tok::kEqEq, Op::kEq}, {Tok::kNe, Op::kNe}}},
        {{{Tok::kLt, Op::kLt}, {Tok::kLe, Op::kLe}, {Tok::kGt, Op::kGt}, {Tok::kGe, Op::kGe}}},
        {{{Tok::kPlus, Op::kAdd}, {Tok::kMinus, Op::kSub}}},
        {{{Tok::kStar, Op::kMul}, {Tok::kSlash, Op::kDiv}, {Tok::kPercent, Op::kMod}}},
    };
    if (level == static_cast<int>(std::size(kLevels))) return unary();
    NodePtr lhs = binary(level + 1);
    while (true) {
      const Op* found = nullptr;
      for (const auto& [tok, op] : kLevels[level].ops) {
        if (peek().kind == tok) found = &op;
      }
      if (!found) return lhs;
      auto n = at(NodeKind::kBinary, next());
      n->op = *found;
      n->kids.push_back(lhs);
      n->kids.push_back(binary(level + 1));
      lhs = n;
    }
  }

  NodePtr unary() {
    const Token& t = peek();
    std::optional<Op> op;
    if (t.kind == Tok::kMinus) op = Op::kNeg;
    if (t.kind == Tok::kBang) op = Op::kNot;
    if (isKeyword("fst")) op = Op::kFst;
    if (isKeyword("snd")) op = Op::kSnd;
    if (isKeyword("len")) op = Op::kLen;
    if (!op) return primary();
    auto n = at(NodeKind::kUnary, next());
    n->op = *op;
    n->kids.push_back(unary());
    return n;
  }

  NodePtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::kInt:
      case Tok::kFloat:
      case Tok::kString: {
        auto n = at(NodeKind::kLiteral, t);
        n->literal = next().value;
        return n;
      }
      case Tok::kContext: {
        auto n = at(NodeKind::kContext, t);
        n->name = next().text;
        return n;
      }
      case Tok::kIdent: {
        static const char* kReserved[] = {"if", "then", "else", "fst", "snd", "len"};
        for (const char* kw : kReserved) {
          if (t.text == kw) unexpected("an expression");
        }
        auto n = at(NodeKind::kLiteral, t);
        if (t.text == "true" || t.text == "false") {
          n->literal = Value::boolean(t.text == "true");
        } else if (t.text == "null") {
          n->literal = Value::null();
        } else {
          n->kind = NodeKind::kParam;
          n->name = t.text;
          auto it = std::find(params_.begin(), params_.end(), t.text);
          if (it == params_.end()) {
            fail(ErrorCode::kArityMismatch, "identifier '" + t.text + "' at line " + std::to_string(t.line) +
                                                ", column " + std::to_string(t.col) +
                                                " is not a declared parameter");
          }
          n->slot = static_cast<int>(it - params_.begin());
        }
        ++pos_;
        return n;
      }
      case Tok::kLParen: {
        Token open = next();
        NodePtr first = expr();
        if (peek().kind == Tok::kComma) {
          ++pos_;
          auto n = at(NodeKind::kPair, open);
          n->kids.push_back(first);
          n->kids.push_back(expr());
          expect(Tok::kRParen, "')'");
          return n;
        }
        expect(Tok::kRParen, "')' or ','");
        return first;
      }
      case Tok::kLBracket: {
        auto n = at(NodeKind::kList, next());
        if (peek().kind != Tok::kRBracket) {
          n->kids.push_back(expr());
          while (peek().kind == Tok::kComma) {
            ++pos_;
            n->kids.push_back(expr());
          }
        }
        expect(Tok::kRBracket, "']' or ','");
        return n;
      }
      default: unexpected("an expression");
    }
  }

  std::vector<Token> toks_;
  const std::vector<std::string>& params_;
  size_t pos_ = 0;
};

[[noreturn]] void typeError(const Node& n, const std::string& msg) {
  fail(ErrorCode::kType, "type error at line " + std::to_string(n.line) + ", column " + std::to_string(n.col) + ": " +
                             msg);
}

[[noreturn]] void operandError(const Node& n, const char* op, const Value& a, const Value& b) {
  typeError(n, std::string("cannot apply '") + op + "' to " + tagName(a.tag()) + " and " + tagName(b.tag()));
}

bool isNumber(const Value& v) { return v.isI64() || v.isF64(); }
double asDouble(const Value& v) { return v.isI64() ? static_cast<double>(v.asI64()) : v.asF64(); }

// Two's-complement wrapping keeps I64 overflow well defined.
int64_t wrapAdd(int64_t a, int64_t b) { return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b)); }
int64_t wrapSub(int64_t a, int64_t b) { return static_cast<int64_t>(static_cast<uint64_t>(a) - static_cast<uint64_t>(b)); }
int64_t wrapMul(int64_t a, int64_t b) { return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b)); }

class Evaluator {
 public:
  Evaluator(const std::vector<Value>& args, const VarMap& vars) : args_(args), vars_(vars) {}

  Value eval(const Node& n) const {
    switch (n.kind) {
      case NodeKind::kLiteral: return n.literal;
      case NodeKind::kParam: return args_[n.slot];
      case NodeKind::kContext: {
        auto it = vars_.find(n.name);
        if (it == vars_.end()) {
          fail(ErrorCode::kUnknownContextVariable, "context variable '$" + n.name + "' is not set");
        }
        return it->second;
      }
      case NodeKind::kPair: return Value::pair(eval(*n.kids[0]), eval(*n.kids[1]));
      case NodeKind::kList: {
        ValueList items;
        items.reserve(n.kids.size());
        for (const auto& k : n.kids) items.push_back(eval(*k));
        return Value::list(std::move(items));
      }
      case NodeKind::kIf: {
        Value c = eval(*n.kids[0]);
        if (!c.isBool()) typeError(n, std::string("if condition is ") + tagName(c.tag()) + ", expected Bool");
        return eval(*n.kids[c.asBool() ? 1 : 2]);
      }
      case NodeKind::kUnary: return unary(n, eval(*n.kids[0]));
      case NodeKind::kBinary: return binary(n, eval(*n.kids[0]), eval(*n.kids[1]));
    }
    fail(ErrorCode::kInternal, "bad lambda node");
  }

 private:
  static Value unary(const Node& n, const Value& v) {
    switch (n.op) {
      case Op::kNeg:
        if (v.isI64()) return Value::i64(wrapSub(0, v.asI64()));
        if (v.isF64()) return Value::f64(-v.asF64());
        typeError(n, std::string("cannot negate ") + tagName(v.tag()));
      case Op::kNot:
        if (v.isBool()) return Value::boolean(!v.asBool());
        typeError(n, std::string("'!' needs Bool, got ") + tagName(v.tag()));
      case Op::kFst:
        if (v.isPair()) return v.first();
        typeError(n, std::string("fst needs Pair, got ") + tagName(v.tag()));
      case Op::kSnd:
        if (v.isPair()) return v.second();
        typeError(n, std::string("snd needs Pair, got ") + tagName(v.tag()));
      case Op::kLen:
        if (v.isStr()) return Value::i64(static_cast<int64_t>(v.asStr().size()));
        if (v.isBytes()) return Value::i64(static_cast<int64_t>(v.asBytes().size()));
        if (v.isList()) return Value::i64(static_cast<int64_t>(v.asList().size()));
        typeError(n, std::string("len needs Str, Bytes or List, got ") + tagName(v.tag()));
      default: fail(ErrorCode::kInternal, "bad unary op");
    }
  }

  static Value binary(const Node& n, const Value& a, const Value& b) {
    switch (n.op) {
      case Op::kAdd:
        if (a.isI64() && b.isI64()) return Value::i64(wrapAdd(a.asI64(), b.asI64()));
        if (isNumber(a) && isNumber(b)) return Value::f64(asDouble(a) + asDouble(b));
        if (a.isStr() && b.isStr()) return Value::str(a.asStr() + b.asStr());
        if (a.isList() && b.isList()) {
          ValueList items = a.asList();
          items.insert(items.end(), b.asList().begin(), b.asList().end());
          return Value::list(std::move(items));
        }
        operandError(n, "+", a, b);
      case Op::kSub:
        if (a.isI64() && b.isI64()) return Value::i64(wrapSub(a.asI64(), b.asI64()));
        if (isNumber(a) && isNumber(b)) return Value::f64(asDouble(a) - asDouble(b));
        operandError(n, "-", a, b);
      case Op::kMul:
        if (a.isI64() && b.isI64()) return Value::i64(wrapMul(a.asI64(), b.asI64()));
        if (isNumber(a) && isNumber(b)) return Value::f64(asDouble(a) * asDouble(b));
        operandError(n, "*", a, b);
      case Op::kDiv:
      case Op::kMod: {
        bool div = n.op == Op::kDiv;
        if (a.isI64() && b.isI64()) {
          int64_t x = a.asI64();
          int64_t y = b.asI64();
          if (y == 0) {
            fail(ErrorCode::kDivisionByZero, std::string("integer ") + (div ? "division" : "modulo") +
                                                 " by zero at line " + std::to_string(n.line) + ", column " +
                                                 std::to_string(n.col));
          }
          if (x == std::numeric_limits<int64_t>::min() && y == -1) return Value::i64(div ? x : 0);
          return Value::i64(div ? x / y : x % y);
        }
        if (isNumber(a) && isNumber(b)) {
          double x = asDouble(a);
          double y = asDouble(b);
          return Value::f64(div ? x / y : std::fmod(x, y));
        }
        operandError(n, div ? "/" : "%", a, b);
      }
      case Op::kEq: return Value::boolean(a == b);
      case Op::kNe: return Value::boolean(!(a == b));
      case Op::kLt:
      case Op::kLe:
      case Op::kGt:
      case Op::kGe: {
        std::partial_ordering ord = std::partial_ordering::equivalent;
        if (isNumber(a) && isNumber(b) && a.tag() != b.tag()) {
          ord = asDouble(a) <=> asDouble(b);
        } else {
          ord = compareValues(a, b);
        }
        switch (n.op) {
          case Op::kLt: return Value::boolean(ord < 0);
          case Op::kLe: return Value::boolean(ord <= 0);
          case Op::kGt: return Value::boolean(ord > 0);
          default: return Value::boolean(ord >= 0);
        }
      }
      case Op::kAnd:
      case Op::kOr:
        if (!a.isBool() || !b.isBool()) operandError(n, n.op == Op::kAnd ? "&&" : "||", a, b);
        return Value::boolean(n.op == Op::kAnd ? (a.asBool() && b.asBool()) : (a.asBool() || b.asBool()));
      default: fail(ErrorCode::kInternal, "bad binary op");
    }
  }

  const std::vector<Value>& args_;
  const VarMap& vars_;
};

}  // namespace

Lambda Lambda::parse(std::vector<std::string> params, std::string_view body) {
  if (params.size() > 2) {
    fail(ErrorCode::kArityMismatch, "a lambda takes at most 2 parameters, got " + std::to_string(params.size()));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    const std::string& p = params[i];
    if (p.empty() || !isIdentStart(p[0]) || !std::all_of(p.begin(), p.end(), isIdentChar)) {
      fail(ErrorCode::kParse, "invalid parameter name '" + p + "'");
    }
    for (const char* kw : {"if", "then", "else", "fst", "snd", "len", "true", "false", "null"}) {
      if (p == kw) fail(ErrorCode::kParse, "parameter name '" + p + "' is reserved");
    }
    for (size_t j = 0; j < i; ++j) {
      if (params[j] == p) fail(ErrorCode::kParse, "duplicate parameter '" + p + "'");
    }
  }
  Lambda l;
  l.params_ = std::move(params);
  l.body_ = std::string(body);
  l.root_ = Parser(lex(l.body_), l.params_).parseAll();
  return l;
}

Value Lambda::eval(const std::vector<Value>& args, const VarMap& vars) const {
  if (!root_) fail(ErrorCode::kPrecondition, "lambda is empty");
  if (args.size() != params_.size()) {
    fail(ErrorCode::kArityMismatch, "lambda takes " + std::to_string(params_.size()) + " arguments, got " +
                                        std::to_string(args.size()));
  }
  return Evaluator(args, vars).eval(*root_);
}

Value Lambda::toValue() const {
  ValueList ps;
  for (const std::string& p : params_) ps.push_back(Value::str(p));
  return Value::pair(Value::list(std::move(ps)), Value::str(body_));
}

Lambda Lambda::fromValue(const Value& v) {
  if (!v.isPair() || !v.first().isList() || !v.second().isStr()) {
    fail(ErrorCode::kType, "lambda must be Pair(List[Str], Str), got " + v.toString());
  }
  std::vector<std::string> params;
  for (const Value& p : v.first().asList()) params.push_back(p.asStr());
  return parse(std::move(params), v.second().asStr());
}

}  // namespace ignis::lambda
