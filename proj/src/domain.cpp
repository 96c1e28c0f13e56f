#include "timberline/domain.hpp"

#include <algorithm>
#include <cctype>

#include "timberline/error.hpp"

namespace timberline::domain {

std::string_view toString(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "==";
}

bool structurallyEqual(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.truth != b.truth || a.column != b.column || a.op != b.op) return false;
  if (a.literals != b.literals || a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!structurallyEqual(*a.children[i], *b.children[i])) return false;
  return true;
}

namespace {

NodePtr constant(bool truth) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Constant;
  n->truth = truth;
  return n;
}

}  // namespace

Expression::Expression() : root_(constant(true)) {}

// ---- lexer -----------------------------------------------------------------

namespace {

enum class Tok { Ident, Number, String, Op, And, Or, Not, LParen, RParen, Comma, In, End };

struct Token {
  Tok kind;
  std::size_t pos;
  std::string text;
  double number = 0;
  CompareOp op = CompareOp::Eq;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::String: return "string literal";
    default: return "'" + t.text + "'";
  }
}

bool identStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool identChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](Tok k, std::size_t pos, std::size_t len) {
    out.push_back(Token{k, pos, std::string(s.substr(pos, len))});
  };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    auto next = [&](std::size_t k) { return i + k < s.size() ? s[i + k] : '\0'; };
    if (identStart(c)) {
      while (i < s.size() && identChar(s[i])) ++i;
      Token t{Tok::Ident, start, std::string(s.substr(start, i - start))};
      if (t.text == "in") t.kind = Tok::In;
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || ((c == '-' || c == '.') &&
                                                        (std::isdigit(static_cast<unsigned char>(next(1))) || next(1) == '.'))) {
      if (c == '-') ++i;
      while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
          i = j;
          while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        }
      }
      Token t{Tok::Number, start, std::string(s.substr(start, i - start))};
      auto v = parseNumber(t.text);
      if (!v) throw ParseError("malformed number '" + t.text + "' at position " + std::to_string(start), start);
      t.number = *v;
      out.push_back(std::move(t));
      continue;
    }
    if (c == '"' || c == '\'') {
      std::string text;
      ++i;
      bool closed = false;
      while (i < s.size()) {
        if (s[i] == '\\' && i + 1 < s.size()) {
          text.push_back(s[i + 1]);
          i += 2;
        } else if (s[i] == c) {
          ++i;
          closed = true;
          break;
        } else {
          text.push_back(s[i++]);
        }
      }
      if (!closed) throw ParseError("unterminated string starting at position " + std::to_string(start), start);
      out.push_back(Token{Tok::String, start, std::move(text)});
      continue;
    }
    if (c == '%' && s.substr(i, 4) == "%in%") {
      i += 4;
      push(Tok::In, start, 4);
      continue;
    }
    auto op = [&](CompareOp o, std::size_t len) {
      i += len;
      Token t{Tok::Op, start, std::string(s.substr(start, len))};
      t.op = o;
      out.push_back(std::move(t));
    };
    switch (c) {
      case '=':
        if (next(1) == '=') {
          op(CompareOp::Eq, 2);
          continue;
        }
        throw ParseError("expected '==' at position " + std::to_string(start), start);
      case '!':
        if (next(1) == '=') op(CompareOp::Ne, 2);
        else push(Tok::Not, start, 1), ++i;
        continue;
      case '<':
        if (next(1) == '=') op(CompareOp::Le, 2);
        else op(CompareOp::Lt, 1);
        continue;
      case '>':
        if (next(1) == '=') op(CompareOp::Ge, 2);
        else op(CompareOp::Gt, 1);
        continue;
      case '&':
        push(Tok::And, start, next(1) == '&' ? 2 : 1);
        i += next(1) == '&' ? 2 : 1;
        continue;
      case '|':
        push(Tok::Or, start, next(1) == '|' ? 2 : 1);
        i += next(1) == '|' ? 2 : 1;
        continue;
      case '(': push(Tok::LParen, start, 1), ++i; continue;
      case ')': push(Tok::RParen, start, 1), ++i; continue;
      case ',': push(Tok::Comma, start, 1), ++i; continue;
      default:
        throw ParseError("unexpected character '" + std::string(1, c) + "' at position " + std::to_string(start), start);
    }
  }
  out.push_back(Token{Tok::End, s.size(), ""});
  return out;
}

// ---- parser ----------------------------------------------------------------

bool literalTruth(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d != 0;
  return true;
}

bool compareLiterals(const Value& a, CompareOp op, const Value& b) {
  if (a.index() != b.index()) throw BindError("cannot compare a number with text");
  const auto c = compareValues(a, b);
  switch (op) {
    case CompareOp::Eq: return c == 0;
    case CompareOp::Ne: return c != 0;
    case CompareOp::Lt: return c < 0;
    case CompareOp::Le: return c <= 0;
    case CompareOp::Gt: return c > 0;
    case CompareOp::Ge: return c >= 0;
  }
  return false;
}

CompareOp flip(CompareOp op) {
  switch (op) {
    case CompareOp::Lt: return CompareOp::Gt;
    case CompareOp::Le: return CompareOp::Ge;
    case CompareOp::Gt: return CompareOp::Lt;
    case CompareOp::Ge: return CompareOp::Le;
    default: return op;
  }
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : t_(std::move(tokens)) {}

  NodePtr parseAll() {
    NodePtr n = parseOr();
    expectKind(Tok::End, "'&', '|', or end of input");
    return n;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return t_[std::min(i_ + k, t_.size() - 1)]; }
  const Token& take() { return t_[i_ < t_.size() - 1 ? i_++ : i_]; }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    throw ParseError("expected " + expected + " at position " + std::to_string(t.pos) + ", found " + describe(t),
                     t.pos);
  }

  void expectKind(Tok k, const std::string& what) {
    if (peek().kind != k) fail(what);
    take();
  }

  NodePtr chain(Node::Kind kind, Tok sep, NodePtr (Parser::*sub)()) {
    std::vector<NodePtr> parts{(this->*sub)()};
    while (peek().kind == sep) {
      take();
      parts.push_back((this->*sub)());
    }
    if (parts.size() == 1) return parts.front();
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->children = std::move(parts);
    return n;
  }

  NodePtr parseOr() { return chain(Node::Kind::Or, Tok::Or, &Parser::parseAnd); }
  NodePtr parseAnd() { return chain(Node::Kind::And, Tok::And, &Parser::parseUnary); }

  NodePtr parseUnary() {
    if (peek().kind == Tok::Not) {
      take();
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Not;
      n->children.push_back(parseUnary());
      return n;
    }
    return parseCompare();
  }

  bool atLiteral() const { return peek().kind == Tok::Number || peek().kind == Tok::String; }

  Value literal() {
    const Token& t = peek();
    if (t.kind == Tok::Number) return take(), Value{t_[i_ - 1].number};
    if (t.kind == Tok::String) return take(), Value{t_[i_ - 1].text};
    fail("a number or quoted string");
  }

  std::vector<Value> literalList() {
    if (peek().kind == Tok::Ident && peek().text == "c" && peek(1).kind == Tok::LParen) take();
    expectKind(Tok::LParen, "'('");
    std::vector<Value> out{literal()};
    while (peek().kind == Tok::Comma) {
      take();
      out.push_back(literal());
    }
    expectKind(Tok::RParen, "',' or ')'");
    return out;
  }

  NodePtr parseCompare() {
    if (peek().kind == Tok::LParen) {
      take();
      NodePtr inner = parseOr();
      expectKind(Tok::RParen, "')'");
      return inner;
    }
    if (peek().kind == Tok::Ident) {
      std::string column = take().text;
      auto n = std::make_shared<Node>();
      n->column = std::move(column);
      if (peek().kind == Tok::Op) {
        n->kind = Node::Kind::Compare;
        n->op = take().op;
        if (peek().kind == Tok::Ident) fail("a number or quoted string (columns compare only with literals)");
        n->literals.push_back(literal());
      } else if (peek().kind == Tok::In) {
        take();
        n->kind = Node::Kind::In;
        n->literals = literalList();
      } else {
        n->kind = Node::Kind::Truthy;
      }
      return n;
    }
    if (atLiteral()) {
      const std::size_t pos = peek().pos;
      Value lhs = literal();
      if (peek().kind == Tok::Op) {
        const CompareOp op = take().op;
        if (peek().kind == Tok::Ident) {
          auto n = std::make_shared<Node>();
          n->kind = Node::Kind::Compare;
          n->column = take().text;
          n->op = flip(op);
          n->literals.push_back(std::move(lhs));
          return n;
        }
        Value rhs = literal();
        try {
          return constant(compareLiterals(lhs, op, rhs));
        } catch (const BindError& e) {
          throw BindError(std::string(e.what()) + " at position " + std::to_string(pos));
        }
      }
      if (peek().kind == Tok::In) {
        take();
        bool any = false;
        for (const auto& v : literalList()) {
          if (v.index() != lhs.index()) throw BindError("cannot compare a number with text at position " + std::to_string(pos));
          any = any || compareValues(lhs, v) == 0;
        }
        return constant(any);
      }
      if (std::holds_alternative<std::string>(lhs)) fail("a comparison operator");
      return constant(literalTruth(lhs));
    }
    fail("a column name, literal, '!' or '('");
  }

  std::vector<Token> t_;
  std::size_t i_ = 0;
};

// ---- printer ---------------------------------------------------------------

void printLiteral(std::string& out, const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) {
    out += formatNumber(*d);
    return;
  }
  out.push_back('"');
  for (char c : std::get<std::string>(v)) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
}

void printNode(std::string& out, const Node& n) {
  using K = Node::Kind;
  switch (n.kind) {
    case K::Constant: out += n.truth ? "1 == 1" : "1 == 0"; return;
    case K::Truthy: out += n.column; return;
    case K::Compare:
      out += n.column;
      out.push_back(' ');
      out += toString(n.op);
      out.push_back(' ');
      printLiteral(out, n.literals.front());
      return;
    case K::In:
      out += n.column;
      out += " in (";
      for (std::size_t i = 0; i < n.literals.size(); ++i) {
        if (i) out += ", ";
        printLiteral(out, n.literals[i]);
      }
      out.push_back(')');
      return;
    case K::Not: {
      const Node& c = *n.children.front();
      const bool wrap = c.kind == K::And || c.kind == K::Or || c.kind == K::Constant;
      out.push_back('!');
      if (wrap) out.push_back('(');
      printNode(out, c);
      if (wrap) out.push_back(')');
      return;
    }
    case K::And:
    case K::Or: {
      const char* sep = n.kind == K::And ? " & " : " | ";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        const Node& c = *n.children[i];
        // Parenthesize anything that would otherwise merge into this chain.
        const bool wrap = c.kind == K::Or || (n.kind == K::And && c.kind == K::And);
        if (i) out += sep;
        if (wrap) out.push_back('(');
        printNode(out, c);
        if (wrap) out.push_back(')');
      }
      return;
    }
  }
}

void collect(const Node& n, std::set<std::string>& out) {
  if (!n.column.empty()) out.insert(n.column);
  for (const auto& c : n.children) collect(*c, out);
}

}  // namespace

Expression parse(std::string_view text) { return Expression(Parser(lex(text)).parseAll()); }

std::string print(const Expression& expr) {
  std::string out;
  printNode(out, expr.root());
  return out;
}

std::set<std::string> referencedColumns(const Expression& expr) {
  std::set<std::string> out;
  collect(expr.root(), out);
  return out;
}

// ---- binding and evaluation ------------------------------------------------

namespace {

enum class Tri : unsigned char { False, Unknown, True };

struct Compiled {
  Node::Kind kind = Node::Kind::Constant;
  bool truth = true;
  std::size_t slot = 0;
  ColumnType type = ColumnType::Number;
  CompareOp op = CompareOp::Eq;
  std::vector<double> numbers;
  std::vector<std::string> texts;
  std::vector<Compiled> children;
};

template <class T>
bool apply(const T& a, CompareOp op, const T& b) {
  switch (op) {
    case CompareOp::Eq: return a == b;
    case CompareOp::Ne: return a != b;
    case CompareOp::Lt: return a < b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Gt: return a > b;
    case CompareOp::Ge: return a >= b;
  }
  return false;
}

Tri fromBool(bool b) { return b ? Tri::True : Tri::False; }

Tri run(const Compiled& c, const RowContext& row) {
  using K = Node::Kind;
  switch (c.kind) {
    case K::Constant: return fromBool(c.truth);
    case K::Truthy: {
      const Value v = row.value(c.slot);
      const auto* d = std::get_if<double>(&v);
      return d ? fromBool(*d != 0) : Tri::Unknown;
    }
    case K::Compare:
    case K::In: {
      const Value v = row.value(c.slot);
      if (isNull(v)) return Tri::Unknown;
      if (c.type == ColumnType::Number) {
        const auto* d = std::get_if<double>(&v);
        if (!d) return Tri::Unknown;
        if (c.kind == K::Compare) return fromBool(apply(*d, c.op, c.numbers.front()));
        return fromBool(std::find(c.numbers.begin(), c.numbers.end(), *d) != c.numbers.end());
      }
      const std::string s = formatValue(v);
      if (c.kind == K::Compare) return fromBool(apply(s, c.op, c.texts.front()));
      return fromBool(std::find(c.texts.begin(), c.texts.end(), s) != c.texts.end());
    }
    case K::Not: {
      const Tri t = run(c.children.front(), row);
      return t == Tri::Unknown ? t : (t == Tri::True ? Tri::False : Tri::True);
    }
    case K::And: {
      Tri acc = Tri::True;
      for (const auto& ch : c.children) {
        const Tri t = run(ch, row);
        if (t == Tri::False) return t;
        if (t == Tri::Unknown) acc = t;
      }
      return acc;
    }
    case K::Or: {
      Tri acc = Tri::False;
      for (const auto& ch : c.children) {
        const Tri t = run(ch, row);
        if (t == Tri::True) return t;
        if (t == Tri::Unknown) acc = t;
      }
      return acc;
    }
  }
  return Tri::Unknown;
}

std::string_view typeName(ColumnType t) { return t == ColumnType::Number ? "numeric" : "text"; }

Compiled compile(const Node& n, const Resolver& resolve, std::string_view context) {
  Compiled c;
  c.kind = n.kind;
  c.truth = n.truth;
  c.op = n.op;
  if (n.kind == Node::Kind::Compare || n.kind == Node::Kind::In || n.kind == Node::Kind::Truthy) {
    auto b = resolve ? resolve(n.column) : std::nullopt;
    if (!b) throw BindError("unknown column '" + n.column + "' in " + std::string(context));
    c.slot = b->slot;
    c.type = b->type;
    if (n.kind == Node::Kind::Truthy && b->type != ColumnType::Number)
      throw BindError("column '" + n.column + "' is text and cannot stand alone as a condition in " +
                      std::string(context));
    for (const auto& lit : n.literals) {
      const bool isNum = std::holds_alternative<double>(lit);
      if (isNum != (b->type == ColumnType::Number))
        throw BindError("type mismatch in " + std::string(context) + ": " + std::string(typeName(b->type)) +
                        " column '" + n.column + "' compared with " + (isNum ? "a number" : "a string"));
      if (isNum) c.numbers.push_back(std::get<double>(lit));
      else c.texts.push_back(std::get<std::string>(lit));
    }
  }
  for (const auto& ch : n.children) c.children.push_back(compile(*ch, resolve, context));
  return c;
}

}  // namespace

struct BoundExpression::Impl {
  Compiled root;
};

BoundExpression::BoundExpression() : impl_(std::make_shared<Impl>()) {}

int BoundExpression::evaluate(const RowContext& row) const { return run(impl_->root, row) == Tri::True ? 1 : 0; }

bool BoundExpression::isConstantTrue() const {
  return impl_->root.kind == Node::Kind::Constant && impl_->root.truth;
}

BoundExpression bind(const Expression& expr, const Resolver& resolve, std::string_view context) {
  auto impl = std::make_shared<BoundExpression::Impl>();
  impl->root = compile(expr.root(), resolve, context);
  BoundExpression out;
  out.impl_ = std::move(impl);
  return out;
}

}  // namespace timberline::domain
