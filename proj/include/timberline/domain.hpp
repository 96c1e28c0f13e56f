#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "timberline/value.hpp"

namespace timberline::domain {

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view toString(CompareOp op);

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Predicate AST. `And`/`Or` are n-ary; a chain `a & b & c` is one node.
struct Node {
  enum class Kind {
    Constant,  // `truth`
    Compare,   // column op literal
    In,        // column in (literals)
    Truthy,    // bare column: non-zero number
    Not,
    And,
    Or,
  };
  Kind kind = Kind::Constant;
  bool truth = false;
  std::string column;
  CompareOp op = CompareOp::Eq;
  std::vector<Value> literals;
  std::vector<NodePtr> children;
};

bool structurallyEqual(const Node& a, const Node& b);

/// A parsed predicate. Immutable; copies share the tree.
class Expression {
 public:
  /// Always-true predicate.
  Expression();
  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  const Node& root() const { return *root_; }
  bool isConstantTrue() const { return root_->kind == Node::Kind::Constant && root_->truth; }

  bool operator==(const Expression& other) const { return structurallyEqual(*root_, *other.root_); }

 private:
  NodePtr root_;
};

/// Grammar, loosest first:
///   or      := and (('|' | '||') and)*
///   and     := unary (('&' | '&&') unary)*
///   unary   := '!' unary | compare
///   compare := primary [op literal] | primary ('in' | '%in%') ['c'] '(' literal, ... ')'
///   primary := identifier | literal | '(' or ')'
/// `!` negates the comparison that follows it. A literal on the left of an
/// operator is flipped to the right; comparisons between two literals fold
/// to a constant. Throws ParseError with a byte offset.
Expression parse(std::string_view text);

/// Canonical text that parses back to a structurally equal expression.
std::string print(const Expression& expr);

/// Identifiers exactly as written (qualifiers kept).
std::set<std::string> referencedColumns(const Expression& expr);

/// Result of resolving a column name during binding.
struct ColumnBinding {
  ColumnType type;
  std::size_t slot;
};

/// Returns nullopt for an unknown name. The message callback, when set,
/// explains why (for example a tree column in an area predicate).
using Resolver = std::function<std::optional<ColumnBinding>(std::string_view name)>;

/// Supplies column values for one row during evaluation.
class RowContext {
 public:
  virtual ~RowContext() = default;
  virtual Value value(std::size_t slot) const = 0;
};

/// An expression resolved against a schema; evaluation needs no lookups.
class BoundExpression {
 public:
  BoundExpression();

  /// 1 when the predicate is true; 0 when false or undetermined by nulls.
  int evaluate(const RowContext& row) const;
  bool isConstantTrue() const;

  struct Impl;

 private:
  friend BoundExpression bind(const Expression&, const Resolver&, std::string_view);
  std::shared_ptr<const Impl> impl_;
};

/// Throws BindError naming any unknown identifier or an operand type mismatch.
/// `context` names the role (e.g. "tree domain") in messages.
BoundExpression bind(const Expression& expr, const Resolver& resolve, std::string_view context = "predicate");

}  // namespace timberline::domain
