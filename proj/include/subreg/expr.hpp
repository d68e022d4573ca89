#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subreg/linalg.hpp"
#include "subreg/sets.hpp"

namespace subreg {

/// Variable bindings: x1..xn from `x`, p1..pk from `p`.
struct Env {
  std::span<const double> x;
  std::span<const double> p;
};

enum class NodeKind {
  Const,
  Var,      // x<i> or p<i>
  VarVec,   // bare x or p: the whole vector
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Call,
  VecLit,
  Piecewise,
  Compare,
  And,
  Or,
  Not,
};

enum class CompareOp { Lt, Le, Gt, Ge, Eq, Ne };

struct Node {
  NodeKind kind = NodeKind::Const;
  double value = 0.0;
  char group = 'x';          // variable group for Var / VarVec
  std::size_t index = 0;     // 1-based variable index for Var
  std::string name;          // function name for Call
  CompareOp cmp = CompareOp::Lt;
  std::vector<std::shared_ptr<const Node>> args;
  std::size_t line = 1;
  std::size_t column = 1;
};

using NodePtr = std::shared_ptr<const Node>;

/// Limits on variable indices accepted by the parser.
struct ParseOptions {
  std::optional<std::size_t> x_dim;
  std::optional<std::size_t> p_dim;
  std::size_t line_offset = 0;    // added to reported line numbers
  std::size_t column_offset = 0;  // added to reported columns on the first line
};

/// Immutable expression AST; evaluation is pure and thread-safe.
class Expr {
 public:
  Expr() = default;
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  const NodePtr& root() const { return root_; }

  Vec eval(const Env& env) const;
  double eval_scalar(const Env& env) const;

  /// Fully parenthesized rendering that reparses to a structurally identical AST.
  std::string to_string() const;

  /// Highest x / p index referenced (0 if none); bare x / p report `uses_*_vector`.
  std::size_t max_x_index() const;
  std::size_t max_p_index() const;
  bool uses_x_vector() const;
  bool uses_p_vector() const;

 private:
  NodePtr root_;
};

Expr parse_expr(std::string_view text, const ParseOptions& opts = {});

/// Structural equality of two ASTs (positions ignored).
bool same_structure(const Node& a, const Node& b);

struct SetNode;
using SetNodePtr = std::shared_ptr<const SetNode>;

/// Set-valued rule in the set grammar, numeric arguments being expressions in x and p:
///   empty(n) | whole(n) | point(e) | points(e, ...) | interval(lo, hi) | ball(c, r, norm)
///   | box(lo, hi) | polyhedron(halfspace(a, b), ...) | cone(apex, g, ...) | hull(e, ...)
///   | union(S, ...) | translate(S, shift) | inflate(S, r, norm) | piecewise(cond, S, S)
class SetExpr {
 public:
  SetExpr() = default;
  explicit SetExpr(SetNodePtr root) : root_(std::move(root)) {}

  SetDescriptor eval(const Env& env) const;
  std::string to_string() const;
  std::size_t max_x_index() const;
  std::size_t max_p_index() const;

 private:
  SetNodePtr root_;
};

SetExpr parse_set_expr(std::string_view text, const ParseOptions& opts = {});

/// Parse a constant descriptor, e.g. "union(point(0), interval(1, inf))".
SetDescriptor parse_set(std::string_view text);

}  // namespace subreg
