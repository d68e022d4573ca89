#include "subreg/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "subreg/error.hpp"

namespace subreg {

namespace {

// ---------------------------------------------------------------- lexer

enum class Tok {
  Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, LBrack, RBrack, Comma,
  Lt, Le, Gt, Ge, EqEq, Ne, End,
};

struct Token {
  Tok type = Tok::End;
  double num = 0.0;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

std::string describe(const Token& t) {
  if (t.type == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

std::vector<Token> tokenize(std::string_view src, const ParseOptions& opts) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1;
  std::size_t i = 0;
  auto report_line = [&] { return line + opts.line_offset; };
  auto report_col = [&](std::size_t c) { return line == 1 ? c + opts.column_offset : c; };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      ++col;
      continue;
    }
    Token t;
    t.line = report_line();
    t.column = report_col(col);
    const std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      while (i < src.size() && (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '.')) ++i;
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          i = j;
          while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
        }
      }
      t.type = Tok::Num;
      t.text = std::string(src.substr(start, i - start));
      try {
        std::size_t used = 0;
        t.num = std::stod(t.text, &used);
        if (used != t.text.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError("malformed number '" + t.text + "'", t.line, t.column);
      }
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      t.type = Tok::Ident;
      t.text = std::string(src.substr(start, i - start));
    } else {
      auto two = [&](char next) { return i + 1 < src.size() && src[i + 1] == next; };
      switch (c) {
        case '+': t.type = Tok::Plus; break;
        case '-': t.type = Tok::Minus; break;
        case '*': t.type = Tok::Star; break;
        case '/': t.type = Tok::Slash; break;
        case '^': t.type = Tok::Caret; break;
        case '(': t.type = Tok::LParen; break;
        case ')': t.type = Tok::RParen; break;
        case '[': t.type = Tok::LBrack; break;
        case ']': t.type = Tok::RBrack; break;
        case ',': t.type = Tok::Comma; break;
        case '<':
          t.type = two('=') ? Tok::Le : Tok::Lt;
          break;
        case '>':
          t.type = two('=') ? Tok::Ge : Tok::Gt;
          break;
        case '=':
          if (!two('=')) throw ParseError("unexpected character '=' (use '==' to compare)", t.line, t.column);
          t.type = Tok::EqEq;
          break;
        case '!':
          if (!two('=')) throw ParseError("unexpected character '!'", t.line, t.column);
          t.type = Tok::Ne;
          break;
        default:
          throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.column);
      }
      i += (t.type == Tok::Le || t.type == Tok::Ge || t.type == Tok::EqEq || t.type == Tok::Ne) ? 2 : 1;
      t.text = std::string(src.substr(start, i - start));
    }
    col += i - start;
    out.push_back(std::move(t));
  }
  Token end;
  end.type = Tok::End;
  end.line = report_line();
  end.column = report_col(col);
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------- function table

struct FnInfo {
  std::string_view name;
  std::size_t min_args;
  std::size_t max_args;  // 0 = unbounded
};

constexpr FnInfo kFunctions[] = {
    {"abs", 1, 1},   {"sin", 1, 1},   {"cos", 1, 1},      {"exp", 1, 1},
    {"sqrt", 1, 1},  {"min", 1, 0},   {"max", 1, 0},      {"norm1", 1, 0},
    {"norm2", 1, 0}, {"norminf", 1, 0}, {"piecewise", 3, 3},
};

const FnInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (f.name == name) return &f;
  return nullptr;
}

bool is_keyword(std::string_view s) { return s == "and" || s == "or" || s == "not"; }

// Parses "x12" style variable names; returns 0 when not a variable.
std::size_t variable_index(std::string_view s, char group) {
  if (s.size() < 2 || s[0] != group) return 0;
  std::size_t v = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return 0;
    v = v * 10 + static_cast<std::size_t>(s[i] - '0');
    if (v > 100000) return 0;
  }
  return v;
}

// ---------------------------------------------------------------- parser

struct SetNodeImpl;

class Parser {
 public:
  Parser(std::vector<Token> toks, ParseOptions opts) : toks_(std::move(toks)), opts_(opts) {}

  NodePtr parse_full_expression() {
    NodePtr n = parse_arith();
    expect_end();
    return n;
  }

  void expect_end() {
    if (peek().type != Tok::End) fail("unexpected " + describe(peek()) + ", expected operator or end of input", peek());
  }

  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool accept(Tok t) {
    if (peek().type == t) {
      ++pos_;
      return true;
    }
    return false;
  }
  const Token& expect(Tok t, const std::string& what) {
    if (peek().type != t) fail("expected " + what + ", found " + describe(peek()), peek());
    return next();
  }
  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    throw ParseError(msg, at.line, at.column);
  }

  NodePtr parse_arith() {
    NodePtr lhs = parse_term();
    while (peek().type == Tok::Plus || peek().type == Tok::Minus) {
      const Token& op = next();
      NodePtr rhs = parse_term();
      lhs = make(op.type == Tok::Plus ? NodeKind::Add : NodeKind::Sub, op, {lhs, rhs});
    }
    return lhs;
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    while (peek().type == Tok::Star || peek().type == Tok::Slash) {
      const Token& op = next();
      NodePtr rhs = parse_unary();
      lhs = make(op.type == Tok::Star ? NodeKind::Mul : NodeKind::Div, op, {lhs, rhs});
    }
    return lhs;
  }

  NodePtr parse_unary() {
    if (peek().type == Tok::Minus) {
      const Token& op = next();
      return make(NodeKind::Neg, op, {parse_unary()});
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (peek().type == Tok::Caret) {
      const Token& op = next();
      NodePtr exponent = parse_unary();
      return make(NodeKind::Pow, op, {base, exponent});
    }
    return base;
  }

  NodePtr parse_primary() {
    const Token& t = peek();
    switch (t.type) {
      case Tok::Num: {
        next();
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Const;
        n->value = t.num;
        place(*n, t);
        return n;
      }
      case Tok::LParen: {
        next();
        NodePtr inner = parse_arith();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::LBrack: {
        const Token& open = next();
        std::vector<NodePtr> items{parse_arith()};
        while (accept(Tok::Comma)) items.push_back(parse_arith());
        expect(Tok::RBrack, "']'");
        return make(NodeKind::VecLit, open, std::move(items));
      }
      case Tok::Ident:
        return parse_identifier();
      default:
        fail("expected expression, found " + describe(t), t);
    }
  }

  NodePtr parse_identifier() {
    const Token& t = next();
    const std::string& name = t.text;
    if (peek().type == Tok::LParen) {
      const FnInfo* fn = find_function(name);
      if (!fn) fail("unknown function '" + name + "'", t);
      next();
      std::vector<NodePtr> args;
      if (name == "piecewise") {
        args.push_back(parse_condition());
        expect(Tok::Comma, "','");
        args.push_back(parse_arith());
        expect(Tok::Comma, "','");
        args.push_back(parse_arith());
      } else {
        if (peek().type == Tok::RParen) fail("expected expression, found " + describe(peek()), peek());
        args.push_back(parse_arith());
        while (accept(Tok::Comma)) args.push_back(parse_arith());
      }
      expect(Tok::RParen, "')'");
      if (args.size() < fn->min_args || (fn->max_args && args.size() > fn->max_args)) {
        const std::string want = fn->max_args == fn->min_args ? std::to_string(fn->min_args)
                                                              : "at least " + std::to_string(fn->min_args);
        fail("arity mismatch: " + name + " expects " + want + " argument(s), got " + std::to_string(args.size()), t);
      }
      auto n = std::make_shared<Node>();
      n->kind = name == "piecewise" ? NodeKind::Piecewise : NodeKind::Call;
      n->name = name;
      n->args = std::move(args);
      place(*n, t);
      return n;
    }
    auto n = std::make_shared<Node>();
    place(*n, t);
    if (name == "pi") {
      n->kind = NodeKind::Const;
      n->value = std::numbers::pi;
      return n;
    }
    if (name == "inf") {
      n->kind = NodeKind::Const;
      n->value = kInf;
      return n;
    }
    if (name == "x" || name == "p") {
      n->kind = NodeKind::VarVec;
      n->group = name[0];
      return n;
    }
    for (char g : {'x', 'p'}) {
      const std::size_t idx = variable_index(name, g);
      if (idx == 0) continue;
      const auto& limit = g == 'x' ? opts_.x_dim : opts_.p_dim;
      if (limit && idx > *limit)
        fail("unknown identifier '" + name + "' (only " + std::to_string(*limit) + " " + g + "-variable(s) declared)", t);
      n->kind = NodeKind::Var;
      n->group = g;
      n->index = idx;
      return n;
    }
    if (find_function(name)) fail("function '" + name + "' requires an argument list", t);
    if (is_keyword(name)) fail("expected expression, found " + describe(t), t);
    fail("unknown identifier '" + name + "'", t);
  }

  // condition := and_cond ('or' and_cond)*
  NodePtr parse_condition() {
    NodePtr lhs = parse_and();
    while (peek().type == Tok::Ident && peek().text == "or") {
      const Token& op = next();
      lhs = make(NodeKind::Or, op, {lhs, parse_and()});
    }
    return lhs;
  }

  NodePtr parse_and() {
    NodePtr lhs = parse_not();
    while (peek().type == Tok::Ident && peek().text == "and") {
      const Token& op = next();
      lhs = make(NodeKind::And, op, {lhs, parse_not()});
    }
    return lhs;
  }

  NodePtr parse_not() {
    if (peek().type == Tok::Ident && peek().text == "not") {
      const Token& op = next();
      return make(NodeKind::Not, op, {parse_not()});
    }
    return parse_cond_atom();
  }

  NodePtr parse_cond_atom() {
    if (peek().type == Tok::LParen) {
      // Either a parenthesized condition or an arithmetic operand of a comparison.
      const std::size_t save = pos_;
      try {
        next();
        NodePtr inner = parse_condition();
        expect(Tok::RParen, "')'");
        if (!is_comparison(peek().type)) return inner;
      } catch (const ParseError&) {
      }
      pos_ = save;
    }
    NodePtr lhs = parse_arith();
    const Token& op = peek();
    if (!is_comparison(op.type)) fail("expected comparison operator, found " + describe(op), op);
    next();
    NodePtr rhs = parse_arith();
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Compare;
    n->cmp = to_cmp(op.type);
    n->args = {lhs, rhs};
    place(*n, op);
    return n;
  }

  static bool is_comparison(Tok t) {
    return t == Tok::Lt || t == Tok::Le || t == Tok::Gt || t == Tok::Ge || t == Tok::EqEq || t == Tok::Ne;
  }

  static CompareOp to_cmp(Tok t) {
    switch (t) {
      case Tok::Lt: return CompareOp::Lt;
      case Tok::Le: return CompareOp::Le;
      case Tok::Gt: return CompareOp::Gt;
      case Tok::Ge: return CompareOp::Ge;
      case Tok::EqEq: return CompareOp::Eq;
      default: return CompareOp::Ne;
    }
  }

  static void place(Node& n, const Token& t) {
    n.line = t.line;
    n.column = t.column;
  }

  static NodePtr make(NodeKind k, const Token& at, std::vector<NodePtr> args) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->args = std::move(args);
    place(*n, at);
    return n;
  }

  std::size_t position() const { return pos_; }
  void reset(std::size_t p) { pos_ = p; }
  const ParseOptions& options() const { return opts_; }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ParseOptions opts_;
};

// ---------------------------------------------------------------- printing

std::string fmt_num(double v) {
  if (v == kInf) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

const char* cmp_str(CompareOp c) {
  switch (c) {
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
  }
  return "<";
}

std::string print(const Node& n) {
  auto bin = [&](const char* op) { return "(" + print(*n.args[0]) + " " + op + " " + print(*n.args[1]) + ")"; };
  switch (n.kind) {
    case NodeKind::Const: return fmt_num(n.value);
    case NodeKind::Var: return std::string(1, n.group) + std::to_string(n.index);
    case NodeKind::VarVec: return std::string(1, n.group);
    case NodeKind::Neg: return "(-" + print(*n.args[0]) + ")";
    case NodeKind::Add: return bin("+");
    case NodeKind::Sub: return bin("-");
    case NodeKind::Mul: return bin("*");
    case NodeKind::Div: return bin("/");
    case NodeKind::Pow: return bin("^");
    case NodeKind::Compare: return bin(cmp_str(n.cmp));
    case NodeKind::And: return bin("and");
    case NodeKind::Or: return bin("or");
    case NodeKind::Not: return "(not " + print(*n.args[0]) + ")";
    case NodeKind::VecLit:
    case NodeKind::Call:
    case NodeKind::Piecewise: {
      std::string s = n.kind == NodeKind::VecLit ? "[" : n.name + "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) s += (i ? ", " : "") + print(*n.args[i]);
      return s + (n.kind == NodeKind::VecLit ? "]" : ")");
    }
  }
  return "";
}

// ---------------------------------------------------------------- evaluation

struct Value {
  bool is_vec = false;
  double s = 0.0;
  Vec v;

  std::size_t size() const { return is_vec ? v.size() : 1; }
  double at(std::size_t i) const { return is_vec ? v[i] : s; }
  static Value scalar(double x) { return Value{false, x, {}}; }
  static Value vector(Vec x) { return Value{true, 0.0, std::move(x)}; }
};

[[noreturn]] void domain_error(const std::string& what, const Node& n) {
  throw EvalError(what + " in " + print(n) + " (line " + std::to_string(n.line) + ", column " +
                  std::to_string(n.column) + ")");
}

Value eval_node(const Node& n, const Env& env);
bool eval_cond(const Node& n, const Env& env);

template <class F>
Value elementwise(const Node& n, const Value& a, const Value& b, F f) {
  if (!a.is_vec && !b.is_vec) return Value::scalar(f(a.s, b.s));
  if (a.is_vec && b.is_vec && a.v.size() != b.v.size())
    domain_error("vector length mismatch (" + std::to_string(a.v.size()) + " vs " + std::to_string(b.v.size()) + ")", n);
  const std::size_t len = std::max(a.size(), b.size());
  Vec r(len);
  for (std::size_t i = 0; i < len; ++i) r[i] = f(a.at(i), b.at(i));
  return Value::vector(std::move(r));
}

template <class F>
Value unary_map(const Value& a, F f) {
  if (!a.is_vec) return Value::scalar(f(a.s));
  Vec r(a.v.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = f(a.v[i]);
  return Value::vector(std::move(r));
}

Vec flatten_args(const Node& n, const Env& env) {
  Vec all;
  for (const auto& a : n.args) {
    Value v = eval_node(*a, env);
    for (std::size_t i = 0; i < v.size(); ++i) all.push_back(v.at(i));
  }
  return all;
}

Value eval_call(const Node& n, const Env& env) {
  const std::string& f = n.name;
  if (f == "norm1" || f == "norm2" || f == "norminf") {
    const Vec all = flatten_args(n, env);
    double r = 0.0;
    if (f == "norm1") for (double v : all) r += std::abs(v);
    else if (f == "norminf") for (double v : all) r = std::max(r, std::abs(v));
    else {
      for (double v : all) r += v * v;
      r = std::sqrt(r);
    }
    return Value::scalar(r);
  }
  if (f == "min" || f == "max") {
    const bool is_min = f == "min";
    auto pick = [is_min](double a, double b) { return is_min ? std::min(a, b) : std::max(a, b); };
    if (n.args.size() == 1) {
      Value v = eval_node(*n.args[0], env);
      double r = v.at(0);
      for (std::size_t i = 1; i < v.size(); ++i) r = pick(r, v.at(i));
      return Value::scalar(r);
    }
    Value acc = eval_node(*n.args[0], env);
    for (std::size_t i = 1; i < n.args.size(); ++i) acc = elementwise(n, acc, eval_node(*n.args[i], env), pick);
    return acc;
  }
  Value a = eval_node(*n.args[0], env);
  if (f == "abs") return unary_map(a, [](double v) { return std::abs(v); });
  if (f == "sin") return unary_map(a, [](double v) { return std::sin(v); });
  if (f == "cos") return unary_map(a, [](double v) { return std::cos(v); });
  if (f == "exp") return unary_map(a, [](double v) { return std::exp(v); });
  if (f == "sqrt") {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a.at(i) < 0.0) domain_error("sqrt of negative value " + fmt_num(a.at(i)), n);
    return unary_map(a, [](double v) { return std::sqrt(v); });
  }
  domain_error("unknown function", n);
}

Value eval_node(const Node& n, const Env& env) {
  switch (n.kind) {
    case NodeKind::Const: return Value::scalar(n.value);
    case NodeKind::Var: {
      const auto& src = n.group == 'x' ? env.x : env.p;
      if (n.index > src.size())
        throw EvalError(std::string("unbound variable ") + n.group + std::to_string(n.index) + " (line " +
                        std::to_string(n.line) + ", column " + std::to_string(n.column) + ")");
      return Value::scalar(src[n.index - 1]);
    }
    case NodeKind::VarVec: {
      const auto& src = n.group == 'x' ? env.x : env.p;
      if (src.empty()) throw EvalError(std::string("unbound variable ") + n.group);
      if (src.size() == 1) return Value::scalar(src[0]);
      return Value::vector(Vec(src.begin(), src.end()));
    }
    case NodeKind::Neg: return unary_map(eval_node(*n.args[0], env), [](double v) { return -v; });
    case NodeKind::Add:
      return elementwise(n, eval_node(*n.args[0], env), eval_node(*n.args[1], env), std::plus<>());
    case NodeKind::Sub:
      return elementwise(n, eval_node(*n.args[0], env), eval_node(*n.args[1], env), std::minus<>());
    case NodeKind::Mul:
      return elementwise(n, eval_node(*n.args[0], env), eval_node(*n.args[1], env), std::multiplies<>());
    case NodeKind::Div: {
      Value b = eval_node(*n.args[1], env);
      for (std::size_t i = 0; i < b.size(); ++i)
        if (b.at(i) == 0.0) domain_error("division by zero", n);
      return elementwise(n, eval_node(*n.args[0], env), b, std::divides<>());
    }
    case NodeKind::Pow: {
      Value a = eval_node(*n.args[0], env);
      Value b = eval_node(*n.args[1], env);
      return elementwise(n, a, b, [&](double x, double y) {
        if (x < 0.0 && std::floor(y) != y) domain_error("negative base with non-integer exponent", n);
        if (x == 0.0 && y < 0.0) domain_error("division by zero", n);
        return std::pow(x, y);
      });
    }
    case NodeKind::Call: return eval_call(n, env);
    case NodeKind::VecLit: {
      Vec r;
      for (const auto& a : n.args) {
        Value v = eval_node(*a, env);
        for (std::size_t i = 0; i < v.size(); ++i) r.push_back(v.at(i));
      }
      return Value::vector(std::move(r));
    }
    case NodeKind::Piecewise:
      return eval_cond(*n.args[0], env) ? eval_node(*n.args[1], env) : eval_node(*n.args[2], env);
    default: domain_error("condition used as a value", n);
  }
}

bool eval_cond(const Node& n, const Env& env) {
  switch (n.kind) {
    case NodeKind::And: return eval_cond(*n.args[0], env) && eval_cond(*n.args[1], env);
    case NodeKind::Or: return eval_cond(*n.args[0], env) || eval_cond(*n.args[1], env);
    case NodeKind::Not: return !eval_cond(*n.args[0], env);
    case NodeKind::Compare: {
      Value a = eval_node(*n.args[0], env);
      Value b = eval_node(*n.args[1], env);
      if (a.is_vec || b.is_vec) domain_error("comparison of vector values", n);
      switch (n.cmp) {
        case CompareOp::Lt: return a.s < b.s;
        case CompareOp::Le: return a.s <= b.s;
        case CompareOp::Gt: return a.s > b.s;
        case CompareOp::Ge: return a.s >= b.s;
        case CompareOp::Eq: return a.s == b.s;
        case CompareOp::Ne: return a.s != b.s;
      }
      return false;
    }
    default: domain_error("value used as a condition", n);
  }
}

void visit_nodes(const Node& n, const std::function<void(const Node&)>& f) {
  f(n);
  for (const auto& a : n.args) visit_nodes(*a, f);
}

std::size_t max_index(const Node& root, char group) {
  std::size_t m = 0;
  visit_nodes(root, [&](const Node& n) {
    if (n.kind == NodeKind::Var && n.group == group) m = std::max(m, n.index);
  });
  return m;
}

bool uses_vector(const Node& root, char group) {
  bool used = false;
  visit_nodes(root, [&](const Node& n) {
    if (n.kind == NodeKind::VarVec && n.group == group) used = true;
  });
  return used;
}

}  // namespace

// ---------------------------------------------------------------- Expr

Vec Expr::eval(const Env& env) const {
  if (!root_) throw EvalError("empty expression");
  Value v = eval_node(*root_, env);
  if (v.is_vec) return std::move(v.v);
  return Vec{v.s};
}

double Expr::eval_scalar(const Env& env) const {
  const Vec v = eval(env);
  if (v.size() != 1) throw EvalError("expected a scalar value, got a vector of length " + std::to_string(v.size()));
  return v[0];
}

std::string Expr::to_string() const { return root_ ? print(*root_) : ""; }
std::size_t Expr::max_x_index() const { return root_ ? max_index(*root_, 'x') : 0; }
std::size_t Expr::max_p_index() const { return root_ ? max_index(*root_, 'p') : 0; }
bool Expr::uses_x_vector() const { return root_ && uses_vector(*root_, 'x'); }
bool Expr::uses_p_vector() const { return root_ && uses_vector(*root_, 'p'); }

Expr parse_expr(std::string_view text, const ParseOptions& opts) {
  Parser parser(tokenize(text, opts), opts);
  return Expr(parser.parse_full_expression());
}

bool same_structure(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case NodeKind::Const:
      if (!(a.value == b.value)) return false;
      break;
    case NodeKind::Var:
      if (a.group != b.group || a.index != b.index) return false;
      break;
    case NodeKind::VarVec:
      if (a.group != b.group) return false;
      break;
    case NodeKind::Call:
    case NodeKind::Piecewise:
      if (a.name != b.name) return false;
      break;
    case NodeKind::Compare:
      if (a.cmp != b.cmp) return false;
      break;
    default: break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!same_structure(*a.args[i], *b.args[i])) return false;
  return true;
}

// ---------------------------------------------------------------- set expressions

struct SetNode {
  std::string ctor;
  std::vector<NodePtr> exprs;
  std::vector<SetNodePtr> sets;
  NodePtr cond;
  Norm norm;
  std::size_t line = 1;
  std::size_t column = 1;
};

namespace {

class SetParser {
 public:
  explicit SetParser(Parser& p) : p_(p) {}

  SetNodePtr parse_set() {
    const Token& t = p_.peek();
    if (t.type != Tok::Ident) p_.fail("expected set constructor, found " + describe(t), t);
    p_.next();
    auto n = std::make_shared<SetNode>();
    n->ctor = t.text;
    n->line = t.line;
    n->column = t.column;
    p_.expect(Tok::LParen, "'(' after " + t.text);
    const std::string& c = t.text;
    auto comma = [&] { p_.expect(Tok::Comma, "','"); };
    auto expr_list = [&](std::size_t min_count) {
      n->exprs.push_back(p_.parse_arith());
      while (p_.accept(Tok::Comma)) n->exprs.push_back(p_.parse_arith());
      if (n->exprs.size() < min_count) p_.fail(c + " expects at least " + std::to_string(min_count) + " argument(s)", t);
    };
    if (c == "empty" || c == "whole") {
      n->exprs.push_back(p_.parse_arith());
    } else if (c == "point" || c == "points" || c == "hull" || c == "cone") {
      expr_list(1);
    } else if (c == "interval" || c == "box" || c == "halfspace") {
      n->exprs.push_back(p_.parse_arith());
      comma();
      n->exprs.push_back(p_.parse_arith());
    } else if (c == "ball") {
      n->exprs.push_back(p_.parse_arith());
      comma();
      n->exprs.push_back(p_.parse_arith());
      comma();
      n->norm = parse_norm();
    } else if (c == "polyhedron") {
      n->sets.push_back(parse_set());
      while (p_.accept(Tok::Comma)) n->sets.push_back(parse_set());
      for (const auto& s : n->sets)
        if (s->ctor != "halfspace") p_.fail("polyhedron() takes halfspace(a, b) arguments", t);
    } else if (c == "union") {
      n->sets.push_back(parse_set());
      while (p_.accept(Tok::Comma)) n->sets.push_back(parse_set());
    } else if (c == "translate") {
      n->sets.push_back(parse_set());
      comma();
      n->exprs.push_back(p_.parse_arith());
    } else if (c == "inflate") {
      n->sets.push_back(parse_set());
      comma();
      n->exprs.push_back(p_.parse_arith());
      comma();
      n->norm = parse_norm();
    } else if (c == "piecewise") {
      n->cond = p_.parse_condition();
      comma();
      n->sets.push_back(parse_set());
      comma();
      n->sets.push_back(parse_set());
    } else {
      p_.fail("unknown set constructor '" + c + "'", t);
    }
    p_.expect(Tok::RParen, "')'");
    return n;
  }

 private:
  Norm parse_norm() {
    const Token& t = p_.peek();
    if (t.type != Tok::Ident || (t.text != "l1" && t.text != "l2" && t.text != "linf"))
      p_.fail("expected norm (l1, l2 or linf), found " + describe(t), t);
    p_.next();
    return Norm::parse(t.text);
  }

  Parser& p_;
};

double scalar_arg(const NodePtr& e, const Env& env, const SetNode& n) {
  Value v = eval_node(*e, env);
  if (v.is_vec && v.v.size() != 1)
    throw EvalError(n.ctor + "(): expected a scalar argument, got a vector (line " + std::to_string(n.line) + ")");
  return v.at(0);
}

Vec vector_arg(const NodePtr& e, const Env& env) {
  Value v = eval_node(*e, env);
  if (v.is_vec) return v.v;
  return Vec{v.s};
}

std::size_t count_arg(const NodePtr& e, const Env& env, const SetNode& n) {
  const double d = scalar_arg(e, env, n);
  if (!(d >= 1.0) || std::floor(d) != d) throw EvalError(n.ctor + "(): dimension must be a positive integer");
  return static_cast<std::size_t>(d);
}

SetDescriptor eval_set(const SetNode& n, const Env& env) {
  const std::string& c = n.ctor;
  if (c == "empty") return SetDescriptor::empty(count_arg(n.exprs[0], env, n));
  if (c == "whole") return SetDescriptor::whole(count_arg(n.exprs[0], env, n));
  if (c == "point") {
    if (n.exprs.size() == 1) return SetDescriptor::point(vector_arg(n.exprs[0], env));
    Vec p;
    for (const auto& e : n.exprs) p.push_back(scalar_arg(e, env, n));
    return SetDescriptor::point(std::move(p));
  }
  if (c == "points" || c == "hull") {
    std::vector<Vec> pts;
    for (const auto& e : n.exprs) pts.push_back(vector_arg(e, env));
    return c == "points" ? SetDescriptor::points(std::move(pts)) : SetDescriptor::hull(std::move(pts));
  }
  if (c == "interval") return SetDescriptor::interval(scalar_arg(n.exprs[0], env, n), scalar_arg(n.exprs[1], env, n));
  if (c == "ball") return SetDescriptor::ball(vector_arg(n.exprs[0], env), scalar_arg(n.exprs[1], env, n), n.norm);
  if (c == "box") return SetDescriptor::box(vector_arg(n.exprs[0], env), vector_arg(n.exprs[1], env));
  if (c == "polyhedron") {
    std::vector<Vec> rows;
    Vec offsets;
    for (const auto& h : n.sets) {
      rows.push_back(vector_arg(h->exprs[0], env));
      offsets.push_back(scalar_arg(h->exprs[1], env, *h));
    }
    return SetDescriptor::half_spaces(Matrix::from_rows(rows), std::move(offsets));
  }
  if (c == "cone") {
    Vec apex = vector_arg(n.exprs[0], env);
    std::vector<Vec> gens;
    for (std::size_t i = 1; i < n.exprs.size(); ++i) gens.push_back(vector_arg(n.exprs[i], env));
    Matrix g = gens.empty() ? Matrix(0, apex.size()) : Matrix::from_rows(gens);
    return SetDescriptor::cone(std::move(apex), std::move(g));
  }
  if (c == "union") {
    std::vector<SetDescriptor> parts;
    for (const auto& s : n.sets) parts.push_back(eval_set(*s, env));
    return SetDescriptor::union_of(std::move(parts));
  }
  if (c == "translate") return SetDescriptor::translate(eval_set(*n.sets[0], env), vector_arg(n.exprs[0], env));
  if (c == "inflate")
    return SetDescriptor::inflate(eval_set(*n.sets[0], env), scalar_arg(n.exprs[0], env, n), n.norm);
  if (c == "piecewise") return eval_cond(*n.cond, env) ? eval_set(*n.sets[0], env) : eval_set(*n.sets[1], env);
  throw EvalError("cannot evaluate set constructor '" + c + "'");
}

std::string print_set(const SetNode& n) {
  std::string s = n.ctor + "(";
  bool first = true;
  auto sep = [&] {
    if (!first) s += ", ";
    first = false;
  };
  if (n.ctor == "piecewise") {
    sep();
    s += print(*n.cond);
  }
  if (n.ctor == "translate" || n.ctor == "inflate" || n.ctor == "piecewise" || n.ctor == "union" ||
      n.ctor == "polyhedron") {
    for (const auto& c : n.sets) {
      sep();
      s += print_set(*c);
    }
    for (const auto& e : n.exprs) {
      sep();
      s += print(*e);
    }
  } else {
    for (const auto& e : n.exprs) {
      sep();
      s += print(*e);
    }
  }
  if (n.ctor == "ball" || n.ctor == "inflate") {
    sep();
    s += n.norm.tag();
  }
  return s + ")";
}

void visit_set(const SetNode& n, const std::function<void(const Node&)>& f) {
  for (const auto& e : n.exprs) visit_nodes(*e, f);
  if (n.cond) visit_nodes(*n.cond, f);
  for (const auto& s : n.sets) visit_set(*s, f);
}

}  // namespace

SetDescriptor SetExpr::eval(const Env& env) const {
  if (!root_) throw EvalError("empty set expression");
  return eval_set(*root_, env);
}

std::string SetExpr::to_string() const { return root_ ? print_set(*root_) : ""; }

std::size_t SetExpr::max_x_index() const {
  std::size_t m = 0;
  if (root_) visit_set(*root_, [&](const Node& n) {
      if (n.kind == NodeKind::Var && n.group == 'x') m = std::max(m, n.index);
    });
  return m;
}

std::size_t SetExpr::max_p_index() const {
  std::size_t m = 0;
  if (root_) visit_set(*root_, [&](const Node& n) {
      if (n.kind == NodeKind::Var && n.group == 'p') m = std::max(m, n.index);
    });
  return m;
}

SetExpr parse_set_expr(std::string_view text, const ParseOptions& opts) {
  Parser parser(tokenize(text, opts), opts);
  SetParser sp(parser);
  SetNodePtr root = sp.parse_set();
  parser.expect_end();
  return SetExpr(std::move(root));
}

SetDescriptor parse_set(std::string_view text) {
  ParseOptions opts;
  opts.x_dim = 0;
  opts.p_dim = 0;
  return parse_set_expr(text, opts).eval(Env{});
}

}  // namespace subreg
