#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "subreg/convexity.hpp"
#include "subreg/expr.hpp"
#include "subreg/geneq.hpp"

namespace subreg {

/// Raw `key = value` entry with its source position (value column).
struct DocValue {
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;
};

struct MappingDecl {
  std::string name;
  std::string kind;  // expr | linear | ph | fan | setvalued | catalog | maxaffine
  std::size_t line = 0;
  MappingPtr handle;
  std::optional<Expr> expr;   // expr / ph kinds; may reference p
  std::optional<SetExpr> rule;  // setvalued kind
  std::size_t dim_p = 0;
  std::shared_ptr<const FanMap> fan;  // fan kind (and linear, as a singleton fan)
  std::vector<MaxAffineFn> components;  // maxaffine kind
  std::optional<OrderCone> cone;
  std::string source;  // catalog id for kind = catalog
};

enum class Expectation { None, Pass, Fail };

struct TaskDecl {
  std::string id;
  std::string op;
  std::size_t line = 0;
  Expectation expect = Expectation::None;
  std::optional<double> expect_value_min;
  std::optional<double> expect_value_max;
  std::map<std::string, DocValue> args;

  bool has(const std::string& key) const { return args.count(key) != 0; }
  /// Raw text of a required key; ParseError at the task header when missing.
  const DocValue& arg(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  Vec vector(const std::string& key) const;
};

struct Anchor {
  Vec xbar, ybar, pbar;
  bool declared = false;
};

struct ProblemSpec {
  std::vector<MappingDecl> mappings;
  Anchor anchor;
  SamplingSchedule schedule;
  std::vector<TaskDecl> tasks;

  /// Throws Error("unknown mapping <name>").
  const MappingDecl& mapping(const std::string& name) const;
  bool has_mapping(const std::string& name) const;
};

/// Parses the sectioned document format; cross-references and dimensions are validated.
ProblemSpec parse_problem(std::string_view doc);

/// "1,2;3,4" -> 2x2 matrix.
Matrix parse_matrix(std::string_view text);
/// "0, 1.5, -inf" -> vector.
Vec parse_vector(std::string_view text);

/// Base function f(p, x) of an expr mapping; p-free expressions ignore p.
BaseFn base_function(const MappingDecl& m);

/// Operation names accepted in `[task]` sections.
const std::vector<std::string>& known_operations();

}  // namespace subreg
