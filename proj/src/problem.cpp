#include "subreg/problem.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>

#include "subreg/catalog.hpp"
#include "subreg/error.hpp"

namespace subreg {

namespace {

struct RawSection {
  std::string kind;  // mapping | anchor | schedule | task
  std::string name;
  std::size_t line = 0;
  std::map<std::string, DocValue> keys;
};

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool is_key(std::string_view k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::vector<RawSection> split_sections(std::string_view doc) {
  std::vector<RawSection> out;
  std::size_t line_no = 0, pos = 0;
  while (pos <= doc.size()) {
    std::size_t end = doc.find('\n', pos);
    if (end == std::string_view::npos) end = doc.size();
    std::string_view raw = doc.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

    // strip a comment outside quotes
    bool quoted = false;
    std::size_t cut = raw.size();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"') quoted = !quoted;
      if (raw[i] == '#' && !quoted) {
        cut = i;
        break;
      }
    }
    const std::string_view line = raw.substr(0, cut);
    std::size_t first = 0;
    while (first < line.size() && std::isspace(static_cast<unsigned char>(line[first]))) ++first;
    if (first == line.size()) {
      if (end == doc.size()) break;
      continue;
    }

    if (line[first] == '[') {
      const std::string header = trim(line);
      if (header.back() != ']') throw ParseError("unterminated section header", line_no, first + 1);
      const std::string inner = trim(std::string_view(header).substr(1, header.size() - 2));
      const std::size_t sp = inner.find_first_of(" \t");
      RawSection sec;
      sec.kind = inner.substr(0, sp);
      sec.name = sp == std::string::npos ? "" : trim(std::string_view(inner).substr(sp));
      sec.line = line_no;
      if (sec.kind == "mapping" || sec.kind == "task") {
        if (sec.name.empty()) throw ParseError("[" + sec.kind + "] section needs a name", line_no, first + 1);
      } else if (sec.kind == "anchor" || sec.kind == "schedule") {
        if (!sec.name.empty()) throw ParseError("[" + sec.kind + "] takes no name", line_no, first + 1);
      } else {
        throw ParseError("unknown section '" + sec.kind + "'", line_no, first + 1);
      }
      out.push_back(std::move(sec));
    } else {
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no, first + 1);
      const std::string key = trim(line.substr(0, eq));
      if (!is_key(key)) throw ParseError("invalid key '" + key + "'", line_no, first + 1);
      if (out.empty()) throw ParseError("key '" + key + "' outside any section", line_no, first + 1);
      std::size_t vstart = eq + 1;
      while (vstart < line.size() && std::isspace(static_cast<unsigned char>(line[vstart]))) ++vstart;
      std::string value = trim(line.substr(vstart));
      std::size_t column = vstart + 1;
      if (!value.empty() && value.front() == '"') {
        if (value.size() < 2 || value.back() != '"') throw ParseError("unterminated string", line_no, vstart + 1);
        value = value.substr(1, value.size() - 2);
        ++column;
      }
      if (value.empty()) throw ParseError("empty value for key '" + key + "'", line_no, vstart + 1);
      auto& keys = out.back().keys;
      if (keys.count(key)) throw ParseError("duplicate key '" + key + "'", line_no, first + 1);
      keys[key] = DocValue{value, line_no, column};
    }
    if (end == doc.size()) break;
  }
  return out;
}

double parse_number(std::string_view text, std::size_t line = 0, std::size_t column = 0) {
  const std::string t = trim(text);
  if (t.empty()) throw ParseError("expected a number", line, column);
  char* endp = nullptr;
  const double v = std::strtod(t.c_str(), &endp);
  if (endp != t.c_str() + t.size()) throw ParseError("invalid number '" + t + "'", line, column);
  return v;
}

std::size_t parse_count(const DocValue& v) {
  const double d = parse_number(v.text, v.line, v.column);
  if (!(d >= 0.0) || d != std::floor(d) || d > 1e9) throw ParseError("expected a nonnegative integer", v.line, v.column);
  return static_cast<std::size_t>(d);
}

Vec parse_vector_at(const DocValue& v) {
  try {
    return parse_vector(v.text);
  } catch (const ParseError& e) {
    throw ParseError(e.message(), v.line, v.column);
  }
}

ParseOptions opts_at(const DocValue& v) {
  ParseOptions o;
  o.line_offset = v.line - 1;
  o.column_offset = v.column - 1;
  return o;
}

const std::set<std::string> kMappingKeys = {"kind",   "expr",       "matrix",     "norm_in", "norm_out",
                                            "dim_in", "dim_out",    "dim_p",      "set",     "generators",
                                            "hull",   "pieces",     "components", "quadratic", "cone",
                                            "use",    "mapping"};

/// Keys naming another mapping; checked for dangling references.
const std::vector<std::string> kReferenceKeys = {"mapping", "outer", "inner", "perturbation", "approx",
                                                 "fan",     "base",  "maxaffine"};

Norm norm_key(const RawSection& sec, const char* key) {
  auto it = sec.keys.find(key);
  if (it == sec.keys.end()) return Norm::l2();
  try {
    return Norm::parse(it->second.text);
  } catch (const Error&) {
    throw ParseError("unknown norm '" + it->second.text + "' (expected l1, l2 or linf)", it->second.line,
                     it->second.column);
  }
}

const DocValue& need(const RawSection& sec, const std::string& key) {
  auto it = sec.keys.find(key);
  if (it == sec.keys.end())
    throw ParseError("[" + sec.kind + " " + sec.name + "] is missing key '" + key + "'", sec.line, 1);
  return it->second;
}

std::optional<std::size_t> count_key(const RawSection& sec, const char* key) {
  auto it = sec.keys.find(key);
  if (it == sec.keys.end()) return std::nullopt;
  return parse_count(it->second);
}

std::vector<std::string> split_bars(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t bar = text.find('|', start);
    parts.push_back(trim(std::string_view(text).substr(start, bar == std::string::npos ? bar : bar - start)));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return parts;
}

MappingDecl build_mapping(const RawSection& sec, Anchor& anchor) {
  for (const auto& [k, v] : sec.keys)
    if (!kMappingKeys.count(k)) throw ParseError("unknown key '" + k + "' in [mapping " + sec.name + "]", v.line, 1);
  MappingDecl m;
  m.name = sec.name;
  m.line = sec.line;
  m.kind = need(sec, "kind").text;
  const Norm nin = norm_key(sec, "norm_in");
  const Norm nout = norm_key(sec, "norm_out");
  const auto dim_in = count_key(sec, "dim_in");
  const auto dim_out = count_key(sec, "dim_out");
  const auto dim_p = count_key(sec, "dim_p");
  const DocValue& kind_v = sec.keys.at("kind");

  auto sample_x = [&](std::size_t n) { return anchor.xbar.size() == n ? anchor.xbar : Vec(n, 0.0); };
  auto sample_p = [&](std::size_t k) { return anchor.pbar.size() == k ? anchor.pbar : Vec(k, 0.0); };

  try {
    if (m.kind == "expr" || m.kind == "ph") {
      const DocValue& ev = need(sec, "expr");
      ParseOptions po = opts_at(ev);
      po.x_dim = dim_in;
      po.p_dim = dim_p;
      Expr e = parse_expr(ev.text, po);
      std::size_t n = dim_in.value_or(std::max<std::size_t>(e.max_x_index(), 1));
      if (!dim_in && e.uses_x_vector() && !anchor.xbar.empty()) n = std::max(n, anchor.xbar.size());
      m.dim_p = dim_p.value_or(e.uses_p_vector() ? anchor.pbar.size() : e.max_p_index());
      const Vec x0 = sample_x(n), p0 = sample_p(m.dim_p);
      std::size_t out = 0;
      if (dim_out) {
        out = *dim_out;
      } else {
        try {
          out = e.eval(Env{x0, p0}).size();
        } catch (const EvalError&) {
          throw ParseError("cannot infer the output dimension of '" + sec.name + "'; declare dim_out", sec.line, 1);
        }
      }
      auto base = std::make_shared<ExprMap>(e, n, out, nin, nout, p0);
      m.expr = std::move(e);
      m.handle = m.kind == "ph" ? MappingPtr(std::make_shared<PHMap>(base)) : MappingPtr(base);
    } else if (m.kind == "linear") {
      const DocValue& mv = need(sec, "matrix");
      Matrix a;
      try {
        a = parse_matrix(mv.text);
      } catch (const ParseError& e) {
        throw ParseError(e.message(), mv.line, mv.column);
      }
      m.handle = std::make_shared<LinearMap>(a, nin, nout);
      m.fan = std::make_shared<FanMap>(std::vector<Matrix>{a}, FanHull::FiniteSet, nin, nout);
    } else if (m.kind == "fan") {
      const DocValue& gv = need(sec, "generators");
      std::vector<Matrix> gens;
      for (const auto& part : split_bars(gv.text)) {
        try {
          gens.push_back(parse_matrix(part));
        } catch (const ParseError& e) {
          throw ParseError(e.message(), gv.line, gv.column);
        }
      }
      FanHull hull = FanHull::FiniteSet;
      if (auto it = sec.keys.find("hull"); it != sec.keys.end()) {
        if (it->second.text == "convex") {
          hull = FanHull::ConvexHull;
        } else if (it->second.text != "finite") {
          throw ParseError("hull must be 'finite' or 'convex'", it->second.line, it->second.column);
        }
      }
      auto fan = std::make_shared<FanMap>(gens, hull, nin, nout);
      m.fan = fan;
      m.handle = fan;
    } else if (m.kind == "setvalued") {
      const DocValue& sv = need(sec, "set");
      ParseOptions po = opts_at(sv);
      po.x_dim = dim_in;
      po.p_dim = dim_p;
      SetExpr rule = parse_set_expr(sv.text, po);
      std::size_t n = dim_in.value_or(std::max<std::size_t>(rule.max_x_index(), 1));
      m.dim_p = dim_p.value_or(rule.max_p_index());
      const Vec x0 = sample_x(n), p0 = sample_p(m.dim_p);
      std::size_t out = 0;
      if (dim_out) {
        out = *dim_out;
      } else {
        try {
          out = rule.eval(Env{x0, p0}).dim();
        } catch (const EvalError&) {
          throw ParseError("cannot infer the output dimension of '" + sec.name + "'; declare dim_out", sec.line, 1);
        }
      }
      m.handle = std::make_shared<RuleMap>(rule, n, out, nin, nout, p0);
      m.rule = std::move(rule);
    } else if (m.kind == "maxaffine") {
      std::vector<std::string> parts;
      const DocValue* src = nullptr;
      if (auto it = sec.keys.find("pieces"); it != sec.keys.end()) {
        src = &it->second;
        parts = {it->second.text};
      } else {
        src = &need(sec, "components");
        parts = split_bars(src->text);
      }
      std::optional<Matrix> q;
      if (auto it = sec.keys.find("quadratic"); it != sec.keys.end()) {
        if (parts.size() != 1) throw ParseError("quadratic needs a single component", it->second.line, it->second.column);
        q = parse_matrix(it->second.text);
      }
      for (const auto& part : parts) {
        try {
          MaxAffineFn fn = MaxAffineFn::parse(part);
          m.components.push_back(q ? MaxAffineFn(fn.slopes(), fn.offsets(), q) : std::move(fn));
        } catch (const ParseError&) {
          throw;
        } catch (const Error& e) {
          throw ParseError(e.what(), src->line, src->column);
        }
      }
      const std::size_t n = m.components.front().dim();
      for (const auto& c : m.components)
        if (c.dim() != n) throw ParseError("components have different dimensions", src->line, src->column);
      if (auto it = sec.keys.find("cone"); it != sec.keys.end()) {
        m.cone = OrderCone::parse(it->second.text, m.components.size());
      }
      m.handle = max_affine_vector(m.components, nin, nout);
    } else if (m.kind == "catalog") {
      const DocValue& uv = need(sec, "use");
      const CatalogEntry* entry = find_example(uv.text);
      if (!entry) throw ParseError("unknown catalog example '" + uv.text + "'", uv.line, uv.column);
      const ProblemSpec inner = parse_problem(entry->document);
      const MappingDecl* src = &inner.mappings.front();
      if (auto it = sec.keys.find("mapping"); it != sec.keys.end()) {
        if (!inner.has_mapping(it->second.text))
          throw ParseError("unknown mapping " + it->second.text + " in " + uv.text, it->second.line, it->second.column);
        src = &inner.mapping(it->second.text);
      }
      m = *src;
      m.name = sec.name;
      m.line = sec.line;
      m.source = uv.text;
      if (!anchor.declared) anchor = inner.anchor;
    } else {
      throw ParseError("unknown mapping kind '" + m.kind + "'", kind_v.line, kind_v.column);
    }
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), sec.line, 1);
  }
  return m;
}

void check_dim(const Vec& v, std::size_t want, const std::string& what, const std::string& mapping,
               const TaskDecl& t) {
  if (v.size() != want)
    throw ParseError("dimension mismatch: " + what + " has " + std::to_string(v.size()) + " entries, mapping " +
                         mapping + " expects " + std::to_string(want),
                     t.line, 1);
}

}  // namespace

const DocValue& TaskDecl::arg(const std::string& key) const {
  auto it = args.find(key);
  if (it == args.end()) throw ParseError("[task " + id + "] is missing key '" + key + "'", line, 1);
  return it->second;
}

std::string TaskDecl::text(const std::string& key, const std::string& fallback) const {
  auto it = args.find(key);
  return it == args.end() ? fallback : it->second.text;
}

double TaskDecl::number(const std::string& key, double fallback) const {
  auto it = args.find(key);
  return it == args.end() ? fallback : parse_number(it->second.text, it->second.line, it->second.column);
}

Vec TaskDecl::vector(const std::string& key) const { return parse_vector_at(arg(key)); }

const MappingDecl& ProblemSpec::mapping(const std::string& name) const {
  for (const auto& m : mappings)
    if (m.name == name) return m;
  throw Error("unknown mapping " + name);
}

bool ProblemSpec::has_mapping(const std::string& name) const {
  return std::any_of(mappings.begin(), mappings.end(), [&](const MappingDecl& m) { return m.name == name; });
}

Vec parse_vector(std::string_view text) {
  Vec v;
  std::size_t start = 0;
  const std::string t = trim(text);
  if (t.empty()) throw ParseError("expected a comma-separated list of numbers", 1, 1);
  while (true) {
    const std::size_t comma = t.find(',', start);
    v.push_back(parse_number(std::string_view(t).substr(start, comma == std::string::npos ? comma : comma - start), 1,
                             start + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return v;
}

Matrix parse_matrix(std::string_view text) {
  std::vector<Vec> rows;
  const std::string t = trim(text);
  std::size_t start = 0;
  while (true) {
    const std::size_t semi = t.find(';', start);
    rows.push_back(parse_vector(std::string_view(t).substr(start, semi == std::string::npos ? semi : semi - start)));
    if (rows.back().size() != rows.front().size()) throw ParseError("matrix rows have different lengths", 1, start + 1);
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  for (const auto& r : rows)
    for (double x : r)
      if (!std::isfinite(x)) throw ParseError("matrix entries must be finite", 1, 1);
  return Matrix::from_rows(rows);
}

BaseFn base_function(const MappingDecl& m) {
  if (m.expr) {
    const Expr e = *m.expr;
    const std::size_t k = m.dim_p;
    return [e, k](std::span<const double> p, std::span<const double> x) {
      return e.eval(Env{x, p.subspan(0, std::min(k, p.size()))});
    };
  }
  const MappingPtr h = m.handle;
  return [h](std::span<const double>, std::span<const double> x) { return h->value(x); };
}

const std::vector<std::string>& known_operations() {
  static const std::vector<std::string> ops = {
      "certify-sms",       "isolated-calmness",    "sharp-min",
      "descent-rate",      "displacement-rate",    "calmness-modulus",
      "oracle-grid",       "alpha-linear",         "beta-linear",
      "alpha0-ph",         "alpha-fan",            "composition",
      "perturbation",      "eps-approx",           "eps-defect",
      "prederivative",     "prederivative-defect", "smooth-kernel",
      "subdifferential",   "sharp-min-convex",     "intrad",
      "convex-scalarization", "frechet-scalarization", "residual",
      "trace-solutions",   "geneq-defect",         "geneq-isolated-calmness",
      "geneq-single-valued-field", "geneq-convex-scalarization"};
  return ops;
}

ProblemSpec parse_problem(std::string_view doc) {
  const std::vector<RawSection> sections = split_sections(doc);
  ProblemSpec spec;

  for (const auto& sec : sections) {
    if (sec.kind != "anchor") continue;
    if (spec.anchor.declared) throw ParseError("duplicate [anchor] section", sec.line, 1);
    spec.anchor.declared = true;
    for (const auto& [k, v] : sec.keys) {
      if (k == "xbar") {
        spec.anchor.xbar = parse_vector_at(v);
      } else if (k == "ybar") {
        spec.anchor.ybar = parse_vector_at(v);
      } else if (k == "pbar") {
        spec.anchor.pbar = parse_vector_at(v);
      } else {
        throw ParseError("unknown key '" + k + "' in [anchor]", v.line, 1);
      }
    }
  }

  bool have_schedule = false;
  for (const auto& sec : sections) {
    if (sec.kind != "schedule") continue;
    if (have_schedule) throw ParseError("duplicate [schedule] section", sec.line, 1);
    have_schedule = true;
    for (const auto& [k, v] : sec.keys) {
      if (k == "r0") {
        spec.schedule.r0 = parse_number(v.text, v.line, v.column);
      } else if (k == "decay") {
        spec.schedule.decay = parse_number(v.text, v.line, v.column);
      } else if (k == "shells") {
        spec.schedule.shells = parse_count(v);
      } else if (k == "points") {
        spec.schedule.points = parse_count(v);
      } else if (k == "seed") {
        const std::string t = trim(v.text);
        char* endp = nullptr;
        spec.schedule.seed = std::strtoull(t.c_str(), &endp, 10);
        if (t.empty() || endp != t.c_str() + t.size()) throw ParseError("invalid seed", v.line, v.column);
      } else {
        throw ParseError("unknown key '" + k + "' in [schedule]", v.line, 1);
      }
    }
    try {
      spec.schedule.validate();
    } catch (const Error& e) {
      throw ParseError(e.what(), sec.line, 1);
    }
  }

  for (const auto& sec : sections) {
    if (sec.kind != "mapping") continue;
    if (spec.has_mapping(sec.name)) throw ParseError("duplicate mapping '" + sec.name + "'", sec.line, 1);
    spec.mappings.push_back(build_mapping(sec, spec.anchor));
  }

  const auto& ops = known_operations();
  for (const auto& sec : sections) {
    if (sec.kind != "task") continue;
    TaskDecl t;
    t.id = sec.name;
    t.line = sec.line;
    for (const auto& other : spec.tasks)
      if (other.id == t.id) throw ParseError("duplicate task '" + t.id + "'", sec.line, 1);
    t.args = sec.keys;
    const DocValue op = t.arg("op");
    t.op = op.text;
    if (std::find(ops.begin(), ops.end(), t.op) == ops.end())
      throw ParseError("unknown operation '" + t.op + "'", op.line, op.column);
    t.args.erase("op");
    if (auto it = t.args.find("expect"); it != t.args.end()) {
      if (it->second.text == "pass") {
        t.expect = Expectation::Pass;
      } else if (it->second.text == "fail") {
        t.expect = Expectation::Fail;
      } else {
        throw ParseError("expect must be 'pass' or 'fail'", it->second.line, it->second.column);
      }
      t.args.erase(it);
    }
    if (auto it = t.args.find("expect_value_min"); it != t.args.end()) {
      t.expect_value_min = parse_number(it->second.text, it->second.line, it->second.column);
      t.args.erase(it);
    }
    if (auto it = t.args.find("expect_value_max"); it != t.args.end()) {
      t.expect_value_max = parse_number(it->second.text, it->second.line, it->second.column);
      t.args.erase(it);
    }
    for (const auto& key : kReferenceKeys) {
      auto it = t.args.find(key);
      if (it == t.args.end()) continue;
      if (!spec.has_mapping(it->second.text))
        throw ParseError("unknown mapping " + it->second.text, it->second.line, it->second.column);
    }
    if (auto it = t.args.find("field"); it != t.args.end()) {
      const std::string& f = it->second.text;
      if (f != "zero" && f != "normal-cone" && !spec.has_mapping(f))
        throw ParseError("unknown mapping " + f, it->second.line, it->second.column);
    }

    // anchors and dimensions
    const Vec xbar = t.has("xbar") ? t.vector("xbar") : spec.anchor.xbar;
    if (t.has("mapping")) {
      const MappingDecl& m = spec.mapping(t.arg("mapping").text);
      const bool needs_x = t.op != "alpha-linear" && t.op != "beta-linear" && t.op != "alpha0-ph" &&
                           t.op != "alpha-fan";
      if (needs_x) {
        if (xbar.empty()) throw ParseError("missing section [anchor] (task '" + t.id + "' needs xbar)", t.line, 1);
        check_dim(xbar, m.handle->dim_in(), "xbar", m.name, t);
      }
      if (t.has("ybar")) check_dim(t.vector("ybar"), m.handle->dim_out(), "ybar", m.name, t);
    }
    if (t.has("inner") && t.has("outer")) {
      const MappingDecl& g = spec.mapping(t.arg("inner").text);
      const MappingDecl& f = spec.mapping(t.arg("outer").text);
      if (g.handle->dim_out() != f.handle->dim_in())
        throw ParseError("dimension mismatch: " + g.name + " maps into R^" + std::to_string(g.handle->dim_out()) +
                             " but " + f.name + " is defined on R^" + std::to_string(f.handle->dim_in()),
                         t.line, 1);
      const Vec z = t.has("zbar") ? t.vector("zbar") : xbar;
      if (z.empty()) throw ParseError("missing section [anchor] (task '" + t.id + "' needs zbar)", t.line, 1);
      check_dim(z, g.handle->dim_in(), "zbar", g.name, t);
    }
    if (t.has("base")) {
      const MappingDecl& b = spec.mapping(t.arg("base").text);
      if (!b.expr) throw ParseError("base mapping " + b.name + " must be of kind expr", t.line, 1);
      if (xbar.empty() && t.op != "residual" && t.op != "trace-solutions")
        throw ParseError("missing section [anchor] (task '" + t.id + "' needs xbar)", t.line, 1);
      if (!xbar.empty()) check_dim(xbar, b.handle->dim_in(), "xbar", b.name, t);
    }
    spec.tasks.push_back(std::move(t));
  }
  if (spec.tasks.empty()) throw ParseError("missing section [task]", sections.empty() ? 1 : sections.back().line, 1);
  return spec;
}

}  // namespace subreg
