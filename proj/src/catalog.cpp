#include "subreg/catalog.hpp"

#include <cmath>
#include <cstdio>

#include "subreg/expr.hpp"
#include "subreg/report.hpp"

namespace subreg {

namespace {

const json& task(const json& report, const std::string& id) {
  static const json missing = json::object();
  if (!report.contains("tasks")) return missing;
  for (const auto& t : report["tasks"])
    if (t.value("id", "") == id) return t;
  return missing;
}

double num(const json& j) {
  if (j.is_object() && j.contains("value")) return read_number(j["value"]);
  return read_number(j);
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string verdict(const json& t) { return t.contains("result") ? t["result"].value("verdict", "") : ""; }

CheckOutcome check(std::string name, bool ok, std::string detail) {
  return CheckOutcome{std::move(name), ok, std::move(detail)};
}

CheckOutcome near(const std::string& name, double got, double want, double rel) {
  return check(name, std::abs(got - want) <= rel * std::abs(want), fmt(got) + " vs " + fmt(want));
}

CheckOutcome holds(const json& t) {
  const std::string h = t.contains("result") ? t["result"].value("holds", "") : "";
  return check(t.value("id", "?") + " holds", h == "true",
               "measured " + (t.contains("result") ? fmt(num(t["result"]["measured"])) : "?") + ", bound " +
                   (t.contains("result") ? fmt(num(t["result"]["bound"])) : "?"));
}

std::vector<CatalogEntry> build() {
  std::vector<CatalogEntry> c;

  c.push_back({"ex-F1", "F1: [0,1/2] at 0, [1,inf) elsewhere; SMS at (0,0) with modulus 0",
               R"doc(# dist(0, F1(x)) = 1 for x != 0: the displacement rate blows up like 1/|x|
[mapping F1]
kind = setvalued
set = "piecewise(x1 == 0, interval(0, 0.5), interval(1, inf))"

[anchor]
xbar = 0
ybar = 0

[task sms]
op = certify-sms
mapping = F1
tau = 0.1
expect = pass

[task inverse]
op = isolated-calmness
mapping = F1
tau = 0.1
expect = pass
)doc",
               [](const json& r) {
                 const json& t = task(r, "sms");
                 std::vector<CheckOutcome> out;
                 out.push_back(check("F1 certified", verdict(t) == "certified-numerically", verdict(t)));
                 if (!t.contains("result")) return out;
                 const json& est = t["result"]["estimate"];
                 const double rK = read_number(est["radii"].back());
                 out.push_back(check("modulus <= 2 r_K", num(t["result"]["modulus"]) <= 2.0 * rK,
                                     fmt(num(t["result"]["modulus"]))));
                 bool grows = true;
                 for (std::size_t k = 0; k + 1 < est["radii"].size(); ++k)
                   grows = grows && read_number(est["shell_min"][k]) >= 1.0 / read_number(est["radii"][k]) - 1e-9;
                 out.push_back(check("shell minima >= 1/r_k", grows, ""));
                 out.push_back(check("inverse isolated calmness certified",
                                     verdict(task(r, "inverse")) == "certified-numerically", ""));
                 return out;
               }});

  c.push_back({"ex-F2", "F2(x) = [x, inf): not SMS at (0,0)",
               R"doc([mapping F2]
kind = setvalued
set = "interval(x1, inf)"

[anchor]
xbar = 0
ybar = 0

[task sms]
op = certify-sms
mapping = F2
tau = 0.1
expect = fail
)doc",
               [](const json& r) {
                 const json& t = task(r, "sms");
                 std::vector<CheckOutcome> out;
                 out.push_back(check("F2 refuted", verdict(t) == "refuted-with-witness", verdict(t)));
                 if (!t.contains("result")) return out;
                 const SetExpr rule = parse_set_expr("interval(x1, inf)");
                 bool replay = !t["result"]["witnesses"].empty();
                 for (const auto& w : t["result"]["witnesses"]) {
                   const Vec x{read_number(w["x"][0])};
                   const double ratio = dist_point_set(Vec{0.0}, rule.eval(Env{x, {}}), Norm::l2()) / std::abs(x[0]);
                   replay = replay && x[0] < 0.0 && ratio <= 0.1 * 1e-2;
                 }
                 out.push_back(check("witnesses negative and replayable", replay, ""));
                 return out;
               }});

  for (int n = 2; n <= 10; ++n) {
    std::string rows;
    for (int i = 0; i < n; ++i) {
      if (i) rows += ";";
      for (int j = 0; j < n; ++j) rows += (j ? "," : "") + std::string(i == j ? "1" : "0");
    }
    const std::string id = "ex-l1linf-n" + std::to_string(n);
    const std::string doc = "# identity from l1 into linf, truncated to dimension " + std::to_string(n) +
                            "\n[mapping I]\nkind = linear\nmatrix = \"" + rows +
                            "\"\nnorm_in = l1\nnorm_out = linf\n\n[task alpha]\nop = alpha-linear\nmapping = I\n"
                            "count = 10000\nexpect = pass\n";
    c.push_back({id, "alpha(Id) from l1 to linf in dimension " + std::to_string(n) + " is 1/n", doc,
                 [n](const json& r) {
                   const json& t = task(r, "alpha");
                   const double a = t.contains("result") ? num(t["result"]["value"]) : -1.0;
                   return std::vector<CheckOutcome>{near("alpha = 1/n", a, 1.0 / n, 0.05)};
                 }});
  }

  c.push_back({"ex-norm-sphere", "the Euclidean norm is not SMS at a unit vector",
               R"doc(# x -> |norm2(x) - 1| is dist(1, norm2(x)); tangential moves leave it second order
[mapping dist_norm]
kind = expr
expr = "abs(norm2(x) - 1)"
dim_in = 2

[mapping N]
kind = expr
expr = "norm2(x)"
dim_in = 2

[anchor]
xbar = 1, 0

[schedule]
points = 512

[task descent]
op = descent-rate
mapping = dist_norm

[task sms]
op = certify-sms
mapping = N
ybar = 1
expect = fail
)doc",
               [](const json& r) {
                 const json& t = task(r, "descent");
                 std::vector<CheckOutcome> out;
                 const double last = t.contains("result") ? read_number(t["result"]["shell_min"].back()) : 1.0;
                 out.push_back(check("final-shell minimum <= 0.05", last <= 0.05, fmt(last)));
                 out.push_back(check("norm not certified", verdict(task(r, "sms")) != "certified-numerically",
                                     verdict(task(r, "sms"))));
                 return out;
               }});

  c.push_back({"ex-comp-cont", "two sharp factors whose composition is constant",
               R"doc(# g jumps at 0, F has a sharp minimizer at 0 and vanishes at 2
[mapping g]
kind = expr
expr = "piecewise(x1 == 0, 0, 2)"

[mapping F]
kind = expr
expr = "piecewise(x1 <= 1 and x1 >= -1, abs(x1), 2 - abs(x1))"

[anchor]
xbar = 0
ybar = 0

[task sharp-g]
op = sharp-min
mapping = g
expect = pass

[task sharp-F]
op = sharp-min
mapping = F
expect = pass

[task comp]
op = composition
inner = g
outer = F
expect = fail
)doc",
               [](const json& r) {
                 std::vector<CheckOutcome> out;
                 out.push_back(check("g sharp", verdict(task(r, "sharp-g")) == "certified-numerically", ""));
                 out.push_back(check("F sharp", verdict(task(r, "sharp-F")) == "certified-numerically", ""));
                 const json& t = task(r, "comp");
                 if (!t.contains("result")) {
                   out.push_back(check("composition report", false, "missing"));
                   return out;
                 }
                 bool cont = true;
                 for (const auto& h : t["result"]["hypotheses"])
                   if (h["name"] == "g continuous at zbar") cont = h["satisfied"];
                 out.push_back(check("continuity hypothesis fails", !cont, ""));
                 const std::string v = t["result"]["certificates"].back()["verdict"];
                 out.push_back(check("F o g not SMS", v == "refuted-with-witness", v));
                 return out;
               }});

  c.push_back({"ex-setvalued-comp", "G SMS at (0,0) while F o G is not",
               R"doc(# G(0) is the whole line and G(x) = {2} otherwise; F o G has (-inf,1] at 0 and {0} elsewhere
[mapping G]
kind = setvalued
set = "piecewise(x1 == 0, whole(1), point(2))"

[mapping FG]
kind = setvalued
set = "piecewise(x1 == 0, interval(-inf, 1), point(0))"

[anchor]
xbar = 0
ybar = 0

[task sms-G]
op = certify-sms
mapping = G
expect = pass

[task sms-FG]
op = certify-sms
mapping = FG
expect = fail
)doc",
               [](const json& r) {
                 return std::vector<CheckOutcome>{
                     check("G certified", verdict(task(r, "sms-G")) == "certified-numerically", verdict(task(r, "sms-G"))),
                     check("F o G refuted", verdict(task(r, "sms-FG")) == "refuted-with-witness",
                           verdict(task(r, "sms-FG")))};
               }});

  c.push_back({"ex-subdiff-quadgrowth", "x^2 has quadratic growth: its subdifferential x -> 2x is SMS",
               R"doc([mapping dphi]
kind = expr
expr = "2 * x1"

[mapping phi]
kind = expr
expr = "x1^2"

[anchor]
xbar = 0
ybar = 0

[task sms]
op = certify-sms
mapping = dphi
expect = pass
expect_value_min = 0.49
expect_value_max = 0.51

[task not-sharp]
op = sharp-min
mapping = phi
expect = fail
)doc",
               [](const json& r) {
                 const json& t = task(r, "sms");
                 const double m = t.contains("result") ? num(t["result"]["modulus"]) : -1.0;
                 return std::vector<CheckOutcome>{
                     check("subdifferential certified", verdict(t) == "certified-numerically", verdict(t)),
                     near("modulus 1/2", m, 0.5, 0.02),
                     check("x^2 not sharp", verdict(task(r, "not-sharp")) != "certified-numerically", "")};
               }});

  c.push_back({"ex-eps-approx", "x + 0.2 x sin(1/x) against the identity",
               R"doc([mapping f]
kind = expr
expr = "piecewise(x1 == 0, 0, x1 + 0.2 * x1 * sin(1 / x1))"

[mapping h]
kind = linear
matrix = "1"

[anchor]
xbar = 0

[schedule]
points = 4096

[task approx]
op = eps-approx
mapping = f
approx = h
expect = pass
)doc",
               [](const json& r) {
                 const json& t = task(r, "approx");
                 std::vector<CheckOutcome> out{holds(t)};
                 if (!t.contains("result")) return out;
                 const double eps = num(t["result"]["values"]["eps"]);
                 out.push_back(check("eps in [0.19, 0.21]", eps >= 0.19 && eps <= 0.21, fmt(eps)));
                 out.push_back(near("bound 1.25", num(t["result"]["bound"]), 1.25, 0.02));
                 out.push_back(near("measured 1.25", num(t["result"]["measured"]), 1.25, 0.02));
                 return out;
               }});

  c.push_back({"ex-prederiv-abs", "(|x1|, x2) with the fan {diag(1,1), diag(-1,1)}",
               R"doc([mapping f]
kind = expr
expr = "[abs(x1), x2]"

[mapping H]
kind = fan
generators = "1,0;0,1 | -1,0;0,1"
hull = finite

[anchor]
xbar = 0, 0

[task prederiv]
op = prederivative
mapping = f
fan = H
delta = 0.5
expect = pass
)doc",
               [](const json& r) {
                 const json& t = task(r, "prederiv");
                 std::vector<CheckOutcome> out{holds(t)};
                 if (!t.contains("result")) return out;
                 out.push_back(check("eps = 0", num(t["result"]["values"]["eps"]) <= 1e-12, ""));
                 out.push_back(near("bound 1", num(t["result"]["bound"]), 1.0, 1e-9));
                 out.push_back(near("measured 1", num(t["result"]["measured"]), 1.0, 0.02));
                 return out;
               }});

  c.push_back({"ex-geneq-complementarity", "0 in x - p + N_[0,inf)(x): S(p) = max(p, 0)",
               R"doc([mapping f]
kind = expr
expr = "x1 - p1"
dim_p = 1

[mapping H]
kind = linear
matrix = "1"

[anchor]
xbar = 0
pbar = 0

[task residual]
op = residual
base = f
field = normal-cone
field_lower = 0
field_upper = inf
p = -1
x = 0.5

[task trace]
op = trace-solutions
base = f
field = normal-cone
field_lower = 0
field_upper = inf
params = "-0.2; 0; 0.3"
expect = pass

[task calm]
op = geneq-isolated-calmness
base = f
field = normal-cone
field_lower = 0
field_upper = inf
fan = H
expect = pass
)doc",
               [](const json& r) {
                 std::vector<CheckOutcome> out;
                 const json& res = task(r, "residual");
                 out.push_back(near("residual 1.5", res.contains("result") ? num(res["result"]["value"]) : 0, 1.5, 1e-12));
                 const json& tr = task(r, "trace");
                 bool sol = tr.contains("result");
                 if (sol) {
                   const auto& s = tr["result"]["samples"];
                   const double want[] = {0.0, 0.0, 0.3};
                   for (int i = 0; i < 3; ++i)
                     sol = sol && s[i]["solutions"].size() == 1 &&
                           std::abs(read_number(s[i]["solutions"][0][0]) - want[i]) <= 1e-6;
                 }
                 out.push_back(check("S(p) = max(p, 0)", sol, ""));
                 const json& t = task(r, "calm");
                 out.push_back(holds(t));
                 if (!t.contains("result")) return out;
                 out.push_back(near("bound 1", num(t["result"]["bound"]), 1.0, 1e-6));
                 out.push_back(near("measured 1", num(t["result"]["measured"]), 1.0, 0.02));
                 out.push_back(check("xbar isolated", num(t["result"]["values"]["xbar_isolated"]) == 1.0, ""));
                 return out;
               }});

  c.push_back({"ex-geneq-sv-field", "0 in 2x - p + 0.5 sin(x)",
               R"doc([mapping f]
kind = expr
expr = "2 * x1 - p1"
dim_p = 1

[mapping T]
kind = expr
expr = "0.5 * sin(x1)"

[mapping H]
kind = linear
matrix = "2"

[anchor]
xbar = 0
pbar = 0

[task calm]
op = geneq-single-valued-field
base = f
field = T
fan = H
expect = pass
)doc",
               [](const json& r) {
                 const json& t = task(r, "calm");
                 std::vector<CheckOutcome> out{holds(t)};
                 if (!t.contains("result")) return out;
                 out.push_back(near("bound 2/3", num(t["result"]["bound"]), 2.0 / 3.0, 0.01));
                 out.push_back(near("measured 0.4", num(t["result"]["measured"]), 0.4, 0.02));
                 return out;
               }});

  c.push_back({"ex-geneq-scalarized", "0 in (|x| - p, 0) + T(x) under the order R2+",
               R"doc([mapping f]
kind = expr
expr = "[abs(x1) - p1, 0]"
dim_p = 1

[mapping phi]
kind = maxaffine
components = "(1,0);(-1,0) | (0,0)"
cone = "Rm+"

[mapping T]
kind = expr
expr = "[0.4 * x1, 0]"

[anchor]
xbar = 0
pbar = 0

[task calm-zero]
op = geneq-convex-scalarization
base = f
maxaffine = phi
field = zero
expect = pass

[task calm]
op = geneq-convex-scalarization
base = f
maxaffine = phi
field = T
expect = pass
)doc",
               [](const json& r) {
                 std::vector<CheckOutcome> out;
                 const json& z = task(r, "calm-zero");
                 out.push_back(holds(z));
                 if (z.contains("result")) {
                   out.push_back(near("bound 1 without field", num(z["result"]["bound"]), 1.0, 0.01));
                   out.push_back(near("measured 1 without field", num(z["result"]["measured"]), 1.0, 0.02));
                 }
                 const json& t = task(r, "calm");
                 out.push_back(holds(t));
                 if (t.contains("result")) {
                   out.push_back(near("bound 1/0.6", num(t["result"]["bound"]), 1.0 / 0.6, 0.01));
                   out.push_back(near("measured 1/0.6", num(t["result"]["measured"]), 1.0 / 0.6, 0.02));
                 }
                 return out;
               }});
  return c;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = build();
  return entries;
}

const CatalogEntry* find_example(std::string_view id) {
  for (const auto& e : catalog())
    if (e.id == id) return &e;
  return nullptr;
}

}  // namespace subreg
