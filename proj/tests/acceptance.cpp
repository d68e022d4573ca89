// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "oracles.hpp"
#include "subreg/catalog.hpp"
#include "subreg/convexity.hpp"
#include "subreg/expr.hpp"
#include "subreg/report.hpp"
#include "subreg/runner.hpp"
#include "subreg/soundness.hpp"

using namespace subreg;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  json data = json::object();  // deterministic measurements, compared across runs
  double seconds = 0.0;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

MappingPtr expr_map(const char* text, std::size_t n, std::size_t m) {
  return std::make_shared<ExprMap>(parse_expr(text), n, m);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// 1. Closed-form rates: modulus x rate near one, sampled rate against a grid oracle.
Outcome characterization() {
  Outcome o;
  struct Case {
    std::string name;
    MappingPtr f;
    Vec xbar;
    double rate;
    bool displacement;  // false: steepest descent of a scalar function
  };
  const std::vector<Case> cases = {
      {"diag(2,3)", std::make_shared<LinearMap>(Matrix{{2, 0}, {0, 3}}), {0, 0}, 2.0, true},
      {"diag(0.5,1.5)", std::make_shared<LinearMap>(Matrix{{0.5, 0}, {0, 1.5}}), {0, 0}, 0.5, true},
      {"diag(4)", std::make_shared<LinearMap>(Matrix{{4}}), {0}, 4.0, true},
      {"|x|", expr_map("abs(x1)", 1, 1), {0}, 1.0, false},
      {"|x|_2 on R^2", expr_map("norm2(x)", 2, 1), {0, 0}, 1.0, false},
      {"max(x, -2x)", expr_map("max(x1, -2*x1)", 1, 1), {0}, 1.0, false},
      {"|x1| + |x2|", expr_map("abs(x1) + abs(x2)", 2, 1), {0, 0}, 1.0, false},
      {"max(x1, x2, -x1-x2)", expr_map("max(x1, x2, -x1-x2)", 2, 1), {0, 0},
       oracle::max_linear_descent({{1, 0}, {0, 1}, {-1, -1}}), false},
      {"2 gamma x, gamma = 1", expr_map("2*x1", 1, 1), {0}, 2.0, true},
      {"2 gamma x, gamma = 0.25", expr_map("0.5*x1", 1, 1), {0}, 0.5, true},
  };
  const SamplingSchedule s;
  for (const auto& c : cases) {
    const Vec ybar = c.displacement ? c.f->value(c.xbar) : Vec{};
    const Certificate cert = c.displacement ? certify_sms(*c.f, c.xbar, ybar, s) : sharp_min_check(c.f, c.xbar, s);
    const double rate = cert.estimate.extrapolated;
    const double resolution = c.xbar.size() == 1 ? 2001 : 401;
    RateEstimate grid;
    if (c.displacement) {
      grid = oracle_rate_grid(*c.f, c.xbar, ybar, s.r0, resolution);
    } else {
      const double f0 = c.f->value(c.xbar)[0];
      grid = oracle_grid(c.xbar, c.f->norm_in(), s.r0, resolution,
                         [&](std::span<const double> x, double d) { return (c.f->value(x)[0] - f0) / d; });
    }
    const double product = cert.modulus * rate;
    o.require(product >= 0.95 && product <= 1.05, c.name + ": modulus x rate = " + fmt(product));
    o.require(std::abs(rate - grid.extrapolated) <= 0.05 * grid.extrapolated,
              c.name + ": rate " + fmt(rate) + " vs grid " + fmt(grid.extrapolated));
    o.require(std::abs(rate - c.rate) <= 0.05 * c.rate, c.name + ": rate " + fmt(rate) + " vs " + fmt(c.rate));
    o.data[c.name] = {{"rate", number(rate)}, {"modulus", number(cert.modulus)}, {"grid", number(grid.extrapolated)}};
  }
  if (o.pass) o.detail = std::to_string(cases.size()) + " instances";
  return o;
}

Outcome reproduce(const std::vector<std::string>& ids) {
  Outcome o;
  for (const auto& id : ids) {
    const RunResult r = reproduce_example(id);
    o.require(r.exit_code == kExitOk, id + " exit " + std::to_string(r.exit_code));
    for (const auto& c : r.report["checks"])
      o.require(c["ok"].get<bool>(), id + ": " + c["name"].get<std::string>());
    o.data[id] = json::parse(canonical_dump(r.report));
  }
  if (o.pass) o.detail = std::to_string(ids.size()) + " examples";
  return o;
}

// 2. Analytic examples.
Outcome paper_examples() {
  return reproduce({"ex-F1", "ex-F2", "ex-norm-sphere", "ex-comp-cont", "ex-setvalued-comp"});
}

// 3. Injectivity constants.
Outcome injectivity() {
  Outcome o;
  std::mt19937_64 g(20240601);
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix a(5, 5);
  oracle::Mat rows(5, oracle::Vec(5));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) rows[i][j] = a(i, j) = u(g);
  const double ref = oracle::sigma_min(rows);
  const ConstantEstimate exact = alpha_linear(a, Norm::l2(), Norm::l2());
  o.require(exact.exact, "5x5 alpha not structural");
  o.require(std::abs(exact.value - ref) <= 1e-8, "5x5 SVD " + fmt(exact.value) + " vs " + fmt(ref));
  const ConstantEstimate sampled = alpha0_ph(PHMap(std::make_shared<LinearMap>(a)), 10000);
  o.require(std::abs(sampled.value - ref) <= 0.05 * ref, "5x5 sampled " + fmt(sampled.value) + " vs " + fmt(ref));
  o.data["random5x5"] = {{"svd", number(exact.value)}, {"sampled", number(sampled.value)}, {"oracle", number(ref)}};
  double previous = kInf;
  for (std::size_t n = 2; n <= 10; ++n) {
    const double v = alpha_linear(Matrix::identity(n), Norm::l1(), Norm::linf()).value;
    o.require(std::abs(v - 1.0 / double(n)) <= 0.05 / double(n), "l1->linf n=" + std::to_string(n) + ": " + fmt(v));
    o.require(v < previous, "l1->linf not decreasing at n=" + std::to_string(n));
    previous = v;
    o.data["l1linf"].push_back(number(v));
  }
  if (o.pass) o.detail = "SVD gap " + fmt(std::abs(exact.value - ref)) + ", sampled gap " +
                         fmt(std::abs(sampled.value - ref) / ref * 100) + "%";
  return o;
}

// 4. Soundness of the five calculus bounds on random instances.
Outcome soundness() {
  Outcome o;
  std::string times;
  for (const char* t : {"composition", "calm-perturbation", "eps-approximation", "outer-prederivative", "smooth-kernel"}) {
    const double t0 = now();
    const SoundnessSummary s = soundness_suite(t, 100, 20240601);
    const double dt = now() - t0;
    o.require(s.instances == 100 && s.held == 100,
              std::string(t) + ": " + std::to_string(s.held) + "/" + std::to_string(s.instances));
    o.require(s.worst_excess <= 1e-6, std::string(t) + ": excess " + fmt(s.worst_excess));
    o.require(dt < 60.0, std::string(t) + " took " + fmt(dt) + " s");
    json cases = json::array();
    for (const auto& c : s.cases) cases.push_back({number(c.report.bound), number(c.report.measured)});
    o.data[s.theorem] = cases;
    times += (times.empty() ? "" : ", ") + std::string(t) + " " + fmt(dt) + " s";
  }
  if (o.pass) o.detail = "5 x 100 instances (" + times + ")";
  return o;
}

// 5. Steepest descent of random max-affine functions equals the inradius.
Outcome inradius_equality() {
  Outcome o;
  std::size_t positive = 0, zero = 0;
  const Vec origin = {0.0, 0.0};
  for (std::uint64_t i = 0; i < 50; ++i) {
    const MaxAffineFn phi = random_max_affine_2d(3 + i % 4, 5000 + i);
    const double rho = inradius_origin(subdifferential_at(phi, origin), Norm::l2()).value;
    const double rate = descent_rate(*phi.as_mapping(), origin, {}).extrapolated;
    if (rho > 0.05) {
      ++positive;
      o.require(std::abs(rate - rho) <= 0.05 * rho, "#" + std::to_string(i) + ": grsl " + fmt(rate) + " vs " + fmt(rho));
    } else if (rho == 0.0) {
      ++zero;
      o.require(rate <= 0.05, "#" + std::to_string(i) + ": grsl " + fmt(rate) + " with zero inradius");
    }
    o.data["cases"].push_back({number(rho), number(rate)});
  }
  if (o.pass) o.detail = std::to_string(positive) + " interior, " + std::to_string(zero) + " boundary";
  return o;
}

// 6. Generalized equations.
Outcome generalized_equations() {
  Outcome o;
  for (const char* id : {"ex-geneq-complementarity", "ex-geneq-sv-field", "ex-geneq-scalarized"}) {
    const RunResult r = reproduce_example(id);
    o.require(r.exit_code == kExitOk, std::string(id) + " exit " + std::to_string(r.exit_code));
    for (const auto& t : r.report["tasks"]) {
      if (!t.contains("result") || !t["result"].contains("bound")) continue;
      const double bound = read_number(t["result"]["bound"]["value"]);
      const double measured = read_number(t["result"]["measured"]["value"]);
      o.require(measured <= bound + 1e-6, std::string(id) + "/" + t["id"].get<std::string>() + ": measured " +
                                              fmt(measured) + " > bound " + fmt(bound));
      if (std::string(id) == "ex-geneq-complementarity") {
        o.require(std::abs(bound - 1.0) <= 1e-9, "complementarity bound " + fmt(bound));
        o.require(std::abs(measured - 1.0) <= 0.02, "complementarity measured " + fmt(measured));
      }
      o.data[id].push_back({t["id"], number(bound), number(measured)});
    }
  }
  if (o.pass) o.detail = "3 instances";
  return o;
}

struct Criterion {
  int number;
  const char* title;
  double budget;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "characterization consistency", 10, characterization},
      {2, "analytic examples", 15, paper_examples},
      {3, "injectivity constants", 10, injectivity},
      {4, "bound soundness", 5 * 60, soundness},
      {5, "inradius equality", 20, inradius_equality},
      {6, "generalized equations", 20, generalized_equations},
  };
  auto run_all = [&](std::vector<Outcome>& outs) {
    const double t0 = now();
    for (const auto& c : criteria) {
      const double t = now();
      outs.push_back(c.run());
      outs.back().seconds = now() - t;
    }
    return now() - t0;
  };

  std::vector<Outcome> first, second;
  const double total = run_all(first);
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome& o = first[i];
    o.require(o.seconds < criteria[i].budget, "runtime over " + fmt(criteria[i].budget) + " s");
    all &= o.pass;
    std::printf("criterion %d (%s): %s [%.2f s] %s\n", criteria[i].number, criteria[i].title, o.pass ? "PASS" : "FAIL",
                o.seconds, o.detail.c_str());
  }

  run_all(second);
  json a = json::array(), b = json::array();
  for (const auto& o : first) a.push_back(o.data);
  for (const auto& o : second) b.push_back(o.data);
  for (const auto& e : catalog()) {
    a.push_back(json::parse(canonical_dump(reproduce_example(e.id).report)));
    b.push_back(json::parse(canonical_dump(reproduce_example(e.id).report)));
  }
  const bool same = a.dump() == b.dump();
  const bool fast = total < 120.0;
  all &= same && fast;
  std::printf("criterion 7 (determinism): %s [%.2f s full suite] %s\n", same && fast ? "PASS" : "FAIL", total,
              same ? ("identical reports, fnv1a64:" + fnv1a64(a.dump())).c_str() : "reports differ");
  return all ? 0 : 1;
}
