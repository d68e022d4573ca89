#include "subreg/runner.hpp"

#include <chrono>
#include <cmath>

#include "subreg/catalog.hpp"
#include "subreg/error.hpp"

namespace subreg {

namespace {

struct TaskOutcome {
  json result;
  double primary = 0.0;
  std::string primary_evidence = "sampled";
  bool success = true;
  std::vector<std::pair<std::string, const RateEstimate*>> curves;
};

/// Holds results alive until their curves are written.
struct Keep {
  std::vector<std::shared_ptr<void>> items;
  template <class T>
  const T& hold(T v) {
    auto p = std::make_shared<T>(std::move(v));
    items.push_back(p);
    return *p;
  }
};

void collect(const Certificate& c, const std::string& label, TaskOutcome& out) {
  if (c.estimate.shells()) out.curves.emplace_back(label, &c.estimate);
  for (std::size_t i = 0; i < c.companions.size(); ++i) collect(c.companions[i], label + ".companion" + std::to_string(i), out);
}

void collect(const BoundReport& r, TaskOutcome& out) {
  for (std::size_t i = 0; i < r.certificates.size(); ++i) collect(r.certificates[i], "cert" + std::to_string(i), out);
}

class Executor {
 public:
  Executor(const ProblemSpec& spec, const RunOptions& opt) : spec_(spec), opt_(opt) {
    schedule_ = spec.schedule;
    if (opt.schedule) {
      schedule_.r0 = opt.schedule->r0;
      schedule_.decay = opt.schedule->decay;
      schedule_.shells = opt.schedule->shells;
      schedule_.points = opt.schedule->points;
    }
    if (opt.seed) schedule_.seed = *opt.seed;
    schedule_.validate();
  }

  const SamplingSchedule& schedule() const { return schedule_; }

  TaskOutcome run(const TaskDecl& t, Keep& keep) {
    const std::string& op = t.op;
    TaskOutcome out;
    const double tau = t.number("tau", kDefaultTau);
    const CalculusOptions copt = calc_options(t);
    const RateOptions ropt{opt_.skip_eval_errors};
    const std::uint64_t seed = schedule_.seed;
    const auto count = static_cast<std::size_t>(t.number("count", 10000));

    auto certificate = [&](Certificate c) {
      const Certificate& held = keep.hold(std::move(c));
      out.result = to_json(held);
      out.primary = held.modulus;
      out.primary_evidence = held.evidence;
      out.success = held.certified();
      collect(held, "estimate", out);
    };
    auto rate = [&](RateEstimate e) {
      const RateEstimate& held = keep.hold(std::move(e));
      out.result = to_json(held);
      out.primary = held.extrapolated;
      out.curves.emplace_back("estimate", &held);
    };
    auto constant = [&](const ConstantEstimate& c) {
      out.result = to_json(c);
      out.primary = c.value;
      out.primary_evidence = c.evidence();
    };
    auto bound = [&](BoundReport r) {
      const BoundReport& held = keep.hold(std::move(r));
      out.result = to_json(held);
      out.primary = held.measured;
      out.success = held.holds == Holds::True;
      collect(held, out);
    };
    auto value = [&](double v, const std::string& evidence) {
      out.result = {{"value", tagged(v, evidence)}};
      out.primary = v;
      out.primary_evidence = evidence;
    };

    if (op == "certify-sms" || op == "isolated-calmness") {
      const MappingDecl& m = mapping(t, "mapping");
      const Vec x = xbar(t), y = ybar(t, *m.handle, x);
      certificate(op == "certify-sms" ? certify_sms(*m.handle, x, y, schedule_, tau, ropt)
                                      : isolated_calmness_via_inverse(*m.handle, x, y, schedule_, tau, ropt));
    } else if (op == "sharp-min") {
      const MappingDecl& m = mapping(t, "mapping");
      certificate(sharp_min_check(m.handle, xbar(t), schedule_, tau, ropt));
      out.primary = read_number(out.result["rate"]["value"]);
    } else if (op == "descent-rate") {
      rate(descent_rate(*mapping(t, "mapping").handle, xbar(t), schedule_, ropt));
    } else if (op == "displacement-rate") {
      const MappingDecl& m = mapping(t, "mapping");
      const Vec x = xbar(t);
      rate(displacement_rate(*m.handle, x, ybar(t, *m.handle, x), schedule_, ropt));
    } else if (op == "calmness-modulus") {
      rate(calmness_modulus_sv(*mapping(t, "mapping").handle, xbar(t), schedule_, ropt));
    } else if (op == "oracle-grid") {
      const MappingDecl& m = mapping(t, "mapping");
      const Vec x = xbar(t);
      rate(oracle_rate_grid(*m.handle, x, ybar(t, *m.handle, x), t.number("radius", schedule_.r0),
                            static_cast<std::size_t>(t.number("resolution", 401))));
    } else if (op == "alpha-linear" || op == "beta-linear") {
      const MappingDecl& m = mapping(t, "mapping");
      const auto* lin = dynamic_cast<const LinearMap*>(m.handle.get());
      if (!lin) throw Error("mapping " + m.name + " is not linear");
      constant(op == "alpha-linear" ? alpha_linear(*lin, count, seed) : beta_linear(*lin, count, seed));
    } else if (op == "alpha0-ph") {
      constant(alpha0_ph(*mapping(t, "mapping").handle, count, seed));
    } else if (op == "alpha-fan") {
      constant(alpha_fan(*fan_of(mapping(t, "mapping")), count, seed));
    } else if (op == "composition") {
      const MappingDecl& g = mapping(t, "inner");
      const MappingDecl& f = mapping(t, "outer");
      const Vec z = t.has("zbar") ? t.vector("zbar") : xbar(t);
      const Vec gz = g.handle->value(z);
      bound(composition_bound(g.handle, f.handle, z, ybar(t, *f.handle, gz), schedule_, copt));
    } else if (op == "perturbation") {
      const MappingDecl& f = mapping(t, "mapping");
      const MappingDecl& g = mapping(t, "perturbation");
      const Vec x = xbar(t);
      bound(perturbation_bound(f.handle, g.handle, x, ybar(t, *f.handle, x), schedule_, copt));
    } else if (op == "eps-approx") {
      bound(sms_from_approx(mapping(t, "mapping").handle, mapping(t, "approx").handle, xbar(t), schedule_, copt));
    } else if (op == "eps-defect") {
      value(eps_approx_defect(*mapping(t, "mapping").handle, *mapping(t, "approx").handle, xbar(t), schedule_, ropt),
            "sampled");
    } else if (op == "prederivative") {
      bound(sms_from_prederivative(mapping(t, "mapping").handle, fan_of(mapping(t, "fan")), xbar(t),
                                   t.number("delta", 0.5), schedule_, copt));
    } else if (op == "prederivative-defect") {
      value(prederivative_defect(*mapping(t, "mapping").handle, *fan_of(mapping(t, "fan")), xbar(t),
                                 t.number("delta", 0.5), schedule_, ropt),
            "sampled");
    } else if (op == "smooth-kernel") {
      bound(smooth_kernel_check(mapping(t, "mapping").handle, xbar(t), schedule_, t.number("fd_step", 1e-5), copt));
    } else if (op == "subdifferential") {
      const MaxAffineFn& phi = scalar_maxaffine(mapping(t, "mapping"));
      const Vec x = xbar(t);
      const Polytope p = subdifferential_at(phi, x);
      const InradiusResult ir = inradius_origin(p, mapping(t, "mapping").handle->norm_in(), 4096, seed);
      json verts = json::array();
      for (const auto& v : p.extreme_points()) verts.push_back(to_json(v));
      out.result = {{"vertices", verts},
                    {"inradius", tagged(ir.value, ir.exact ? "exact" : "sampled")},
                    {"full_dimensional", ir.full_dimensional},
                    {"flag", ir.flag}};
      out.primary = ir.value;
      out.primary_evidence = ir.exact ? "exact" : "sampled";
    } else if (op == "sharp-min-convex") {
      const MappingDecl& m = mapping(t, "mapping");
      certificate(sharp_min_convex(scalar_maxaffine(m), xbar(t), m.handle->norm_in(), schedule_));
      out.primary = read_number(out.result["rate"]["value"]);
    } else if (op == "intrad") {
      const MappingDecl& m = mapping(t, "mapping");
      const IntradResult ir = intrad(maxaffine(m), xbar(t), cone_of(t, m), m.handle->norm_in(), m.handle->norm_out(),
                                     static_cast<std::size_t>(t.number("directions", 0)), seed);
      out.result = {{"intrad", tagged(ir.value, "sampled")},
                    {"best_ystar", to_json(ir.best_ystar)},
                    {"directions", ir.directions},
                    {"skipped", ir.skipped},
                    {"exact_subdifferentials", ir.exact_subdifferentials}};
      out.primary = ir.value;
    } else if (op == "convex-scalarization") {
      const MappingDecl& m = mapping(t, "mapping");
      bound(sms_convex_scalarization(maxaffine(m), xbar(t), cone_of(t, m), schedule_, m.handle->norm_in(),
                                     m.handle->norm_out(), copt));
    } else if (op == "frechet-scalarization") {
      certificate(sms_frechet_scalarization(*mapping(t, "mapping").handle, xbar(t),
                                            static_cast<std::size_t>(t.number("directions", 256)), schedule_, tau));
    } else if (op == "residual") {
      const GenEqProblem prob = geneq(t, false);
      value(residual(prob, t.vector("p"), t.vector("x")), "exact");
    } else if (op == "trace-solutions") {
      const GenEqProblem prob = geneq(t, false);
      const Matrix ps = parse_matrix(t.arg("params").text);
      std::vector<Vec> grid;
      for (std::size_t i = 0; i < ps.rows(); ++i) grid.push_back(ps.row(i));
      const auto samples = trace_solution_map(prob, grid, t.number("delta", prob.delta));
      out.result = {{"samples", to_json(samples)}};
      double worst = 0.0;
      for (const auto& s : samples)
        for (double r : s.residuals) worst = std::max(worst, r);
      out.primary = worst;
      out.primary_evidence = "exact";
      out.success = worst <= 1e-7;
    } else if (op == "geneq-defect") {
      value(partial_prederivative_defect(geneq(t, true), schedule_), "sampled");
    } else if (op == "geneq-isolated-calmness") {
      bound(isolated_calmness_bound(geneq(t, true), schedule_, copt));
    } else if (op == "geneq-single-valued-field") {
      bound(single_valued_field_bound(geneq(t, true), schedule_, copt));
    } else if (op == "geneq-convex-scalarization") {
      bound(convex_scalarized_geneq_bound(geneq(t, true), schedule_, copt));
    } else {
      throw Error("operation '" + op + "' is not executable");
    }
    return out;
  }

 private:
  CalculusOptions calc_options(const TaskDecl& t) const {
    CalculusOptions c;
    c.tau = t.number("tau", kDefaultTau);
    c.rate.skip_eval_errors = opt_.skip_eval_errors;
    c.assume_eps = opt_.assume_eps;
    return c;
  }

  const MappingDecl& mapping(const TaskDecl& t, const std::string& key) const {
    return spec_.mapping(t.arg(key).text);
  }

  Vec xbar(const TaskDecl& t) const {
    if (t.has("xbar")) return t.vector("xbar");
    if (spec_.anchor.xbar.empty()) throw Error("task '" + t.id + "' needs xbar");
    return spec_.anchor.xbar;
  }

  Vec pbar(const TaskDecl& t) const {
    if (t.has("pbar")) return t.vector("pbar");
    return spec_.anchor.pbar;
  }

  /// Explicit ybar, else f(xbar) for single-valued f, else the origin.
  Vec ybar(const TaskDecl& t, const Mapping& f, std::span<const double> x) const {
    if (t.has("ybar")) return t.vector("ybar");
    if (!spec_.anchor.ybar.empty() && spec_.anchor.ybar.size() == f.dim_out()) return spec_.anchor.ybar;
    if (f.single_valued()) return f.value(x);
    return Vec(f.dim_out(), 0.0);
  }

  static std::shared_ptr<const FanMap> fan_of(const MappingDecl& m) {
    if (!m.fan) throw Error("mapping " + m.name + " is not a fan or linear operator");
    return m.fan;
  }

  static const std::vector<MaxAffineFn>& maxaffine(const MappingDecl& m) {
    if (m.components.empty()) throw Error("mapping " + m.name + " is not max-affine");
    return m.components;
  }

  static const MaxAffineFn& scalar_maxaffine(const MappingDecl& m) {
    if (maxaffine(m).size() != 1) throw Error("mapping " + m.name + " must be scalar max-affine");
    return m.components.front();
  }

  static OrderCone cone_of(const TaskDecl& t, const MappingDecl& m) {
    if (t.has("cone")) return OrderCone::parse(t.arg("cone").text, m.components.size());
    if (m.cone) return *m.cone;
    return OrderCone::orthant(m.components.size());
  }

  GenEqProblem geneq(const TaskDecl& t, bool anchored) const {
    const MappingDecl& b = mapping(t, "base");
    GenEqProblem prob;
    prob.n = b.handle->dim_in();
    prob.m = b.handle->dim_out();
    prob.k = std::max<std::size_t>(b.dim_p, 1);
    prob.f = base_function(b);
    prob.norm_x = b.handle->norm_in();
    prob.norm_y = b.handle->norm_out();
    if (t.has("norm_p")) prob.norm_p = Norm::parse(t.arg("norm_p").text);
    prob.pbar = pbar(t);
    if (prob.pbar.empty()) prob.pbar = Vec(prob.k, 0.0);
    prob.xbar = t.has("xbar") || !spec_.anchor.xbar.empty() ? xbar(t) : Vec(prob.n, 0.0);
    prob.delta = t.number("delta", 0.5);
    prob.zeta = t.number("zeta", 0.5);
    const std::string field = t.text("field", "zero");
    if (field == "zero") {
      prob.field = zero_field(prob.n, prob.m);
    } else if (field == "normal-cone") {
      prob.field = normal_cone_box(t.vector("field_lower"), t.vector("field_upper"));
    } else {
      prob.field = spec_.mapping(field).handle;
    }
    if (t.has("fan")) prob.fan = fan_of(mapping(t, "fan"));
    if (t.has("maxaffine")) {
      const MappingDecl& ma = mapping(t, "maxaffine");
      prob.maxaffine = maxaffine(ma);
      prob.cone = cone_of(t, ma);
    }
    if (anchored) prob.validate();
    return prob;
  }

  const ProblemSpec& spec_;
  RunOptions opt_;
  SamplingSchedule schedule_;
};

std::string expect_name(Expectation e) {
  switch (e) {
    case Expectation::Pass: return "pass";
    case Expectation::Fail: return "fail";
    default: return "none";
  }
}

std::string sanitize(const std::string& id) {
  std::string s = id;
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  return s;
}

}  // namespace

ScheduleOverride parse_schedule_override(std::string_view text) {
  const Vec v = parse_vector(text);
  if (v.size() != 4) throw ParseError("--schedule expects r0,decay,K,N", 1, 1);
  ScheduleOverride o;
  o.r0 = v[0];
  o.decay = v[1];
  if (v[2] < 0 || v[3] < 0 || v[2] != std::floor(v[2]) || v[3] != std::floor(v[3]))
    throw ParseError("--schedule shell and point counts must be nonnegative integers", 1, 1);
  o.shells = static_cast<std::size_t>(v[2]);
  o.points = static_cast<std::size_t>(v[3]);
  return o;
}

RunResult run_problem(const ProblemSpec& spec, std::string_view document, const RunOptions& opt) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  RunResult res;
  Executor ex(spec, opt);
  json& rep = res.report;
  rep["schema"] = kSchemaVersion;
  rep["artifact"] = "subreg";
  rep["version"] = kArtifactVersion;
  rep["document_hash"] = "fnv1a64:" + fnv1a64(document);
  rep["seed"] = ex.schedule().seed;
  rep["schedule"] = to_json(ex.schedule());
  rep["options"] = {{"skip_eval_errors", opt.skip_eval_errors},
                    {"assume_eps", opt.assume_eps ? json(*opt.assume_eps) : json(nullptr)},
                    {"assume_eps_provenance", opt.assume_eps ? "user-asserted" : "measured"}};
  json tasks = json::array();
  json timings = json::object();
  bool eval_error = false, expectation_failed = false;

  for (const auto& t : spec.tasks) {
    const auto ts = clock::now();
    json tj;
    tj["id"] = t.id;
    tj["op"] = t.op;
    tj["line"] = t.line;
    tj["expect"] = expect_name(t.expect);
    Keep keep;
    try {
      TaskOutcome o = ex.run(t, keep);
      bool ok = o.success;
      if (t.expect_value_min && !(o.primary >= *t.expect_value_min)) ok = false;
      if (t.expect_value_max && !(o.primary <= *t.expect_value_max)) ok = false;
      tj["success"] = ok;
      tj["primary"] = tagged(o.primary, o.primary_evidence);
      tj["result"] = std::move(o.result);
      std::string status = ok ? "passed" : "failed";
      if (t.expect == Expectation::Pass && !ok) expectation_failed = true;
      if (t.expect == Expectation::Fail) status = ok ? "unexpected-pass" : "expected-fail";
      tj["status"] = status;
      for (std::size_t i = 0; i < o.curves.size(); ++i) {
        std::string name = sanitize(t.id);
        if (o.curves.size() > 1) name += "." + o.curves[i].first;
        res.curves.push_back(CurveFile{name + ".csv", curve_csv(*o.curves[i].second)});
      }
    } catch (const std::exception& e) {
      tj["status"] = "error";
      tj["success"] = false;
      tj["error"] = e.what();
      eval_error = true;
    }
    timings[t.id] = std::chrono::duration<double, std::milli>(clock::now() - ts).count();
    tasks.push_back(std::move(tj));
  }
  rep["tasks"] = std::move(tasks);
  res.exit_code = eval_error ? kExitEval : expectation_failed ? kExitExpectation : kExitOk;
  rep["exit_code"] = res.exit_code;
  timings["total"] = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  rep["timings"] = {{"unit", "ms"}, {"tasks", timings}};
  return res;
}

RunResult run_document(std::string_view document, const RunOptions& opt) {
  ProblemSpec spec;
  try {
    spec = parse_problem(document);
  } catch (const ParseError& e) {
    RunResult r;
    r.exit_code = kExitParse;
    r.diagnostic = e.what();
    return r;
  }
  return run_problem(spec, document, opt);
}

RunResult reproduce_example(std::string_view id, const RunOptions& opt) {
  const CatalogEntry* entry = find_example(id);
  if (!entry) {
    RunResult r;
    r.exit_code = kExitParse;
    r.diagnostic = "unknown example id '" + std::string(id) + "'";
    return r;
  }
  RunResult r = run_document(entry->document, opt);
  if (r.exit_code == kExitParse) return r;
  json checks = json::array();
  bool all = true;
  for (const auto& c : entry->check(r.report)) {
    checks.push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
    all = all && c.ok;
  }
  r.report["example"] = entry->id;
  r.report["checks"] = checks;
  if (r.exit_code == kExitOk && !all) r.exit_code = kExitExpectation;
  r.report["exit_code"] = r.exit_code;
  return r;
}

}  // namespace subreg
