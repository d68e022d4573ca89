#include "subreg/report.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "subreg/error.hpp"

namespace subreg {

json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_number(const json& j) {
  if (j.is_null()) return std::nan("");
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw Error("not a number: " + s);
  }
  return j.get<double>();
}

json tagged(double v, const std::string& evidence) { return {{"value", number(v)}, {"evidence", evidence}}; }

json to_json(const Vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

json to_json(const SamplingSchedule& s) {
  return {{"r0", s.r0}, {"decay", s.decay}, {"shells", s.shells}, {"points", s.points}, {"seed", s.seed}};
}

namespace {

json witnesses_json(const std::vector<Witness>& ws) {
  json a = json::array();
  for (const auto& w : ws) a.push_back({{"shell", w.shell}, {"x", to_json(w.x)}, {"ratio", number(w.ratio)}});
  return a;
}

}  // namespace

json to_json(const RateEstimate& e) {
  json j;
  j["radii"] = to_json(e.radii);
  j["shell_min"] = to_json(e.shell_min);
  j["shell_max"] = to_json(e.shell_max);
  j["cumulative"] = to_json(e.cumulative);
  j["cumulative_max"] = to_json(e.cumulative_max);
  j["extrapolated"] = tagged(e.extrapolated, "sampled");
  j["bias"] = to_string(e.bias);
  j["witnesses"] = witnesses_json(e.min_witnesses);
  j["max_witnesses"] = witnesses_json(e.max_witnesses);
  j["skipped"] = e.skipped;
  j["evaluations"] = e.evaluations;
  j["calm_from_below"] = e.calm_from_below;
  return j;
}

json to_json(const Certificate& c) {
  json j;
  j["property"] = c.property;
  j["verdict"] = to_string(c.verdict);
  j["criterion"] = c.criterion;
  j["evidence"] = c.evidence;
  j["modulus"] = tagged(c.modulus, c.evidence);
  j["rate"] = tagged(c.rate, c.evidence);
  j["tau"] = c.tau;
  j["diverging"] = c.diverging;
  j["loglog_slope"] = number(c.loglog_slope);
  j["witnesses"] = witnesses_json(c.witnesses);
  j["estimate"] = c.estimate.shells() ? to_json(c.estimate) : json(nullptr);
  json comp = json::array();
  for (const auto& o : c.companions) comp.push_back(to_json(o));
  j["companions"] = comp;
  j["notes"] = c.notes;
  return j;
}

json to_json(const BoundReport& r) {
  json j;
  j["theorem"] = r.theorem;
  json vals = json::object();
  for (const auto& [k, v] : r.values) vals[k] = tagged(v, r.evidence_of(k));
  j["values"] = vals;
  json hyps = json::array();
  for (const auto& h : r.hypotheses) hyps.push_back({{"name", h.name}, {"satisfied", h.satisfied}, {"detail", h.detail}});
  j["hypotheses"] = hyps;
  j["bound"] = tagged(r.bound, r.evidence_of("bound"));
  j["measured"] = tagged(r.measured, "sampled");
  j["slack"] = number(r.slack);
  j["holds"] = to_string(r.holds);
  j["strict_bound"] = r.strict_bound ? tagged(*r.strict_bound, r.evidence_of("bound")) : json(nullptr);
  j["strict_holds"] = r.strict_holds ? json(*r.strict_holds) : json(nullptr);
  json certs = json::array();
  for (const auto& c : r.certificates) certs.push_back(to_json(c));
  j["certificates"] = certs;
  j["notes"] = r.notes;
  return j;
}

json to_json(const ConstantEstimate& c) {
  return {{"value", tagged(c.value, c.evidence())}, {"samples", c.samples}, {"argmin", to_json(c.argmin)}};
}

json to_json(const std::vector<SolutionSample>& samples) {
  json a = json::array();
  for (const auto& s : samples) {
    json sols = json::array();
    for (const auto& x : s.solutions) sols.push_back(to_json(x));
    a.push_back({{"p", to_json(s.p)}, {"solutions", sols}, {"residuals", to_json(s.residuals)}, {"method", s.method}});
  }
  return a;
}

std::string curve_csv(const RateEstimate& e) {
  std::string out = std::string(kCurveHeader) + "\n";
  char buf[160];
  for (std::size_t k = 0; k < e.shells(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", k, e.radii[k], e.shell_min[k], e.shell_max[k],
                  e.cumulative[k]);
    out += buf;
  }
  return out;
}

std::string fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string canonical_dump(const json& report) {
  json copy = report;
  copy.erase("timings");
  return copy.dump(2);
}

void validate_report(const json& report) {
  static const std::set<std::string> top = {"schema",  "artifact", "version", "document_hash", "seed",
                                            "schedule", "options", "tasks",   "exit_code",     "timings",
                                            "example",  "checks"};
  static const std::set<std::string> task = {"id",   "op",     "expect",  "status", "success",
                                             "primary", "result", "error", "line"};
  if (!report.is_object()) throw Error("report is not a JSON object");
  if (!report.contains("schema") || report["schema"] != kSchemaVersion) throw Error("unsupported report schema");
  for (const auto& [k, v] : report.items())
    if (!top.count(k)) throw Error("unknown report field '" + k + "'");
  if (!report.contains("tasks") || !report["tasks"].is_array()) throw Error("report has no task list");
  for (const auto& t : report["tasks"])
    for (const auto& [k, v] : t.items())
      if (!task.count(k)) throw Error("unknown task field '" + k + "'");
}

}  // namespace subreg
