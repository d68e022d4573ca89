#include "subreg/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "subreg/error.hpp"

namespace subreg {

namespace {

std::vector<Vec> dedupe(std::vector<Vec> pts, double tol = 1e-12) {
  std::vector<Vec> out;
  for (auto& p : pts) {
    bool seen = false;
    for (const auto& q : out) {
      double d = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) d = std::max(d, std::abs(p[i] - q[i]));
      if (d <= tol) {
        seen = true;
        break;
      }
    }
    if (!seen) out.push_back(std::move(p));
  }
  return out;
}

double cross2(const Vec& o, const Vec& a, const Vec& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

Vec cross3(const Vec& a, const Vec& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

std::vector<double> parse_numbers(std::string_view text) {
  std::vector<double> out;
  std::string cur;
  auto flush = [&] {
    std::string t;
    for (char c : cur)
      if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    cur.clear();
    if (t.empty()) throw Error("empty number in list");
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw Error("malformed number '" + t + "'");
    }
    if (used != t.size()) throw Error("malformed number '" + t + "'");
    out.push_back(v);
  };
  for (char c : text) {
    if (c == ',') flush();
    else cur += c;
  }
  flush();
  return out;
}

}  // namespace

// ---------------------------------------------------------------- MaxAffineFn

MaxAffineFn::MaxAffineFn(std::vector<Vec> slopes, Vec offsets, std::optional<Matrix> q)
    : slopes_(std::move(slopes)), offsets_(std::move(offsets)), q_(std::move(q)) {
  if (slopes_.empty()) throw Error("max-affine function needs at least one piece");
  if (offsets_.size() != slopes_.size()) throw DimensionError("one offset per piece is required");
  for (const auto& a : slopes_)
    if (a.size() != slopes_.front().size() || a.empty()) throw DimensionError("pieces must share one dimension");
  if (q_) {
    if (q_->rows() != dim() || q_->cols() != dim()) throw DimensionError("quadratic term must be n x n");
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t j = 0; j < dim(); ++j)
        if (std::abs((*q_)(i, j) - (*q_)(j, i)) > 1e-12) throw Error("quadratic term must be symmetric");
    const Vec ev = symmetric_eigenvalues(*q_);
    if (ev.front() < -1e-10) throw Error("quadratic term must be positive semidefinite");
  }
}

MaxAffineFn MaxAffineFn::parse(std::string_view text) {
  std::vector<Vec> slopes;
  Vec offsets;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find('(', pos);
    if (open == std::string_view::npos) {
      for (std::size_t i = pos; i < text.size(); ++i)
        if (!std::isspace(static_cast<unsigned char>(text[i])) && text[i] != ';')
          throw Error("pieces: expected '(' in \"" + std::string(text) + "\"");
      break;
    }
    const std::size_t close = text.find(')', open);
    if (close == std::string_view::npos) throw Error("pieces: missing ')'");
    Vec nums = parse_numbers(text.substr(open + 1, close - open - 1));
    if (nums.size() < 2) throw Error("pieces: each piece needs a slope and an offset");
    offsets.push_back(nums.back());
    nums.pop_back();
    slopes.push_back(std::move(nums));
    pos = close + 1;
  }
  return MaxAffineFn(std::move(slopes), std::move(offsets));
}

double MaxAffineFn::operator()(std::span<const double> x) const {
  if (x.size() != dim()) throw DimensionError("max-affine argument dimension mismatch");
  double v = -kInf;
  for (std::size_t i = 0; i < slopes_.size(); ++i) v = std::max(v, dot(slopes_[i], x) + offsets_[i]);
  if (q_) v += 0.5 * dot(x, q_->apply(x));
  return v;
}

MappingPtr MaxAffineFn::as_mapping(const Norm& norm_in) const {
  const MaxAffineFn self = *this;
  return std::make_shared<FunctionMap>(
      "maxaffine", [self](std::span<const double> x) { return Vec{self(x)}; }, dim(), 1, norm_in, Norm::l2());
}

std::string MaxAffineFn::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < slopes_.size(); ++i) {
    if (i) os << ";";
    os << "(";
    for (double a : slopes_[i]) os << a << ",";
    os << offsets_[i] << ")";
  }
  return os.str();
}

// ---------------------------------------------------------------- Polytope

Polytope::Polytope(std::vector<Vec> vertices) : vertices_(dedupe(std::move(vertices))) {
  if (vertices_.empty()) throw Error("polytope needs at least one vertex");
  for (const auto& v : vertices_)
    if (v.size() != vertices_.front().size()) throw DimensionError("polytope vertices must share one dimension");
}

void Polytope::build() const {
  if (built_) return;
  built_ = true;
  const std::size_t n = dim();
  facets_.clear();
  if (n == 1) {
    double lo = kInf, hi = -kInf;
    for (const auto& v : vertices_) {
      lo = std::min(lo, v[0]);
      hi = std::max(hi, v[0]);
    }
    full_ = hi - lo > 1e-12;
    extreme_ = full_ ? std::vector<Vec>{{lo}, {hi}} : std::vector<Vec>{{lo}};
    if (full_) facets_ = {{Vec{1.0}, hi}, {Vec{-1.0}, -lo}};
    return;
  }
  if (n == 2) {
    std::vector<Vec> p = vertices_;
    std::sort(p.begin(), p.end());
    if (p.size() < 3) {
      full_ = false;
      extreme_ = p;
      return;
    }
    std::vector<Vec> hull(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p[i]) <= 1e-14) --k;
      hull[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
      while (k >= t && cross2(hull[k - 2], hull[k - 1], p[i]) <= 1e-14) --k;
      hull[k++] = p[i];
    }
    hull.resize(k - 1);
    extreme_ = hull;
    double area = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const Vec& a = hull[i];
      const Vec& b = hull[(i + 1) % hull.size()];
      area += a[0] * b[1] - a[1] * b[0];
    }
    full_ = hull.size() >= 3 && area > 1e-12;
    if (!full_) return;
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const Vec& a = hull[i];
      const Vec& b = hull[(i + 1) % hull.size()];
      Vec nrm{b[1] - a[1], a[0] - b[0]};
      const double len = norm2(nrm);
      nrm = scale(nrm, 1.0 / len);
      facets_.emplace_back(nrm, dot(nrm, a));
    }
    return;
  }
  if (n == 3) {
    const auto& p = vertices_;
    const double tol = 1e-10;
    full_ = false;
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = i + 1; j < p.size(); ++j)
        for (std::size_t k = j + 1; k < p.size(); ++k) {
          Vec nrm = cross3(sub(p[j], p[i]), sub(p[k], p[i]));
          const double len = norm2(nrm);
          if (len < 1e-12) continue;
          nrm = scale(nrm, 1.0 / len);
          const double b = dot(nrm, p[i]);
          bool below = true, above = true, strict = false;
          for (const auto& q : p) {
            const double s = dot(nrm, q) - b;
            if (s > tol) below = false;
            if (s < -tol) above = false;
            if (std::abs(s) > tol) strict = true;
          }
          if (!strict) continue;  // coplanar set
          full_ = true;
          if (!below && !above) continue;
          if (above) {
            nrm = scale(nrm, -1.0);
          }
          const double off = above ? -b : b;
          bool dup = false;
          for (const auto& [m, o] : facets_)
            if (norm2(sub(m, nrm)) < 1e-9) dup = true;
          if (!dup) facets_.emplace_back(nrm, off);
        }
    if (!full_) {
      facets_.clear();
      extreme_ = vertices_;
      return;
    }
    extreme_.clear();
    for (const auto& q : p) {
      std::vector<Vec> on;
      for (const auto& [m, o] : facets_)
        if (std::abs(dot(m, q) - o) <= tol) on.push_back(m);
      // a vertex lies on facets whose normals span R^3
      bool spans = false;
      for (std::size_t a = 0; a < on.size() && !spans; ++a)
        for (std::size_t b = a + 1; b < on.size() && !spans; ++b)
          for (std::size_t c = b + 1; c < on.size() && !spans; ++c)
            if (std::abs(dot(on[a], cross3(on[b], on[c]))) > 1e-9) spans = true;
      if (spans) extreme_.push_back(q);
    }
    return;
  }
  full_ = true;  // not decided in higher dimension
  extreme_ = vertices_;
}

std::vector<Vec> Polytope::extreme_points() const {
  build();
  return extreme_;
}

bool Polytope::full_dimensional() const {
  build();
  return full_;
}

const std::vector<std::pair<Vec, double>>& Polytope::facets() const {
  if (dim() > 3) throw Error("facet form is only computed for dimension <= 3");
  build();
  return facets_;
}

double Polytope::support(std::span<const double> d) const {
  double best = -kInf;
  for (const auto& v : vertices_) best = std::max(best, dot(d, v));
  return best;
}

bool Polytope::consistent(double tol) const {
  if (dim() > 3) return true;
  for (const auto& v : vertices_)
    for (const auto& [a, b] : facets())
      if (dot(a, v) > b + tol) return false;
  return true;
}

Polytope weighted_sum(const std::vector<Polytope>& parts, std::span<const double> weights) {
  if (parts.empty() || parts.size() != weights.size()) throw DimensionError("weighted_sum: one weight per part");
  const std::size_t n = parts.front().dim();
  std::vector<Vec> cur{Vec(n, 0.0)};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (weights[i] == 0.0) continue;
    std::vector<Vec> next;
    for (const auto& s : cur)
      for (const auto& v : parts[i].extreme_points()) next.push_back(axpy(weights[i], v, s));
    cur = Polytope(std::move(next)).extreme_points();
  }
  return Polytope(std::move(cur));
}

// ---------------------------------------------------------------- OrderCone

OrderCone::OrderCone(Matrix generators) : gens_(std::move(generators)) {
  if (gens_.rows() == 0 || gens_.cols() == 0) throw Error("order cone needs generators");
}

OrderCone OrderCone::orthant(std::size_t m) {
  OrderCone c(Matrix::identity(m));
  c.orthant_ = true;
  return c;
}

OrderCone OrderCone::parse(std::string_view text, std::size_t m) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t == "Rm+" || t == "R" + std::to_string(m) + "+") return orthant(m);
  std::vector<Vec> rows;
  std::size_t start = 0;
  while (start <= t.size()) {
    const std::size_t end = t.find(';', start);
    rows.push_back(parse_numbers(t.substr(start, end == std::string::npos ? std::string::npos : end - start)));
    if (rows.back().size() != m) throw DimensionError("cone generator of dimension " +
                                                      std::to_string(rows.back().size()) + ", expected " +
                                                      std::to_string(m));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return OrderCone(Matrix::from_rows(rows));
}

bool OrderCone::dual_contains(std::span<const double> ystar, double tol) const {
  for (std::size_t i = 0; i < gens_.rows(); ++i)
    if (dot(gens_.row(i), ystar) < -tol) return false;
  return true;
}

std::vector<Vec> OrderCone::dual_sphere_samples(const Norm& dual_norm, std::size_t count, std::uint64_t seed) const {
  const std::size_t m = dim();
  std::vector<Vec> out;
  if (m == 1) {
    for (double s : {1.0, -1.0})
      if (dual_contains(Vec{s})) out.push_back(dual_norm.normalize(Vec{s}));
    return out;
  }
  if (orthant_ && m == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double th = 0.5 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1);
      Vec v{std::cos(th), std::sin(th)};
      if (i == 0) v = {1.0, 0.0};
      if (i + 1 == count) v = {0.0, 1.0};
      out.push_back(dual_norm.normalize(v));
    }
    return out;
  }
  for (auto& v : unit_sphere_samples(m, dual_norm, count, seed)) {
    if (orthant_) {
      for (auto& x : v) x = std::abs(x);
      out.push_back(dual_norm.normalize(v));
    } else if (dual_contains(v)) {
      out.push_back(std::move(v));
    }
  }
  return dedupe(std::move(out));
}

std::string OrderCone::to_string() const {
  return orthant_ ? "Rm+" : gens_.to_string();
}

// ---------------------------------------------------------------- subdifferentials

Polytope subdifferential_at(const MaxAffineFn& phi, std::span<const double> xbar, double tol) {
  if (xbar.size() != phi.dim()) throw DimensionError("subdifferential point dimension mismatch");
  Vec vals(phi.pieces());
  double top = -kInf;
  for (std::size_t i = 0; i < phi.pieces(); ++i) {
    vals[i] = dot(phi.slopes()[i], xbar) + phi.offsets()[i];
    top = std::max(top, vals[i]);
  }
  const Vec shift = phi.quadratic() ? phi.quadratic()->apply(xbar) : Vec(phi.dim(), 0.0);
  std::vector<Vec> verts;
  for (std::size_t i = 0; i < phi.pieces(); ++i)
    if (top - vals[i] <= tol * std::max(1.0, std::abs(top))) verts.push_back(add(phi.slopes()[i], shift));
  return Polytope(std::move(verts));
}

InradiusResult inradius_origin(const Polytope& p, const Norm& primal, std::size_t samples, std::uint64_t seed) {
  InradiusResult r;
  if (p.dim() <= 3) {
    if (!p.full_dimensional()) {
      r.full_dimensional = false;
      r.flag = "not full-dimensional";
      return r;
    }
    double best = kInf;
    for (const auto& [a, b] : p.facets()) best = std::min(best, b / primal(a));
    if (best <= 1e-12) {
      r.flag = "origin not interior";
      best = 0.0;
    }
    r.value = best;
    return r;
  }
  // min over primal unit directions of the support function; a sampled minimum is
  // an upper estimate of the inradius
  const ConstantEstimate est = sphere_infimum(
      p.dim(), primal, [&](std::span<const double> u) { return p.support(u); }, samples, seed);
  r.exact = false;
  r.flag = "sampled upper estimate";
  r.value = std::max(0.0, est.value);
  return r;
}

Certificate sharp_min_convex(const MaxAffineFn& phi, std::span<const double> xbar, const Norm& norm,
                             const SamplingSchedule& s) {
  const Polytope sub = subdifferential_at(phi, xbar);
  const InradiusResult ir = inradius_origin(sub, norm);
  Certificate c = verdict_from_rate(descent_rate(*phi.as_mapping(norm), xbar, s), kDefaultTau, "sharp-minimizer",
                                    "inradius of the subdifferential");
  const double sampled = c.rate;
  c.evidence = ir.exact ? "structural" : "sampled";
  c.rate = ir.value;
  if (ir.value > 0.0) {
    c.verdict = Verdict::Certified;
    c.modulus = 1.0 / ir.value;
    c.diverging = false;
  } else {
    c.modulus = kInf;
    if (c.verdict == Verdict::Certified) c.verdict = Verdict::Inconclusive;
    c.notes.push_back("0 is not interior to the subdifferential" + (ir.flag.empty() ? "" : " (" + ir.flag + ")"));
  }
  if (ir.value > 0.0) {
    const double rel = std::abs(sampled - ir.value) / ir.value;
    c.notes.push_back("sampled descent rate " + std::to_string(sampled) + " (relative gap " + std::to_string(rel) +
                      ")");
  }
  return c;
}

IntradResult intrad(const std::vector<MaxAffineFn>& f, std::span<const double> xbar, const OrderCone& cone,
                    const Norm& norm_x, const Norm& norm_y, std::size_t directions, std::uint64_t seed) {
  if (f.empty()) throw Error("intrad needs at least one component");
  if (cone.dim() != f.size()) throw DimensionError("order cone dimension differs from the number of components");
  const std::size_t m = f.size();
  if (directions == 0) directions = m <= 2 ? 256 : 1024;
  std::vector<Polytope> subs;
  for (const auto& fi : f) subs.push_back(subdifferential_at(fi, xbar));
  IntradResult r;
  for (const Vec& y : cone.dual_sphere_samples(norm_y.dual(), directions, seed)) {
    ++r.directions;
    bool convex = true;
    for (std::size_t i = 0; i < m; ++i)
      if (y[i] < -1e-15 && !f[i].affine()) convex = false;
    if (!convex) {
      ++r.skipped;
      continue;
    }
    const InradiusResult ir = inradius_origin(weighted_sum(subs, y), norm_x);
    if (!ir.exact) r.exact_subdifferentials = false;
    if (r.best_ystar.empty() || ir.value > r.value) {
      r.value = ir.value;
      r.best_ystar = y;
    }
  }
  return r;
}

MappingPtr max_affine_vector(const std::vector<MaxAffineFn>& f, const Norm& norm_x, const Norm& norm_y) {
  if (f.empty()) throw Error("empty component list");
  const std::size_t n = f.front().dim();
  for (const auto& fi : f)
    if (fi.dim() != n) throw DimensionError("components must share one source dimension");
  return std::make_shared<FunctionMap>(
      "maxaffine-vector",
      [f](std::span<const double> x) {
        Vec v;
        for (const auto& fi : f) v.push_back(fi(x));
        return v;
      },
      n, f.size(), norm_x, norm_y);
}

BoundReport sms_convex_scalarization(const std::vector<MaxAffineFn>& f, std::span<const double> xbar,
                                     const OrderCone& cone, const SamplingSchedule& s, const Norm& norm_x,
                                     const Norm& norm_y, const CalculusOptions& opt) {
  BoundReport r;
  r.theorem = "convex-scalarization";
  const IntradResult ir = intrad(f, xbar, cone, norm_x, norm_y);
  r.set("intrad", ir.value);
  r.set("directions", static_cast<double>(ir.directions));
  if (ir.skipped) r.notes.push_back(std::to_string(ir.skipped) + " dual directions skipped (non-convex scalarization)");
  r.hypothesis("0 interior to some d(y* o f)(xbar)", ir.value > 0.0,
               ir.value > 0.0 ? "best y* found" : "no sampled y* gives an interior point");
  if (ir.value > 0.0) r.bound = 1.0 / ir.value;
  r.set("bound", r.bound);
  const MappingPtr fm = max_affine_vector(f, norm_x, norm_y);
  Certificate cm = certify_sms(*fm, xbar, fm->value(xbar), s, opt.tau, opt.rate);
  r.measured = cm.verdict == Verdict::Refuted ? kInf : cm.modulus;
  r.certificates = {std::move(cm)};
  r.finish();
  return r;
}

Certificate sms_frechet_scalarization(const Mapping& f, std::span<const double> xbar, std::size_t directions,
                                      const SamplingSchedule& s, double tau) {
  if (!f.single_valued()) throw Error("scalarization needs a single-valued mapping");
  const Norm dual = f.norm_out().dual();
  const std::vector<Vec> ys = unit_sphere_samples(f.dim_out(), dual, directions, s.seed);
  Certificate best;
  best.property = "SMS";
  best.criterion = "scalarization descent rate";
  best.tau = tau;
  best.rate = -kInf;
  Vec best_y;
  for (const Vec& y : ys) {
    const FunctionMap phi(
        "scalarization", [&f, y](std::span<const double> x) { return Vec{dot(y, f.value(x))}; }, f.dim_in(), 1,
        f.norm_in(), Norm::l2());
    RateEstimate est = descent_rate(phi, xbar, s);
    if (est.extrapolated > best.rate) {
      best.rate = est.extrapolated;
      best.estimate = std::move(est);
      best_y = y;
    }
  }
  if (best.rate >= tau) {
    best.verdict = Verdict::Certified;
    best.modulus = 1.0 / best.rate;
  } else {
    best.verdict = Verdict::Inconclusive;
    best.modulus = kInf;
    best.notes.push_back("no sampled y* gives a positive descent rate (the criterion is sufficient only)");
  }
  std::string ys_str;
  for (double v : best_y) ys_str += (ys_str.empty() ? "" : ",") + std::to_string(v);
  best.notes.push_back("best y* = (" + ys_str + ")");
  Certificate direct = certify_sms(f, xbar, f.value(xbar), s, tau);
  direct.criterion = "direct measurement";
  best.companions.push_back(std::move(direct));
  return best;
}

}  // namespace subreg
