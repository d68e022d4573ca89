#include "subreg/sets.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "subreg/error.hpp"

namespace subreg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string num(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string vec_str(const Vec& v) {
  if (v.size() == 1) return num(v[0]);
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += num(v[i]);
  }
  return s + "]";
}

std::vector<Interval> normalize_intervals(std::vector<Interval> parts) {
  std::vector<Interval> kept;
  for (const auto& iv : parts) {
    if (std::isnan(iv.lo) || std::isnan(iv.hi)) throw Error("interval endpoint is NaN");
    if (iv.lo <= iv.hi) kept.push_back(iv);
  }
  std::sort(kept.begin(), kept.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const auto& iv : kept) {
    if (!out.empty() && iv.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, iv.hi);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

// Absolute distance from a real to a normalized interval union.
double interval_gap(double y, const std::vector<Interval>& ivs) {
  double best = kInf;
  for (const auto& iv : ivs) {
    double d = 0.0;
    if (y < iv.lo) d = iv.lo - y;
    else if (y > iv.hi) d = y - iv.hi;
    best = std::min(best, d);
  }
  return best;
}

double weight1(const Norm& n) { return n.weighted() ? n.weights()[0] : 1.0; }

void check_dim(std::span<const double> y, std::size_t dim) {
  if (y.size() != dim)
    throw DimensionError("point of dimension " + std::to_string(y.size()) +
                         " measured against a set of dimension " + std::to_string(dim));
}

// 1-D reductions of the polyhedral variants.
std::vector<Interval> half_spaces_1d(const HalfSpaces& h) {
  double lo = -kInf, hi = kInf;
  for (std::size_t i = 0; i < h.rows.rows(); ++i) {
    const double a = h.rows(i, 0);
    const double b = h.offsets[i];
    if (a > 0) hi = std::min(hi, b / a);
    else if (a < 0) lo = std::max(lo, b / a);
    else if (b < 0) return {};
  }
  if (lo > hi) return {};
  return {{lo, hi}};
}

std::vector<Interval> cone_1d(const TranslatedCone& c) {
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < c.generators.rows(); ++i) {
    if (c.generators(i, 0) > 0) pos = true;
    if (c.generators(i, 0) < 0) neg = true;
  }
  return {{neg ? -kInf : c.apex[0], pos ? kInf : c.apex[0]}};
}

Vec weigh(std::span<const double> v, const Norm& n) {
  Vec r(v.begin(), v.end());
  if (n.weighted())
    for (std::size_t i = 0; i < r.size(); ++i) r[i] *= n.weights()[i];
  return r;
}

}  // namespace

SetDescriptor SetDescriptor::empty(std::size_t dim) { return SetDescriptor(EmptySet{dim}); }

SetDescriptor SetDescriptor::point(Vec p) { return SetDescriptor(FinitePoints{{std::move(p)}}); }

SetDescriptor SetDescriptor::points(std::vector<Vec> pts) {
  if (pts.empty()) throw Error("points(): empty point list, use empty()");
  for (const auto& p : pts)
    if (p.size() != pts.front().size()) throw DimensionError("points(): mixed dimensions");
  return SetDescriptor(FinitePoints{std::move(pts)});
}

SetDescriptor SetDescriptor::interval(double lo, double hi) { return intervals({{lo, hi}}); }

SetDescriptor SetDescriptor::intervals(std::vector<Interval> parts) {
  auto norm = normalize_intervals(std::move(parts));
  if (norm.empty()) return empty(1);
  return SetDescriptor(IntervalUnion{std::move(norm)});
}

SetDescriptor SetDescriptor::whole(std::size_t dim) {
  if (dim == 1) return interval(-kInf, kInf);
  return SetDescriptor(HalfSpaces{Matrix(0, dim), {}, dim});
}

SetDescriptor SetDescriptor::ball(Vec center, double radius, Norm norm) {
  if (!(radius >= 0.0)) throw Error("ball radius must be nonnegative");
  return SetDescriptor(Ball{std::move(center), radius, std::move(norm)});
}

SetDescriptor SetDescriptor::box(Vec lower, Vec upper) {
  if (lower.size() != upper.size()) throw DimensionError("box(): bound dimensions differ");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (lower[i] > upper[i]) return empty(lower.size());
  return SetDescriptor(Box{std::move(lower), std::move(upper)});
}

SetDescriptor SetDescriptor::half_spaces(Matrix rows, Vec offsets) {
  if (rows.rows() != offsets.size()) throw DimensionError("half_spaces(): rows/offsets mismatch");
  const std::size_t dim = rows.cols();
  return SetDescriptor(HalfSpaces{std::move(rows), std::move(offsets), dim});
}

SetDescriptor SetDescriptor::cone(Vec apex, Matrix generators) {
  if (generators.rows() > 0 && generators.cols() != apex.size())
    throw DimensionError("cone(): generator dimension mismatch");
  if (generators.rows() == 0) generators = Matrix(0, apex.size());
  return SetDescriptor(TranslatedCone{std::move(apex), std::move(generators)});
}

SetDescriptor SetDescriptor::hull(std::vector<Vec> pts) {
  if (pts.empty()) throw Error("hull(): empty point list");
  for (const auto& p : pts)
    if (p.size() != pts.front().size()) throw DimensionError("hull(): mixed dimensions");
  if (pts.size() == 1) return point(pts.front());
  return SetDescriptor(ConvexHull{std::move(pts)});
}

SetDescriptor SetDescriptor::union_of(std::vector<SetDescriptor> parts) {
  if (parts.empty()) throw Error("union(): needs at least one part");
  const std::size_t dim = parts.front().dim();
  for (const auto& p : parts)
    if (p.dim() != dim) throw DimensionError("union(): mixed dimensions");
  if (parts.size() == 1) return parts.front();
  return SetDescriptor(UnionSet{std::move(parts), dim});
}

SetDescriptor SetDescriptor::translate(SetDescriptor base, Vec shift) {
  if (base.dim() != shift.size()) throw DimensionError("translate(): shift dimension mismatch");
  return SetDescriptor(Translated{std::make_shared<const SetDescriptor>(std::move(base)), std::move(shift)});
}

SetDescriptor SetDescriptor::inflate(SetDescriptor base, double radius, Norm norm) {
  if (!(radius >= 0.0)) throw Error("inflate(): radius must be nonnegative");
  return SetDescriptor(Inflated{std::make_shared<const SetDescriptor>(std::move(base)), radius, std::move(norm)});
}

std::size_t SetDescriptor::dim() const {
  return std::visit(
      overloaded{
          [](const EmptySet& s) { return s.dim; },
          [](const FinitePoints& s) { return s.points.front().size(); },
          [](const IntervalUnion&) { return std::size_t{1}; },
          [](const Ball& s) { return s.center.size(); },
          [](const Box& s) { return s.lower.size(); },
          [](const HalfSpaces& s) { return s.dim; },
          [](const TranslatedCone& s) { return s.apex.size(); },
          [](const ConvexHull& s) { return s.points.front().size(); },
          [](const UnionSet& s) { return s.dim; },
          [](const Translated& s) { return s.shift.size(); },
          [](const Inflated& s) { return s.base->dim(); },
      },
      v_);
}

bool SetDescriptor::is_empty() const {
  return std::visit(overloaded{
                        [](const EmptySet&) { return true; },
                        [](const UnionSet& s) {
                          return std::all_of(s.parts.begin(), s.parts.end(),
                                             [](const SetDescriptor& p) { return p.is_empty(); });
                        },
                        [](const Translated& s) { return s.base->is_empty(); },
                        [](const Inflated& s) { return s.base->is_empty(); },
                        [](const auto&) { return false; },
                    },
                    v_);
}

std::optional<bool> SetDescriptor::contains(std::span<const double> y, double tol) const {
  check_dim(y, dim());
  return std::visit(
      overloaded{
          [](const EmptySet&) -> std::optional<bool> { return false; },
          [&](const FinitePoints& s) -> std::optional<bool> {
            for (const auto& p : s.points)
              if (Norm::linf()(sub(y, p)) <= tol) return true;
            return false;
          },
          [&](const IntervalUnion& s) -> std::optional<bool> { return interval_gap(y[0], s.intervals) <= tol; },
          [&](const Ball& s) -> std::optional<bool> { return s.norm(sub(y, s.center)) <= s.radius + tol; },
          [&](const Box& s) -> std::optional<bool> {
            for (std::size_t i = 0; i < y.size(); ++i)
              if (y[i] < s.lower[i] - tol || y[i] > s.upper[i] + tol) return false;
            return true;
          },
          [&](const HalfSpaces& s) -> std::optional<bool> {
            for (std::size_t i = 0; i < s.rows.rows(); ++i)
              if (dot(s.rows.row(i), y) > s.offsets[i] + tol) return false;
            return true;
          },
          [&](const UnionSet& s) -> std::optional<bool> {
            bool unknown = false;
            for (const auto& p : s.parts) {
              auto c = p.contains(y, tol);
              if (!c) unknown = true;
              else if (*c) return true;
            }
            if (unknown) return std::nullopt;
            return false;
          },
          [&](const Translated& s) -> std::optional<bool> { return s.base->contains(sub(y, s.shift), tol); },
          [&](const Inflated& s) -> std::optional<bool> {
            try {
              return dist_point_set(y, *s.base, s.norm) <= s.radius + tol;
            } catch (const NoExactOracle&) {
              return std::nullopt;
            }
          },
          [](const auto&) -> std::optional<bool> { return std::nullopt; },
      },
      v_);
}

std::string SetDescriptor::to_string() const {
  return std::visit(
      overloaded{
          [](const EmptySet& s) { return "empty(" + std::to_string(s.dim) + ")"; },
          [](const FinitePoints& s) {
            if (s.points.size() == 1) return "point(" + vec_str(s.points[0]) + ")";
            std::string r = "points(";
            for (std::size_t i = 0; i < s.points.size(); ++i) r += (i ? ", " : "") + vec_str(s.points[i]);
            return r + ")";
          },
          [](const IntervalUnion& s) {
            auto one = [](const Interval& iv) { return "interval(" + num(iv.lo) + ", " + num(iv.hi) + ")"; };
            if (s.intervals.size() == 1) return one(s.intervals[0]);
            std::string r = "union(";
            for (std::size_t i = 0; i < s.intervals.size(); ++i) r += (i ? ", " : "") + one(s.intervals[i]);
            return r + ")";
          },
          [](const Ball& s) {
            return "ball(" + vec_str(s.center) + ", " + num(s.radius) + ", " + s.norm.tag() + ")";
          },
          [](const Box& s) { return "box(" + vec_str(s.lower) + ", " + vec_str(s.upper) + ")"; },
          [](const HalfSpaces& s) {
            if (s.rows.rows() == 0) return "whole(" + std::to_string(s.dim) + ")";
            std::string r = "polyhedron(";
            for (std::size_t i = 0; i < s.rows.rows(); ++i)
              r += (i ? ", " : "") + std::string("halfspace(") + vec_str(s.rows.row(i)) + ", " + num(s.offsets[i]) + ")";
            return r + ")";
          },
          [](const TranslatedCone& s) {
            std::string r = "cone(" + vec_str(s.apex);
            for (std::size_t i = 0; i < s.generators.rows(); ++i) r += ", " + vec_str(s.generators.row(i));
            return r + ")";
          },
          [](const ConvexHull& s) {
            std::string r = "hull(";
            for (std::size_t i = 0; i < s.points.size(); ++i) r += (i ? ", " : "") + vec_str(s.points[i]);
            return r + ")";
          },
          [](const UnionSet& s) {
            std::string r = "union(";
            for (std::size_t i = 0; i < s.parts.size(); ++i) r += (i ? ", " : "") + s.parts[i].to_string();
            return r + ")";
          },
          [](const Translated& s) { return "translate(" + s.base->to_string() + ", " + vec_str(s.shift) + ")"; },
          [](const Inflated& s) {
            return "inflate(" + s.base->to_string() + ", " + num(s.radius) + ", " + s.norm.tag() + ")";
          },
      },
      v_);
}

double dist_point_set(std::span<const double> y, const SetDescriptor& s, const Norm& norm) {
  check_dim(y, s.dim());
  const bool one_d = y.size() == 1;
  const bool euclid = norm.kind() == NormKind::L2;
  auto from_gap = [&](double gap) { return gap == kInf ? kInf : weight1(norm) * gap; };

  return std::visit(
      overloaded{
          [](const EmptySet&) { return kInf; },
          [&](const FinitePoints& p) {
            double best = kInf;
            for (const auto& q : p.points) best = std::min(best, norm.distance(y, q));
            return best;
          },
          [&](const IntervalUnion& iv) { return from_gap(interval_gap(y[0], iv.intervals)); },
          [&](const Ball& b) {
            if (one_d) {
              const double r = b.radius / weight1(b.norm);
              return from_gap(interval_gap(y[0], {{b.center[0] - r, b.center[0] + r}}));
            }
            if (!(b.norm == norm)) throw NoExactOracle("ball measured in a different norm has no exact oracle");
            return std::max(norm.distance(y, b.center) - b.radius, 0.0);
          },
          [&](const Box& b) {
            Vec proj(y.begin(), y.end());
            for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = std::clamp(proj[i], b.lower[i], b.upper[i]);
            return norm.distance(y, proj);
          },
          [&](const HalfSpaces& h) {
            if (h.rows.rows() == 0) return 0.0;
            if (one_d) {
              const auto ivs = half_spaces_1d(h);
              return ivs.empty() ? kInf : from_gap(interval_gap(y[0], ivs));
            }
            if (!euclid) throw NoExactOracle("polyhedral distance under " + norm.tag() + " has no exact oracle");
            // change of variables z = W x turns the weighted norm Euclidean
            Matrix a = h.rows;
            if (norm.weighted())
              for (std::size_t i = 0; i < a.rows(); ++i)
                for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) /= norm.weights()[j];
            const Vec z = weigh(y, norm);
            const auto pr = project_polyhedron(a, h.offsets, z);
            if (!pr.feasible) return kInf;
            return norm2(sub(z, pr.point));
          },
          [&](const TranslatedCone& c) {
            if (one_d) return from_gap(interval_gap(y[0], cone_1d(c)));
            if (!euclid) throw NoExactOracle("conic distance under " + norm.tag() + " has no exact oracle");
            Matrix g = c.generators;
            if (norm.weighted())
              for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) *= norm.weights()[j];
            const Vec z = weigh(y, norm);
            const Vec proj = project_cone(weigh(c.apex, norm), g, z);
            return norm2(sub(z, proj));
          },
          [&](const ConvexHull& h) {
            if (one_d) {
              double lo = kInf, hi = -kInf;
              for (const auto& p : h.points) {
                lo = std::min(lo, p[0]);
                hi = std::max(hi, p[0]);
              }
              return from_gap(interval_gap(y[0], {{lo, hi}}));
            }
            if (!euclid) throw NoExactOracle("hull distance under " + norm.tag() + " has no exact oracle");
            std::vector<Vec> shifted;
            shifted.reserve(h.points.size());
            const Vec z = weigh(y, norm);
            for (const auto& p : h.points) shifted.push_back(sub(weigh(p, norm), z));
            return norm2(wolfe_min_norm_point(shifted).point);
          },
          [&](const UnionSet& u) {
            double best = kInf;
            for (const auto& p : u.parts) best = std::min(best, dist_point_set(y, p, norm));
            return best;
          },
          [&](const Translated& t) { return dist_point_set(sub(y, t.shift), *t.base, norm); },
          [&](const Inflated& f) {
            if (one_d) {
              const double gap = dist_point_set(y, *f.base, Norm::l2());
              if (gap == kInf) return kInf;
              return weight1(norm) * std::max(gap - f.radius / weight1(f.norm), 0.0);
            }
            if (!(f.norm == norm)) throw NoExactOracle("inflation in a different norm has no exact oracle");
            const double d = dist_point_set(y, *f.base, norm);
            if (d == kInf) return kInf;
            return std::max(d - f.radius, 0.0);
          },
      },
      s.variant());
}

}  // namespace subreg
