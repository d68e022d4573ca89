#include "subreg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "subreg/error.hpp"

namespace subreg {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::from_rows(const std::vector<Vec>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols_) throw DimensionError("ragged matrix rows");
    std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * m.cols_);
  }
  return m;
}

Vec Matrix::row(std::size_t i) const {
  return Vec(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
}

Vec Matrix::col(std::size_t j) const {
  Vec c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Vec Matrix::apply(std::span<const double> x) const {
  if (x.size() != cols_) throw DimensionError("matrix/vector dimension mismatch");
  Vec y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Matrix Matrix::operator*(const Matrix& other) const {
  if (cols_ != other.rows_) throw DimensionError("matrix product dimension mismatch");
  Matrix r(rows_, other.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(i, k);
      for (std::size_t j = 0; j < other.cols_; ++j) r(i, j) += a * other(k, j);
    }
  return r;
}

Matrix Matrix::operator*(double s) const {
  Matrix r = *this;
  for (auto& v : r.data_) v *= s;
  return r;
}

Matrix Matrix::operator+(const Matrix& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw DimensionError("matrix sum shape mismatch");
  Matrix r = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] += other.data_[i];
  return r;
}

std::string Matrix::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < rows_; ++i) {
    if (i) os << ";";
    for (std::size_t j = 0; j < cols_; ++j) {
      if (j) os << ",";
      os << (*this)(i, j);
    }
  }
  return os.str();
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Vec add(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("add: dimension mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec sub(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("sub: dimension mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec scale(std::span<const double> a, double s) {
  Vec r(a.begin(), a.end());
  for (auto& v : r) v *= s;
  return r;
}

Vec axpy(double s, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("axpy: dimension mismatch");
  Vec r(y.begin(), y.end());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] += s * x[i];
  return r;
}

Vec singular_values(const Matrix& a) {
  // Work on the orientation with at least as many rows as columns.
  Matrix u = a.rows() >= a.cols() ? a : a.transpose();
  const std::size_t m = u.rows();
  const std::size_t n = u.cols();
  constexpr double kTol = 1e-12;
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= kTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double up = u(i, p);
          const double uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
      }
    }
    if (!rotated) break;
  }
  Vec sv(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += u(i, j) * u(i, j);
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

double smallest_singular_value(const Matrix& a) {
  if (a.cols() == 0) return 0.0;
  if (a.rows() < a.cols()) return 0.0;
  const Vec sv = singular_values(a);
  return sv.back();
}

Vec symmetric_eigenvalues(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("symmetric_eigenvalues: matrix not square");
  Matrix m = a;
  const std::size_t n = m.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(m(p, q)) < 1e-300) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m(k, p);
          const double mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m(p, k);
          const double mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
      }
    }
  }
  Vec ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = m(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

Vec least_squares(const Matrix& a, std::span<const double> b) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (b.size() != m) throw DimensionError("least_squares: rhs dimension mismatch");
  Matrix r = a;
  Vec rhs(b.begin(), b.end());
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Vec colnorm(n);
  for (std::size_t j = 0; j < n; ++j) colnorm[j] = norm2(r.col(j));
  const double scale_ref = n ? *std::max_element(colnorm.begin(), colnorm.end()) : 0.0;
  std::size_t rank = 0;
  const std::size_t steps = std::min(m, n);
  for (std::size_t k = 0; k < steps; ++k) {
    // column pivoting on remaining norms
    std::size_t best = k;
    double best_norm = -1.0;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += r(i, j) * r(i, j);
      if (s > best_norm) {
        best_norm = s;
        best = j;
      }
    }
    if (std::sqrt(best_norm) <= 1e-12 * std::max(1.0, scale_ref)) break;
    if (best != k) {
      for (std::size_t i = 0; i < m; ++i) std::swap(r(i, k), r(i, best));
      std::swap(perm[k], perm[best]);
    }
    // Householder reflector for column k
    double alpha = 0.0;
    for (std::size_t i = k; i < m; ++i) alpha += r(i, k) * r(i, k);
    alpha = std::sqrt(alpha);
    if (r(k, k) > 0) alpha = -alpha;
    Vec v(m, 0.0);
    for (std::size_t i = k; i < m; ++i) v[i] = r(i, k);
    v[k] -= alpha;
    const double vnorm2 = dot(v, v);
    if (vnorm2 > 0.0) {
      for (std::size_t j = k; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = k; i < m; ++i) s += v[i] * r(i, j);
        const double f = 2.0 * s / vnorm2;
        for (std::size_t i = k; i < m; ++i) r(i, j) -= f * v[i];
      }
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += v[i] * rhs[i];
      const double f = 2.0 * s / vnorm2;
      for (std::size_t i = k; i < m; ++i) rhs[i] -= f * v[i];
    }
    ++rank;
  }
  Vec z(n, 0.0);
  for (std::size_t kk = rank; kk-- > 0;) {
    double s = rhs[kk];
    for (std::size_t j = kk + 1; j < rank; ++j) s -= r(kk, j) * z[j];
    z[kk] = s / r(kk, kk);
  }
  Vec x(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) x[perm[j]] = z[j];
  return x;
}

namespace {

Vec solve_on_passive(const Matrix& e, std::span<const double> f, const std::vector<bool>& passive) {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < passive.size(); ++j)
    if (passive[j]) idx.push_back(j);
  Matrix sub(e.rows(), idx.size());
  for (std::size_t i = 0; i < e.rows(); ++i)
    for (std::size_t k = 0; k < idx.size(); ++k) sub(i, k) = e(i, idx[k]);
  const Vec zs = least_squares(sub, f);
  Vec z(passive.size(), 0.0);
  for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zs[k];
  return z;
}

Vec residual_gradient(const Matrix& e, std::span<const double> f, std::span<const double> x) {
  const Vec ex = e.apply(x);
  const Vec r = sub(f, ex);
  return e.transpose().apply(r);
}

}  // namespace

Vec nnls(const Matrix& e, std::span<const double> f) {
  const std::size_t n = e.cols();
  Vec x(n, 0.0);
  std::vector<bool> passive(n, false);
  double scale_ref = 0.0;
  for (std::size_t j = 0; j < n; ++j) scale_ref = std::max(scale_ref, norm2(e.col(j)));
  const double tol = 1e-12 * std::max(1.0, scale_ref) * std::max(1.0, norm2(f));
  Vec w = residual_gradient(e, f, x);
  for (std::size_t outer = 0; outer < 3 * n + 10; ++outer) {
    std::size_t t = n;
    double wmax = tol;
    for (std::size_t j = 0; j < n; ++j) {
      if (!passive[j] && w[j] > wmax) {
        wmax = w[j];
        t = j;
      }
    }
    if (t == n) break;
    passive[t] = true;
    Vec z = solve_on_passive(e, f, passive);
    for (std::size_t inner = 0; inner < 3 * n + 10; ++inner) {
      bool feasible = true;
      for (std::size_t j = 0; j < n; ++j)
        if (passive[j] && z[j] <= 0.0) feasible = false;
      if (feasible) break;
      double alpha = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (passive[j] && z[j] <= 0.0) alpha = std::min(alpha, x[j] / (x[j] - z[j]));
      for (std::size_t j = 0; j < n; ++j) x[j] += alpha * (z[j] - x[j]);
      for (std::size_t j = 0; j < n; ++j) {
        if (passive[j] && x[j] <= 1e-15) {
          passive[j] = false;
          x[j] = 0.0;
        }
      }
      z = solve_on_passive(e, f, passive);
    }
    x = z;
    for (auto& v : x) v = std::max(v, 0.0);
    w = residual_gradient(e, f, x);
  }
  return x;
}

MinNormResult wolfe_min_norm_point(const std::vector<Vec>& points) {
  if (points.empty()) throw DimensionError("wolfe_min_norm_point: empty point set");
  const std::size_t q = points.size();
  const std::size_t d = points.front().size();
  double max_sq = 0.0;
  for (const auto& p : points) max_sq = std::max(max_sq, dot(p, p));
  const double tol = 1e-13 * std::max(1.0, max_sq);

  std::size_t start = 0;
  for (std::size_t i = 1; i < q; ++i)
    if (dot(points[i], points[i]) < dot(points[start], points[start])) start = i;
  std::vector<std::size_t> active{start};
  Vec lambda{1.0};
  Vec x = points[start];
  std::size_t iter = 0;

  auto combine = [&](const std::vector<std::size_t>& idx, const Vec& wts) {
    Vec r(d, 0.0);
    for (std::size_t k = 0; k < idx.size(); ++k)
      for (std::size_t i = 0; i < d; ++i) r[i] += wts[k] * points[idx[k]][i];
    return r;
  };

  for (; iter < 50 * (q + d) + 100; ++iter) {
    std::size_t j = 0;
    double best = dot(x, points[0]);
    for (std::size_t i = 1; i < q; ++i) {
      const double v = dot(x, points[i]);
      if (v < best) {
        best = v;
        j = i;
      }
    }
    if (best >= dot(x, x) - tol) break;
    if (std::find(active.begin(), active.end(), j) != active.end()) break;
    active.push_back(j);
    lambda.push_back(0.0);

    for (std::size_t minor = 0; minor < active.size() + 5; ++minor) {
      // Affine minimizer over the active points: KKT system [G 1; 1' 0].
      const std::size_t s = active.size();
      Matrix kkt(s + 1, s + 1);
      Vec rhs(s + 1, 0.0);
      for (std::size_t a = 0; a < s; ++a) {
        for (std::size_t b = 0; b < s; ++b) kkt(a, b) = dot(points[active[a]], points[active[b]]);
        kkt(a, s) = 1.0;
        kkt(s, a) = 1.0;
      }
      rhs[s] = 1.0;
      const Vec sol = least_squares(kkt, rhs);
      Vec mu(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(s));
      const double musum = std::accumulate(mu.begin(), mu.end(), 0.0);
      if (std::abs(musum) > 0) for (auto& v : mu) v /= musum;
      bool interior = true;
      for (double v : mu)
        if (v <= 1e-14) interior = false;
      if (interior) {
        lambda = mu;
        break;
      }
      double theta = 1.0;
      for (std::size_t k = 0; k < s; ++k)
        if (mu[k] <= 1e-14) theta = std::min(theta, lambda[k] / (lambda[k] - mu[k]));
      for (std::size_t k = 0; k < s; ++k) lambda[k] += theta * (mu[k] - lambda[k]);
      std::vector<std::size_t> keep_idx;
      Vec keep_w;
      for (std::size_t k = 0; k < s; ++k) {
        if (lambda[k] > 1e-14) {
          keep_idx.push_back(active[k]);
          keep_w.push_back(lambda[k]);
        }
      }
      if (keep_idx.empty()) {
        keep_idx.push_back(active.back());
        keep_w.push_back(1.0);
      }
      const double wsum = std::accumulate(keep_w.begin(), keep_w.end(), 0.0);
      for (auto& v : keep_w) v /= wsum;
      active = keep_idx;
      lambda = keep_w;
    }
    x = combine(active, lambda);
  }
  MinNormResult res;
  res.point = x;
  res.weights.assign(q, 0.0);
  for (std::size_t k = 0; k < active.size(); ++k) res.weights[active[k]] = lambda[k];
  res.iterations = iter;
  return res;
}

ProjectionResult project_polyhedron(const Matrix& a, std::span<const double> b,
                                    std::span<const double> y) {
  const std::size_t m = a.rows();
  const std::size_t n = y.size();
  if (m == 0) return {true, Vec(y.begin(), y.end())};
  if (a.cols() != n || b.size() != m) throw DimensionError("project_polyhedron: dimension mismatch");
  // Least-distance program: min |z| s.t. -A z >= A y - b, solved via NNLS on
  // E = [G'; h'] with G = -A, h = Ay - b, f = e_{n+1}.
  const Vec ay = a.apply(y);
  Matrix e(n + 1, m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) e(i, j) = -a(j, i);
    e(n, j) = ay[j] - b[j];
  }
  Vec f(n + 1, 0.0);
  f[n] = 1.0;
  const Vec u = nnls(e, f);
  Vec r = e.apply(u);
  r[n] -= 1.0;
  if (norm2(r) <= 1e-12) return {false, {}};
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = y[i] - r[i] / r[n];
  return {true, x};
}

Vec project_cone(std::span<const double> apex, const Matrix& generators, std::span<const double> y) {
  const std::size_t n = y.size();
  if (apex.size() != n) throw DimensionError("project_cone: dimension mismatch");
  if (generators.rows() == 0) return Vec(apex.begin(), apex.end());
  if (generators.cols() != n) throw DimensionError("project_cone: generator dimension mismatch");
  const Matrix e = generators.transpose();
  const Vec f = sub(y, apex);
  const Vec mu = nnls(e, f);
  return add(apex, e.apply(mu));
}

}  // namespace subreg
