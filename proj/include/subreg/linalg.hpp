#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace subreg {

using Vec = std::vector<double>;

/// Dense row-major matrix for desk-scale problems.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);
  static Matrix from_rows(const std::vector<Vec>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Vec row(std::size_t i) const;
  Vec col(std::size_t j) const;
  Matrix transpose() const;
  Vec apply(std::span<const double> x) const;
  Matrix operator*(const Matrix& other) const;
  Matrix operator*(double s) const;
  Matrix operator+(const Matrix& other) const;
  bool operator==(const Matrix& other) const = default;

  /// "a,b;c,d" form, rows separated by ';'.
  std::string to_string() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
Vec add(std::span<const double> a, std::span<const double> b);
Vec sub(std::span<const double> a, std::span<const double> b);
Vec scale(std::span<const double> a, double s);
Vec axpy(double s, std::span<const double> x, std::span<const double> y);  // s*x + y

/// Singular values (descending) by one-sided Jacobi rotations, converged to 1e-12.
Vec singular_values(const Matrix& a);

/// inf_{|u|_2=1} |Au|_2; zero when A has more columns than rows.
double smallest_singular_value(const Matrix& a);

/// Eigenvalues of a symmetric matrix (ascending), cyclic Jacobi.
Vec symmetric_eigenvalues(const Matrix& a);

/// Least-squares solution of min |Ax - b|_2 by Householder QR; rank-deficient columns get zero.
Vec least_squares(const Matrix& a, std::span<const double> b);

/// Lawson-Hanson non-negative least squares: min |Ex - f|_2 subject to x >= 0.
Vec nnls(const Matrix& e, std::span<const double> f);

struct MinNormResult {
  Vec point;                // minimum-norm point of the hull
  Vec weights;              // convex weights over the input points
  std::size_t iterations = 0;
};

/// Wolfe's minimum-norm-point algorithm over conv{points}.
MinNormResult wolfe_min_norm_point(const std::vector<Vec>& points);

/// Projection of y onto {x : Ax <= b} under the Euclidean norm (least-distance
/// programming through NNLS). Returns nullopt-like empty Vec when infeasible.
struct ProjectionResult {
  bool feasible = false;
  Vec point;
};
ProjectionResult project_polyhedron(const Matrix& a, std::span<const double> b,
                                    std::span<const double> y);

/// Projection of y onto apex + cone{rows of generators}.
Vec project_cone(std::span<const double> apex, const Matrix& generators,
                 std::span<const double> y);

}  // namespace subreg
