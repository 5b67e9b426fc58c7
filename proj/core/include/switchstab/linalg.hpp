// Small dense linear algebra for desk-scale state dimensions.
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace switchstab {

using Vector = std::vector<double>;

/// Row-major dense matrix. Dimensions are fixed at construction.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);
  /// Throws std::invalid_argument on ragged input.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> data() const { return data_; }

  Matrix transposed() const;
  std::vector<std::vector<double>> to_rows() const;

  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator*(double s, const Matrix& a);
  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// out = A x. `out` must not alias `x`.
void multiply(const Matrix& a, std::span<const double> x, std::span<double> out);
Vector multiply(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> x);

/// xᵀ M x
double quadratic_form(const Matrix& m, std::span<const double> x);

/// Max absolute asymmetry |m(i,j) - m(j,i)|.
double asymmetry(const Matrix& m);

/// (M + Mᵀ) / 2
Matrix symmetrized(const Matrix& m);

/// Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
/// Off-diagonal mass is driven below `tol` times the Frobenius norm.
Vector symmetric_eigenvalues(const Matrix& m, double tol = 1e-12);

/// Lower-triangular L with P = L Lᵀ. Throws std::domain_error if P is not
/// positive definite.
Matrix cholesky(const Matrix& p);

/// L⁻¹ M L⁻ᵀ for lower-triangular nonsingular L; result is symmetrized.
Matrix congruence_by_inverse(const Matrix& l, const Matrix& m);

}  // namespace switchstab
