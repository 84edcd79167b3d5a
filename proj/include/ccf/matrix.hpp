#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ccf {

// Dense row-major matrix of 64-bit floats. All products accumulate in
// ascending index order, so results are identical run to run and do not
// depend on vectorization width or threading elsewhere in the program.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  bool all_finite() const noexcept;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0) : data_(dim, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t dim() const noexcept { return data_.size(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  std::span<double> span() noexcept { return {data_.data(), data_.size()}; }
  std::span<const double> span() const noexcept { return {data_.data(), data_.size()}; }

  bool all_finite() const noexcept;

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> data_;
};

// y = A x
Vector matvec(const Matrix& a, const Vector& x);
// y = A^T x, i.e. the row vector x^T A. Same summation order as the
// corresponding rows of matmul, so single-sample and batched paths agree
// bit for bit.
Vector vecmat(const Vector& x, const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
// y += alpha * x
void axpy(double alpha, const Vector& x, Vector& y);

// Row-broadcast add: every row of m gets b added.
void add_to_rows(Matrix& m, const Vector& b);
Vector column_sums(const Matrix& m);

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace ccf
