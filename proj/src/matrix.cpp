#include "ccf/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ccf {

namespace {

[[noreturn]] void shape_error(const std::string& what) {
  throw std::invalid_argument("shape mismatch: " + what);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != m.cols_) shape_error("from_rows: ragged rows");
    std::size_t c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

bool Matrix::all_finite() const noexcept {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

bool Vector::all_finite() const noexcept {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.dim())
    shape_error("matvec " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                " * vec " + std::to_string(x.dim()));
  Vector y(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double acc = 0.0;
    const double* row = a.data() + r * a.cols();
    for (std::size_t c = 0; c < a.cols(); ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

Vector vecmat(const Vector& x, const Matrix& a) {
  if (a.rows() != x.dim())
    shape_error("vecmat vec " + std::to_string(x.dim()) + " * " + std::to_string(a.rows()) +
                "x" + std::to_string(a.cols()));
  Vector y(a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double xr = x[r];
    const double* row = a.data() + r * a.cols();
    for (std::size_t c = 0; c < a.cols(); ++c) y[c] += xr * row[c];
  }
  return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    shape_error("matmul " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                " * " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  Matrix c(a.rows(), b.cols());
  // i-k-j order: each c(i,j) still accumulates over k ascending.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* crow = c.data() + i * c.cols();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const double* brow = b.data() + k * b.cols();
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  return t;
}

void axpy(double alpha, const Vector& x, Vector& y) {
  if (x.dim() != y.dim()) shape_error("axpy dims " + std::to_string(x.dim()) + " vs " +
                                      std::to_string(y.dim()));
  for (std::size_t i = 0; i < x.dim(); ++i) y[i] += alpha * x[i];
}

void add_to_rows(Matrix& m, const Vector& b) {
  if (m.cols() != b.dim()) shape_error("add_to_rows cols vs bias dim");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double* row = m.data() + r * m.cols();
    for (std::size_t c = 0; c < m.cols(); ++c) row[c] += b[c];
  }
}

Vector column_sums(const Matrix& m) {
  Vector s(m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* row = m.data() + r * m.cols();
    for (std::size_t c = 0; c < m.cols(); ++c) s[c] += row[c];
  }
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) shape_error("squared_distance dims");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace ccf
