#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mimo {

using Cx = std::complex<double>;

/// Raised when a factorization cannot proceed (non-HPD input to a Cholesky
/// inverse, numerically singular input to an LU inverse).
class LinalgError : public std::runtime_error {
 public:
  explicit LinalgError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense row-major complex matrix.
///
/// Every matrix in this library is small (at most a few rows and columns), so
/// storage is a flat vector and all operations are straightforward loops.
/// Entries supplied at construction must be finite.
class CMat {
 public:
  CMat() = default;
  CMat(std::size_t rows, std::size_t cols);
  CMat(std::size_t rows, std::size_t cols, std::vector<Cx> entries);
  CMat(std::initializer_list<std::initializer_list<Cx>> rows);

  static CMat zeros(std::size_t rows, std::size_t cols) { return CMat(rows, cols); }
  static CMat identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  Cx& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const Cx& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<Cx> data() noexcept { return data_; }
  std::span<const Cx> data() const noexcept { return data_; }

  CMat& operator+=(const CMat& other);
  CMat& operator-=(const CMat& other);
  CMat& operator*=(Cx scale) noexcept;

  friend bool operator==(const CMat&, const CMat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Cx> data_;
};

CMat operator+(CMat a, const CMat& b);
CMat operator-(CMat a, const CMat& b);
CMat operator-(CMat a);
CMat operator*(CMat a, Cx scale);
CMat operator*(Cx scale, CMat a);

/// Matrix product. Throws std::invalid_argument when a.cols() != b.rows().
CMat matmul(const CMat& a, const CMat& b);
inline CMat operator*(const CMat& a, const CMat& b) { return matmul(a, b); }

/// Conjugate transpose.
CMat hermitian(const CMat& a);

/// Sum of the diagonal. Throws std::invalid_argument for non-square input.
Cx trace(const CMat& a);

double frob_norm(const CMat& a) noexcept;

/// True when ||a - a^H||_F <= rel_tol * max(||a||_F, 1e-300).
bool is_hermitian(const CMat& a, double rel_tol = 1e-12);

/// Inverse of a Hermitian positive definite matrix through its Cholesky
/// factor. Throws LinalgError if the input is not Hermitian or a pivot is not
/// strictly positive.
CMat inv_hpd(const CMat& a);

/// Inverse of a general square matrix by LU with partial pivoting. Throws
/// LinalgError when a pivot falls below 1e-14 * ||a||_F.
CMat inv_general(const CMat& a);

std::string to_string(const CMat& a);

}  // namespace mimo
