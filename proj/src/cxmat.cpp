#include "mimo_ppsnr/cxmat.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mimo {
namespace {

void require_same_shape(const CMat& a, const CMat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
        << b.cols();
    throw std::invalid_argument(msg.str());
  }
}

void require_square(const CMat& a, const char* op) {
  if (!a.is_square() || a.empty()) {
    std::ostringstream msg;
    msg << op << ": expected a non-empty square matrix, got " << a.rows() << "x" << a.cols();
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

CMat::CMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("CMat: dimensions must be positive");
  }
}

CMat::CMat(std::size_t rows, std::size_t cols, std::vector<Cx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("CMat: dimensions must be positive");
  }
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("CMat: entry count does not match rows*cols");
  }
  for (const Cx& z : data_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw std::invalid_argument("CMat: non-finite entry");
    }
  }
}

CMat::CMat(std::initializer_list<std::initializer_list<Cx>> rows) {
  std::vector<Cx> entries;
  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = n_rows == 0 ? 0 : rows.begin()->size();
  entries.reserve(n_rows * n_cols);
  for (const auto& row : rows) {
    if (row.size() != n_cols) {
      throw std::invalid_argument("CMat: ragged initializer");
    }
    entries.insert(entries.end(), row.begin(), row.end());
  }
  *this = CMat(n_rows, n_cols, std::move(entries));
}

CMat CMat::identity(std::size_t n) {
  CMat eye(n, n);
  for (std::size_t i = 0; i < n; ++i) eye(i, i) = 1.0;
  return eye;
}

CMat& CMat::operator+=(const CMat& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

CMat& CMat::operator-=(const CMat& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

CMat& CMat::operator*=(Cx scale) noexcept {
  for (Cx& z : data_) z *= scale;
  return *this;
}

CMat operator+(CMat a, const CMat& b) { return a += b; }
CMat operator-(CMat a, const CMat& b) { return a -= b; }
CMat operator-(CMat a) { return a *= -1.0; }
CMat operator*(CMat a, Cx scale) { return a *= scale; }
CMat operator*(Cx scale, CMat a) { return a *= scale; }

CMat matmul(const CMat& a, const CMat& b) {
  if (a.cols() != b.rows() || a.empty() || b.empty()) {
    std::ostringstream msg;
    msg << "matmul: inner dimensions differ (" << a.rows() << "x" << a.cols() << " * "
        << b.rows() << "x" << b.cols() << ")";
    throw std::invalid_argument(msg.str());
  }
  CMat out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Cx aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

CMat hermitian(const CMat& a) {
  if (a.empty()) return {};
  CMat out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
  }
  return out;
}

Cx trace(const CMat& a) {
  require_square(a, "trace");
  Cx sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) sum += a(i, i);
  return sum;
}

double frob_norm(const CMat& a) noexcept {
  double sum = 0.0;
  for (const Cx& z : a.data()) sum += std::norm(z);
  return std::sqrt(sum);
}

bool is_hermitian(const CMat& a, double rel_tol) {
  if (!a.is_square() || a.empty()) return false;
  double diff = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) diff += std::norm(a(i, j) - std::conj(a(j, i)));
  }
  return std::sqrt(diff) <= rel_tol * std::max(frob_norm(a), 1e-300);
}

CMat inv_hpd(const CMat& a) {
  require_square(a, "inv_hpd");
  if (!is_hermitian(a)) {
    throw LinalgError("inv_hpd: input is not Hermitian");
  }
  const std::size_t n = a.rows();

  // Lower-triangular Cholesky factor, a = L L^H.
  CMat l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) diag -= std::norm(l(j, k));
    if (!(diag > 0.0) || !std::isfinite(diag)) {
      throw LinalgError("inv_hpd: matrix is not positive definite (pivot " + std::to_string(j) +
                        ")");
    }
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      Cx s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }

  // L^{-1} by forward substitution, then a^{-1} = L^{-H} L^{-1}.
  CMat linv(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t i = col; i < n; ++i) {
      Cx s = (i == col) ? Cx{1.0} : Cx{0.0};
      for (std::size_t k = col; k < i; ++k) s -= l(i, k) * linv(k, col);
      linv(i, col) = s / l(i, i);
    }
  }
  CMat inv(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      Cx s = 0.0;
      for (std::size_t k = i; k < n; ++k) s += std::conj(linv(k, i)) * linv(k, j);
      inv(i, j) = s;
      inv(j, i) = std::conj(s);
    }
    inv(i, i) = inv(i, i).real();
  }
  return inv;
}

CMat inv_general(const CMat& a) {
  require_square(a, "inv_general");
  const std::size_t n = a.rows();
  const double threshold = 1e-14 * frob_norm(a);

  CMat lu = a;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu(i, k)) > best) {
        best = std::abs(lu(i, k));
        pivot = i;
      }
    }
    if (!(best > threshold)) {
      throw LinalgError("inv_general: matrix is singular to working precision");
    }
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(pivot, j));
      std::swap(perm[k], perm[pivot]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      lu(i, k) /= lu(k, k);
      const Cx factor = lu(i, k);
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= factor * lu(k, j);
    }
  }

  CMat inv(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    // Solve L U x = P e_col.
    std::vector<Cx> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      Cx s = (perm[i] == col) ? Cx{1.0} : Cx{0.0};
      for (std::size_t k = 0; k < i; ++k) s -= lu(i, k) * x[k];
      x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      Cx s = x[i];
      for (std::size_t k = i + 1; k < n; ++k) s -= lu(i, k) * x[k];
      x[i] = s / lu(i, i);
    }
    for (std::size_t i = 0; i < n; ++i) inv(i, col) = x[i];
  }
  return inv;
}

std::string to_string(const CMat& a) {
  std::ostringstream out;
  out.precision(6);
  out << "[";
  for (std::size_t i = 0; i < a.rows(); ++i) {
    out << (i ? "; " : "");
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out << (j ? ", " : "") << a(i, j).real() << (a(i, j).imag() < 0 ? "-" : "+")
          << std::abs(a(i, j).imag()) << "j";
    }
  }
  out << "]";
  return out.str();
}

}  // namespace mimo
