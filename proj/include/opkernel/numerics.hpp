#ifndef OPKERNEL_NUMERICS_HPP
#define OPKERNEL_NUMERICS_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include "opkernel/errors.hpp"

namespace opkernel {

using cplx = std::complex<double>;

/**
 * Dense complex matrix, row-major, double precision.
 *
 * Zero-dimensional matrices (0 rows and/or 0 columns) are legal values;
 * every operation treats them as the corresponding empty map.
 */
class CMatrix {
 public:
  CMatrix() : rows_(0), cols_(0) {}
  CMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, cplx(0.0, 0.0)) {}

  static CMatrix identity(std::size_t n);
  static CMatrix zero(std::size_t rows, std::size_t cols) {
    return CMatrix(rows, cols);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  cplx &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx &operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  const std::vector<cplx> &data() const { return data_; }
  std::vector<cplx> &data() { return data_; }

  CMatrix adjoint() const;
  CMatrix transpose() const;
  CMatrix conjugate() const;

  CMatrix operator+(const CMatrix &other) const;
  CMatrix operator-(const CMatrix &other) const;
  CMatrix operator*(const CMatrix &other) const;
  CMatrix operator*(cplx scalar) const;
  CMatrix &operator+=(const CMatrix &other);
  CMatrix &operator-=(const CMatrix &other);

  /// Horizontal slice of columns [begin, begin+count).
  CMatrix columns(std::size_t begin, std::size_t count) const;
  /// Paste `block` with its (0,0) entry at (r0, c0).
  void set_block(std::size_t r0, std::size_t c0, const CMatrix &block);
  CMatrix block(std::size_t r0, std::size_t c0, std::size_t rows,
                std::size_t cols) const;

  double frobenius_norm() const;
  double max_abs() const;
  cplx trace() const;
  bool is_finite() const;
  bool same_shape(const CMatrix &other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<cplx> data_;
};

inline CMatrix operator*(cplx scalar, const CMatrix &m) { return m * scalar; }

/**
 * Residual thresholds.  The effective threshold for a Hermitian matrix H is
 * max(abs_floor, rel_eps * spectral_norm(H)).
 */
struct Tolerance {
  double rel_eps = 1e-9;
  double abs_floor = 1e-12;

  double threshold(double scale) const {
    double t = rel_eps * scale;
    return t > abs_floor ? t : abs_floor;
  }
};

struct EigResult {
  std::vector<double> eigenvalues;  // ascending
  CMatrix vectors;                  // unitary, eigenvectors in columns
};

/**
 * Eigendecomposition of a Hermitian matrix (Householder tridiagonalization
 * followed by implicit-shift QL).
 *
 * Deterministic output convention: eigenvalues ascending; each eigenvector is
 * scaled so that its first entry of largest modulus is real and nonnegative.
 * Throws NotHermitian when the asymmetry of H exceeds the tolerance
 * threshold, NonFinite on NaN/Inf entries.
 */
EigResult eig_hermitian(const CMatrix &h, const Tolerance &tol = Tolerance{});

/**
 * Rank-revealing factorization H = L^* L of a PSD matrix, rows(L) = eps-rank.
 * Eigenvalues in (-threshold, threshold] are clipped to zero; an eigenvalue
 * below -threshold raises NotPSD.
 */
CMatrix psd_factor(const CMatrix &h, const Tolerance &tol = Tolerance{});

/// Kronecker product (row-major convention).
CMatrix kron(const CMatrix &a, const CMatrix &b);

/// Row-major vectorization: vec(A) stacks the rows of A into a column.
CMatrix vec(const CMatrix &a);
CMatrix unvec(const CMatrix &v, std::size_t rows, std::size_t cols);

/// Solve A X = B for general square A by LU with partial pivoting.
CMatrix solve_lu(CMatrix a, CMatrix b);

/// Solve A X = B for Hermitian positive-definite A (Cholesky).
CMatrix solve_hpd(CMatrix a, CMatrix b);

/**
 * Right pseudo-inverse M^+ = M^* (M M^*)^{-1} of a full-row-rank matrix,
 * so that M M^+ = I.
 */
CMatrix right_pseudo_inverse(const CMatrix &m);

/// Matrix exponential by scaling-and-squaring with the order-13 diagonal
/// Pade approximant.
CMatrix expm(const CMatrix &a);

/// Stack matrices of equal row count side by side.
CMatrix hcat(const std::vector<CMatrix> &parts);

}  // namespace opkernel

#endif
